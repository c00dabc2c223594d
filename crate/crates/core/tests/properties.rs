//! Randomized algebraic invariants: Pauli group structure, tableau
//! conjugation, serialization round trips, angle normalization, and the
//! Richardson annihilation identities.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use cpdr_core::circuit::{normalize_angles, ParamCircuit};
use cpdr_core::mitigation::{richardson_weights, NoiseLevelSet};
use cpdr_core::pauli::{CliffordTableau, Gate, PauliWord};

fn mask(n: usize) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

prop_compose! {
    fn word(max_n: usize)(n in 1..=max_n)(
        n in Just(n),
        x in any::<u128>(),
        z in any::<u128>(),
        phase in 0u8..4,
    ) -> PauliWord {
        PauliWord::from_parts(n, x & mask(n), z & mask(n), phase).unwrap()
    }
}

prop_compose! {
    fn word_pair(max_n: usize)(n in 1..=max_n)(
        n in Just(n),
        xs in prop::array::uniform2(any::<u128>()),
        zs in prop::array::uniform2(any::<u128>()),
        phases in prop::array::uniform2(0u8..4),
    ) -> (PauliWord, PauliWord) {
        (
            PauliWord::from_parts(n, xs[0] & mask(n), zs[0] & mask(n), phases[0]).unwrap(),
            PauliWord::from_parts(n, xs[1] & mask(n), zs[1] & mask(n), phases[1]).unwrap(),
        )
    }
}

prop_compose! {
    fn word_triple(max_n: usize)(n in 1..=max_n)(
        n in Just(n),
        xs in prop::array::uniform3(any::<u128>()),
        zs in prop::array::uniform3(any::<u128>()),
        phases in prop::array::uniform3(0u8..4),
    ) -> (PauliWord, PauliWord, PauliWord) {
        (
            PauliWord::from_parts(n, xs[0] & mask(n), zs[0] & mask(n), phases[0]).unwrap(),
            PauliWord::from_parts(n, xs[1] & mask(n), zs[1] & mask(n), phases[1]).unwrap(),
            PauliWord::from_parts(n, xs[2] & mask(n), zs[2] & mask(n), phases[2]).unwrap(),
        )
    }
}

fn gate_sequence(max_n: usize, max_len: usize) -> impl Strategy<Value = (usize, Vec<Gate>)> {
    (2..=max_n).prop_flat_map(move |n| {
        let gate = (0..9usize, 0..n, 0..n.saturating_sub(1)).prop_map(move |(kind, q, raw_p)| {
            let p = if raw_p >= q { raw_p + 1 } else { raw_p };
            match kind {
                0 => Gate::H(q),
                1 => Gate::S(q),
                2 => Gate::Sdg(q),
                3 => Gate::X(q),
                4 => Gate::Y(q),
                5 => Gate::Z(q),
                6 => Gate::Cx(q, p),
                7 => Gate::Cz(q, p),
                _ => Gate::Swap(q, p),
            }
        });
        (Just(n), prop::collection::vec(gate, 1..=max_len))
    })
}

proptest! {
    #[test]
    fn multiplication_is_associative((a, b, c) in word_triple(96)) {
        let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn multiplication_matches_dense_matrices((a, b) in word_pair(4)) {
        let prod = a.multiply(&b).unwrap();
        let da = common::pauli_matrix(&a);
        let db = common::pauli_matrix(&b);
        let dp = common::pauli_matrix(&prod);
        let dense = da.mul(&db);
        for (x, y) in dense.a.iter().zip(&dp.a) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn commutation_shows_up_as_a_phase_flip((a, b) in word_pair(96)) {
        let ab = a.multiply(&b).unwrap();
        let ba = b.multiply(&a).unwrap();
        prop_assert_eq!(ab.x_mask(), ba.x_mask());
        prop_assert_eq!(ab.z_mask(), ba.z_mask());
        let rel = (ab.phase_exp() + 4 - ba.phase_exp()) % 4;
        if a.commutes(&b).unwrap() {
            prop_assert_eq!(rel, 0);
        } else {
            prop_assert_eq!(rel, 2);
        }
    }

    #[test]
    fn hermitian_split_is_consistent(w in word(96)) {
        match w.hermitian_sign() {
            Ok((sign, canon)) => {
                prop_assert!(sign == 1.0 || sign == -1.0);
                prop_assert!(canon.is_hermitian());
                prop_assert_eq!(canon.x_mask(), w.x_mask());
                prop_assert_eq!(canon.z_mask(), w.z_mask());
                // Squaring the Hermitian representative gives +identity phase.
                let sq = canon.multiply(&canon).unwrap();
                prop_assert_eq!(sq.x_mask(), 0);
                prop_assert_eq!(sq.z_mask(), 0);
                prop_assert_eq!(sq.phase_exp(), 0);
                prop_assert!(w.is_hermitian());
            }
            Err(_) => prop_assert!(!w.is_hermitian()),
        }
    }

    #[test]
    fn matrix_elements_match_the_dense_form(w in word(5)) {
        let dim = 1u128 << w.n_qubits();
        let dense = common::pauli_matrix(&w);
        for row in 0..dim {
            for col in 0..dim {
                let got = w.matrix_element(row, col);
                let want = dense.get(row as usize, col as usize);
                match got {
                    Some((re, im)) => {
                        prop_assert!((want.re - re).abs() < 1e-12);
                        prop_assert!((want.im - im).abs() < 1e-12);
                    }
                    None => prop_assert!(want.norm() == 0.0),
                }
            }
        }
    }

    #[test]
    fn display_round_trips(w in word(24)) {
        let text = w.to_string();
        let back: PauliWord = text.parse().unwrap();
        prop_assert_eq!(w, back);
    }

    #[test]
    fn tableaus_stay_symplectic_and_homomorphic(
        (n, gates) in gate_sequence(5, 16),
        raw in prop::array::uniform4(any::<u128>()),
        phases in prop::array::uniform2(0u8..4),
    ) {
        let t = CliffordTableau::from_gates(n, &gates).unwrap();
        t.validate_symplectic().unwrap();

        let a = PauliWord::from_parts(n, raw[0] & mask(n), raw[1] & mask(n), phases[0]).unwrap();
        let b = PauliWord::from_parts(n, raw[2] & mask(n), raw[3] & mask(n), phases[1]).unwrap();
        let ca = t.conjugate(&a).unwrap();
        let cb = t.conjugate(&b).unwrap();
        // Conjugation is a group homomorphism with exact phases.
        let lhs = t.conjugate(&a.multiply(&b).unwrap()).unwrap();
        let rhs = ca.multiply(&cb).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(a.commutes(&b).unwrap(), ca.commutes(&cb).unwrap());
    }

    #[test]
    fn tableau_composition_matches_gate_concatenation(
        (n, gates) in gate_sequence(4, 12),
        split in 0usize..12,
    ) {
        let cut = split.min(gates.len());
        let first = CliffordTableau::from_gates(n, &gates[..cut]).unwrap();
        let second = CliffordTableau::from_gates(n, &gates[cut..]).unwrap();
        let composed = first.then(&second).unwrap();
        let whole = CliffordTableau::from_gates(n, &gates).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(split as u64);
        for _ in 0..4 {
            let w = common::random_word(&mut rng, n);
            prop_assert_eq!(
                composed.conjugate(&w).unwrap(),
                whole.conjugate(&w).unwrap()
            );
        }
    }

    #[test]
    fn circuits_round_trip_through_json(seed in any::<u64>()) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let n = 1 + (seed % 4) as usize;
        let c = common::random_circuit(&mut rng, n, 3, std::f64::consts::PI);
        let json = c.to_json().unwrap();
        let back = ParamCircuit::from_json(&json).unwrap();
        prop_assert_eq!(c, back);
    }

    #[test]
    fn normalized_angles_land_in_the_quarter_window(seed in any::<u64>()) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let n = 1 + (seed % 3) as usize;
        let c = common::random_circuit(&mut rng, n, 4, std::f64::consts::PI);
        let norm = normalize_angles(&c).unwrap();
        prop_assert_eq!(norm.depth(), c.depth());
        for layer in norm.layers() {
            let a = layer.angle();
            prop_assert!(a > -std::f64::consts::FRAC_PI_4 && a <= std::f64::consts::FRAC_PI_4 + 1e-15);
        }
        // Idempotent: a second pass changes nothing.
        let twice = normalize_angles(&norm).unwrap();
        let first: Vec<f64> = norm.angles();
        let second: Vec<f64> = twice.angles();
        for (x, y) in first.iter().zip(&second) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn richardson_annihilates_low_powers(
        increments in prop::collection::vec(0.05f64..1.5, 0..4),
    ) {
        let mut levels = vec![1.0];
        for inc in increments {
            let next = levels.last().unwrap() + inc;
            levels.push(next);
        }
        let set = NoiseLevelSet::new(levels.clone()).unwrap();
        let w = richardson_weights(&set);
        let s0: f64 = w.iter().sum();
        prop_assert!((s0 - 1.0).abs() < 1e-8, "sum {} != 1", s0);
        for k in 1..levels.len() {
            let s: f64 = w.iter().zip(&levels).map(|(wi, li)| wi * li.powi(k as i32)).sum();
            prop_assert!(s.abs() < 1e-7, "power {} residual {}", k, s);
        }
    }
}
