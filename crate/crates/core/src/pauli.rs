//! Bit-packed Pauli words and Clifford conjugation tableaus.
//!
//! A word stores one X bit and one Z bit per qubit plus a power of i, so the
//! operator is `i^phase_exp * prod_q X_q^{x_q} Z_q^{z_q}` with the X factor to
//! the left of the Z factor on each qubit. Products, commutation checks, and
//! Clifford conjugation all reduce to mask arithmetic on `u128`, which caps the
//! register width at 128 qubits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Widest register the packed representation supports.
pub const MAX_QUBITS: usize = 128;

/// A Pauli operator `i^phase_exp * prod_q X_q^{x_q} Z_q^{z_q}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliWord {
    n_qubits: usize,
    x: u128,
    z: u128,
    phase_exp: u8,
}

impl PauliWord {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        Self::from_parts(n_qubits, 0, 0, 0)
    }

    pub fn from_parts(n_qubits: usize, x: u128, z: u128, phase_exp: u8) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                n_qubits,
                max: MAX_QUBITS,
            });
        }
        let mask = mask_for(n_qubits);
        if x & !mask != 0 || z & !mask != 0 {
            return Err(Error::QubitOutOfRange {
                index: (127 - (((x | z) & !mask).leading_zeros() as usize)),
                n_qubits,
            });
        }
        Ok(PauliWord {
            n_qubits,
            x,
            z,
            phase_exp: phase_exp % 4,
        })
    }

    /// Single-qubit X on `qubit`, identity elsewhere.
    pub fn single_x(n_qubits: usize, qubit: usize) -> Result<Self> {
        check_qubit(qubit, n_qubits)?;
        Self::from_parts(n_qubits, 1 << qubit, 0, 0)
    }

    /// Single-qubit Z on `qubit`, identity elsewhere.
    pub fn single_z(n_qubits: usize, qubit: usize) -> Result<Self> {
        check_qubit(qubit, n_qubits)?;
        Self::from_parts(n_qubits, 0, 1 << qubit, 0)
    }

    /// Single-qubit Y on `qubit`: the Hermitian word `i * X Z`.
    pub fn single_y(n_qubits: usize, qubit: usize) -> Result<Self> {
        check_qubit(qubit, n_qubits)?;
        Self::from_parts(n_qubits, 1 << qubit, 1 << qubit, 1)
    }

    /// Z on each qubit of `(a, b)`; the two-qubit coupling axis.
    pub fn zz(n_qubits: usize, a: usize, b: usize) -> Result<Self> {
        check_qubit(a, n_qubits)?;
        check_qubit(b, n_qubits)?;
        if a == b {
            return Err(Error::InvalidAxis {
                reason: format!("ZZ axis needs two distinct qubits, got ({a}, {b})"),
            });
        }
        Self::from_parts(n_qubits, 0, (1 << a) | (1 << b), 0)
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn x_mask(&self) -> u128 {
        self.x
    }

    #[inline]
    pub fn z_mask(&self) -> u128 {
        self.z
    }

    #[inline]
    pub fn phase_exp(&self) -> u8 {
        self.phase_exp
    }

    #[inline]
    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity sites.
    #[inline]
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    #[inline]
    pub fn support(&self) -> u128 {
        self.x | self.z
    }

    /// Product `self * other` with exact phase tracking.
    pub fn multiply(&self, other: &PauliWord) -> Result<PauliWord> {
        check_same_width(self, other)?;
        Ok(self.mul_unchecked(other))
    }

    #[inline]
    pub(crate) fn mul_unchecked(&self, other: &PauliWord) -> PauliWord {
        // Moving Z^{z_a} past X^{x_b} contributes (-1) per overlapping site.
        let swap_sign = 2 * ((self.z & other.x).count_ones() as u8 & 1);
        PauliWord {
            n_qubits: self.n_qubits,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase_exp: (self.phase_exp + other.phase_exp + swap_sign) % 4,
        }
    }

    /// True when `self` and `other` commute (symplectic product is even).
    pub fn commutes(&self, other: &PauliWord) -> Result<bool> {
        check_same_width(self, other)?;
        Ok(self.commutes_unchecked(other))
    }

    #[inline]
    pub(crate) fn commutes_unchecked(&self, other: &PauliWord) -> bool {
        let sym = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        sym % 2 == 0
    }

    /// Phase exponent of the Hermitian representative with the same masks.
    #[inline]
    pub(crate) fn hermitian_phase(&self) -> u8 {
        ((self.x & self.z).count_ones() % 4) as u8
    }

    /// Split into a real sign and the Hermitian word with the same masks.
    ///
    /// Fails when the word equals `+-i` times a Hermitian operator, which has
    /// no real-signed representative.
    pub fn hermitian_sign(&self) -> Result<(f64, PauliWord)> {
        let canon = self.hermitian_phase();
        let rel = (self.phase_exp + 4 - canon) % 4;
        let sign = match rel {
            0 => 1.0,
            2 => -1.0,
            _ => {
                return Err(Error::NonHermitianTerm {
                    term: self.to_string(),
                })
            }
        };
        Ok((
            sign,
            PauliWord {
                phase_exp: canon,
                ..*self
            },
        ))
    }

    pub fn is_hermitian(&self) -> bool {
        (self.phase_exp + 4 - self.hermitian_phase()) % 4 % 2 == 0
    }

    /// Matrix element `<row| P |col>`; zero unless `row == col ^ x_mask`.
    pub fn matrix_element(&self, row: u128, col: u128) -> Option<(f64, f64)> {
        if row != col ^ self.x {
            return None;
        }
        let mut phase = self.phase_exp;
        if (self.z & col).count_ones() % 2 == 1 {
            phase = (phase + 2) % 4;
        }
        Some(match phase {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        })
    }
}

fn check_qubit(index: usize, n_qubits: usize) -> Result<()> {
    if index >= n_qubits {
        return Err(Error::QubitOutOfRange { index, n_qubits });
    }
    Ok(())
}

fn check_same_width(a: &PauliWord, b: &PauliWord) -> Result<()> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::SizeMismatch {
            left: a.n_qubits,
            right: b.n_qubits,
        });
    }
    Ok(())
}

#[inline]
fn mask_for(n_qubits: usize) -> u128 {
    if n_qubits >= 128 {
        u128::MAX
    } else {
        (1u128 << n_qubits) - 1
    }
}

impl fmt::Display for PauliWord {
    /// Text form: sign/phase prefix then one letter per qubit, qubit 0 leftmost.
    /// A site with both bits set prints as `Y`, so the prefix is relative to
    /// the Hermitian representative, e.g. `+XIZY`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = (self.phase_exp + 4 - self.hermitian_phase()) % 4;
        f.write_str(match rel {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        })?;
        for q in 0..self.n_qubits {
            let x = (self.x >> q) & 1;
            let z = (self.z >> q) & 1;
            f.write_str(match (x, z) {
                (0, 0) => "I",
                (1, 0) => "X",
                (0, 1) => "Z",
                _ => "Y",
            })?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliWord({self})")
    }
}

impl FromStr for PauliWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (prefix_rel, rest) = if let Some(r) = s.strip_prefix("+i") {
            (1u8, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3u8, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (1u8, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0u8, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2u8, r)
        } else {
            (0u8, s)
        };
        if rest.is_empty() {
            return Err(Error::parse("empty Pauli letter string"));
        }
        if rest.len() > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                n_qubits: rest.len(),
                max: MAX_QUBITS,
            });
        }
        let mut x = 0u128;
        let mut z = 0u128;
        for (q, c) in rest.chars().enumerate() {
            match c {
                'I' | 'i' => {}
                'X' | 'x' => x |= 1 << q,
                'Z' | 'z' => z |= 1 << q,
                'Y' | 'y' => {
                    x |= 1 << q;
                    z |= 1 << q;
                }
                _ => {
                    return Err(Error::parse(format!(
                        "invalid Pauli letter {c:?} in {s:?}"
                    )))
                }
            }
        }
        let canon = ((x & z).count_ones() % 4) as u8;
        PauliWord::from_parts(rest.len(), x, z, (canon + prefix_rel) % 4)
    }
}

impl Serialize for PauliWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliWord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A real-weighted sum of Hermitian Pauli words on a fixed register.
///
/// Terms are canonicalized on construction: any `-` sign on a word is folded
/// into its weight, and words that are not Hermitian up to a real sign are
/// rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    n_qubits: usize,
    terms: Vec<(f64, PauliWord)>,
}

impl Observable {
    pub fn new(n_qubits: usize, terms: Vec<(f64, PauliWord)>) -> Result<Self> {
        let mut canon = Vec::with_capacity(terms.len());
        for (weight, word) in terms {
            if word.n_qubits() != n_qubits {
                return Err(Error::SizeMismatch {
                    left: word.n_qubits(),
                    right: n_qubits,
                });
            }
            if !weight.is_finite() {
                return Err(Error::parse(format!("non-finite weight {weight}")));
            }
            let (sign, word) = word.hermitian_sign()?;
            canon.push((sign * weight, word));
        }
        Ok(Observable {
            n_qubits,
            terms: canon,
        })
    }

    /// A single Pauli word with unit weight.
    pub fn single(word: PauliWord) -> Result<Self> {
        Self::new(word.n_qubits(), vec![(1.0, word)])
    }

    /// `sum_q Z_q / n`: the mean-magnetization observable.
    pub fn magnetization_z(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::EmptyGrid {
                reason: "magnetization needs at least one qubit".into(),
            });
        }
        let w = 1.0 / n_qubits as f64;
        let terms = (0..n_qubits)
            .map(|q| Ok((w, PauliWord::single_z(n_qubits, q)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n_qubits, terms)
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn terms(&self) -> &[(f64, PauliWord)] {
        &self.terms
    }

    /// Sum of absolute weights; an upper bound on the expectation magnitude.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|(w, _)| w.abs()).sum()
    }
}

/// Named Clifford gates. Two-qubit variants list (control, target) or the
/// swapped pair; indices are validated against the register width when a
/// tableau or circuit absorbs the gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cx(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::Sdg(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => {
                (q, None)
            }
            Gate::Cx(a, b) | Gate::Cz(a, b) | Gate::Swap(a, b) => (a, Some(b)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::S(_) => "S",
            Gate::Sdg(_) => "SDG",
            Gate::X(_) => "X",
            Gate::Y(_) => "Y",
            Gate::Z(_) => "Z",
            Gate::Cx(..) => "CX",
            Gate::Cz(..) => "CZ",
            Gate::Swap(..) => "SWAP",
        }
    }

    pub fn from_name(name: &str, qubits: &[usize]) -> Result<Self> {
        let one = |qs: &[usize]| -> Result<usize> {
            match qs {
                [q] => Ok(*q),
                _ => Err(Error::parse(format!(
                    "gate {name} takes 1 qubit, got {}",
                    qs.len()
                ))),
            }
        };
        let two = |qs: &[usize]| -> Result<(usize, usize)> {
            match qs {
                [a, b] if a != b => Ok((*a, *b)),
                [a, b] => Err(Error::parse(format!("gate {name} qubits must differ, got ({a}, {b})"))),
                _ => Err(Error::parse(format!(
                    "gate {name} takes 2 qubits, got {}",
                    qs.len()
                ))),
            }
        };
        Ok(match name.to_ascii_uppercase().as_str() {
            "H" => Gate::H(one(qubits)?),
            "S" => Gate::S(one(qubits)?),
            "SDG" => Gate::Sdg(one(qubits)?),
            "X" => Gate::X(one(qubits)?),
            "Y" => Gate::Y(one(qubits)?),
            "Z" => Gate::Z(one(qubits)?),
            "CX" => {
                let (a, b) = two(qubits)?;
                Gate::Cx(a, b)
            }
            "CZ" => {
                let (a, b) = two(qubits)?;
                Gate::Cz(a, b)
            }
            "SWAP" => {
                let (a, b) = two(qubits)?;
                Gate::Swap(a, b)
            }
            other => return Err(Error::parse(format!("unknown gate {other:?}"))),
        })
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let (a, b) = self.qubits();
        check_qubit(a, n_qubits)?;
        if let Some(b) = b {
            check_qubit(b, n_qubits)?;
        }
        Ok(())
    }
}

/// Generator images of a Clifford unitary `C` under `P -> C^dag P C`.
///
/// Built only through gate application or Pauli rotations, so the images stay
/// symplectically valid by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliffordTableau {
    n_qubits: usize,
    image_x: Vec<PauliWord>,
    image_z: Vec<PauliWord>,
}

impl CliffordTableau {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                n_qubits,
                max: MAX_QUBITS,
            });
        }
        let image_x = (0..n_qubits)
            .map(|q| PauliWord::single_x(n_qubits, q).expect("checked width"))
            .collect();
        let image_z = (0..n_qubits)
            .map(|q| PauliWord::single_z(n_qubits, q).expect("checked width"))
            .collect();
        Ok(CliffordTableau {
            n_qubits,
            image_x,
            image_z,
        })
    }

    pub fn from_gates(n_qubits: usize, gates: &[Gate]) -> Result<Self> {
        let mut t = Self::identity(n_qubits)?;
        for g in gates {
            t.apply_gate(*g)?;
        }
        Ok(t)
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn is_identity(&self) -> bool {
        self.image_x
            .iter()
            .enumerate()
            .all(|(q, w)| w.x == 1 << q && w.z == 0 && w.phase_exp == 0)
            && self
                .image_z
                .iter()
                .enumerate()
                .all(|(q, w)| w.z == 1 << q && w.x == 0 && w.phase_exp == 0)
    }

    pub fn image_x(&self, qubit: usize) -> Result<&PauliWord> {
        check_qubit(qubit, self.n_qubits)?;
        Ok(&self.image_x[qubit])
    }

    pub fn image_z(&self, qubit: usize) -> Result<&PauliWord> {
        check_qubit(qubit, self.n_qubits)?;
        Ok(&self.image_z[qubit])
    }

    /// Exact conjugation `C^dag p C`, sign included.
    pub fn conjugate(&self, p: &PauliWord) -> Result<PauliWord> {
        if p.n_qubits != self.n_qubits {
            return Err(Error::SizeMismatch {
                left: p.n_qubits,
                right: self.n_qubits,
            });
        }
        Ok(self.conjugate_unchecked(p))
    }

    pub(crate) fn conjugate_unchecked(&self, p: &PauliWord) -> PauliWord {
        let mut acc = PauliWord {
            n_qubits: self.n_qubits,
            x: 0,
            z: 0,
            phase_exp: p.phase_exp,
        };
        let mut rem = p.x | p.z;
        while rem != 0 {
            let q = rem.trailing_zeros() as usize;
            if (p.x >> q) & 1 == 1 {
                acc = acc.mul_unchecked(&self.image_x[q]);
            }
            if (p.z >> q) & 1 == 1 {
                acc = acc.mul_unchecked(&self.image_z[q]);
            }
            rem &= rem - 1;
        }
        acc
    }

    /// Tableau of `self` followed in time by `later`, so that
    /// `conjugate(self.then(later), p) == conjugate(self, conjugate(later, p))`.
    pub fn then(&self, later: &CliffordTableau) -> Result<CliffordTableau> {
        if self.n_qubits != later.n_qubits {
            return Err(Error::SizeMismatch {
                left: self.n_qubits,
                right: later.n_qubits,
            });
        }
        let image_x = later
            .image_x
            .iter()
            .map(|w| self.conjugate_unchecked(w))
            .collect();
        let image_z = later
            .image_z
            .iter()
            .map(|w| self.conjugate_unchecked(w))
            .collect();
        Ok(CliffordTableau {
            n_qubits: self.n_qubits,
            image_x,
            image_z,
        })
    }

    /// Append a named gate after the circuit represented so far.
    pub fn apply_gate(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        let n = self.n_qubits;
        let word = |x: u128, z: u128, phase: u8| PauliWord {
            n_qubits: n,
            x,
            z,
            phase_exp: phase,
        };
        let bx = |q: usize| 1u128 << q;
        // Images of the touched generators under g^dag P g, written in the
        // original basis, then pushed through the existing tableau.
        let updates: Vec<(bool, usize, PauliWord)> = match gate {
            Gate::H(q) => vec![
                (true, q, word(0, bx(q), 0)),
                (false, q, word(bx(q), 0, 0)),
            ],
            // S^dag X S = -Y, S^dag Z S = Z.
            Gate::S(q) => vec![(true, q, word(bx(q), bx(q), 3))],
            // S X S^dag = Y.
            Gate::Sdg(q) => vec![(true, q, word(bx(q), bx(q), 1))],
            Gate::X(q) => vec![(false, q, word(0, bx(q), 2))],
            Gate::Y(q) => vec![
                (true, q, word(bx(q), 0, 2)),
                (false, q, word(0, bx(q), 2)),
            ],
            Gate::Z(q) => vec![(true, q, word(bx(q), 0, 2))],
            Gate::Cx(c, t) => vec![
                (true, c, word(bx(c) | bx(t), 0, 0)),
                (false, t, word(0, bx(c) | bx(t), 0)),
            ],
            Gate::Cz(c, t) => vec![
                (true, c, word(bx(c), bx(t), 0)),
                (true, t, word(bx(t), bx(c), 0)),
            ],
            Gate::Swap(a, b) => vec![
                (true, a, word(bx(b), 0, 0)),
                (true, b, word(bx(a), 0, 0)),
                (false, a, word(0, bx(b), 0)),
                (false, b, word(0, bx(a), 0)),
            ],
        };
        let resolved: Vec<(bool, usize, PauliWord)> = updates
            .into_iter()
            .map(|(is_x, q, w)| (is_x, q, self.conjugate_unchecked(&w)))
            .collect();
        for (is_x, q, w) in resolved {
            if is_x {
                self.image_x[q] = w;
            } else {
                self.image_z[q] = w;
            }
        }
        Ok(())
    }

    /// Append the quarter-turn rotation `exp(-i k pi/4 * axis)` after the
    /// circuit represented so far. `axis` must be Hermitian with a `+` sign;
    /// `quarter_turns` is taken mod 4 (a half turn is a global phase).
    pub fn apply_pauli_rot(&mut self, axis: &PauliWord, quarter_turns: u8) -> Result<()> {
        if axis.n_qubits != self.n_qubits {
            return Err(Error::SizeMismatch {
                left: axis.n_qubits,
                right: self.n_qubits,
            });
        }
        if axis.is_identity() {
            return Err(Error::InvalidAxis {
                reason: "rotation axis must not be the identity".into(),
            });
        }
        let (sign, axis) = axis.hermitian_sign()?;
        if sign < 0.0 {
            return Err(Error::InvalidAxis {
                reason: "rotation axis must carry a + sign".into(),
            });
        }
        let k = quarter_turns % 4;
        if k == 0 {
            return Ok(());
        }
        let n = self.n_qubits;
        let mut updates: Vec<(bool, usize, PauliWord)> = Vec::new();
        let mut rem = axis.support();
        while rem != 0 {
            let q = rem.trailing_zeros() as usize;
            rem &= rem - 1;
            for is_x in [true, false] {
                let gen = if is_x {
                    PauliWord::single_x(n, q).expect("in range")
                } else {
                    PauliWord::single_z(n, q).expect("in range")
                };
                if gen.commutes_unchecked(&axis) {
                    continue;
                }
                // K^dag g K = cos(k pi/2) g + i sin(k pi/2) A g for {g, A} = 0.
                let img = match k {
                    1 => {
                        let mut w = axis.mul_unchecked(&gen);
                        w.phase_exp = (w.phase_exp + 1) % 4;
                        w
                    }
                    2 => PauliWord {
                        phase_exp: (gen.phase_exp + 2) % 4,
                        ..gen
                    },
                    _ => {
                        let mut w = axis.mul_unchecked(&gen);
                        w.phase_exp = (w.phase_exp + 3) % 4;
                        w
                    }
                };
                updates.push((is_x, q, self.conjugate_unchecked(&img)));
            }
        }
        for (is_x, q, w) in updates {
            if is_x {
                self.image_x[q] = w;
            } else {
                self.image_z[q] = w;
            }
        }
        Ok(())
    }

    /// Check the symplectic relations among the generator images.
    pub fn validate_symplectic(&self) -> Result<()> {
        for a in 0..self.n_qubits {
            if !self.image_x[a].is_hermitian() || !self.image_z[a].is_hermitian() {
                return Err(Error::InvalidCircuit {
                    reason: format!("tableau image on qubit {a} is not Hermitian"),
                });
            }
            for b in 0..self.n_qubits {
                let xz = self.image_x[a].commutes_unchecked(&self.image_z[b]);
                if xz != (a != b) {
                    return Err(Error::InvalidCircuit {
                        reason: format!("X{a}/Z{b} image commutation is wrong"),
                    });
                }
                if !self.image_x[a].commutes_unchecked(&self.image_x[b])
                    || !self.image_z[a].commutes_unchecked(&self.image_z[b])
                {
                    return Err(Error::InvalidCircuit {
                        reason: format!("like-generator images {a}/{b} must commute"),
                    });
                }
            }
        }
        Ok(())
    }
}
