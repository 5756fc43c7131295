//! Pauli words and real linear combinations of them.
//!
//! A word on `n` qubits is stored in symplectic form as an X mask and a Z mask,
//! bit `i` of each mask referring to qubit `i`. The letter on a qubit is
//! `I` (0,0), `X` (1,0), `Z` (0,1) or `Y` (1,1), and the word denotes the
//! Hermitian operator `i^{#Y} X^x Z^z`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{QetError, Result};

/// Largest register a Pauli word can address.
pub const MAX_WORD_QUBITS: usize = 64;

/// Coefficients smaller than this are dropped when canonicalizing.
pub const COEFF_EPS: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Z => (false, true),
            Pauli::Y => (true, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of single-qubit Pauli operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_WORD_QUBITS {
            return Err(QetError::InvalidParameter(format!(
                "word size must be in 1..={MAX_WORD_QUBITS}, got {n_qubits}"
            )));
        }
        Ok(Self {
            n_qubits,
            x: 0,
            z: 0,
        })
    }

    pub fn from_letters(letters: &[Pauli]) -> Result<Self> {
        let mut word = Self::identity(letters.len())?;
        for (q, &p) in letters.iter().enumerate() {
            word.set(q, p);
        }
        Ok(word)
    }

    /// Word with `pauli` on `qubit` and identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, pauli: Pauli) -> Result<Self> {
        Self::from_sites(n_qubits, &[(qubit, pauli)])
    }

    pub fn from_sites(n_qubits: usize, sites: &[(usize, Pauli)]) -> Result<Self> {
        let mut word = Self::identity(n_qubits)?;
        for &(q, p) in sites {
            if q >= n_qubits {
                return Err(QetError::InvalidParameter(format!(
                    "qubit {q} out of range for {n_qubits}-qubit word"
                )));
            }
            word.set(q, p);
        }
        Ok(word)
    }

    fn set(&mut self, qubit: usize, p: Pauli) {
        let (x, z) = p.bits();
        let bit = 1u64 << qubit;
        self.x = (self.x & !bit) | if x { bit } else { 0 };
        self.z = (self.z & !bit) | if z { bit } else { 0 };
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n_qubits).map(|q| self.letter(q)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Qubits carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n_qubits)
            .filter(|&q| (self.x | self.z) >> q & 1 == 1)
            .collect()
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    /// Number of `Y` letters.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    pub(crate) fn check_size(&self, n_qubits: usize) -> Result<()> {
        if self.n_qubits != n_qubits {
            return Err(QetError::DimensionMismatch {
                expected: n_qubits,
                found: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Product `self * other = i^k * word`, returned as `(k mod 4, word)`.
    pub fn mul(&self, other: &Self) -> Result<(u8, Self)> {
        other.check_size(self.n_qubits)?;
        let word = Self {
            n_qubits: self.n_qubits,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        // i^{y1+y2-y3} (-1)^{|z1 & x2|} from moving Z^{z1} past X^{x2}.
        let sign = 2 * ((self.z & other.x).count_ones() % 2);
        let k =
            self.y_count() as i64 + other.y_count() as i64 - word.y_count() as i64 + sign as i64;
        Ok((k.rem_euclid(4) as u8, word))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = QetError;

    /// Parses a dense word such as `XIZY`, qubit 0 first.
    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .trim()
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(QetError::Parse(format!("invalid Pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_letters(&letters)
    }
}

/// Hermitian operator `offset * I + sum_k c_k P_k` with real coefficients.
///
/// Terms are kept merged and sorted, so two sums denoting the same operator
/// compare equal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, f64>,
    offset: f64,
}

impl ObservableSum {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        PauliString::identity(n_qubits)?;
        Ok(Self {
            n_qubits,
            terms: BTreeMap::new(),
            offset: 0.0,
        })
    }

    pub fn constant(n_qubits: usize, offset: f64) -> Result<Self> {
        let mut obs = Self::zero(n_qubits)?;
        obs.offset = offset;
        Ok(obs)
    }

    pub fn from_term(coeff: f64, word: PauliString) -> Self {
        let mut obs = Self {
            n_qubits: word.n_qubits(),
            terms: BTreeMap::new(),
            offset: 0.0,
        };
        obs.push(coeff, word);
        obs
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I, offset: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, PauliString)>,
    {
        let mut obs = Self::constant(n_qubits, offset)?;
        for (c, w) in terms {
            obs.add_term(c, w)?;
        }
        Ok(obs)
    }

    pub fn add_term(&mut self, coeff: f64, word: PauliString) -> Result<()> {
        word.check_size(self.n_qubits)?;
        self.push(coeff, word);
        Ok(())
    }

    fn push(&mut self, coeff: f64, word: PauliString) {
        if word.is_identity() {
            self.offset += coeff;
            return;
        }
        let entry = self.terms.entry(word).or_insert(0.0);
        *entry += coeff;
        if entry.abs() < COEFF_EPS {
            self.terms.remove(&word);
        }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn terms(&self) -> impl Iterator<Item = (f64, &PauliString)> + '_ {
        self.terms.iter().map(|(w, &c)| (c, w))
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, word: &PauliString) -> f64 {
        self.terms.get(word).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.offset.abs() < COEFF_EPS
    }

    /// Same operator with the identity component removed.
    pub fn pauli_part(&self) -> Self {
        Self {
            offset: 0.0,
            ..self.clone()
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = Self {
            n_qubits: self.n_qubits,
            terms: BTreeMap::new(),
            offset: self.offset * factor,
        };
        for (c, w) in self.terms() {
            out.push(c * factor, *w);
        }
        out
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if other.n_qubits != self.n_qubits {
            return Err(QetError::DimensionMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        let mut out = self.clone();
        out.offset += other.offset;
        for (c, w) in other.terms() {
            out.push(c, *w);
        }
        Ok(out)
    }

    /// Largest coefficient difference between two sums, offset included.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let diff = self.try_add(&other.scaled(-1.0))?;
        Ok(diff
            .terms()
            .map(|(c, _)| c.abs())
            .fold(diff.offset.abs(), f64::max))
    }

    /// True when every word is built from `I` and the given letter only.
    pub fn is_diagonal_in(&self, letter: Pauli) -> bool {
        self.terms
            .keys()
            .all(|w| w.letters().iter().all(|&p| p == Pauli::I || p == letter))
    }
}

impl fmt::Display for ObservableSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.offset)?;
        for (c, w) in self.terms() {
            write!(f, " {:+}*{}", c, w)?;
        }
        Ok(())
    }
}

/// Heisenberg derivative `i[H, sigma]` of a Pauli word.
///
/// The offset of `H` drops out. Each anticommuting term `cP` contributes
/// `2ic P sigma`, which is real because `P sigma` is `±i` times a word.
pub fn heisenberg_derivative(h: &ObservableSum, sigma: &PauliString) -> Result<ObservableSum> {
    sigma.check_size(h.n_qubits())?;
    let mut out = ObservableSum::zero(h.n_qubits())?;
    for (c, p) in h.terms() {
        if p.commutes_with(sigma) {
            continue;
        }
        let (k, word) = p.mul(sigma)?;
        // 2i * c * i^k with k odd: i^1 -> -2c, i^3 -> +2c
        let coeff = match k {
            1 => -2.0 * c,
            3 => 2.0 * c,
            _ => unreachable!("anticommuting Pauli product has odd phase"),
        };
        out.add_term(coeff, word)?;
    }
    Ok(out)
}
