//! Statevectors, probabilistic ensembles of them, and the exact kernel acting
//! on both.
//!
//! Qubit ordering: qubit `q` is bit `q` of the amplitude index (qubit 0 is
//! the least significant bit). Kets are written with qubit 0 first, so
//! `|10>` on two qubits is index 1.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QetError, Result};
use crate::pauli::{ObservableSum, PauliString};

/// Largest register any state or dense operator may occupy.
pub const MAX_QUBITS: usize = 14;

pub const NORM_TOL: f64 = 1e-12;

/// Imaginary residue tolerated in an expectation before rejecting it.
pub const IMAG_TOL: f64 = 1e-10;

/// Branches below this probability are discarded after a measurement.
pub const BRANCH_EPS: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub(crate) fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => I,
        2 => Complex64::new(-1.0, 0.0),
        _ => -I,
    }
}

pub(crate) fn check_capacity(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(QetError::CapacityExceeded {
            requested: n_qubits,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Normalized pure state of `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_capacity(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(QetError::InvalidParameter(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps amplitudes that must already be normalized.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self::unchecked(amplitudes)?;
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QetError::InvalidParameter(format!(
                "amplitudes have squared norm {norm}, expected 1"
            )));
        }
        Ok(state)
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let mut state = Self::unchecked(amplitudes)?;
        let norm = state.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QetError::InvalidParameter(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        state.amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(state)
    }

    fn unchecked(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(QetError::InvalidParameter(format!(
                "amplitude count {dim} is not a power of two"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_capacity(n_qubits)?;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_size(other.n_qubits)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|`, insensitive to global phase.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    fn check_size(&self, n_qubits: usize) -> Result<()> {
        if self.n_qubits != n_qubits {
            return Err(QetError::DimensionMismatch {
                expected: self.n_qubits,
                found: n_qubits,
            });
        }
        Ok(())
    }

    /// Raw `word |psi>` without wrapping into a state.
    pub(crate) fn pauli_image(&self, word: &PauliString) -> Vec<Complex64> {
        let (x, z) = (word.x_mask() as usize, word.z_mask() as usize);
        let phase = i_pow(word.y_count());
        let mut out = vec![ZERO; self.dim()];
        for (b, &a) in self.amplitudes.iter().enumerate() {
            let sign = if (b & z).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            out[b ^ x] = a * phase * sign;
        }
        out
    }

    /// `<psi| word |psi>` as a complex number.
    fn pauli_expectation(&self, word: &PauliString) -> Complex64 {
        let (x, z) = (word.x_mask() as usize, word.z_mask() as usize);
        let mut acc = ZERO;
        for (b, &a) in self.amplitudes.iter().enumerate() {
            let term = self.amplitudes[b ^ x].conj() * a;
            if (b & z).count_ones() % 2 == 1 {
                acc -= term;
            } else {
                acc += term;
            }
        }
        acc * i_pow(word.y_count())
    }

    pub fn apply_pauli(&self, word: &PauliString) -> Result<Self> {
        word.check_size(self.n_qubits)?;
        Ok(Self {
            n_qubits: self.n_qubits,
            amplitudes: self.pauli_image(word),
        })
    }

    /// `<psi| obs |psi>`; fails if the imaginary residue exceeds [`IMAG_TOL`].
    pub fn expectation(&self, obs: &ObservableSum) -> Result<f64> {
        self.check_size(obs.n_qubits())?;
        let mut acc = Complex64::new(obs.offset() * self.norm_sqr(), 0.0);
        for (c, w) in obs.terms() {
            acc += self.pauli_expectation(w) * c;
        }
        if acc.im.abs() > IMAG_TOL {
            return Err(QetError::NonHermitian(acc.im));
        }
        Ok(acc.re)
    }

    /// Splits the state along the `±1` eigenspaces of `sigma`, using the
    /// projectors `(1 + mu sigma) / 2`. Branches are labeled with `mu`.
    pub fn projective_measure(&self, sigma: &PauliString) -> Result<Ensemble> {
        sigma.check_size(self.n_qubits)?;
        let image = self.pauli_image(sigma);
        let mut branches = Vec::with_capacity(2);
        for mu in [1i8, -1] {
            let m = f64::from(mu);
            let projected: Vec<Complex64> = self
                .amplitudes
                .iter()
                .zip(&image)
                .map(|(&a, &s)| (a + s * m) * 0.5)
                .collect();
            let p: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
            if p > BRANCH_EPS {
                branches.push(Branch {
                    probability: p,
                    state: Self::normalized(projected)?,
                    outcomes: vec![mu],
                });
            }
        }
        Ensemble::new(branches)
    }

    /// Applies `cos(theta) I - i mu sin(theta) sigma` for a single-site word.
    pub fn conditional_rotation(&self, sigma: &PauliString, theta: f64, mu: i8) -> Result<Self> {
        sigma.check_size(self.n_qubits)?;
        if sigma.weight() != 1 {
            return Err(QetError::InvalidParameter(format!(
                "feedback rotation needs a single-site word, got {sigma}"
            )));
        }
        if mu != 1 && mu != -1 {
            return Err(QetError::InvalidParameter(format!(
                "mu must be ±1, got {mu}"
            )));
        }
        let (s, c) = theta.sin_cos();
        let k = -I * (f64::from(mu) * s);
        let image = self.pauli_image(sigma);
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(&image)
            .map(|(&a, &b)| a * c + b * k)
            .collect();
        Ok(Self {
            n_qubits: self.n_qubits,
            amplitudes,
        })
    }

    /// Applies a 2x2 matrix `[[m00, m01], [m10, m11]]` to `qubit`.
    pub fn apply_single(&self, qubit: usize, m: [[Complex64; 2]; 2]) -> Result<Self> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        let mut amplitudes = self.amplitudes.clone();
        for b in 0..self.dim() {
            if b & bit == 0 {
                let (a0, a1) = (self.amplitudes[b], self.amplitudes[b | bit]);
                amplitudes[b] = m[0][0] * a0 + m[0][1] * a1;
                amplitudes[b | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            amplitudes,
        })
    }

    pub fn hadamard(&self, qubit: usize) -> Result<Self> {
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_single(qubit, [[r, r], [r, -r]])
    }

    pub fn cnot(&self, control: usize, target: usize) -> Result<Self> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(QetError::InvalidParameter(
                "control and target must differ".into(),
            ));
        }
        let (c, t) = (1usize << control, 1usize << target);
        let mut amplitudes = self.amplitudes.clone();
        for (b, a) in amplitudes.iter_mut().enumerate() {
            if b & c != 0 {
                *a = self.amplitudes[b ^ t];
            }
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            amplitudes,
        })
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(QetError::InvalidParameter(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// Probability of reading `1` on `qubit` in the computational basis.
    pub fn prob_one(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(b, _)| b & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Projects `qubit` onto `|value>` and renormalizes, keeping the register
    /// size. Returns the outcome probability alongside the collapsed state.
    pub fn collapse(&self, qubit: usize, value: u8) -> Result<(f64, Self)> {
        let p1 = self.prob_one(qubit)?;
        let p = if value == 1 { p1 } else { 1.0 - p1 };
        if p <= BRANCH_EPS {
            return Err(QetError::InvalidParameter(format!(
                "outcome {value} on qubit {qubit} has zero probability"
            )));
        }
        let bit = 1usize << qubit;
        let want = if value == 1 { bit } else { 0 };
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(b, &a)| if b & bit == want { a } else { ZERO })
            .collect();
        Ok((p, Self::normalized(amplitudes)?))
    }

    /// Born-samples a computational readout of `qubit` and collapses.
    pub fn measure_z<R: Rng + ?Sized>(&self, qubit: usize, rng: &mut R) -> Result<(u8, Self)> {
        let p1 = self.prob_one(qubit)?;
        let value = u8::from(rng.random::<f64>() < p1);
        let (_, state) = self.collapse(qubit, value)?;
        Ok((value, state))
    }

    /// Removes a qubit that is in a definite computational state.
    pub fn remove_qubit(&self, qubit: usize, value: u8) -> Result<Self> {
        self.check_qubit(qubit)?;
        if self.n_qubits == 1 {
            return Err(QetError::InvalidParameter(
                "cannot remove the last qubit".into(),
            ));
        }
        let bit = 1usize << qubit;
        let want = if value == 1 { bit } else { 0 };
        let leaked: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(b, _)| b & bit != want)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if leaked > NORM_TOL {
            return Err(QetError::InvalidParameter(format!(
                "qubit {qubit} is not in |{value}> (weight {leaked:e} elsewhere)"
            )));
        }
        let low = bit - 1;
        let amplitudes = (0..self.dim() / 2)
            .map(|r| {
                let full = (r & low) | ((r & !low) << 1) | want;
                self.amplitudes[full]
            })
            .collect();
        Ok(Self {
            n_qubits: self.n_qubits - 1,
            amplitudes,
        })
    }

    /// `self ⊗ other`, with `other`'s qubits appended after `self`'s.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        check_capacity(self.n_qubits + other.n_qubits)?;
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for &hi in &other.amplitudes {
            for &lo in &self.amplitudes {
                amplitudes.push(lo * hi);
            }
        }
        Ok(Self {
            n_qubits: self.n_qubits + other.n_qubits,
            amplitudes,
        })
    }
}

/// One outcome branch of a measured state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub probability: f64,
    pub state: StateVector,
    /// Measurement record in the order the measurements happened.
    pub outcomes: Vec<i8>,
}

impl Branch {
    /// The first recorded outcome, the sender's `mu` in every protocol here.
    pub fn mu(&self) -> Option<i8> {
        self.outcomes.first().copied()
    }
}

/// Mixture of normalized states, equivalent to `sum_b p_b |psi_b><psi_b|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    branches: Vec<Branch>,
}

impl Ensemble {
    pub fn new(branches: Vec<Branch>) -> Result<Self> {
        let Some(first) = branches.first() else {
            return Err(QetError::InvalidParameter("empty ensemble".into()));
        };
        let n = first.state.n_qubits();
        let mut total = 0.0;
        for b in &branches {
            b.state.check_size(n)?;
            if !(0.0..=1.0 + NORM_TOL).contains(&b.probability) {
                return Err(QetError::InvalidParameter(format!(
                    "branch probability {} outside [0, 1]",
                    b.probability
                )));
            }
            total += b.probability;
        }
        if (total - 1.0).abs() > NORM_TOL {
            return Err(QetError::InvalidParameter(format!(
                "branch probabilities sum to {total}"
            )));
        }
        Ok(Self { branches })
    }

    pub fn pure(state: StateVector) -> Self {
        Self {
            branches: vec![Branch {
                probability: 1.0,
                state,
                outcomes: Vec::new(),
            }],
        }
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn into_branches(self) -> Vec<Branch> {
        self.branches
    }

    pub fn n_qubits(&self) -> usize {
        self.branches[0].state.n_qubits()
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    pub fn expectation(&self, obs: &ObservableSum) -> Result<f64> {
        self.branches.iter().try_fold(0.0, |acc, b| {
            Ok(acc + b.probability * b.state.expectation(obs)?)
        })
    }

    /// Applies a map to every branch state, keeping probabilities and labels.
    pub fn map_states<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&Branch) -> Result<StateVector>,
    {
        let branches = self
            .branches
            .iter()
            .map(|b| {
                Ok(Branch {
                    probability: b.probability,
                    state: f(b)?,
                    outcomes: b.outcomes.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { branches })
    }
}

/// Anything an observable can be averaged over.
pub trait Expectation {
    fn expectation(&self, obs: &ObservableSum) -> Result<f64>;
}

impl Expectation for StateVector {
    fn expectation(&self, obs: &ObservableSum) -> Result<f64> {
        StateVector::expectation(self, obs)
    }
}

impl Expectation for Ensemble {
    fn expectation(&self, obs: &ObservableSum) -> Result<f64> {
        Ensemble::expectation(self, obs)
    }
}

pub fn expectation<S: Expectation + ?Sized>(source: &S, obs: &ObservableSum) -> Result<f64> {
    source.expectation(obs)
}

pub fn apply_pauli(state: &StateVector, word: &PauliString) -> Result<StateVector> {
    state.apply_pauli(word)
}

pub fn projective_measure(state: &StateVector, sigma: &PauliString) -> Result<Ensemble> {
    state.projective_measure(sigma)
}

pub fn conditional_rotation(
    state: &StateVector,
    sigma: &PauliString,
    theta: f64,
    mu: i8,
) -> Result<StateVector> {
    state.conditional_rotation(sigma, theta, mu)
}
