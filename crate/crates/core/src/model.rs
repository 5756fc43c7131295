//! Hamiltonians for the two-qubit minimal model and the star cut of a
//! `{3,q}` lattice, with zero-point offsets chosen so that the ground state
//! has zero energy in every local term.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dense::{solve_ground, GroundSolution};
use crate::error::{QetError, Result};
use crate::pauli::{heisenberg_derivative, ObservableSum, Pauli, PauliString};
use crate::state::{StateVector, IMAG_TOL, MAX_QUBITS};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimalModelParams {
    pub h: f64,
    pub k: f64,
}

impl MinimalModelParams {
    pub fn new(h: f64, k: f64) -> Result<Self> {
        let p = Self { h, k };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("h", self.h)?;
        check_positive("k", self.k)
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(QetError::InvalidParameter(format!(
            "{name} must be a positive real, got {v}"
        )));
    }
    Ok(())
}

/// How a `{3,q}` coordination number is turned into a star Hamiltonian.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StarConvention {
    /// `q` qubits: the hub plus `q - 1` receivers, coupled by `2k X_0 X_j`
    /// (the same normalization as the minimal model's `V`). This is the
    /// layout that reproduces the published measurement table.
    #[default]
    Published,
    /// `q + 1` qubits: the hub plus all `q` lattice neighbours, coupled by
    /// `k X_0 X_j`.
    FullStar,
}

impl StarConvention {
    pub fn n_qubits(self, q: usize) -> usize {
        match self {
            StarConvention::Published => q,
            StarConvention::FullStar => q + 1,
        }
    }

    pub fn coupling(self, k: f64) -> f64 {
        match self {
            StarConvention::Published => 2.0 * k,
            StarConvention::FullStar => k,
        }
    }
}

impl fmt::Display for StarConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StarConvention::Published => "published",
            StarConvention::FullStar => "full-star",
        })
    }
}

impl std::str::FromStr for StarConvention {
    type Err = QetError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "published" => Ok(Self::Published),
            "full-star" | "full" => Ok(Self::FullStar),
            other => Err(QetError::Parse(format!(
                "unknown star convention {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarModelParams {
    pub h: f64,
    pub k: f64,
    pub q: usize,
    #[serde(default)]
    pub convention: StarConvention,
}

impl StarModelParams {
    pub fn new(h: f64, k: f64, q: usize) -> Result<Self> {
        Self::with_convention(h, k, q, StarConvention::default())
    }

    pub fn with_convention(h: f64, k: f64, q: usize, convention: StarConvention) -> Result<Self> {
        let p = Self {
            h,
            k,
            q,
            convention,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("h", self.h)?;
        check_positive("k", self.k)?;
        if self.n_qubits() < 2 {
            return Err(QetError::InvalidParameter(format!(
                "q = {} leaves no receiver",
                self.q
            )));
        }
        if self.n_qubits() > MAX_QUBITS {
            return Err(QetError::CapacityExceeded {
                requested: self.n_qubits(),
                limit: MAX_QUBITS,
            });
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.convention.n_qubits(self.q)
    }
}

/// Identifies a local term of a model Hamiltonian.
///
/// `Field(i)` is the on-site term `h Z_i + eps` (the minimal model's `H_i`),
/// `Coupling(j)` the bond `c X_0 X_j + eps` (the minimal model's `V`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LocalTerm {
    Field(usize),
    Coupling(usize),
}

impl fmt::Display for LocalTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalTerm::Field(i) => write!(f, "HZ{i}"),
            LocalTerm::Coupling(j) => write!(f, "HX{j}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelParams {
    Minimal(MinimalModelParams),
    Star(StarModelParams),
}

/// A total Hamiltonian split into named local terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub params: ModelParams,
    pub total: ObservableSum,
    pub locals: BTreeMap<LocalTerm, ObservableSum>,
    pub sender_site: usize,
    pub receiver_sites: Vec<usize>,
}

impl ModelBundle {
    pub fn n_qubits(&self) -> usize {
        self.total.n_qubits()
    }

    pub fn local(&self, term: LocalTerm) -> Result<&ObservableSum> {
        self.locals
            .get(&term)
            .ok_or_else(|| QetError::InvalidParameter(format!("model has no local term {term}")))
    }

    /// The `(X-type, Z-type)` local terms owned by receiver `j`.
    pub fn receiver_terms(&self, j: usize) -> Result<(&ObservableSum, &ObservableSum)> {
        if !self.receiver_sites.contains(&j) {
            return Err(QetError::InvalidParameter(format!(
                "site {j} is not a receiver"
            )));
        }
        Ok((
            self.local(LocalTerm::Coupling(j))?,
            self.local(LocalTerm::Field(j))?,
        ))
    }

    pub fn sum_of_locals(&self) -> Result<ObservableSum> {
        self.locals
            .values()
            .try_fold(ObservableSum::zero(self.n_qubits())?, |acc, t| {
                acc.try_add(t)
            })
    }

    pub fn sender_sigma(&self) -> PauliString {
        PauliString::single(self.n_qubits(), self.sender_site, Pauli::X)
            .expect("sender site inside register")
    }

    pub fn receiver_sigma(&self, j: usize) -> Result<PauliString> {
        PauliString::single(self.n_qubits(), j, Pauli::Y)
    }
}

fn field(n: usize, site: usize, h: f64) -> ObservableSum {
    ObservableSum::from_term(
        h,
        PauliString::single(n, site, Pauli::Z).expect("site in range"),
    )
}

fn bond(n: usize, j: usize, c: f64) -> ObservableSum {
    ObservableSum::from_term(
        c,
        PauliString::from_sites(n, &[(0, Pauli::X), (j, Pauli::X)]).expect("site in range"),
    )
}

/// `H_n = h Z_n + h^2/sqrt(h^2+k^2)` for `n = 0, 1` and
/// `V = 2k X_0 X_1 + 2k^2/sqrt(h^2+k^2)`.
pub fn build_minimal(params: MinimalModelParams) -> Result<ModelBundle> {
    params.validate()?;
    let MinimalModelParams { h, k } = params;
    let r = h.hypot(k);
    let mut locals = BTreeMap::new();
    locals.insert(LocalTerm::Field(0), field(2, 0, h).with_offset(h * h / r));
    locals.insert(LocalTerm::Field(1), field(2, 1, h).with_offset(h * h / r));
    locals.insert(
        LocalTerm::Coupling(1),
        bond(2, 1, 2.0 * k).with_offset(2.0 * k * k / r),
    );
    let total = locals
        .values()
        .try_fold(ObservableSum::zero(2)?, |acc, t| acc.try_add(t))?;
    Ok(ModelBundle {
        params: ModelParams::Minimal(params),
        total,
        locals,
        sender_site: 0,
        receiver_sites: vec![1],
    })
}

/// Closed-form ground state of the minimal model.
pub fn analytic_ground_minimal(params: MinimalModelParams) -> Result<StateVector> {
    params.validate()?;
    let a = params.h / params.h.hypot(params.k);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); 4];
    amps[0b00].re = s * (1.0 - a).sqrt();
    amps[0b11].re = -s * (1.0 + a).sqrt();
    StateVector::normalized(amps)
}

/// Star Hamiltonian with per-term offsets `eps_i = -<g|P_i|g>`.
pub fn build_star(params: StarModelParams) -> Result<ModelBundle> {
    build_star_with_ground(params).map(|(bundle, _)| bundle)
}

/// As [`build_star`], also returning the ground solution already computed
/// while fixing the offsets (its energy is that of the offset total).
pub fn build_star_with_ground(params: StarModelParams) -> Result<(ModelBundle, GroundSolution)> {
    params.validate()?;
    let n = params.n_qubits();
    let c = params.convention.coupling(params.k);
    let mut parts = BTreeMap::new();
    for i in 0..n {
        parts.insert(LocalTerm::Field(i), field(n, i, params.h));
    }
    for j in 1..n {
        parts.insert(LocalTerm::Coupling(j), bond(n, j, c));
    }
    let pauli_total = parts
        .values()
        .try_fold(ObservableSum::zero(n)?, |acc, t| acc.try_add(t))?;
    let ground = solve_ground(&pauli_total)?;

    let mut locals = BTreeMap::new();
    let mut offset_sum = 0.0;
    for (term, part) in parts {
        let eps = -ground.state.expectation(&part)?;
        offset_sum += eps;
        locals.insert(term, part.with_offset(eps));
    }
    let total = pauli_total.with_offset(offset_sum);
    let ground = GroundSolution {
        energy: ground.energy + offset_sum,
        ..ground
    };
    let bundle = ModelBundle {
        params: ModelParams::Star(params),
        total,
        locals,
        sender_site: 0,
        receiver_sites: (1..n).collect(),
    };
    Ok((bundle, ground))
}

/// Rotation angle of the receiver's conditional unitary.
///
/// `xi = <g|s_j H s_j|g>` and `eta = <g|s_i ds_j/dt|g>` with
/// `ds_j/dt = i[H, s_j]`. The angle satisfies `cos 2θ = xi/r` and
/// `sin 2θ = eta/r`, `r = sqrt(xi^2 + eta^2)`, which minimizes the receiver's
/// post-protocol energy `xi/2 (1 - cos 2θ) - eta/2 sin 2θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedbackAngle {
    pub theta: f64,
    pub xi: f64,
    pub eta: f64,
}

impl FeedbackAngle {
    /// Angle in `(-π/2, π/2]` from the two ground-state correlators.
    pub fn from_correlators(xi: f64, eta: f64) -> Result<Self> {
        if xi.hypot(eta) < 1e-14 {
            return Err(QetError::UndefinedAngle);
        }
        Ok(Self {
            theta: 0.5 * eta.atan2(xi),
            xi,
            eta,
        })
    }

    /// Fixed angle with no correlator provenance, for scans and overrides.
    pub fn fixed(theta: f64) -> Self {
        Self {
            theta,
            xi: f64::NAN,
            eta: f64::NAN,
        }
    }

    /// Receiver energy predicted for this angle's correlators at `theta`.
    pub fn predicted_energy(&self, theta: f64) -> f64 {
        0.5 * self.xi * (1.0 - (2.0 * theta).cos()) - 0.5 * self.eta * (2.0 * theta).sin()
    }
}

/// `H` must be the offset-included total, so that its ground energy is zero.
pub fn compute_theta(
    ground: &GroundSolution,
    h: &ObservableSum,
    sender_sigma: &PauliString,
    receiver_sigma: &PauliString,
) -> Result<FeedbackAngle> {
    let g = &ground.state;
    let flipped = g.apply_pauli(receiver_sigma)?;
    let xi = flipped.expectation(h)?;

    let derivative = heisenberg_derivative(h, receiver_sigma)?;
    let sender_image = g.apply_pauli(sender_sigma)?;
    let mut eta = num_complex::Complex64::new(0.0, 0.0);
    for (c, w) in derivative.terms() {
        eta += sender_image.inner(&g.apply_pauli(w)?)? * c;
    }
    if eta.im.abs() > IMAG_TOL {
        return Err(QetError::NonHermitian(eta.im));
    }
    FeedbackAngle::from_correlators(xi, eta.re)
}
