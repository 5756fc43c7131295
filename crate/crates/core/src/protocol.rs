//! Exact execution of the energy teleportation protocol: the sender's
//! measurement, conditional feedback at each receiver, and the resulting
//! energy bookkeeping.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::{solve_ground, GroundSolution};
use crate::error::{QetError, Result};
use crate::model::{
    build_minimal, build_star_with_ground, compute_theta, FeedbackAngle, MinimalModelParams,
    ModelBundle, ModelParams, StarModelParams,
};
use crate::pauli::{Pauli, PauliString};
use crate::state::Ensemble;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Sampled,
}

/// Post-protocol energies at one receiver. `e_b = -e` is the extracted part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReceiverEnergy {
    pub hx: f64,
    pub hz: f64,
    pub e: f64,
    pub e_b: f64,
}

impl ReceiverEnergy {
    pub fn new(hx: f64, hz: f64) -> Self {
        let e = hx + hz;
        Self { hx, hz, e, e_b: -e }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReceiverRecord {
    pub theta: FeedbackAngle,
    pub energy: ReceiverEnergy,
    /// Standard errors of `energy`, sampled records only.
    pub stderr: Option<ReceiverEnergy>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QetRecord {
    pub params: ModelParams,
    pub method: Method,
    pub e0: f64,
    pub e0_stderr: Option<f64>,
    pub receivers: BTreeMap<usize, ReceiverRecord>,
}

impl QetRecord {
    /// Largest absolute difference over every numeric field shared by both
    /// records; infinite when the receiver sets differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.receivers.keys().ne(other.receivers.keys()) {
            return f64::INFINITY;
        }
        let mut d = (self.e0 - other.e0).abs();
        for (a, b) in self.receivers.values().zip(other.receivers.values()) {
            for (x, y) in [
                (a.energy.hx, b.energy.hx),
                (a.energy.hz, b.energy.hz),
                (a.energy.e, b.energy.e),
                (a.energy.e_b, b.energy.e_b),
                (a.theta.theta, b.theta.theta),
                (a.theta.xi, b.theta.xi),
                (a.theta.eta, b.theta.eta),
            ] {
                d = d.max((x - y).abs());
            }
        }
        d
    }

    /// Total energy extracted over all receivers.
    pub fn total_extracted(&self) -> f64 {
        self.receivers.values().map(|r| r.energy.e_b).sum()
    }
}

/// Measurement axes. The defaults (`X` at the sender, `Y` at receivers) are
/// what the feedback angle formula is derived for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolAxes {
    pub sender: Pauli,
    pub receiver: Pauli,
}

impl Default for ProtocolAxes {
    fn default() -> Self {
        Self {
            sender: Pauli::X,
            receiver: Pauli::Y,
        }
    }
}

/// The sender measures `X_0`; returns the two-branch ensemble and the energy
/// it injects, `E_0 = <H_tot>` after the measurement.
pub fn alice_measure(bundle: &ModelBundle, ground: &GroundSolution) -> Result<(Ensemble, f64)> {
    alice_measure_along(bundle, ground, &bundle.sender_sigma())
}

fn alice_measure_along(
    bundle: &ModelBundle,
    ground: &GroundSolution,
    sigma: &PauliString,
) -> Result<(Ensemble, f64)> {
    let ensemble = ground.state.projective_measure(sigma)?;
    let e0 = ensemble.expectation(&bundle.total)?;
    Ok((ensemble, e0))
}

/// Applies `U_j(mu) = cos θ - i mu sin θ Y_j` to every branch, each with its
/// own `mu`.
pub fn apply_feedback(
    ensemble: &Ensemble,
    receiver_site: usize,
    angle: &FeedbackAngle,
) -> Result<Ensemble> {
    let sigma = PauliString::single(ensemble.n_qubits(), receiver_site, Pauli::Y)?;
    apply_feedback_along(ensemble, &sigma, angle.theta)
}

pub(crate) fn apply_feedback_along(
    ensemble: &Ensemble,
    sigma: &PauliString,
    theta: f64,
) -> Result<Ensemble> {
    ensemble.map_states(|b| {
        let mu = b.mu().ok_or(QetError::UnlabeledBranch)?;
        b.state.conditional_rotation(sigma, theta, mu)
    })
}

/// Receiver `j`'s `(<H_X,j>, <H_Z,j>)` and their sum. For the minimal model
/// these are `<V>` and `<H_1>`.
pub fn receiver_energy(
    ensemble: &Ensemble,
    bundle: &ModelBundle,
    receiver_site: usize,
) -> Result<ReceiverEnergy> {
    let (hx, hz) = bundle.receiver_terms(receiver_site)?;
    Ok(ReceiverEnergy::new(
        ensemble.expectation(hx)?,
        ensemble.expectation(hz)?,
    ))
}

pub(crate) fn check_receivers(bundle: &ModelBundle, receivers: &[usize]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &j in receivers {
        if !seen.insert(j) {
            return Err(QetError::DuplicateReceiver(j));
        }
        if !bundle.receiver_sites.contains(&j) {
            return Err(QetError::InvalidParameter(format!(
                "site {j} is not a receiver of this model"
            )));
        }
    }
    if receivers.is_empty() {
        return Err(QetError::InvalidParameter("no receivers given".into()));
    }
    Ok(())
}

/// Feedback angle for receiver `j` along the given axes.
pub fn receiver_angle(
    bundle: &ModelBundle,
    ground: &GroundSolution,
    j: usize,
    axes: ProtocolAxes,
) -> Result<FeedbackAngle> {
    let n = bundle.n_qubits();
    let sender = PauliString::single(n, bundle.sender_site, axes.sender)?;
    let receiver = PauliString::single(n, j, axes.receiver)?;
    compute_theta(ground, &bundle.total, &sender, &receiver)
}

/// Full exact pipeline on a prepared model: measure, apply feedback at every
/// listed receiver, evaluate each receiver's local energy.
pub fn run_protocol(
    bundle: &ModelBundle,
    ground: &GroundSolution,
    receivers: &[usize],
    axes: ProtocolAxes,
) -> Result<QetRecord> {
    check_receivers(bundle, receivers)?;
    let n = bundle.n_qubits();
    let sender = PauliString::single(n, bundle.sender_site, axes.sender)?;
    let (mut ensemble, e0) = alice_measure_along(bundle, ground, &sender)?;
    let mut angles = BTreeMap::new();
    for &j in receivers {
        let angle = receiver_angle(bundle, ground, j, axes)?;
        let sigma = PauliString::single(n, j, axes.receiver)?;
        ensemble = apply_feedback_along(&ensemble, &sigma, angle.theta)?;
        angles.insert(j, angle);
    }
    let mut out = BTreeMap::new();
    for (j, theta) in angles {
        out.insert(
            j,
            ReceiverRecord {
                theta,
                energy: receiver_energy(&ensemble, bundle, j)?,
                stderr: None,
            },
        );
    }
    Ok(QetRecord {
        params: bundle.params,
        method: Method::Exact,
        e0,
        e0_stderr: None,
        receivers: out,
    })
}

pub fn run_minimal_qet(params: MinimalModelParams) -> Result<QetRecord> {
    let bundle = build_minimal(params)?;
    let ground = solve_ground(&bundle.total)?;
    run_protocol(&bundle, &ground, &[1], ProtocolAxes::default())
}

/// Energy distribution to several receivers of a star at once.
pub fn run_qed(params: StarModelParams, receivers: &[usize]) -> Result<QetRecord> {
    let (bundle, ground) = build_star_with_ground(params)?;
    run_protocol(&bundle, &ground, receivers, ProtocolAxes::default())
}

/// Extracted energy of the minimal model over an `h x k` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub h: Vec<f64>,
    pub k: Vec<f64>,
    /// `e_b[i][j]` at `(h[i], k[j])`, receiver local `H_1 + V`.
    pub e_b: Vec<Vec<f64>>,
    /// Same protocol, counting only `-<H_1>`.
    pub e_b_field_only: Vec<Vec<f64>>,
}

pub fn sweep_eb(h_grid: &[f64], k_grid: &[f64]) -> Result<SweepGrid> {
    let rows = h_grid
        .par_iter()
        .map(|&h| {
            k_grid
                .iter()
                .map(|&k| {
                    let rec = run_minimal_qet(MinimalModelParams::new(h, k)?)?;
                    let r = &rec.receivers[&1];
                    Ok((r.energy.e_b, -r.energy.hz))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepGrid {
        h: h_grid.to_vec(),
        k: k_grid.to_vec(),
        e_b: rows
            .iter()
            .map(|r| r.iter().map(|p| p.0).collect())
            .collect(),
        e_b_field_only: rows
            .iter()
            .map(|r| r.iter().map(|p| p.1).collect())
            .collect(),
    })
}
