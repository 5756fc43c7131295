//! Shot-by-shot Monte Carlo estimation of protocol observables.
//!
//! Every shot Born-samples the sender's outcome `mu`, takes the matching
//! collapsed and feedback-rotated state, rotates it into the run's readout
//! basis and Born-samples a full computational readout. The post-feedback
//! state of each `mu` branch is computed once and reused across shots.
//!
//! Randomness is counter based: shot `s` of stream `t` under master seed `m`
//! draws two `f64`s from ChaCha8 keyed by `m`, stream `t`, word position
//! `4 s`. Results are therefore independent of how shots are split across
//! threads.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::GroundSolution;
use crate::error::{QetError, Result};
use crate::model::{LocalTerm, ModelBundle};
use crate::pauli::{ObservableSum, Pauli, PauliString};
use crate::protocol::{
    apply_feedback_along, check_receivers, receiver_angle, Method, ProtocolAxes, QetRecord,
    ReceiverEnergy, ReceiverRecord,
};

/// Shots handled by one RNG reposition.
const CHUNK: u64 = 1 << 15;

/// 32-bit words consumed per shot: two `f64` draws of 64 bits each.
const WORDS_PER_SHOT: u128 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// Terminal readout in the computational basis.
    Z,
    /// Terminal readout after a Hadamard on every qubit.
    X,
}

impl Basis {
    fn letter(self) -> Pauli {
        match self {
            Basis::Z => Pauli::Z,
            Basis::X => Pauli::X,
        }
    }

    fn index(self) -> u64 {
        match self {
            Basis::Z => 0,
            Basis::X => 1,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Z => "Z",
            Basis::X => "X",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub basis: Basis,
    pub shots: u64,
    pub master_seed: u64,
    /// Identifies the experiment (e.g. table configuration) within a seed.
    pub config_id: u64,
}

impl ShotPlan {
    pub fn new(basis: Basis, shots: u64, master_seed: u64, config_id: u64) -> Result<Self> {
        let plan = Self {
            basis,
            shots,
            master_seed,
            config_id,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(QetError::InvalidParameter(
                "shots must be at least 1".into(),
            ));
        }
        if self.config_id > u64::MAX / 2 {
            return Err(QetError::InvalidParameter("config id too large".into()));
        }
        Ok(())
    }

    fn stream(&self) -> u64 {
        self.config_id * 2 + self.basis.index()
    }

    fn rng_at(&self, shot: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream());
        rng.set_word_pos(u128::from(shot) * WORDS_PER_SHOT);
        rng
    }
}

/// Readout histogram of one basis run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tallies {
    pub basis: Basis,
    pub n_qubits: usize,
    pub shots: u64,
    /// `counts[b]` is the number of shots that read bitstring `b`.
    pub counts: Vec<u64>,
    /// Shots whose sender outcome was `+1` and `-1`.
    pub mu_counts: [u64; 2],
}

struct BranchTable {
    cdf: Vec<f64>,
}

impl BranchTable {
    fn sample(&self, u: f64) -> usize {
        self.cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1)
    }
}

fn cumulative(probs: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = probs
        .into_iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    // Absorb rounding so u in [0, 1) always lands inside the table.
    if let Some(last) = cdf.last_mut() {
        *last = f64::INFINITY;
    }
    cdf
}

/// Samples the protocol with the optimal feedback angle at every receiver.
pub fn sample_protocol(
    bundle: &ModelBundle,
    ground: &GroundSolution,
    receivers: &[usize],
    plan: &ShotPlan,
) -> Result<Tallies> {
    let axes = ProtocolAxes::default();
    let feedback = receivers
        .iter()
        .map(|&j| Ok((j, receiver_angle(bundle, ground, j, axes)?.theta)))
        .collect::<Result<Vec<_>>>()?;
    sample_with_feedback(bundle, ground, &feedback, plan)
}

/// Samples the protocol with explicit `(receiver, theta)` feedback.
pub fn sample_with_feedback(
    bundle: &ModelBundle,
    ground: &GroundSolution,
    feedback: &[(usize, f64)],
    plan: &ShotPlan,
) -> Result<Tallies> {
    plan.validate()?;
    let sites: Vec<usize> = feedback.iter().map(|f| f.0).collect();
    check_receivers(bundle, &sites)?;
    let n = bundle.n_qubits();
    let mut ensemble = ground.state.projective_measure(&bundle.sender_sigma())?;
    for &(j, theta) in feedback {
        ensemble = apply_feedback_along(&ensemble, &bundle.receiver_sigma(j)?, theta)?;
    }

    let mut mus = Vec::new();
    let mut tables = Vec::new();
    for b in ensemble.branches() {
        let mut state = b.state.clone();
        if plan.basis == Basis::X {
            for q in 0..n {
                state = state.hadamard(q)?;
            }
        }
        mus.push(b.mu().ok_or(QetError::UnlabeledBranch)?);
        tables.push(BranchTable {
            cdf: cumulative(state.probabilities()),
        });
    }
    let mu_table = BranchTable {
        cdf: cumulative(ensemble.branches().iter().map(|b| b.probability)),
    };

    let dim = 1usize << n;
    let chunks: Vec<u64> = (0..plan.shots.div_ceil(CHUNK)).collect();
    let (counts, mu_counts) = chunks
        .par_iter()
        .map(|&c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(plan.shots);
            let mut rng = plan.rng_at(start);
            let mut counts = vec![0u64; dim];
            let mut mu_counts = [0u64; 2];
            for _ in start..end {
                let branch = mu_table.sample(rng.random::<f64>());
                let outcome = tables[branch].sample(rng.random::<f64>());
                counts[outcome] += 1;
                mu_counts[usize::from(mus[branch] < 0)] += 1;
            }
            (counts, mu_counts)
        })
        .reduce(
            || (vec![0u64; dim], [0u64; 2]),
            |(mut a, mut ma), (b, mb)| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                ma[0] += mb[0];
                ma[1] += mb[1];
                (a, ma)
            },
        );
    Ok(Tallies {
        basis: plan.basis,
        n_qubits: n,
        shots: plan.shots,
        counts,
        mu_counts,
    })
}

/// Sampled counterpart of [`crate::protocol::run_protocol`]: one `Z` and one
/// `X` run of `shots` each, with optimal feedback at every receiver.
///
/// `E0` is estimated from the sender's field term, the only term whose mean
/// the sender's measurement moves.
pub fn sampled_record(
    bundle: &ModelBundle,
    ground: &GroundSolution,
    receivers: &[usize],
    shots: u64,
    master_seed: u64,
    config_id: u64,
) -> Result<QetRecord> {
    let z = sample_protocol(
        bundle,
        ground,
        receivers,
        &ShotPlan::new(Basis::Z, shots, master_seed, config_id)?,
    )?;
    let x = sample_protocol(
        bundle,
        ground,
        receivers,
        &ShotPlan::new(Basis::X, shots, master_seed, config_id)?,
    )?;
    let e0 = estimate(&z, bundle.local(LocalTerm::Field(bundle.sender_site))?)?;
    let axes = ProtocolAxes::default();
    let mut out = std::collections::BTreeMap::new();
    for &j in receivers {
        let (hx_obs, hz_obs) = bundle.receiver_terms(j)?;
        let hx = estimate(&x, hx_obs)?;
        let hz = estimate(&z, hz_obs)?;
        let se = hx.stderr.hypot(hz.stderr);
        out.insert(
            j,
            ReceiverRecord {
                theta: receiver_angle(bundle, ground, j, axes)?,
                energy: ReceiverEnergy::new(hx.mean, hz.mean),
                stderr: Some(ReceiverEnergy {
                    hx: hx.stderr,
                    hz: hz.stderr,
                    e: se,
                    e_b: se,
                }),
            },
        );
    }
    Ok(QetRecord {
        params: bundle.params,
        method: Method::Sampled,
        e0: e0.mean,
        e0_stderr: Some(e0.stderr),
        receivers: out,
    })
}

/// Sample mean and standard error of an observable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub observable: String,
    pub mean: f64,
    pub stderr: f64,
    pub shots: u64,
}

/// Estimates `obs` from a run whose readout basis diagonalizes it.
///
/// Each shot contributes `offset + sum_k c_k (±1)_k`; the standard error is
/// the sample standard deviation of those values over `sqrt(shots)`.
pub fn estimate(tallies: &Tallies, obs: &ObservableSum) -> Result<EstimateRow> {
    if obs.n_qubits() != tallies.n_qubits {
        return Err(QetError::DimensionMismatch {
            expected: tallies.n_qubits,
            found: obs.n_qubits(),
        });
    }
    let letter = tallies.basis.letter();
    let terms: Vec<(f64, u64)> = obs
        .terms()
        .map(|(c, w)| {
            if !w.letters().iter().all(|&p| p == Pauli::I || p == letter) {
                return Err(QetError::IncompatibleBasis {
                    word: w.to_string(),
                    basis: tallies.basis.to_string(),
                });
            }
            Ok((c, mask_of(w)))
        })
        .collect::<Result<_>>()?;

    let value = |b: usize| {
        terms.iter().fold(obs.offset(), |acc, &(c, mask)| {
            if (b as u64 & mask).count_ones() % 2 == 1 {
                acc - c
            } else {
                acc + c
            }
        })
    };
    let n = tallies.shots as f64;
    let mean = tallies
        .counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(b, &c)| c as f64 * value(b))
        .sum::<f64>()
        / n;
    let stderr = if tallies.shots > 1 {
        let ss: f64 = tallies
            .counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(b, &c)| c as f64 * (value(b) - mean).powi(2))
            .sum();
        (ss / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Ok(EstimateRow {
        observable: obs.to_string(),
        mean,
        stderr,
        shots: tallies.shots,
    })
}

fn mask_of(w: &PauliString) -> u64 {
    w.x_mask() | w.z_mask()
}
