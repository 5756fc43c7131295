//! Qubit teleportation over shared Bell pairs, relay chains built from it,
//! and the long-range energy teleportation run in which the receiver's
//! qubit travels through such a chain.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense::solve_ground;
use crate::error::{QetError, Result};
use crate::model::{build_minimal, MinimalModelParams};
use crate::pauli::{ObservableSum, Pauli, PauliString};
use crate::protocol::{
    apply_feedback_along, receiver_angle, receiver_energy, Method, ProtocolAxes, QetRecord,
    ReceiverRecord,
};
use crate::state::{check_capacity, Branch, Ensemble, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Purpose {
    MuBroadcast,
    TeleportCorrection,
}

impl fmt::Display for Purpose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Purpose::MuBroadcast => "mu-broadcast",
            Purpose::TeleportCorrection => "teleport-corrections",
        })
    }
}

impl FromStr for Purpose {
    type Err = QetError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mu-broadcast" => Ok(Purpose::MuBroadcast),
            "teleport-corrections" => Ok(Purpose::TeleportCorrection),
            other => Err(QetError::Parse(format!(
                "unknown message purpose {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub seq: usize,
    pub from: String,
    pub to: String,
    pub purpose: Purpose,
    pub bits: Vec<u8>,
}

/// Ordered log of every classical message sent during a run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoccTranscript {
    messages: Vec<Message>,
}

impl LoccTranscript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn send(&mut self, from: &str, to: &str, purpose: Purpose, bits: Vec<u8>) {
        let seq = self.messages.len();
        self.messages.push(Message {
            seq,
            from: from.to_string(),
            to: to.to_string(),
            purpose,
            bits,
        });
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn count(&self, purpose: Purpose) -> usize {
        self.messages
            .iter()
            .filter(|m| m.purpose == purpose)
            .count()
    }

    pub fn bit_count(&self, purpose: Purpose) -> usize {
        self.messages
            .iter()
            .filter(|m| m.purpose == purpose)
            .map(|m| m.bits.len())
            .sum()
    }

    /// One `seq from to purpose bits` line per message.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for m in &self.messages {
            let bits: String = m.bits.iter().map(|b| char::from(b'0' + b)).collect();
            out.push_str(&format!(
                "{} {} {} {} {}\n",
                m.seq, m.from, m.to, m.purpose, bits
            ));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut transcript = Self::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [seq, from, to, purpose, bits] = fields[..] else {
                return Err(QetError::Parse(format!(
                    "line {}: expected 5 fields",
                    lineno + 1
                )));
            };
            let seq: usize = seq.parse().map_err(|_| {
                QetError::Parse(format!("line {}: bad sequence number", lineno + 1))
            })?;
            if seq != transcript.messages.len() {
                return Err(QetError::Parse(format!(
                    "line {}: out-of-order sequence",
                    lineno + 1
                )));
            }
            let bits = bits
                .chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(QetError::Parse(format!(
                        "line {}: bad bit {c:?}",
                        lineno + 1
                    ))),
                })
                .collect::<Result<Vec<u8>>>()?;
            transcript.send(from, to, purpose.parse()?, bits);
        }
        Ok(transcript)
    }
}

/// Where a relayed qubit lives and which ancillas each hop borrows.
///
/// The register is `base_qubits` wide between hops; every hop appends a Bell
/// pair at `base_qubits, base_qubits + 1` and drops the two measured qubits
/// afterwards, so the relayed content ends up back at `relayed`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelayPlan {
    pub hops: usize,
    pub relayed: usize,
    pub base_qubits: usize,
}

impl RelayPlan {
    pub fn new(base_qubits: usize, relayed: usize, hops: usize) -> Result<Self> {
        if relayed >= base_qubits {
            return Err(QetError::InvalidParameter(format!(
                "relayed qubit {relayed} outside a {base_qubits}-qubit register"
            )));
        }
        check_capacity(base_qubits + 2)?;
        Ok(Self {
            hops,
            relayed,
            base_qubits,
        })
    }

    /// Bell pair `(near, far)` used by every hop.
    pub fn ancillas(&self) -> (usize, usize) {
        (self.base_qubits, self.base_qubits + 1)
    }

    /// Party holding the relayed qubit before hop `i` and after the last one.
    pub fn node(&self, i: usize) -> String {
        if i == 0 {
            "charlie".into()
        } else if i == self.hops {
            "bob".into()
        } else {
            format!("relay{i}")
        }
    }
}

/// `state ⊗ (|00> + |11>)/sqrt2` on two fresh qubits appended last.
pub fn extend_with_bell(state: &StateVector) -> Result<StateVector> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let zero = Complex64::new(0.0, 0.0);
    let bell = StateVector::from_amplitudes(vec![
        Complex64::new(r, 0.0),
        zero,
        zero,
        Complex64::new(r, 0.0),
    ])?;
    state.tensor(&bell)
}

/// One of the four measurement outcomes of a teleportation.
#[derive(Clone, Debug, PartialEq)]
pub struct TeleportOutcome {
    pub probability: f64,
    /// `[source readout, near-half readout]`.
    pub bits: [u8; 2],
    /// Corrected state; the measured qubits are still present.
    pub state: StateVector,
}

fn check_pair(state: &StateVector, source: usize, pair: (usize, usize)) -> Result<()> {
    let n = state.n_qubits();
    let (a, b) = pair;
    if a == b || a == source || b == source || a >= n || b >= n || source >= n {
        return Err(QetError::InvalidParameter(format!(
            "malformed teleportation qubits: source {source}, pair ({a}, {b})"
        )));
    }
    // XX and ZZ both at +1 pins the pair to (|00>+|11>)/sqrt2 and, being a
    // pure state, unentangled with the rest of the register.
    for p in [Pauli::X, Pauli::Z] {
        let word = PauliString::from_sites(n, &[(a, p), (b, p)])?;
        let v = state.expectation(&ObservableSum::from_term(1.0, word))?;
        if (v - 1.0).abs() > 1e-10 {
            return Err(QetError::InvalidParameter(format!(
                "qubits ({a}, {b}) do not hold a Bell pair"
            )));
        }
    }
    Ok(())
}

fn correct(state: &StateVector, target: usize, bits: [u8; 2]) -> Result<StateVector> {
    let n = state.n_qubits();
    let mut out = state.clone();
    if bits[1] == 1 {
        out = out.apply_pauli(&PauliString::single(n, target, Pauli::X)?)?;
    }
    if bits[0] == 1 {
        out = out.apply_pauli(&PauliString::single(n, target, Pauli::Z)?)?;
    }
    Ok(out)
}

/// All four branches of teleporting `source` onto `pair.1`, each corrected.
pub fn teleport_branches(
    state: &StateVector,
    source: usize,
    pair: (usize, usize),
) -> Result<Vec<TeleportOutcome>> {
    check_pair(state, source, pair)?;
    let rotated = state.cnot(source, pair.0)?.hadamard(source)?;
    let mut out = Vec::with_capacity(4);
    for m_source in 0..2u8 {
        for m_near in 0..2u8 {
            let Ok((p1, s1)) = rotated.collapse(source, m_source) else {
                continue;
            };
            let Ok((p2, s2)) = s1.collapse(pair.0, m_near) else {
                continue;
            };
            let bits = [m_source, m_near];
            out.push(TeleportOutcome {
                probability: p1 * p2,
                bits,
                state: correct(&s2, pair.1, bits)?,
            });
        }
    }
    Ok(out)
}

/// Teleports `source` onto `pair.1` with Born-sampled readouts, logging the
/// two correction bits from `from` to `to`.
pub fn teleport_qubit<R: Rng + ?Sized>(
    state: &StateVector,
    source: usize,
    pair: (usize, usize),
    transcript: &mut LoccTranscript,
    (from, to): (&str, &str),
    rng: &mut R,
) -> Result<StateVector> {
    check_pair(state, source, pair)?;
    let rotated = state.cnot(source, pair.0)?.hadamard(source)?;
    let (m_source, s1) = rotated.measure_z(source, rng)?;
    let (m_near, s2) = s1.measure_z(pair.0, rng)?;
    transcript.send(from, to, Purpose::TeleportCorrection, vec![m_source]);
    transcript.send(from, to, Purpose::TeleportCorrection, vec![m_near]);
    correct(&s2, pair.1, [m_source, m_near])
}

/// Drops the measured source and near-half qubits after a hop.
fn recycle(state: &StateVector, source: usize, near: usize, bits: [u8; 2]) -> Result<StateVector> {
    let (hi, lo, hi_bit, lo_bit) = if source > near {
        (source, near, bits[0], bits[1])
    } else {
        (near, source, bits[1], bits[0])
    };
    state.remove_qubit(hi, hi_bit)?.remove_qubit(lo, lo_bit)
}

/// Moves the relayed qubit of `state` through one hop of `plan`, returning
/// every outcome branch with the ancillas recycled.
fn hop_branches(state: &StateVector, plan: &RelayPlan) -> Result<Vec<TeleportOutcome>> {
    let (near, far) = plan.ancillas();
    let extended = extend_with_bell(state)?;
    let mut out = Vec::new();
    for branch in teleport_branches(&extended, plan.relayed, (near, far))? {
        // Move the far half into the relayed slot before dropping the rest.
        let moved = swap(&branch.state, plan.relayed, far)?;
        let bits = branch.bits;
        out.push(TeleportOutcome {
            probability: branch.probability,
            bits,
            state: recycle(&moved, far, near, bits)?,
        });
    }
    Ok(out)
}

fn swap(state: &StateVector, a: usize, b: usize) -> Result<StateVector> {
    state.cnot(a, b)?.cnot(b, a)?.cnot(a, b)
}

fn hop_sampled<R: Rng + ?Sized>(
    state: &StateVector,
    plan: &RelayPlan,
    hop: usize,
    transcript: &mut LoccTranscript,
    rng: &mut R,
) -> Result<StateVector> {
    let (near, far) = plan.ancillas();
    let extended = extend_with_bell(state)?;
    let before = transcript.messages().len();
    let from = plan.node(hop);
    let to = plan.node(hop + 1);
    let out = teleport_qubit(
        &extended,
        plan.relayed,
        (near, far),
        transcript,
        (&from, &to),
        rng,
    )?;
    let bits = [
        transcript.messages()[before].bits[0],
        transcript.messages()[before + 1].bits[0],
    ];
    let moved = swap(&out, plan.relayed, far)?;
    recycle(&moved, far, near, bits)
}

/// Relays the `plan.relayed` qubit of every branch through all hops,
/// enumerating every readout. Outcome bits are appended to branch labels.
pub fn relay_ensemble(ensemble: &Ensemble, plan: &RelayPlan) -> Result<Ensemble> {
    let mut branches: Vec<Branch> = ensemble.branches().to_vec();
    for _ in 0..plan.hops {
        let mut next = Vec::with_capacity(branches.len() * 4);
        for b in &branches {
            for out in hop_branches(&b.state, plan)? {
                let mut outcomes = b.outcomes.clone();
                outcomes.extend(out.bits.iter().map(|&x| x as i8));
                next.push(Branch {
                    probability: b.probability * out.probability,
                    state: out.state,
                    outcomes,
                });
            }
        }
        branches = next;
    }
    Ensemble::new(branches)
}

/// Long-range energy teleportation on the minimal model.
///
/// The sender measures and broadcasts `mu`; the relay node next to her
/// applies `U_1(mu)` and the receiver's qubit is then teleported `hops`
/// times before the receiver's energy is evaluated. The returned record is
/// exact (every branch enumerated). The transcript is one realized run,
/// sampled from `seed`.
pub fn run_longrange_qet(
    params: MinimalModelParams,
    hops: usize,
    seed: u64,
) -> Result<(QetRecord, LoccTranscript)> {
    if hops == 0 {
        return Err(QetError::InvalidParameter("hops must be at least 1".into()));
    }
    let bundle = build_minimal(params)?;
    let ground = solve_ground(&bundle.total)?;
    let plan = RelayPlan::new(bundle.n_qubits(), 1, hops)?;
    let axes = ProtocolAxes::default();
    let angle = receiver_angle(&bundle, &ground, 1, axes)?;
    let sigma = bundle.receiver_sigma(1)?;

    let measured = ground.state.projective_measure(&bundle.sender_sigma())?;
    let e0 = measured.expectation(&bundle.total)?;
    let fed = apply_feedback_along(&measured, &sigma, angle.theta)?;
    let delivered = relay_ensemble(&fed, &plan)?;
    let energy = receiver_energy(&delivered, &bundle, 1)?;

    let record = QetRecord {
        params: bundle.params,
        method: Method::Exact,
        e0,
        e0_stderr: None,
        receivers: [(
            1,
            ReceiverRecord {
                theta: angle,
                energy,
                stderr: None,
            },
        )]
        .into(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transcript = LoccTranscript::new();
    let r: f64 = rng.random();
    let mut acc = 0.0;
    let branch = measured
        .branches()
        .iter()
        .find(|b| {
            acc += b.probability;
            r < acc
        })
        .unwrap_or_else(|| measured.branches().last().expect("non-empty ensemble"));
    let mu = branch.mu().ok_or(QetError::UnlabeledBranch)?;
    transcript.send(
        "alice",
        "bob,charlie",
        Purpose::MuBroadcast,
        vec![u8::from(mu < 0)],
    );
    let mut state = branch.state.conditional_rotation(&sigma, angle.theta, mu)?;
    for hop in 0..hops {
        state = hop_sampled(&state, &plan, hop, &mut transcript, &mut rng)?;
    }
    debug_assert_eq!(state.n_qubits(), bundle.n_qubits());

    Ok((record, transcript))
}

/// Trace distance between two pure single-qubit states, computed from the
/// density-matrix difference to avoid the `sqrt(1 - F^2)` cancellation.
fn qubit_trace_distance(a: &StateVector, b: &StateVector) -> f64 {
    let rho = |s: &StateVector| {
        let v = s.amplitudes();
        (v[0].norm_sqr(), v[0] * v[1].conj())
    };
    let (pa, ca) = rho(a);
    let (pb, cb) = rho(b);
    (pa - pb).hypot((ca - cb).norm())
}

/// Worst trace distance between input and relayed output over a panel of
/// single-qubit states, across every measurement branch.
pub fn relay_panel_distance(panel: &[StateVector], hops: usize) -> Result<f64> {
    let plan = RelayPlan::new(1, 0, hops)?;
    let mut worst: f64 = 0.0;
    for input in panel {
        if input.n_qubits() != 1 {
            return Err(QetError::DimensionMismatch {
                expected: 1,
                found: input.n_qubits(),
            });
        }
        let out = relay_ensemble(&Ensemble::pure(input.clone()), &plan)?;
        for b in out.branches() {
            worst = worst.max(qubit_trace_distance(input, &b.state));
        }
    }
    Ok(worst)
}

/// Uniformly random pure qubit states (uniform on the Bloch sphere).
pub fn random_qubit_panel(count: usize, seed: u64) -> Vec<StateVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let cos_t: f64 = 1.0 - 2.0 * rng.random::<f64>();
            let phi = std::f64::consts::TAU * rng.random::<f64>();
            let half = cos_t.acos() / 2.0;
            StateVector::normalized(vec![
                Complex64::new(half.cos(), 0.0),
                Complex64::from_polar(half.sin(), phi),
            ])
            .expect("non-zero amplitudes")
        })
        .collect()
}

/// The six single-qubit stabilizer states `|0>, |1>, |±>, |±i>`.
pub fn stabilizer_panel() -> Vec<StateVector> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = Complex64::new;
    [
        [c(1.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(1.0, 0.0)],
        [c(r, 0.0), c(r, 0.0)],
        [c(r, 0.0), c(-r, 0.0)],
        [c(r, 0.0), c(0.0, r)],
        [c(r, 0.0), c(0.0, -r)],
    ]
    .into_iter()
    .map(|a| StateVector::from_amplitudes(a.to_vec()).expect("normalized"))
    .collect()
}

/// Maximum relay error over `panel_size` random states plus the stabilizer
/// panel.
pub fn relay_identity_check(hops: usize, panel_size: usize, seed: u64) -> Result<f64> {
    let mut panel = random_qubit_panel(panel_size, seed);
    panel.extend(stabilizer_panel());
    relay_panel_distance(&panel, hops)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_extension_layout() {
        let s = extend_with_bell(&StateVector::basis(1, 0).unwrap()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // |000> is index 0; |011> (qubits 1, 2 set) is index 6
        let a = s.amplitudes();
        assert!((a[0].re - r).abs() < 1e-15);
        assert!((a[6].re - r).abs() < 1e-15);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn malformed_pairs_are_rejected() {
        let s = extend_with_bell(&StateVector::basis(1, 0).unwrap()).unwrap();
        assert!(teleport_branches(&s, 0, (1, 1)).is_err());
        assert!(teleport_branches(&s, 1, (1, 2)).is_err());
        assert!(teleport_branches(&s, 0, (1, 5)).is_err());
        // qubits 0 and 1 are not a Bell pair
        assert!(teleport_branches(&s, 2, (0, 1)).is_err());
    }

    #[test]
    fn transcript_text_round_trip() {
        let mut t = LoccTranscript::new();
        t.send("alice", "bob,charlie", Purpose::MuBroadcast, vec![1]);
        t.send("charlie", "bob", Purpose::TeleportCorrection, vec![0]);
        let text = t.to_text();
        assert_eq!(
            text.lines().next().unwrap(),
            "0 alice bob,charlie mu-broadcast 1"
        );
        assert_eq!(LoccTranscript::parse(&text).unwrap(), t);
        assert!(LoccTranscript::parse("1 a b mu-broadcast 0").is_err());
        assert!(LoccTranscript::parse("0 a b shout 0").is_err());
    }

    #[test]
    fn relay_nodes() {
        let plan = RelayPlan::new(2, 1, 3).unwrap();
        assert_eq!(plan.node(0), "charlie");
        assert_eq!(plan.node(1), "relay1");
        assert_eq!(plan.node(3), "bob");
        assert_eq!(plan.ancillas(), (2, 3));
        assert!(RelayPlan::new(2, 2, 1).is_err());
        assert!(RelayPlan::new(13, 0, 1).is_err());
    }
}
