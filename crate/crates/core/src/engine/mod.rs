//! End-to-end simulation of the generic protocol: state generation,
//! measurement sampling, parameter estimation, one-way reconciliation,
//! privacy amplification, and exact evaluation of Eve's information at
//! tiny `n`.
//!
//! Every random choice comes from a labeled stream of the master seed, so a
//! run is a pure function of its [`ProtocolConfig`].

mod attack;
mod eve;
mod reconcile;

pub use attack::{
    attack_state, b92_attack_state, b92_conclusive_probability, b92_orthogonal, b92_signal, bell_purification,
    eve_operator, eve_operator_joint, AttackModel, AttackState, Basis, OutcomeTable,
};
pub use eve::{eve_distance_exact, EveDistance, EXACT_EVE_MAX_N};
pub use reconcile::{
    amplify, guess_block, plan_blocks, public_messages, reconcile, BlockPlan, BlockRecord, IrParams, ReconcileStatus,
    Reconciliation, VerifyRecord, CANDIDATE_CAP, EXACT_MODE_MAX, MAX_BLOCK_BITS, WEIGHT_CAP,
};

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analyzers::{b92_general_bound, b92_rate_depolarizing, bb84_rate, six_state_rate, B92Chain, Protocol};
use crate::cinfo::{conditional_entropy, shannon, JointDist};
use crate::error::{Error, Result};
use crate::randkit::{bits_to_string, p_random_select_with, stream, PRandomSelection, SeededPermutation, ToeplitzHash};
pub(crate) use attack::sample_index;
use reconcile::bit_string;

/// Version tag written into every transcript.
pub const TRANSCRIPT_SCHEMA: u32 = 1;

/// Which of the two equivalent samplers draws Bell-diagonal outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SamplingPath {
    /// Draw a Pauli label per position and flip outcomes by the error table.
    #[default]
    PauliTable,
    /// Draw `(x, y)` from the measurement statistics of `ρ_AB`.
    Povm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub protocol: Protocol,
    pub n: usize,
    /// Sampling probability; `None` means `n^(−alpha_exponent)`.
    #[serde(default)]
    pub sampling_rate: Option<f64>,
    #[serde(default = "default_exponent")]
    pub alpha_exponent: f64,
    pub attack: AttackModel,
    pub seed: u64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_eps")]
    pub eps1: f64,
    #[serde(default = "default_eps")]
    pub eps2: f64,
    /// Subtract the entropy conditioned on the error pattern (`H(ρ|W)`).
    #[serde(default = "default_true")]
    pub conditioned: bool,
    #[serde(default)]
    pub exact_eve: bool,
    #[serde(default)]
    pub sampling: SamplingPath,
    /// Amplitude `α` of the B92 signal states `β|0⟩ ± α|1⟩`.
    #[serde(default = "default_b92_alpha")]
    pub b92_alpha: f64,
    #[serde(default)]
    pub reconciliation: IrParams,
    /// Fixed final key length; skips the `s ≤ 0` and `s′ ≤ 0` aborts.
    #[serde(default)]
    pub key_length: Option<usize>,
}

fn default_exponent() -> f64 {
    1.0 / 3.0
}

fn default_eps() -> f64 {
    1e-2
}

fn default_true() -> bool {
    true
}

fn default_b92_alpha() -> f64 {
    0.38
}

impl ProtocolConfig {
    pub fn new(protocol: Protocol, n: usize, attack: AttackModel, seed: u64) -> Self {
        Self {
            protocol,
            n,
            sampling_rate: None,
            alpha_exponent: default_exponent(),
            attack,
            seed,
            eps: default_eps(),
            eps1: default_eps(),
            eps2: default_eps(),
            conditioned: true,
            exact_eve: false,
            sampling: SamplingPath::default(),
            b92_alpha: default_b92_alpha(),
            reconciliation: IrParams::default(),
            key_length: None,
        }
    }

    /// The sampling probability `p`.
    pub fn p(&self) -> f64 {
        self.sampling_rate.unwrap_or_else(|| (self.n as f64).powf(-self.alpha_exponent))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::OutOfRange(format!("n = {} < 4", self.n)));
        }
        if !(self.alpha_exponent > 0.0 && self.alpha_exponent < 1.0) {
            return Err(Error::OutOfRange(format!("exponent {} outside (0, 1)", self.alpha_exponent)));
        }
        let p = self.p();
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::OutOfRange(format!("sampling rate p = {p} outside (0, 1)")));
        }
        for (name, e) in [("ε", self.eps), ("ε′", self.eps1), ("ε″", self.eps2)] {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::OutOfRange(format!("{name} = {e} outside (0, 1)")));
            }
        }
        self.attack.validate()?;
        match self.protocol {
            Protocol::B92 => {
                b92_attack_state(&self.attack, self.b92_alpha)?;
            }
            _ => {
                attack_state(&self.attack, self.protocol)?;
            }
        }
        if self.exact_eve {
            if self.n > EXACT_EVE_MAX_N {
                return Err(Error::TooLarge(format!("exact Eve evaluation needs n ≤ {EXACT_EVE_MAX_N}")));
            }
            if self.protocol == Protocol::B92 {
                return Err(Error::Unsupported("exact Eve evaluation covers the Bell-diagonal protocols".into()));
            }
        }
        if let Some(bits) = self.reconciliation.bits {
            if bits > MAX_BLOCK_BITS {
                return Err(Error::OutOfRange(format!("{bits} syndrome bits exceed {MAX_BLOCK_BITS}")));
            }
        }
        if !(self.reconciliation.eps_ir > 0.0 && self.reconciliation.eps_ir < 1.0) {
            return Err(Error::OutOfRange(format!("reconciliation ε = {} outside (0, 1)", self.reconciliation.eps_ir)));
        }
        Ok(())
    }
}

/// What Eve keeps, as far as the simulation records it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EveRecord {
    None,
    /// Pauli label (`0..3` for `I, σ_z, σ_x, σ_y`) applied at each position.
    PauliLabels { labels: String },
    /// Purification `Σ_k √λ_k |B_k⟩|k⟩` of every position; `dim = 4^n`.
    Purification { dim: usize, lambdas: [f64; 4] },
}

/// Raw outcome of the quantum phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurements {
    pub t: PRandomSelection,
    pub t_prime: PRandomSelection,
    pub s: PRandomSelection,
    pub alice_bases: Vec<Basis>,
    pub bob_bases: Vec<Basis>,
    /// B92: Bob's test choice per position (0 tests for bit 0).
    pub bob_choices: Vec<u8>,
    pub x: Vec<u8>,
    pub y: Vec<u8>,
    /// B92: conclusive positions.
    pub accepted: Option<PRandomSelection>,
    pub eve: EveRecord,
}

/// Draws the selections, bases and outcomes of one run.
pub fn sample_measurements(config: &ProtocolConfig) -> Result<Measurements> {
    config.validate()?;
    let n = config.n;
    let p = config.p();
    let seed = config.seed;
    if config.protocol == Protocol::B92 {
        return sample_b92(config);
    }
    let t = p_random_select_with(p, n, &mut stream(seed, "T"))?;
    let t_prime = p_random_select_with(p, n, &mut stream(seed, "T'"))?;
    let s = {
        let mut rng = stream(seed, "S");
        let in_t = t.mask();
        let included = (0..n).filter(|&i| !in_t[i] && rng.random::<f64>() < p).collect();
        PRandomSelection { p, n, included, seed: None }
    };
    let (in_t, in_tp) = (t.mask(), t_prime.mask());
    let mut bases_rng = stream(seed, "bases");
    let mut pick = |test: bool| -> Basis {
        match (test, config.protocol) {
            (false, _) => Basis::Z,
            (true, Protocol::SixState) => {
                if bases_rng.random::<bool>() {
                    Basis::Y
                } else {
                    Basis::X
                }
            }
            (true, _) => Basis::X,
        }
    };
    let mut alice_bases = Vec::with_capacity(n);
    let mut bob_bases = Vec::with_capacity(n);
    for i in 0..n {
        alice_bases.push(pick(in_t[i]));
        bob_bases.push(pick(in_tp[i]));
    }

    let AttackState::Bell { lambdas, rho_ab, .. } = attack_state(&config.attack, config.protocol)? else {
        unreachable!("Bell protocols yield Bell states")
    };
    let mut channel = stream(seed, "channel");
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut labels = String::new();
    match config.sampling {
        SamplingPath::PauliTable => {
            let mut alice = stream(seed, "alice");
            let mut bob = stream(seed, "bob");
            for i in 0..n {
                let k = sample_index(&lambdas, &mut channel);
                labels.push(char::from(b'0' + k as u8));
                let xi = alice.random::<bool>() as u8;
                let (a, b) = (alice_bases[i], bob_bases[i]);
                let yi = if a == b { xi ^ a.flipped_by(k) as u8 } else { bob.random::<bool>() as u8 };
                x.push(xi);
                y.push(yi);
            }
        }
        SamplingPath::Povm => {
            let table = OutcomeTable::new(&rho_ab)?;
            for i in 0..n {
                let (xi, yi) = table.sample(alice_bases[i], bob_bases[i], &mut channel);
                x.push(xi);
                y.push(yi);
            }
        }
    }
    let eve = if config.exact_eve {
        EveRecord::Purification { dim: 4usize.pow(n as u32), lambdas }
    } else if config.sampling == SamplingPath::PauliTable {
        EveRecord::PauliLabels { labels }
    } else {
        EveRecord::None
    };
    Ok(Measurements { t, t_prime, s, alice_bases, bob_bases, bob_choices: Vec::new(), x, y, accepted: None, eve })
}

fn sample_b92(config: &ProtocolConfig) -> Result<Measurements> {
    let (n, seed, alpha) = (config.n, config.seed, config.b92_alpha);
    let s = p_random_select_with(config.p(), n, &mut stream(seed, "S"))?;
    let AttackState::B92 { psi, .. } = b92_attack_state(&config.attack, alpha)? else {
        unreachable!("B92 attack state")
    };
    let pauli = config.attack.pauli_weights();
    let paulis = crate::qcore::pauli_matrices();
    let mut alice = stream(seed, "alice");
    let mut bases = stream(seed, "bases");
    let mut channel = stream(seed, "channel");
    let mut x = Vec::with_capacity(n);
    let mut choices = Vec::with_capacity(n);
    let mut accepted = Vec::new();
    let mut labels = String::new();
    for i in 0..n {
        let a = alice.random::<bool>() as u8;
        let m = bases.random::<bool>() as u8;
        let prob = match pauli {
            Some(lambdas) => {
                let k = sample_index(&lambdas, &mut channel);
                labels.push(char::from(b'0' + k as u8));
                let v = &paulis[k] * b92_signal(alpha, a);
                let probe = b92_orthogonal(alpha, 1 - m);
                probe.dotc(&v).norm_sqr()
            }
            None => b92_conclusive_probability(&psi[a as usize], alpha, m),
        };
        if channel.random::<f64>() < prob {
            accepted.push(i);
        }
        x.push(a);
        choices.push(m);
    }
    let eve = if pauli.is_some() { EveRecord::PauliLabels { labels } } else { EveRecord::None };
    Ok(Measurements {
        t: PRandomSelection::empty(n),
        t_prime: PRandomSelection::empty(n),
        s,
        alice_bases: Vec::new(),
        bob_bases: Vec::new(),
        y: choices.clone(),
        bob_choices: choices,
        x,
        accepted: Some(PRandomSelection::from_indices(n, accepted)?),
        eve,
    })
}

/// Why a run stopped before producing a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbortReason {
    EmptyEstimationSubset,
    NoExtractableKey,
    ReconciliationInfeasible,
    ReconciliationFailedVerification,
    KeyLengthExceedsSiftedLength,
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::EmptyEstimationSubset => "empty estimation subset",
            Self::NoExtractableKey => "no extractable key",
            Self::ReconciliationInfeasible => "reconciliation infeasible",
            Self::ReconciliationFailedVerification => "reconciliation failed verification",
            Self::KeyLengthExceedsSiftedLength => "requested key length exceeds the sifted length",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisErrors {
    pub basis: char,
    pub errors: usize,
    pub total: usize,
}

impl BasisErrors {
    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.errors as f64 / self.total as f64
        }
    }
}

/// Output of parameter estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    /// Positions behind `Q̂` (`S ∩ T̄′`, or accepted positions of `S` for B92).
    pub key_basis_samples: usize,
    /// `Q̂` on the key basis.
    pub q_hat: JointDist,
    /// Error counts on `T ∩ T′` by matching basis (with the key basis first).
    pub basis_errors: Vec<BasisErrors>,
    /// Largest observed error rate, the symmetrised `ε` of the range set.
    pub eps_sym: f64,
    pub h_x: f64,
    pub h_x_given_y: f64,
    /// `max_{ρ̂ ∈ R} S(ρ̂)` per key bit.
    pub max_entropy: f64,
    /// B92: fraction of `S` that was accepted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acceptance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b92: Option<B92Chain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub r: i64,
    pub t: i64,
    pub u: i64,
    pub s: i64,
}

fn joint_from_counts(c: [[usize; 2]; 2]) -> Result<JointDist> {
    let total = (c[0][0] + c[0][1] + c[1][0] + c[1][1]) as f64;
    JointDist::from_matrix(&[
        vec![c[0][0] as f64 / total, c[0][1] as f64 / total],
        vec![c[1][0] as f64 / total, c[1][1] as f64 / total],
    ])
}

fn box_parameters(count: f64, h_x: f64, h_xy: f64, max_s: f64) -> (i64, i64, i64, i64) {
    let r = (count * h_xy).ceil() as i64;
    let t = (count * h_x).floor() as i64;
    let u = (count * max_s).ceil() as i64;
    (r, t, u, t - r - u)
}

/// Worst-case entropy per key bit for a Bell protocol at symmetric error
/// rate `eps`, or 2 (the dimension bound) beyond the analyzers' range.
fn bell_max_entropy(protocol: Protocol, eps: f64, conditioned: bool) -> f64 {
    let report = match protocol {
        Protocol::SixState => six_state_rate(eps, conditioned),
        _ => bb84_rate(eps, conditioned),
    };
    report.map_or(2.0, |r| r.max_entropy)
}

/// Estimates `Q̂`, the range set and `r, t, u, s` from the announced data.
pub fn estimate_parameters(
    config: &ProtocolConfig,
    m: &Measurements,
) -> Result<std::result::Result<Estimate, AbortReason>> {
    if config.protocol == Protocol::B92 {
        return estimate_b92(config, m);
    }
    let n = config.n as f64;
    let e1 = m.s.minus(&m.t_prime)?;
    let mut counts = [[0usize; 2]; 2];
    for &i in &e1.included {
        counts[m.x[i] as usize][m.y[i] as usize] += 1;
    }
    let mut tested: Vec<BasisErrors> = match config.protocol {
        Protocol::SixState => vec!['X', 'Y'],
        _ => vec!['X'],
    }
    .into_iter()
    .map(|basis| BasisErrors { basis, errors: 0, total: 0 })
    .collect();
    for &i in &m.t.intersect(&m.t_prime)?.included {
        let (a, b) = (m.alice_bases[i], m.bob_bases[i]);
        if a != b {
            continue;
        }
        let slot = tested.iter_mut().find(|e| e.basis == a.letter()).expect("test basis");
        slot.total += 1;
        slot.errors += (m.x[i] != m.y[i]) as usize;
    }
    if e1.is_empty() || tested.iter().any(|e| e.total == 0) {
        return Ok(Err(AbortReason::EmptyEstimationSubset));
    }
    let key_basis = BasisErrors { basis: 'Z', errors: counts[0][1] + counts[1][0], total: e1.len() };
    let mut basis_errors = vec![key_basis];
    basis_errors.extend(tested);
    let eps_sym = basis_errors.iter().map(BasisErrors::rate).fold(0.0, f64::max);
    let q_hat = joint_from_counts(counts)?;
    let h_x = shannon(q_hat.marginal_x().probs());
    let h_x_given_y = conditional_entropy(&q_hat);
    let max_entropy = bell_max_entropy(config.protocol, eps_sym, config.conditioned);
    let (r, t, u, s) = box_parameters(n, h_x, h_x_given_y, max_entropy);
    Ok(Ok(Estimate {
        key_basis_samples: e1.len(),
        q_hat,
        basis_errors,
        eps_sym,
        h_x,
        h_x_given_y,
        max_entropy,
        acceptance: None,
        b92: None,
        note: None,
        r,
        t,
        u,
        s,
    }))
}

fn estimate_b92(config: &ProtocolConfig, m: &Measurements) -> Result<std::result::Result<Estimate, AbortReason>> {
    let accepted = m.accepted.as_ref().ok_or_else(|| Error::Empty("B92 run without acceptance record".into()))?;
    let est = m.s.intersect(accepted)?;
    if m.s.is_empty() || est.is_empty() {
        return Ok(Err(AbortReason::EmptyEstimationSubset));
    }
    let mut counts = [[0usize; 2]; 2];
    for &i in &est.included {
        counts[m.x[i] as usize][m.y[i] as usize] += 1;
    }
    let size = m.s.len() as f64;
    let same = (counts[0][0] + counts[1][1]) as f64 / (2.0 * size);
    let diff = (counts[0][1] + counts[1][0]) as f64 / (2.0 * size);
    let chain = match b92_general_bound([[same, diff], [diff, same]], config.b92_alpha, None) {
        // without observed errors γ̂ may fall below η by sampling noise alone
        Err(_) if diff == 0.0 => b92_rate_depolarizing(0.0, config.b92_alpha)
            .map(|r| (r, Some("no errors observed; using the noiseless chain".to_string()))),
        other => other.map(|r| (r, None)),
    };
    let (b92, max_entropy, note) = match chain {
        Ok((report, note)) => (report.b92, report.max_entropy, note),
        Err(e) => (None, 1.0, Some(format!("overlap chain unavailable ({e}); using S ≤ 1"))),
    };
    let errors = counts[0][1] + counts[1][0];
    let q_hat = joint_from_counts(counts)?;
    let h_x = shannon(q_hat.marginal_x().probs());
    let h_x_given_y = conditional_entropy(&q_hat);
    let acceptance = est.len() as f64 / size;
    let (r, t, u, s) = box_parameters(config.n as f64 * acceptance, h_x, h_x_given_y, max_entropy);
    let key_basis = BasisErrors { basis: 'Z', errors, total: est.len() };
    let eps_sym = key_basis.rate();
    Ok(Ok(Estimate {
        key_basis_samples: est.len(),
        q_hat,
        basis_errors: vec![key_basis],
        eps_sym,
        h_x,
        h_x_given_y,
        max_entropy,
        acceptance: Some(acceptance),
        b92,
        note,
        r,
        t,
        u,
        s,
    }))
}

/// Publicly announced data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Announcement {
    /// `S ∪ T`, with Alice's outcomes there.
    pub alice_positions: Vec<usize>,
    pub alice_bits: String,
    /// Bob's outcomes on the estimation positions.
    pub bob_positions: Vec<usize>,
    pub bob_bits: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Amplification {
    pub permutation: SeededPermutation,
    pub hash: Option<ToeplitzHash>,
    pub s_prime: usize,
}

/// Everything a run produced, in protocol order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub schema: u32,
    pub config: ProtocolConfig,
    pub p: f64,
    pub t: Vec<usize>,
    pub t_prime: Vec<usize>,
    pub s: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accepted: Option<Vec<usize>>,
    pub alice_bases: String,
    pub bob_bases: String,
    #[serde(with = "bit_string")]
    pub x: Vec<u8>,
    #[serde(with = "bit_string")]
    pub y: Vec<u8>,
    pub announced: Announcement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<Estimate>,
    pub key_positions: Vec<usize>,
    pub n_prime: usize,
    #[serde(with = "bit_string")]
    pub x_prime: Vec<u8>,
    #[serde(with = "bit_string")]
    pub y_prime: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconciliation: Option<Reconciliation>,
    /// `r′`, the number of public reconciliation bits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_prime: Option<usize>,
    /// `s′` as given by the formula, before any key-length override.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_prime_formula: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplification: Option<Amplification>,
    #[serde(with = "bit_string")]
    pub key_alice: Vec<u8>,
    #[serde(with = "bit_string")]
    pub key_bob: Vec<u8>,
    pub eve: EveRecord,
    pub aborted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abort_reason: Option<AbortReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abort_message: Option<String>,
}

impl Transcript {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if t.schema != TRANSCRIPT_SCHEMA {
            return Err(Error::Unsupported(format!("transcript schema {}", t.schema)));
        }
        Ok(t)
    }

    /// Final key length `s′` (0 when aborted).
    pub fn s_prime(&self) -> usize {
        self.amplification.as_ref().map_or(0, |a| a.s_prime)
    }

    pub fn keys_agree(&self) -> bool {
        self.key_alice == self.key_bob
    }

    fn abort(&mut self, reason: AbortReason) {
        self.aborted = true;
        self.abort_reason = Some(reason);
        self.abort_message = Some(reason.to_string());
    }
}

fn bases_string(bases: &[Basis]) -> String {
    bases.iter().map(|b| b.letter()).collect()
}

fn pick(bits: &[u8], idx: &[usize]) -> Vec<u8> {
    idx.iter().map(|&i| bits[i]).collect()
}

/// Runs every phase of the protocol. Aborts are recorded in the transcript;
/// only invalid configurations return an error.
pub fn run_protocol(config: &ProtocolConfig) -> Result<Transcript> {
    let m = sample_measurements(config)?;
    let n = config.n;
    let is_b92 = config.protocol == Protocol::B92;

    let (alice_positions, bob_positions) = if is_b92 {
        let acc = m.accepted.as_ref().expect("B92 acceptance");
        (m.s.included.clone(), m.s.intersect(acc)?.included)
    } else {
        let mut bob = m.s.minus(&m.t_prime)?.included;
        bob.extend(m.t.intersect(&m.t_prime)?.included);
        bob.sort_unstable();
        (m.s.union(&m.t)?.included, bob)
    };
    let announced = Announcement {
        alice_bits: bits_to_string(&pick(&m.x, &alice_positions)),
        alice_positions,
        bob_bits: bits_to_string(&pick(&m.y, &bob_positions)),
        bob_positions,
    };
    let key_positions: Vec<usize> = if is_b92 {
        m.accepted.as_ref().expect("B92 acceptance").minus(&m.s)?.included
    } else {
        m.s.union(&m.t)?.union(&m.t_prime)?.complement().included
    };
    let x_prime = pick(&m.x, &key_positions);
    let y_prime = pick(&m.y, &key_positions);
    let mut tr = Transcript {
        schema: TRANSCRIPT_SCHEMA,
        config: config.clone(),
        p: config.p(),
        t: m.t.included.clone(),
        t_prime: m.t_prime.included.clone(),
        s: m.s.included.clone(),
        accepted: m.accepted.as_ref().map(|a| a.included.clone()),
        alice_bases: if is_b92 { String::new() } else { bases_string(&m.alice_bases) },
        bob_bases: if is_b92 { bits_to_string(&m.bob_choices) } else { bases_string(&m.bob_bases) },
        x: m.x.clone(),
        y: m.y.clone(),
        announced,
        estimate: None,
        n_prime: key_positions.len(),
        key_positions,
        x_prime,
        y_prime,
        reconciliation: None,
        r_prime: None,
        s_prime_formula: None,
        amplification: None,
        key_alice: Vec::new(),
        key_bob: Vec::new(),
        eve: m.eve.clone(),
        aborted: false,
        abort_reason: None,
        abort_message: None,
    };
    debug_assert!(is_b92 || tr.n_prime == n - m.s.union(&m.t)?.union(&m.t_prime)?.len());

    let est = match estimate_parameters(config, &m)? {
        Ok(e) => e,
        Err(reason) => {
            tr.abort(reason);
            return Ok(tr);
        }
    };
    let (est_s, h_x, max_s) = (est.s, est.h_x, est.max_entropy);
    let ir_qber = est.basis_errors[0].rate();
    tr.estimate = Some(est);
    if est_s <= 0 && config.key_length.is_none() {
        tr.abort(AbortReason::NoExtractableKey);
        return Ok(tr);
    }

    let n_prime = tr.n_prime;
    let plan = plan_blocks(n_prime, ir_qber, &config.reconciliation)?;
    let verify_bits = config.reconciliation.verify_bits.min(n_prime);
    let r_prime: usize = plan.iter().map(|b| b.bits).sum::<usize>() + verify_bits;
    let formula =
        (n_prime as f64 * h_x).floor() as i64 - r_prime as i64 - (n_prime as f64 * max_s).ceil() as i64;
    tr.r_prime = Some(r_prime);
    tr.s_prime_formula = Some(formula);
    let s_prime = match config.key_length {
        Some(l) if l > n_prime => {
            tr.abort(AbortReason::KeyLengthExceedsSiftedLength);
            return Ok(tr);
        }
        Some(l) => l,
        None if formula <= 0 => {
            tr.abort(AbortReason::NoExtractableKey);
            return Ok(tr);
        }
        None => formula as usize,
    };

    let rec = reconcile(&tr.x_prime, &tr.y_prime, &plan, verify_bits, &mut stream(config.seed, "ir hash"))?;
    let status = rec.status;
    let x_bar = rec.x_bar.clone();
    tr.reconciliation = Some(rec);
    match status {
        ReconcileStatus::Ok => {}
        ReconcileStatus::Infeasible => {
            tr.abort(AbortReason::ReconciliationInfeasible);
            return Ok(tr);
        }
        ReconcileStatus::VerificationFailed => {
            tr.abort(AbortReason::ReconciliationFailedVerification);
            return Ok(tr);
        }
    }

    let permutation = SeededPermutation::random(n_prime, &mut stream(config.seed, "permutation"));
    let hash = if s_prime > 0 {
        Some(ToeplitzHash::random(n_prime, s_prime, &mut stream(config.seed, "pa hash"))?)
    } else {
        None
    };
    tr.key_alice = amplify(&tr.x_prime, &permutation, hash.as_ref())?;
    tr.key_bob = amplify(&x_bar, &permutation, hash.as_ref())?;
    tr.amplification = Some(Amplification { permutation, hash, s_prime });
    Ok(tr)
}
