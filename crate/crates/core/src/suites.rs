//! Numerical verification suites: Monte-Carlo and exhaustive checks of the
//! sampling, hashing, smoothing and privacy-amplification statements, each
//! rendered as a [`BoundReport`].

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analyzers::Protocol;
use crate::bounds::{
    chain_rule_bound, freq_sampling_bound, hinf_exchangeable, ir_failure_bound, quanttom_bound, BoundReport,
};
use crate::cinfo::{
    l1_half, smooth_min_entropy_cond, smooth_renyi, variational_distance, JointDist, Order, ProbDist,
};
use crate::engine::{
    eve_distance_exact, guess_block, run_protocol, sample_index, AttackModel, Basis, IrParams, OutcomeTable,
    ProtocolConfig, Transcript,
};
use crate::error::{Error, Result};
use crate::qcore::random::{random_basis_povm, random_density};
use crate::qcore::{bell_diagonal_state, measure, schur_check, steer_to_distribution, trace_distance};
use crate::randkit::{collision_probability_exhaustive, stream, ToeplitzHash, COLLISION_CAP_IN};

/// Which group of checks to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Lemmas,
    Hashing,
    Smooth,
    Pa,
    All,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lemmas" => Ok(Suite::Lemmas),
            "hashing" => Ok(Suite::Hashing),
            "smooth" => Ok(Suite::Smooth),
            "pa" => Ok(Suite::Pa),
            "all" => Ok(Suite::All),
            other => Err(Error::Parse(format!("unknown suite {other:?} (lemmas, hashing, smooth, pa, all)"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Lemmas => "lemmas",
            Suite::Hashing => "hashing",
            Suite::Smooth => "smooth",
            Suite::Pa => "pa",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    /// Monte-Carlo trials / random instances per check. Zero keeps only
    /// the exhaustive and exact checks.
    pub trials: usize,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { trials: 1000, seed: 0 }
    }
}

pub fn run_suite(suite: Suite, opts: SuiteOptions) -> Result<Vec<BoundReport>> {
    match suite {
        Suite::Lemmas => lemmas(opts),
        Suite::Hashing => hashing(),
        Suite::Smooth => smooth(opts),
        Suite::Pa => pa(opts),
        Suite::All => {
            let mut out = lemmas(opts)?;
            out.extend(hashing()?);
            out.extend(smooth(opts)?);
            out.extend(pa(opts)?);
            Ok(out)
        }
    }
}

/// `ε` at which `2^k e^{−nε²/c} = target`.
fn eps_for(k: usize, n: usize, c: f64, target: f64) -> f64 {
    (c * ((k as f64) * std::f64::consts::LN_2 - target.ln()) / n as f64).sqrt()
}

fn lemmas(opts: SuiteOptions) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    if opts.trials > 0 {
        for n in [100, 1000] {
            out.push(frequency_sampling(n, opts)?);
        }
        out.push(two_povm_tomography(opts)?);
    }
    out.push(exchangeable()?);
    if opts.trials > 0 {
        out.push(reconciliation_failure(opts)?);
        out.push(chain_rule(opts)?);
        out.extend(measurement_lemmas(opts)?);
    }
    Ok(out)
}

/// Frequency of `n` i.i.d. draws from a fixed three-symbol source leaving
/// the `ε`-ball around it.
pub fn frequency_sampling(n: usize, opts: SuiteOptions) -> Result<BoundReport> {
    let p = ProbDist::from_probs(vec![0.5, 0.3, 0.2])?;
    let q = p.len();
    let eps = eps_for(q, n, 2.0, 0.05);
    let bound = freq_sampling_bound(q, n, eps)?;
    let mut rng = stream(opts.seed, &format!("freq/{n}"));
    let mut violations = 0usize;
    let mut counts = vec![0usize; q];
    for _ in 0..opts.trials {
        counts.iter_mut().for_each(|c| *c = 0);
        for _ in 0..n {
            counts[sample_index(p.probs(), &mut rng)] += 1;
        }
        let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        if l1_half(&freq, p.probs()) > eps {
            violations += 1;
        }
    }
    let rate = violations as f64 / opts.trials as f64;
    Ok(BoundReport::probability(
        "frequency-sampling",
        &[("n", n as f64), ("q", q as f64), ("eps", eps), ("trials", opts.trials as f64)],
        bound,
    )
    .with_empirical(rate, 0.0))
}

/// Z⊗Z and X⊗X statistics of `n` copies of a Bell-diagonal state on a
/// random half/half split, compared jointly with the true distributions.
pub fn two_povm_tomography(opts: SuiteOptions) -> Result<BoundReport> {
    let n = 512;
    let p = 0.5;
    let lambdas = [0.85, 0.05, 0.05, 0.05];
    let table = OutcomeTable::new(&bell_diagonal_state(lambdas)?)?;
    let pz = table.joint(Basis::Z, Basis::Z).probs().to_vec();
    let px = table.joint(Basis::X, Basis::X).probs().to_vec();
    let eps = eps_for(8, n, 8.0, 0.05);
    let bound = quanttom_bound(4, 4, n, eps)?;
    let mut rng = stream(opts.seed, "quanttom");
    let mut violations = 0usize;
    for _ in 0..opts.trials {
        let mut cz = [0usize; 4];
        let mut cx = [0usize; 4];
        for _ in 0..n {
            if rng.random::<f64>() < p {
                cz[sample_index(&pz, &mut rng)] += 1;
            } else {
                cx[sample_index(&px, &mut rng)] += 1;
            }
        }
        let dist = |c: &[usize; 4], truth: &[f64]| {
            let total: usize = c.iter().sum();
            if total == 0 {
                return 1.0;
            }
            let freq: Vec<f64> = c.iter().map(|&k| k as f64 / total as f64).collect();
            l1_half(&freq, truth)
        };
        if p * dist(&cz, &pz) + (1.0 - p) * dist(&cx, &px) > eps {
            violations += 1;
        }
    }
    let rate = violations as f64 / opts.trials as f64;
    Ok(BoundReport::probability(
        "two-povm-tomography",
        &[("n", n as f64), ("p", p), ("eps", eps), ("trials", opts.trials as f64)],
        bound,
    )
    .with_empirical(rate, 0.0))
}

/// Exact min-entropy of a random ordering against the closed-form lower
/// bound, for every binary type with `n ≤ 20`; reports the tightest case.
pub fn exchangeable() -> Result<BoundReport> {
    let mut worst: Option<(f64, f64, usize, usize)> = None;
    for n in 1..=20usize {
        for k in 0..=n {
            let q = ProbDist::binary(k as f64 / n as f64)?;
            let ex = hinf_exchangeable(n, &q, true)?;
            let exact = ex.exact.expect("integral counts");
            if worst.is_none_or(|(b, e, _, _)| exact - ex.bound < e - b) {
                worst = Some((ex.bound, exact, n, k));
            }
        }
    }
    let (bound, exact, n, k) = worst.expect("nonempty range");
    Ok(BoundReport::entropy_lower("exchangeable-min-entropy", &[("n", n as f64), ("k", k as f64)], bound)
        .with_empirical(exact, 1e-9)
        .with_note("tightest binary type over n ≤ 20"))
}

/// Brute-force decoding of 16-bit blocks through a binary symmetric
/// channel with 14 syndrome bits.
pub fn reconciliation_failure(opts: SuiteOptions) -> Result<BoundReport> {
    let n = 16usize;
    let e: f64 = 0.05;
    let s = 14usize;
    let eps = 0.01;
    // smooth max-entropy of the error pattern given Bob's string
    let probs: Vec<f64> = (0u32..1 << n)
        .map(|code| {
            let w = code.count_ones() as i32;
            e.powi(w) * (1.0 - e).powi(n as i32 - w)
        })
        .collect();
    let r = smooth_renyi(&ProbDist::from_probs(probs)?, Order::ZERO, eps)?;
    let bound = ir_failure_bound(r, s as f64, eps)?;
    let mut rng = stream(opts.seed, "infrec");
    let mut failures = 0usize;
    for _ in 0..opts.trials {
        let x: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
        let y: Vec<u8> = x.iter().map(|b| b ^ u8::from(rng.random::<f64>() < e)).collect();
        let hash = ToeplitzHash::random(n, s, &mut rng)?;
        let syndrome = hash.apply(&x)?;
        let (guess, _) = guess_block(&y, Some(&hash), &syndrome)?;
        if guess.as_deref() != Some(&x[..]) {
            failures += 1;
        }
    }
    let rate = failures as f64 / opts.trials as f64;
    Ok(BoundReport::probability(
        "reconciliation-failure",
        &[("n", n as f64), ("qber", e), ("r", r), ("s", s as f64), ("eps", eps), ("trials", opts.trials as f64)],
        bound,
    )
    .with_empirical(rate, 0.0))
}

fn random_probs<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

/// `H^{ε+ε′+ε″}_∞(Z|W) ≥ H^ε_∞(ZW) − H^{ε′}_0(W) − log(1/ε″)` on random
/// joints with alphabets ≤ 3; reports the smallest slack.
pub fn chain_rule(opts: SuiteOptions) -> Result<BoundReport> {
    let mut rng = stream(opts.seed, "hinfsub");
    let instances = opts.trials.min(300);
    let mut worst: Option<(f64, f64)> = None;
    for _ in 0..instances {
        let (nz, nw) = (rng.random_range(2..4usize), rng.random_range(2..4usize));
        let pzw = JointDist::from_matrix(
            &random_probs(nz * nw, &mut rng).chunks(nw).map(<[f64]>::to_vec).collect::<Vec<_>>(),
        )?;
        let e = rng.random_range(0.0..0.1);
        let e1 = rng.random_range(0.0..0.1);
        let e2 = rng.random_range(0.05..0.5);
        let joint = smooth_renyi(&pzw.as_prob_dist(), Order::Infinity, e)?;
        let side = smooth_renyi(&pzw.marginal_y(), Order::ZERO, e1)?;
        let rhs = chain_rule_bound(joint, side, e2)?;
        let lhs = smooth_min_entropy_cond(&pzw, (e + e1 + e2).min(0.999))?;
        if worst.is_none_or(|(b, v)| lhs - rhs < v - b) {
            worst = Some((rhs, lhs));
        }
    }
    let (bound, value) = worst.unwrap_or((0.0, 0.0));
    Ok(BoundReport::entropy_lower("chain-rule", &[("instances", instances as f64)], bound)
        .with_empirical(value, 1e-7)
        .with_note("smallest slack over random joints"))
}

/// Contraction of the trace distance under measurement, Schur
/// majorisation and the steering construction on random small instances.
pub fn measurement_lemmas(opts: SuiteOptions) -> Result<Vec<BoundReport>> {
    let mut rng = stream(opts.seed, "measurement");
    let mut contraction_violations = 0usize;
    let mut schur_violations = 0usize;
    let mut worst_contraction = f64::NEG_INFINITY;
    for t in 0..opts.trials {
        let d = 2 + t % 3;
        let rho = random_density(d, 1 + t % d, &mut rng)?;
        let sigma = random_density(d, d, &mut rng)?;
        let f = random_basis_povm(d, &mut rng)?;
        let lhs = variational_distance(&measure(&rho, &f)?, &measure(&sigma, &f)?)?;
        let gap = lhs - trace_distance(&rho, &sigma)?;
        worst_contraction = worst_contraction.max(gap);
        if gap > 1e-10 {
            contraction_violations += 1;
        }
        if !schur_check(&rho, &f)? {
            schur_violations += 1;
        }
    }
    let mut steer_violations = 0usize;
    let mut worst_match = 0.0f64;
    for t in 0..opts.trials {
        let d = 2 + t % 2;
        let rho = random_density(d, 1 + t % d, &mut rng)?;
        let f = random_basis_povm(d, &mut rng)?;
        let q = ProbDist::new(f.labels().to_vec(), random_probs(d, &mut rng))?;
        let sigma = steer_to_distribution(&rho, &f, &q)?;
        let got = measure(&sigma, &f)?;
        let mismatch = got.probs().iter().zip(q.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst_match = worst_match.max(mismatch);
        let p = measure(&rho, &f)?;
        let bound = (2.0f64 * variational_distance(&p, &q)?).sqrt();
        if mismatch > 1e-10 || trace_distance(&rho, &sigma)? > bound + 1e-9 {
            steer_violations += 1;
        }
    }
    let trials = opts.trials as f64;
    Ok(vec![
        BoundReport::probability("measurement-contraction", &[("instances", trials)], 0.0)
            .with_empirical(contraction_violations as f64, 0.0)
            .with_note(format!("largest δ(P,Q) − δ(ρ,σ): {worst_contraction:.3e}")),
        BoundReport::probability("schur-majorization", &[("instances", trials)], 0.0)
            .with_empirical(schur_violations as f64, 0.0),
        BoundReport::probability("steering", &[("instances", trials)], 0.0)
            .with_empirical(steer_violations as f64, 0.0)
            .with_note(format!("largest outcome mismatch: {worst_match:.3e}")),
    ])
}

/// Collision probability of the Toeplitz family for every
/// `1 ≤ n_out ≤ n_in ≤ 10`, compared exactly with `2^{−n_out}`.
pub fn hashing() -> Result<Vec<BoundReport>> {
    let mut mismatched = Vec::new();
    let mut pairs = 0usize;
    for n_in in 1..=COLLISION_CAP_IN {
        for n_out in 1..=n_in {
            pairs += 1;
            let p = collision_probability_exhaustive(n_in, n_out)?;
            if p != 2f64.powi(-(n_out as i32)) {
                mismatched.push(format!("({n_in},{n_out}): {p}"));
            }
        }
    }
    let mut report = BoundReport::probability(
        "two-universal-collision",
        &[("n_in_max", COLLISION_CAP_IN as f64), ("pairs", pairs as f64)],
        0.0,
    )
    .with_empirical(mismatched.len() as f64, 0.0);
    if !mismatched.is_empty() {
        report = report.with_note(format!("collision probability differs from 2^-n_out at {}", mismatched.join(", ")));
    }
    Ok(vec![report])
}

/// Exhaustive `H^ε_∞` optimum for alphabets ≤ 3: the best vertex of the
/// polygon `{Q : δ(P,Q) ≤ ε}` cut by the level lines of `max Q`.
pub fn hinf_oracle(p: &[f64], eps: f64) -> f64 {
    match p.len() {
        1 => 0.0,
        2 => {
            let best = [0.0, 1.0, 0.5, p[0] - eps, p[0] + eps]
                .into_iter()
                .filter(|x| (0.0..=1.0).contains(x) && (x - p[0]).abs() <= eps + 1e-12)
                .map(|x: f64| x.max(1.0 - x))
                .fold(f64::INFINITY, f64::min);
            -best.log2()
        }
        3 => {
            let mut lines: Vec<(f64, f64, f64)> = vec![
                (1.0, 0.0, 0.0),
                (0.0, 1.0, 0.0),
                (1.0, 1.0, 1.0),
                (1.0, 0.0, p[0]),
                (0.0, 1.0, p[1]),
                (1.0, 1.0, 1.0 - p[2]),
                (1.0, -1.0, 0.0),
                (2.0, 1.0, 1.0),
                (1.0, 2.0, 1.0),
            ];
            for s in 0..8 {
                let sg = |k: usize| if s >> k & 1 == 1 { 1.0 } else { -1.0 };
                let (s1, s2, s3) = (sg(0), sg(1), sg(2));
                lines.push((s1 - s3, s2 - s3, 2.0 * eps + s1 * p[0] + s2 * p[1] - s3 * (1.0 - p[2])));
            }
            let mut best = f64::INFINITY;
            for i in 0..lines.len() {
                for j in i + 1..lines.len() {
                    let (a1, b1, c1) = lines[i];
                    let (a2, b2, c2) = lines[j];
                    let det = a1 * b2 - a2 * b1;
                    if det.abs() < 1e-14 {
                        continue;
                    }
                    let x = (c1 * b2 - c2 * b1) / det;
                    let y = (a1 * c2 - a2 * c1) / det;
                    let q = [x, y, 1.0 - x - y];
                    if q.iter().any(|v| *v < -1e-12) || l1_half(&q, p) > eps + 1e-12 {
                        continue;
                    }
                    best = best.min(q.iter().copied().fold(0.0, f64::max));
                }
            }
            -best.log2()
        }
        k => panic!("oracle covers alphabets up to 3, got {k}"),
    }
}

/// `log` of the smallest support of any subset with mass ≥ 1−ε.
pub fn h0_oracle(p: &[f64], eps: f64) -> f64 {
    let n = p.len();
    let mut best = n;
    for mask in 1u32..(1 << n) {
        let mass: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| p[i]).sum();
        if mass >= 1.0 - eps - 1e-12 {
            best = best.min(mask.count_ones() as usize);
        }
    }
    (best as f64).log2()
}

fn smooth(opts: SuiteOptions) -> Result<Vec<BoundReport>> {
    let instances = if opts.trials == 0 { 0 } else { opts.trials.max(1000) };
    let mut rng = stream(opts.seed, "smooth");
    let (mut dev_inf, mut dev_zero) = (0.0f64, 0.0f64);
    for _ in 0..instances {
        let k = rng.random_range(2..4usize);
        let p = random_probs(k, &mut rng);
        let eps = rng.random_range(0.0..0.6);
        let dist = ProbDist::from_probs(p.clone())?;
        dev_inf = dev_inf.max((smooth_renyi(&dist, Order::Infinity, eps)? - hinf_oracle(&p, eps)).abs());
        dev_zero = dev_zero.max((smooth_renyi(&dist, Order::ZERO, eps)? - h0_oracle(&p, eps)).abs());
    }
    let inputs = [("instances", instances as f64)];
    Ok(vec![
        BoundReport::entropy_upper("smooth-min-entropy-oracle", &inputs, 1e-6).with_empirical(dev_inf, 0.0),
        BoundReport::entropy_upper("smooth-max-entropy-oracle", &inputs, 1e-6).with_empirical(dev_zero, 0.0),
    ])
}

/// First completed `n = 4` run with exact Eve tracking and at least two
/// sifted bits, searching seeds derived from `seed`.
pub fn exact_eve_run(lambdas: [f64; 4], seed: u64, ir_bits: usize) -> Result<Transcript> {
    let mut rng = stream(seed, "pa seeds");
    for _ in 0..10_000 {
        // 53-bit seeds survive the f64 report inputs exactly
        let derived = rng.random::<u64>() >> 11;
        let mut config = ProtocolConfig::new(Protocol::Bb84, 4, AttackModel::BellDiagonal { lambdas }, derived);
        config.exact_eve = true;
        config.sampling_rate = Some(0.5);
        config.key_length = Some(1);
        config.reconciliation = IrParams { bits: Some(ir_bits), verify_bits: 0, ..IrParams::default() };
        let t = run_protocol(&config)?;
        if !t.aborted && t.n_prime >= 2 {
            return Ok(t);
        }
    }
    Err(Error::Infeasible("no completed run among 10000 derived seeds".into()))
}

/// Exact distance of a one-bit key from uniform when Eve holds nothing:
/// 0 for a nonzero hash row and ½ for the all-zero one.
pub fn pure_state_distance(t: &Transcript) -> Option<f64> {
    let amp = t.amplification.as_ref()?;
    if amp.s_prime != 1 {
        return None;
    }
    let nonzero = amp.hash.as_ref().is_some_and(|h| h.diag.contains(&1));
    Some(if nonzero { 0.0 } else { 0.5 })
}

fn pa(opts: SuiteOptions) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    let noisy = [0.85, 0.05, 0.05, 0.05];
    for bits in [0, 1] {
        let t = exact_eve_run(noisy, opts.seed, bits)?;
        let attack = AttackModel::BellDiagonal { lambdas: noisy };
        let mut report = eve_distance_exact(&t, &attack)?.bound;
        report.inputs.insert("seed".into(), t.config.seed as f64);
        report.inputs.insert("ir_bits".into(), bits as f64);
        out.push(report);
    }
    let pure = [1.0, 0.0, 0.0, 0.0];
    let t = exact_eve_run(pure, opts.seed, 0)?;
    let d = eve_distance_exact(&t, &AttackModel::BellDiagonal { lambdas: pure })?;
    let expected = pure_state_distance(&t).ok_or_else(|| Error::Infeasible("pure-state run without a 1-bit key".into()))?;
    let mut report = BoundReport::probability(
        "privacy-amplification-pure",
        &[("seed", t.config.seed as f64), ("n_prime", d.n_prime as f64)],
        expected,
    )
    .with_empirical(d.distance, 1e-12)
    .with_note("expected 0 unless the hash row is all zero");
    report.satisfied = (d.distance - expected).abs() <= 1e-12;
    out.push(report);
    Ok(out)
}
