//! Asymptotic key rates and noise thresholds for BB84, six-state and B92.
//!
//! Rates follow `R = I(X;Y) − max S(ρ̂)` over the states compatible with the
//! observed statistics. For the Bell-diagonal protocols the worst case is
//! searched numerically; for B92 the bound comes from the overlap chain of
//! Eve's environment states.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cinfo::{h2, shannon};
use crate::error::{Error, Result};

/// Supported prepare-and-measure protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Bb84,
    #[serde(alias = "six_state")]
    SixState,
    B92,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Bb84 => "bb84",
            Protocol::SixState => "six-state",
            Protocol::B92 => "b92",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bb84" => Ok(Protocol::Bb84),
            "six-state" | "six_state" | "sixstate" => Ok(Protocol::SixState),
            "b92" => Ok(Protocol::B92),
            other => Err(Error::Parse(format!("unknown protocol {other:?}"))),
        }
    }
}

/// What the noise parameter of a report measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// Bit error rate on sifted positions.
    Qber,
    /// Depolarizing probability of the channel.
    Depolarizing,
    /// Acceptance statistics `p_xy` given directly.
    Observed,
}

/// Scalar products and derived quantities of the B92 estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct B92Chain {
    pub alpha: f64,
    pub beta: f64,
    /// `4 p₀₁`, twice the probability of an accepted error per bit value.
    pub delta: f64,
    /// `4 p₀₀`.
    pub gamma: f64,
    /// `(2αβ)²`.
    pub eta: f64,
    /// `(1−δ)(1−η)/(4δη)`; absent when `δ = 0`.
    pub nu: Option<f64>,
    /// `Re⟨e±|ẽ±⟩`, estimated from the acceptance probability.
    pub re_cross: f64,
    /// Lower bound on `⟨e₊|e₋⟩`.
    pub e_overlap: f64,
    /// Resulting bound on `⟨f₊|f₋⟩`.
    pub f_overlap: f64,
    /// Eigenvalue `(1 + ⟨f₊|f₋⟩)/2` entering `h(x)`.
    pub x: f64,
    /// Error rate conditioned on acceptance.
    pub eps: f64,
    /// Probability that Bob accepts.
    pub acceptance: f64,
    /// Entropy bound `h(x)` on Eve's state for correct bits.
    pub s_sigma: f64,
    /// Entropy bound on Eve's state for erroneous bits (the trivial one).
    pub s_sigma_tilde: f64,
    /// Unitarity constraint evaluated at the worst case (`⟨ẽ₊|ẽ₋⟩ = −1`).
    pub unitarity_residual: f64,
    /// The overlap lower bound is negative, so `|⟨f₊|f₋⟩|` is not bounded away
    /// from zero and `h(x)` is not a valid upper bound on `S(σ)`.
    pub f_sign_ambiguous: bool,
}

/// Key rate with the worst-case quantities behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub protocol: Protocol,
    pub noise_kind: NoiseKind,
    pub noise: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub conditioned: bool,
    pub rate: f64,
    /// `I(X;Y)` per sifted bit (per accepted bit for B92).
    pub mutual_information: f64,
    /// Maximal adversarial entropy subtracted from the mutual information.
    pub max_entropy: f64,
    /// Worst-case Bell weights `λ₁..λ₄`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b92: Option<B92Chain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

/// Result of a threshold search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub protocol: Protocol,
    pub conditioned: bool,
    pub noise_kind: NoiseKind,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub tolerance: f64,
    pub bracket: [f64; 2],
    /// The rate equation whose root is reported.
    pub equation: String,
}

/// Tolerance of the worst-case search over `λ₄`.
pub const MAXIMIZER_TOL: f64 = 1e-12;
/// Tolerance of threshold bisections.
pub const THRESHOLD_TOL: f64 = 1e-6;
pub const BELL_BRACKET: [f64; 2] = [1e-6, 0.4999];
pub const B92_BRACKET: [f64; 2] = [1e-6, 0.24];
pub const B92_ALPHA_STEP: f64 = 0.005;
const X_SLACK: f64 = 1e-6;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal function.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let candidates = [(lo, f(lo)), (x1, f1), (x2, f2), (hi, f(hi))];
    candidates.into_iter().fold((lo, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best })
}

/// Root of `f` in `[lo, hi]` by bisection; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect_root(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let (a, b) = (lo, hi);
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoSignChange { lo: a, hi: b });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_qber(eps: f64, max: f64) -> Result<()> {
    if !(0.0..max).contains(&eps) {
        return Err(Error::OutOfRange(format!("error rate {eps} outside [0, {max})")));
    }
    Ok(())
}

/// BB84 Bell weights with error rate `ε` in both bases and free `λ₄`.
pub fn bb84_lambdas(eps: f64, l4: f64) -> [f64; 4] {
    [1.0 - 2.0 * eps + l4, eps - l4, eps - l4, l4]
}

/// Entropy of Eve's purification after conditioning on `W = X ⊕ Y`.
pub fn bb84_conditioned_entropy(eps: f64, l4: f64) -> f64 {
    let keep = if eps < 1.0 { (1.0 - eps) * h2((1.0 - 2.0 * eps + l4) / (1.0 - eps)) } else { 0.0 };
    let flip = if eps > 0.0 { eps * h2((eps - l4) / eps) } else { 0.0 };
    keep + flip
}

/// BB84 rate at bit error rate `ε`; the worst case over `λ₄ ∈ [0, ε]` is
/// found by golden-section search.
pub fn bb84_rate(eps: f64, conditioned: bool) -> Result<RateReport> {
    check_qber(eps, 0.5)?;
    let objective = |l4: f64| {
        if conditioned {
            bb84_conditioned_entropy(eps, l4)
        } else {
            shannon(&bb84_lambdas(eps, l4))
        }
    };
    let (l4, max) = golden_max(objective, 0.0, eps, MAXIMIZER_TOL);
    let mi = 1.0 - h2(eps);
    Ok(RateReport {
        protocol: Protocol::Bb84,
        noise_kind: NoiseKind::Qber,
        noise: eps,
        alpha: None,
        conditioned,
        rate: mi - max,
        mutual_information: mi,
        max_entropy: max,
        lambdas: Some(bb84_lambdas(eps, l4)),
        b92: None,
        threshold: None,
    })
}

/// Six-state rate; the constraints fix `λ = (1 − 3ε/2, ε/2, ε/2, ε/2)`.
pub fn six_state_rate(eps: f64, conditioned: bool) -> Result<RateReport> {
    check_qber(eps, 2.0 / 3.0)?;
    let lambdas = [1.0 - 1.5 * eps, eps / 2.0, eps / 2.0, eps / 2.0];
    let h4 = shannon(&lambdas);
    let max = if conditioned { h4 - h2(eps) } else { h4 };
    let mi = 1.0 - h2(eps);
    Ok(RateReport {
        protocol: Protocol::SixState,
        noise_kind: NoiseKind::Qber,
        noise: eps,
        alpha: None,
        conditioned,
        rate: mi - max,
        mutual_information: mi,
        max_entropy: max,
        lambdas: Some(lambdas),
        b92: None,
        threshold: None,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < std::f64::consts::FRAC_1_SQRT_2) {
        return Err(Error::OutOfRange(format!("α = {alpha} outside (0, 1/√2)")));
    }
    Ok(())
}

/// Acceptance statistics `(p₀₀, p₀₁)` of B92 through a depolarizing channel.
pub fn b92_depolarizing_stats(p: f64, alpha: f64) -> (f64, f64) {
    let eta = (2.0 * alpha * (1.0 - alpha * alpha).sqrt()).powi(2);
    let delta = 2.0 * p / 3.0;
    (0.25 * ((1.0 - 2.0 * delta) * eta + delta), p / 6.0)
}

/// `γ` predicted from `δ` and `Re⟨e±|ẽ±⟩`.
pub fn b92_accprob(alpha: f64, delta: f64, re_cross: f64) -> f64 {
    let beta = (1.0 - alpha * alpha).sqrt();
    let ab = 2.0 * alpha * beta;
    (1.0 - 2.0 * delta) * ab * ab + 2.0 * ((1.0 - delta) * delta).sqrt() * ab * (alpha * alpha - beta * beta) * re_cross
        + delta
}

/// The B92 estimation chain for given `δ`, `γ` and `Re⟨e±|ẽ±⟩ = c`.
pub fn b92_chain(alpha: f64, delta: f64, gamma: f64, re_cross: f64) -> Result<B92Chain> {
    check_alpha(alpha)?;
    if !(0.0..=1.0).contains(&delta) || !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::OutOfRange(format!("δ = {delta}, γ = {gamma} must lie in [0, 1] with γ > 0")));
    }
    if !(-1.0..=1.0).contains(&re_cross) {
        return Err(Error::OutOfRange(format!("Re⟨e±|ẽ±⟩ = {re_cross} outside [−1, 1]")));
    }
    let beta = (1.0 - alpha * alpha).sqrt();
    let d = beta * beta - alpha * alpha;
    let ab = 2.0 * alpha * beta;
    let eta = ab * ab;
    let root = ((1.0 - delta) * delta).sqrt();
    let s = (1.0 - re_cross * re_cross).sqrt();
    let nu = (delta > 0.0).then(|| (1.0 - delta) * (1.0 - eta) / (4.0 * delta * eta));

    // g(E) ≤ 0 is the unitarity constraint with ⟨ẽ₊|ẽ₋⟩ = −1 and the cross
    // overlaps at their largest value given ⟨e₊|e₋⟩ = E and Re⟨e±|ẽ±⟩ = c.
    let g = |e: f64| (1.0 - delta) * d * (1.0 - e) - 2.0 * ab * root * (re_cross * e + s * (1.0 - e * e).max(0.0).sqrt());
    let e_overlap = if delta == 0.0 {
        1.0
    } else if re_cross == 0.0 {
        let nu = nu.expect("δ > 0");
        (nu - 1.0) / (nu + 1.0)
    } else {
        let (arg, _) = golden_max(|e| -g(e), -1.0, 1.0, 1e-13);
        if g(arg) > 0.0 {
            return Err(Error::Infeasible(format!("no ⟨e₊|e₋⟩ satisfies unitarity for δ = {delta}, c = {re_cross}")));
        }
        if g(-1.0) <= 0.0 {
            -1.0
        } else {
            bisect_root(|e| Ok(g(e)), -1.0, arg, 1e-15)?
        }
    };
    let unitarity_residual = g(e_overlap);

    let f_overlap = ((1.0 - delta) * e_overlap - (1.0 - eta)) / gamma;
    let x_raw = (1.0 + f_overlap) / 2.0;
    if !(-X_SLACK..=1.0 + X_SLACK).contains(&x_raw) {
        return Err(Error::OutOfRange(format!("eigenvalue x = {x_raw} outside [0, 1]")));
    }
    let x = x_raw.clamp(0.0, 1.0);
    let acceptance = (gamma + delta) / 2.0;
    Ok(B92Chain {
        alpha,
        beta,
        delta,
        gamma,
        eta,
        nu,
        re_cross,
        e_overlap,
        f_overlap,
        x,
        eps: delta / (gamma + delta),
        acceptance,
        s_sigma: h2(x),
        s_sigma_tilde: 1.0,
        unitarity_residual,
        f_sign_ambiguous: f_overlap < 0.0,
    })
}

fn b92_report(chain: B92Chain, noise_kind: NoiseKind, noise: f64) -> RateReport {
    let e = chain.eps;
    let mi = 1.0 - h2(e);
    let max = e * chain.s_sigma_tilde + (1.0 - e) * chain.s_sigma;
    RateReport {
        protocol: Protocol::B92,
        noise_kind,
        noise,
        alpha: Some(chain.alpha),
        conditioned: true,
        rate: chain.acceptance * (mi - max),
        mutual_information: mi,
        max_entropy: max,
        lambdas: None,
        b92: Some(chain),
        threshold: None,
    }
}

/// B92 rate through a depolarizing channel of strength `p`, with signal
/// states `β|0⟩ ± α|1⟩`. The rate is per transmitted signal.
pub fn b92_rate_depolarizing(p: f64, alpha: f64) -> Result<RateReport> {
    if !(0.0..=0.25).contains(&p) {
        return Err(Error::OutOfRange(format!("depolarizing p = {p} outside [0, 0.25]")));
    }
    check_alpha(alpha)?;
    let (p00, p01) = b92_depolarizing_stats(p, alpha);
    let chain = b92_chain(alpha, 4.0 * p01, 4.0 * p00, 0.0)?;
    Ok(b92_report(chain, NoiseKind::Depolarizing, p))
}

const SYMMETRY_TOL: f64 = 1e-9;

/// B92 bound from acceptance statistics `p_xy`. `Re⟨e±|ẽ±⟩` is taken from
/// `re_cross` when given and otherwise solved from the acceptance
/// probability.
pub fn b92_general_bound(p: [[f64; 2]; 2], alpha: f64, re_cross: Option<f64>) -> Result<RateReport> {
    check_alpha(alpha)?;
    if p.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::OutOfRange(format!("p_xy = {p:?} are not probabilities")));
    }
    if (p[0][0] - p[1][1]).abs() > SYMMETRY_TOL || (p[0][1] - p[1][0]).abs() > SYMMETRY_TOL {
        return Err(Error::Unsupported(
            "asymmetric statistics: symmetrize by flipping bits of the less noisy class, or abort".into(),
        ));
    }
    let delta = 4.0 * p[0][1];
    let gamma = 4.0 * p[0][0];
    let c = match re_cross {
        Some(c) => c,
        None if delta == 0.0 => 0.0,
        None => {
            let beta = (1.0 - alpha * alpha).sqrt();
            let ab = 2.0 * alpha * beta;
            let eta = ab * ab;
            let denom = 2.0 * ((1.0 - delta) * delta).sqrt() * ab * (alpha * alpha - beta * beta);
            ((gamma - (1.0 - 2.0 * delta) * eta - delta) / denom).clamp(-1.0, 1.0)
        }
    };
    let chain = b92_chain(alpha, delta, gamma, c)?;
    Ok(b92_report(chain, NoiseKind::Observed, delta))
}

/// Rate of a Bell-diagonal protocol at error rate `ε`.
pub fn bell_rate(protocol: Protocol, eps: f64, conditioned: bool) -> Result<RateReport> {
    match protocol {
        Protocol::Bb84 => bb84_rate(eps, conditioned),
        Protocol::SixState => six_state_rate(eps, conditioned),
        Protocol::B92 => Err(Error::Unsupported("B92 is parameterized by depolarizing p and α".into())),
    }
}

fn rate_equation(protocol: Protocol, conditioned: bool) -> &'static str {
    match (protocol, conditioned) {
        (Protocol::Bb84, false) => "1 - h(e) - max_l4 H(1-2e+l4, e-l4, e-l4, l4) = 0",
        (Protocol::Bb84, true) => "1 - h(e) - max_l4 [(1-e) h((1-2e+l4)/(1-e)) + e h((e-l4)/e)] = 0",
        (Protocol::SixState, false) => "1 - h(e) - H(1-3e/2, e/2, e/2, e/2) = 0",
        (Protocol::SixState, true) => "1 - H(1-3e/2, e/2, e/2, e/2) = 0",
        (Protocol::B92, _) => "((1-2d)n+2d)/2 (1 - h(e) - e - (1-e) h(x)) = 0, d = 2p/3, maximized over alpha",
    }
}

/// Root of the rate in `p` for B92 at fixed `α`.
pub fn b92_threshold_at(alpha: f64) -> Result<f64> {
    bisect_root(|p| Ok(b92_rate_depolarizing(p, alpha)?.rate), B92_BRACKET[0], B92_BRACKET[1], THRESHOLD_TOL)
}

/// Highest noise level with positive rate. For B92 the root is maximized
/// over `α` on a grid and refined by golden-section search.
pub fn threshold(protocol: Protocol, conditioned: bool) -> Result<ThresholdReport> {
    let equation = rate_equation(protocol, conditioned).to_string();
    match protocol {
        Protocol::Bb84 | Protocol::SixState => {
            let [lo, hi] = BELL_BRACKET;
            let root = bisect_root(|e| Ok(bell_rate(protocol, e, conditioned)?.rate), lo, hi, THRESHOLD_TOL)?;
            Ok(ThresholdReport {
                protocol,
                conditioned,
                noise_kind: NoiseKind::Qber,
                threshold: root,
                alpha: None,
                tolerance: THRESHOLD_TOL,
                bracket: BELL_BRACKET,
                equation,
            })
        }
        Protocol::B92 => {
            let amax = std::f64::consts::FRAC_1_SQRT_2;
            let grid = (1..).map(|i| i as f64 * B92_ALPHA_STEP).take_while(|a| *a < amax);
            let mut best: Option<(f64, f64)> = None;
            for a in grid {
                match b92_threshold_at(a) {
                    Ok(p) if best.is_none_or(|(_, bp)| p > bp) => best = Some((a, p)),
                    Ok(_) | Err(Error::NoSignChange { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            let (a0, _) = best.ok_or(Error::NoSignChange { lo: B92_BRACKET[0], hi: B92_BRACKET[1] })?;
            let lo = (a0 - B92_ALPHA_STEP).max(B92_ALPHA_STEP / 10.0);
            let hi = (a0 + B92_ALPHA_STEP).min(amax - 1e-9);
            let (alpha, p) = golden_max(|a| b92_threshold_at(a).unwrap_or(f64::NEG_INFINITY), lo, hi, 1e-5);
            Ok(ThresholdReport {
                protocol,
                conditioned: true,
                noise_kind: NoiseKind::Depolarizing,
                threshold: p,
                alpha: Some(alpha),
                tolerance: THRESHOLD_TOL,
                bracket: B92_BRACKET,
                equation,
            })
        }
    }
}
