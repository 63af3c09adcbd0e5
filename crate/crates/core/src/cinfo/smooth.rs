use super::dist::{ProbDist, SmoothingParam};
use super::entropy::{shannon, Order};
use crate::error::{Error, Result};

const CUT_TOL: f64 = 1e-12;

/// Level `λ*` of the optimal smoothing for `H_∞`: the largest entry after
/// cutting mass `ε` off the top, never below the uniform level.
pub(crate) fn hinf_level(probs: &[f64], eps: f64) -> f64 {
    let q = probs.len();
    let mut sorted = probs.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut top = 0.0;
    let mut level = 0.0;
    for k in 1..=q {
        top += sorted[k - 1];
        let lambda = (top - eps) / k as f64;
        let next = if k < q { sorted[k] } else { f64::NEG_INFINITY };
        if lambda >= next {
            level = lambda;
            break;
        }
    }
    level.max(1.0 / q as f64)
}

/// `H^ε_∞` of a weight vector by water-filling.
pub(crate) fn smooth_hinf_weights(probs: &[f64], eps: f64) -> f64 {
    -hinf_level(probs, eps).log2()
}

/// `H^ε_0` of a weight vector: drop the lightest symbols while the dropped
/// mass stays within `ε`, keeping at least one.
pub(crate) fn smooth_h0_weights(probs: &[f64], eps: f64) -> f64 {
    let mut sorted: Vec<f64> = probs.iter().copied().filter(|p| *p > 0.0).collect();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut dropped = 0.0;
    let mut kept = sorted.len();
    for p in &sorted {
        if kept == 1 || dropped + p > eps + CUT_TOL {
            break;
        }
        dropped += p;
        kept -= 1;
    }
    (kept as f64).log2()
}

/// Smooth Rényi entropy `H^ε_α(P)` for `α ∈ {0, ∞}`.
pub fn smooth_renyi(p: &ProbDist, order: Order, eps: f64) -> Result<f64> {
    let eps = SmoothingParam::new(eps)?.value();
    match order {
        Order::Infinity => Ok(smooth_hinf_weights(p.probs(), eps)),
        Order::Finite(0.0) => Ok(smooth_h0_weights(p.probs(), eps)),
        o => Err(Error::Unsupported(format!("smoothing is implemented for orders 0 and inf, not {o}"))),
    }
}

/// The flattest distribution within variational distance `r` of `probs`:
/// cut the top at level `a` and fill the bottom up to level `b` with equal
/// mass `r`. It is majorized by every member of the ball.
pub(crate) fn flattest_in_ball(probs: &[f64], r: f64) -> Vec<f64> {
    let q = probs.len();
    let u = 1.0 / q as f64;
    let d: f64 = 0.5 * probs.iter().map(|p| (p - u).abs()).sum::<f64>();
    if r >= d {
        return vec![u; q];
    }
    if r == 0.0 {
        return probs.to_vec();
    }
    let top = bisect_level(|a| probs.iter().map(|p| (p - a).max(0.0)).sum::<f64>() - r, u, 1.0);
    let bottom = bisect_level(|b| r - probs.iter().map(|p| (b - p).max(0.0)).sum::<f64>(), 0.0, u);
    probs.iter().map(|p| p.clamp(bottom, top)).collect()
}

// Root of a nonincreasing function on [lo, hi].
fn bisect_level(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `max { H(Q) : δ(P, Q) ≤ r }`.
pub fn max_entropy_in_ball(p: &ProbDist, r: f64) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::OutOfRange(format!("ball radius {r}")));
    }
    Ok(shannon(&flattest_in_ball(p.probs(), r)))
}
