use microlp::{ComparisonOp, OptimizationDirection, Problem};

use super::dist::{JointDist, SmoothingParam};
use super::entropy::{min_entropy_cond, Order};
use crate::error::{Error, Result};

/// Largest alphabet (for either variable) accepted by the exact optimiser.
pub const EXACT_ALPHABET_CAP: usize = 4;

const FEAS_TOL: f64 = 1e-10;

/// Smallest distance from `P_{ZW}` to a joint whose every conditional
/// `Q(·|w)` has all entries at most `t` (rows of `pzw` index `Z`).
fn distance_to_level(pzw: &JointDist, t: f64) -> Result<f64> {
    let (nz, nw) = (pzw.nx(), pzw.ny());
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let q: Vec<_> = (0..nz * nw).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    let d: Vec<_> = (0..nz * nw).map(|_| lp.add_var(0.5, (0.0, 1.0))).collect();
    for (i, &p) in pzw.probs().iter().enumerate() {
        lp.add_constraint([(d[i], 1.0), (q[i], -1.0)], ComparisonOp::Ge, -p);
        lp.add_constraint([(d[i], 1.0), (q[i], 1.0)], ComparisonOp::Ge, p);
    }
    lp.add_constraint(q.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);
    for w in 0..nw {
        for z in 0..nz {
            let terms = (0..nz).map(|zp| (q[zp * nw + w], if zp == z { 1.0 - t } else { -t }));
            lp.add_constraint(terms, ComparisonOp::Le, 0.0);
        }
    }
    let sol = lp
        .solve()
        .map_err(|e| Error::Solver(e.to_string()))?
        .into_solution()
        .map_err(|_| Error::Solver("linear program interrupted".into()))?;
    Ok(sol.objective())
}

/// Conditional smooth min-entropy `H^ε_∞(Z|W)` of a joint with `Z` on the
/// rows and `W` on the columns, both alphabets of size at most
/// [`EXACT_ALPHABET_CAP`].
///
/// Bisects on the conditional guessing level `t`; each step solves a linear
/// program for the closest joint attaining that level.
pub fn smooth_min_entropy_cond(pzw: &JointDist, eps: f64) -> Result<f64> {
    let eps = SmoothingParam::new(eps)?.value();
    if pzw.nx() > EXACT_ALPHABET_CAP || pzw.ny() > EXACT_ALPHABET_CAP {
        return Err(Error::TooLarge(format!(
            "exact conditional smoothing supports alphabets up to {EXACT_ALPHABET_CAP}; use the bounds module for larger inputs"
        )));
    }
    let unsmoothed = min_entropy_cond(pzw, Order::Infinity)?;
    if eps == 0.0 {
        return Ok(unsmoothed);
    }
    let mut hi = 2f64.powf(-unsmoothed);
    let mut lo = 1.0 / pzw.nx() as f64;
    if distance_to_level(pzw, lo)? <= eps + FEAS_TOL {
        return Ok(-lo.log2());
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if distance_to_level(pzw, mid)? <= eps + FEAS_TOL {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(-hi.log2())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Exhaustive search over a grid on the 4-cell simplex with step 1/steps.
    fn grid_oracle(p: &[f64; 4], eps: f64, steps: i64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for a in 0..=steps {
            for b in 0..=steps - a {
                for c in 0..=steps - a - b {
                    let d = steps - a - b - c;
                    let q = [a, b, c, d].map(|k| k as f64 / steps as f64);
                    let dist: f64 = 0.5 * q.iter().zip(p).map(|(x, y)| (x - y).abs()).sum::<f64>();
                    if dist > eps + 1e-12 {
                        continue;
                    }
                    // q laid out as [(z0,w0), (z0,w1), (z1,w0), (z1,w1)]
                    let mut h = f64::INFINITY;
                    for w in 0..2 {
                        let col = q[w] + q[2 + w];
                        if col > 0.0 {
                            h = h.min(-(q[w].max(q[2 + w]) / col).log2());
                        }
                    }
                    best = best.max(h);
                }
            }
        }
        best
    }

    #[test]
    fn unsmoothed_cases() {
        let indep = JointDist::from_matrix(&[vec![0.125; 4], vec![0.125; 4]]).unwrap();
        assert!((smooth_min_entropy_cond(&indep, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let det = JointDist::from_matrix(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert_eq!(smooth_min_entropy_cond(&det, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn diagonal_matches_grid_oracle() {
        let det = JointDist::from_matrix(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let v = smooth_min_entropy_cond(&det, 0.1).unwrap();
        let oracle = grid_oracle(&[0.5, 0.0, 0.0, 0.5], 0.1, 200);
        assert!(v >= 0.0);
        assert!(v >= oracle - 1e-7, "{v} vs {oracle}");
        assert!(v - oracle < 0.01, "{v} vs {oracle}");
    }

    #[test]
    fn skewed_joint_matches_grid_oracle() {
        let p = [0.4, 0.1, 0.05, 0.45];
        let joint = JointDist::from_matrix(&[vec![p[0], p[1]], vec![p[2], p[3]]]).unwrap();
        for eps in [0.02, 0.07, 0.15] {
            let v = smooth_min_entropy_cond(&joint, eps).unwrap();
            let oracle = grid_oracle(&p, eps, 200);
            assert!(v >= oracle - 1e-7 && v - oracle < 0.01, "eps {eps}: {v} vs {oracle}");
        }
    }

    #[test]
    fn rejects_large_alphabets() {
        let big = JointDist::from_matrix(&[vec![0.1; 5], vec![0.1; 5]]).unwrap();
        assert!(matches!(smooth_min_entropy_cond(&big, 0.1), Err(Error::TooLarge(_))));
    }
}
