//! Closed-form finite-n bounds for sampling, reconciliation and privacy
//! amplification, plus the entropy maximisations they need.
//!
//! Calculators return raw values; clamping to `[0, 1]` happens only in
//! [`BoundReport`].

use std::collections::BTreeMap;

use microlp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use serde::{Deserialize, Serialize};

use crate::cinfo::{flattest_in_ball, shannon, CondChannel, ProbDist};
use crate::error::{Error, Result};
use crate::qcore::{bell_diagonal_state, measure, BellSymmetry, DensityOperator, DensityRangeSpec, Povm};

/// Whether an empirical value must stay below or above the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Failure probabilities and distances: `empirical ≤ bound`.
    Upper,
    /// Entropies: `empirical ≥ bound`.
    Lower,
}

/// One evaluated bound, optionally compared with a measured value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lemma: String,
    pub inputs: BTreeMap<String, f64>,
    pub direction: Direction,
    /// Raw value, never clamped.
    pub bound: f64,
    /// Value as reported: probabilities clamped to `[0, 1]`.
    pub reported: f64,
    pub empirical: Option<f64>,
    pub satisfied: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundReport {
    /// A probability-valued upper bound.
    pub fn probability(lemma: &str, inputs: &[(&str, f64)], bound: f64) -> Self {
        Self::build(lemma, inputs, Direction::Upper, bound, bound.clamp(0.0, 1.0))
    }

    /// An entropy-valued lower bound.
    pub fn entropy_lower(lemma: &str, inputs: &[(&str, f64)], bound: f64) -> Self {
        Self::build(lemma, inputs, Direction::Lower, bound, bound)
    }

    /// An entropy-valued upper bound.
    pub fn entropy_upper(lemma: &str, inputs: &[(&str, f64)], bound: f64) -> Self {
        Self::build(lemma, inputs, Direction::Upper, bound, bound)
    }

    fn build(lemma: &str, inputs: &[(&str, f64)], direction: Direction, bound: f64, reported: f64) -> Self {
        Self {
            lemma: lemma.to_string(),
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            direction,
            bound,
            reported,
            empirical: None,
            satisfied: true,
            note: None,
        }
    }

    /// Attach a measured value; `slack` absorbs floating-point noise.
    pub fn with_empirical(mut self, value: f64, slack: f64) -> Self {
        self.satisfied = match self.direction {
            Direction::Upper => value <= self.reported + slack,
            Direction::Lower => value >= self.reported - slack,
        };
        self.empirical = Some(value);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

fn check_eps(name: &str, eps: f64) -> Result<()> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::OutOfRange(format!("{name} = {eps}")));
    }
    Ok(())
}

fn check_rate(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfRange(format!("selection rate {p} must lie in (0, 1)")));
    }
    Ok(())
}

/// `2^q e^{−nε²/2}`: probability that the frequency distribution of `n`
/// samples leaves the `ε`-ball around the probability range.
pub fn freq_sampling_bound(q: usize, n: usize, eps: f64) -> Result<f64> {
    check_eps("ε", eps)?;
    if q == 0 {
        return Err(Error::OutOfRange("alphabet size 0".into()));
    }
    Ok(2f64.powi(q as i32) * (-(n as f64) * eps * eps / 2.0).exp())
}

/// `μ = 2^{|Z|+|Z̄|} e^{−nε²/8}` for two-POVM tomography on a random split.
pub fn quanttom_bound(z: usize, zbar: usize, n: usize, eps: f64) -> Result<f64> {
    check_eps("ε", eps)?;
    if z == 0 || zbar == 0 {
        return Err(Error::OutOfRange("outcome alphabets must be nonempty".into()));
    }
    Ok(2f64.powi((z + zbar) as i32) * (-(n as f64) * eps * eps / 8.0).exp())
}

/// Result of maximising Shannon entropy over a set of outcome distributions
/// reachable from a density range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeEntropyMax {
    /// Certified upper value of the maximum.
    pub value: f64,
    /// Entropy of the returned feasible point.
    pub attained: f64,
    /// Mixture weights over the extreme points (Bell weights for Bell-diagonal ranges).
    pub weights: Vec<f64>,
    /// The maximising outcome distribution.
    pub outcome: Vec<f64>,
    pub iterations: usize,
}

const KELLEY_TOL: f64 = 1e-9;
const KELLEY_MAX_ITER: usize = 1000;
const GRAD_FLOOR: f64 = 1e-12;

fn solve_lp(lp: &Problem) -> Result<microlp::Solution> {
    match lp.solve() {
        Ok(out) => out.into_solution().map_err(|_| Error::Solver("linear program interrupted".into())),
        Err(microlp::Error::Infeasible) => {
            Err(Error::Infeasible("observed statistics are inconsistent with the density range".into()))
        }
        Err(e) => Err(Error::Solver(e.to_string())),
    }
}

/// Adds `d ≥ |expr − target|` componentwise and `½ Σ d ≤ radius`.
fn add_l1_ball(lp: &mut Problem, rows: Vec<Vec<(Variable, f64)>>, target: &[f64], radius: f64) {
    let d: Vec<Variable> = rows.iter().map(|_| lp.add_var(0.0, (0.0, 2.0))).collect();
    for ((row, &t), &dv) in rows.into_iter().zip(target).zip(&d) {
        let mut plus = row.clone();
        plus.push((dv, -1.0));
        lp.add_constraint(plus, ComparisonOp::Le, t);
        let mut minus: Vec<_> = row.into_iter().map(|(v, c)| (v, -c)).collect();
        minus.push((dv, -1.0));
        lp.add_constraint(minus, ComparisonOp::Le, -t);
    }
    lp.add_constraint(d.iter().map(|&v| (v, 0.5)), ComparisonOp::Le, radius);
}

/// `max H(Q)` over `Q ∈ B_{r2}(γ_F̄(ρ))` for `ρ ∈ R` with
/// `δ(γ_F(ρ), Q̂) ≤ r1`. The set is a polytope in the mixture weights and
/// `Q`, so the concave maximisation is solved by Kelley's cutting planes:
/// each round adds the tangent plane of `H` at the last LP optimum.
pub fn max_entropy_over_range(
    range: &DensityRangeSpec,
    f: &Povm,
    fbar: &Povm,
    q_hat: &ProbDist,
    r1: f64,
    r2: f64,
) -> Result<RangeEntropyMax> {
    check_eps("r1", r1)?;
    check_eps("r2", r2)?;
    if f.dim() != range.dim() || fbar.dim() != range.dim() {
        return Err(Error::DimensionMismatch("POVMs must act on the range's space".into()));
    }
    if q_hat.len() != f.labels().len() {
        return Err(Error::LengthMismatch { expected: f.labels().len(), actual: q_hat.len() });
    }
    let (points, ties) = range_points(range)?;
    let a: Vec<Vec<f64>> = points.iter().map(|p| measure(p, f).map(|d| d.probs().to_vec())).collect::<Result<_>>()?;
    let b: Vec<Vec<f64>> =
        points.iter().map(|p| measure(p, fbar).map(|d| d.probs().to_vec())).collect::<Result<_>>()?;
    let (k, nz, m) = (points.len(), q_hat.len(), fbar.labels().len());

    let mut cuts: Vec<Vec<f64>> = vec![vec![1.0 / m as f64; m]];
    let mut best: Option<RangeEntropyMax> = None;
    for iter in 1..=KELLEY_MAX_ITER {
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let w: Vec<Variable> = (0..k).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
        let q: Vec<Variable> = (0..m).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
        let theta = lp.add_var(1.0, (0.0, (m as f64).log2()));
        lp.add_constraint(w.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);
        lp.add_constraint(q.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);
        for &(i, j) in &ties {
            lp.add_constraint([(w[i], 1.0), (w[j], -1.0)], ComparisonOp::Eq, 0.0);
        }
        let rows_a = (0..nz).map(|z| (0..k).map(|i| (w[i], a[i][z])).collect()).collect();
        add_l1_ball(&mut lp, rows_a, q_hat.probs(), r1);
        let rows_b = (0..m)
            .map(|z| {
                let mut row: Vec<(Variable, f64)> = (0..k).map(|i| (w[i], b[i][z])).collect();
                row.push((q[z], -1.0));
                row
            })
            .collect();
        add_l1_ball(&mut lp, rows_b, &vec![0.0; m], r2);
        for c in &cuts {
            // θ ≤ H(c) + ∇H(c)·(Q − c) with ∇H_z = −log₂ c_z − 1/ln 2 and Σ Q = Σ c.
            let g: Vec<f64> = c.iter().map(|x| -x.max(GRAD_FLOOR).log2()).collect();
            let rhs = shannon(c) - g.iter().zip(c).map(|(gi, ci)| gi * ci).sum::<f64>();
            let mut row: Vec<(Variable, f64)> = q.iter().zip(&g).map(|(&v, &gi)| (v, -gi)).collect();
            row.push((theta, 1.0));
            lp.add_constraint(row, ComparisonOp::Le, rhs);
        }
        let sol = solve_lp(&lp)?;
        let upper = sol.objective();
        let outcome: Vec<f64> = renormalise(q.iter().map(|&v| sol.var_value(v)).collect());
        let weights: Vec<f64> = renormalise(w.iter().map(|&v| sol.var_value(v)).collect());
        let attained = shannon(&outcome);
        let improved = best.as_ref().is_none_or(|b| attained > b.attained);
        let value = best.as_ref().map_or(upper, |b| b.value.min(upper));
        if improved {
            best = Some(RangeEntropyMax { value, attained, weights, outcome: outcome.clone(), iterations: iter });
        } else if let Some(b) = best.as_mut() {
            b.value = value;
            b.iterations = iter;
        }
        let b = best.as_ref().expect("set above");
        if b.value - b.attained <= KELLEY_TOL {
            break;
        }
        cuts.push(outcome);
    }
    let mut out = best.expect("at least one iteration");
    out.value = out.value.max(out.attained);
    Ok(out)
}

fn renormalise(v: Vec<f64>) -> Vec<f64> {
    let v: Vec<f64> = v.into_iter().map(|x| x.max(0.0)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

// Extreme points and pairs of weights forced equal.
fn range_points(range: &DensityRangeSpec) -> Result<(Vec<DensityOperator>, Vec<(usize, usize)>)> {
    match range {
        DensityRangeSpec::ExtremePoints(p) => Ok((p.clone(), Vec::new())),
        DensityRangeSpec::BellDiagonal(sym) => {
            let points = (0..4)
                .map(|k| bell_diagonal_state(std::array::from_fn(|j| (j == k) as u8 as f64)))
                .collect::<Result<_>>()?;
            let ties = match sym {
                BellSymmetry::Bb84 => vec![(1, 2)],
                BellSymmetry::SixState => vec![(1, 2), (2, 3)],
            };
            Ok((points, ties))
        }
    }
}

/// Inputs for the three smooth `H_0` sampling corollaries.
#[derive(Debug, Clone)]
pub enum SamplingParams<'a> {
    /// Frequency `Q̂` observed on the selected part; bound on the rest.
    Classical { q_hat: &'a ProbDist, n: usize, p: f64, eps: f64, abar: usize },
    /// Observed channel `Q̂(x|y)` (one row per `y`) and the frequency of `y` over all `n` positions.
    ClassicalConditional { q_hat: &'a CondChannel, y_freq: &'a ProbDist, n: usize, p: f64, eps: f64 },
    /// Outcomes of `F` observed on the selected part; `F̄` orthogonal on the rest.
    Quantum {
        range: &'a DensityRangeSpec,
        f: &'a Povm,
        fbar: &'a Povm,
        q_hat: &'a ProbDist,
        n: usize,
        p: f64,
        eps: f64,
        abar: usize,
    },
}

/// An `H_0`-type entropy bound with the bound on its expected smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingBound {
    pub entropy_bound: f64,
    pub mu_bound: f64,
    /// The maximal-entropy term (`r` for the conditional variant).
    pub hmax: f64,
}

fn log_count(k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        (k as f64).log2()
    }
}

pub fn sampling_h0_bound(params: &SamplingParams<'_>) -> Result<SamplingBound> {
    match *params {
        SamplingParams::Classical { q_hat, n, p, eps, abar } => {
            check_rate(p)?;
            check_eps("ε", eps)?;
            let hmax = shannon(&flattest_in_ball(q_hat.probs(), eps / (p * (1.0 - p))));
            let z = q_hat.len();
            Ok(SamplingBound {
                entropy_bound: abar as f64 * hmax + log_count(abar) * (z as f64 - 1.0),
                mu_bound: 2f64.powi(2 * z as i32) * (-(n as f64) * eps * eps / 2.0).exp(),
                hmax,
            })
        }
        SamplingParams::ClassicalConditional { q_hat, y_freq, n, p, eps } => {
            check_rate(p)?;
            check_eps("ε", eps)?;
            if y_freq.len() != q_hat.inputs().len() {
                return Err(Error::LengthMismatch { expected: q_hat.inputs().len(), actual: y_freq.len() });
            }
            let radius = eps / (p * (1.0 - p));
            let r: f64 = q_hat
                .rows()
                .iter()
                .zip(y_freq.probs())
                .map(|(row, qy)| qy * shannon(&flattest_in_ball(row.probs(), radius)))
                .sum();
            let (nx, ny) = (q_hat.outputs().len() as f64, q_hat.inputs().len() as f64);
            let nf = n as f64;
            Ok(SamplingBound {
                entropy_bound: nf * (r + eps * ny * nx.log2()) + log_count(n) * (nx - 1.0),
                mu_bound: ny * 2f64.powf(2.0 * nx) * (-nf * eps.powi(3) / 2.0).exp(),
                hmax: r,
            })
        }
        SamplingParams::Quantum { range, f, fbar, q_hat, n, p, eps, abar } => {
            check_rate(p)?;
            check_eps("ε", eps)?;
            if !fbar.is_orthogonal() {
                return Err(Error::InvalidOperator("the second measurement must be orthogonal".into()));
            }
            let hmax = max_entropy_over_range(range, f, fbar, q_hat, eps / p, eps / (1.0 - p))?.value;
            let dim = range.dim() as f64;
            let z = q_hat.len() as f64;
            Ok(SamplingBound {
                entropy_bound: abar as f64 * hmax + log_count(abar) * (dim - 1.0),
                mu_bound: 2f64.powf((dim + z) / 2.0) * (-(n as f64) * eps * eps / 16.0).exp(),
                hmax,
            })
        }
    }
}

/// Min-entropy of a uniformly random ordering of a tuple with type `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exchangeable {
    /// `nH(Q) − |Z|(log n + 1)`.
    pub bound: f64,
    /// `log₂ (n! / Π_z (nQ(z))!)` when every `nQ(z)` is an integer.
    pub exact: Option<f64>,
}

const COUNT_TOL: f64 = 1e-9;

fn log2_factorial(k: u64) -> f64 {
    (2..=k).map(|i| (i as f64).log2()).sum()
}

/// Exchangeable min-entropy bound. With `exact = true`, non-integral
/// counts `nQ(z)` are an error; otherwise the exact value is only filled in
/// when the counts happen to be integral.
pub fn hinf_exchangeable(n: usize, q: &ProbDist, exact: bool) -> Result<Exchangeable> {
    if n == 0 {
        return Err(Error::OutOfRange("n must be positive".into()));
    }
    let nf = n as f64;
    let bound = nf * shannon(q.probs()) - q.len() as f64 * (nf.log2() + 1.0);
    let counts: Vec<f64> = q.probs().iter().map(|p| p * nf).collect();
    let integral = counts.iter().all(|c| (c - c.round()).abs() <= COUNT_TOL);
    if exact && !integral {
        return Err(Error::OutOfRange(format!("counts {counts:?} are not integers")));
    }
    let exact = integral
        .then(|| log2_factorial(n as u64) - counts.iter().map(|c| log2_factorial(c.round() as u64)).sum::<f64>());
    Ok(Exchangeable { bound, exact })
}

/// `2^{−(s−r)} + ε`: failure probability of guessing a string with smooth
/// `H_0 ≤ r` from an `s`-bit two-universal hash.
pub fn ir_failure_bound(r: f64, s: f64, eps: f64) -> Result<f64> {
    check_eps("ε", eps)?;
    Ok(2f64.powf(-(s - r)) + eps)
}

/// `¾ 2^{−(n−r−s)/2} + ε + ε′`: distance from uniform of an `s`-bit hash of
/// a string with smooth min-entropy `n`, against a quantum memory of smooth
/// max-rank `r`.
pub fn pa_distance_bound(n: f64, r: f64, s: f64, eps: f64, eps1: f64) -> Result<f64> {
    check_eps("ε", eps)?;
    check_eps("ε′", eps1)?;
    Ok(0.75 * 2f64.powf(-(n - r - s) / 2.0) + eps + eps1)
}

/// `H_∞(ZW) − H_0(W) − log(1/ε″)`, the conditional min-entropy lower bound.
pub fn chain_rule_bound(hinf_zw: f64, h0_w: f64, eps2: f64) -> Result<f64> {
    if !(eps2 > 0.0 && eps2 <= 1.0) {
        return Err(Error::OutOfRange(format!("ε″ = {eps2} must lie in (0, 1]")));
    }
    Ok(hinf_zw - h0_w - (1.0 / eps2).log2())
}

/// Smallest weight `w` such that a binomial `(n, e)` exceeds `w` with
/// probability at most `eps`, together with that tail.
pub fn binomial_tail_weight(n: usize, e: f64, eps: f64) -> (usize, f64) {
    let mut tail = 1.0;
    let mut pmf = (1.0 - e).powi(n as i32);
    for w in 0..=n {
        tail -= pmf;
        if tail <= eps {
            return (w, tail.max(0.0));
        }
        pmf *= (n - w) as f64 / (w + 1) as f64 * e / (1.0 - e);
    }
    (n, 0.0)
}

/// `log₂ Σ_{k≤w} C(n, k)`, the size of a Hamming ball.
pub fn log2_hamming_ball(n: usize, w: usize) -> f64 {
    let mut term = 1.0f64;
    let mut total = 1.0f64;
    for k in 1..=w.min(n) {
        term *= (n - k + 1) as f64 / k as f64;
        total += term;
    }
    total.log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cinfo::h2 as h;
    use crate::qcore::{bell_povm, Povm};

    #[test]
    fn freq_examples() {
        assert_eq!(freq_sampling_bound(3, 0, 0.1).unwrap(), 8.0);
        assert_eq!(BoundReport::probability("freq", &[], 8.0).reported, 1.0);
        let b = freq_sampling_bound(2, 1000, 0.1).unwrap();
        assert!((b - 4.0 * (-5f64).exp()).abs() < 1e-15);
        assert!((b - 0.026952).abs() < 1e-6);
        let ratio = freq_sampling_bound(2, 2000, 0.1).unwrap() / b;
        assert!((ratio - (-5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn quanttom_examples() {
        let b = quanttom_bound(2, 2, 800, 0.2).unwrap();
        assert!((b - 16.0 * (-4f64).exp()).abs() < 1e-14);
        assert!((b - 0.293050).abs() < 1e-6);
        assert_eq!(quanttom_bound(2, 2, 800, 0.0).unwrap(), 16.0);
        assert!(quanttom_bound(2, 2, 801, 0.2).unwrap() < b);
    }

    #[test]
    fn classical_sampling_point_mass() {
        let q = ProbDist::point_mass(3, 1).unwrap();
        let b = sampling_h0_bound(&SamplingParams::Classical { q_hat: &q, n: 100, p: 0.2, eps: 0.0, abar: 80 }).unwrap();
        assert!((b.entropy_bound - 80f64.log2() * 2.0).abs() < 1e-12);
        assert_eq!(b.hmax, 0.0);
    }

    #[test]
    fn conditional_sampling_bsc() {
        let ch = CondChannel::binary_symmetric(0.11).unwrap();
        let y = ProbDist::uniform(2).unwrap();
        let b = sampling_h0_bound(&SamplingParams::ClassicalConditional { q_hat: &ch, y_freq: &y, n: 64, p: 0.1, eps: 0.0 })
            .unwrap();
        // h(0.11) by direct evaluation of -x log x - (1-x) log(1-x)
        let direct = -(0.11f64 * 0.11f64.log2() + 0.89 * 0.89f64.log2());
        assert!((b.hmax - direct).abs() < 1e-12);
        assert!((b.hmax - 0.499916).abs() < 1e-6);
        assert!((b.entropy_bound - (64.0 * direct + 6.0)).abs() < 1e-9);
    }

    fn xx() -> Povm {
        Povm::qubit_x().tensor(&Povm::qubit_x()).unwrap()
    }

    fn symmetric_stats(e: f64) -> ProbDist {
        ProbDist::new(xx().labels().to_vec(), vec![(1.0 - e) / 2.0, e / 2.0, e / 2.0, (1.0 - e) / 2.0]).unwrap()
    }

    #[test]
    fn quantum_bb84_maximiser() {
        let e = 0.1;
        let range = DensityRangeSpec::BellDiagonal(BellSymmetry::Bb84);
        let m = max_entropy_over_range(&range, &xx(), &bell_povm(), &symmetric_stats(e), 0.0, 0.0).unwrap();
        assert!((m.value - 2.0 * h(e)).abs() < 1e-8, "{m:?}");
        assert!((m.weights[3] - e * e).abs() < 1e-4, "{m:?}");
        let b = sampling_h0_bound(&SamplingParams::Quantum {
            range: &range,
            f: &xx(),
            fbar: &bell_povm(),
            q_hat: &symmetric_stats(e),
            n: 1000,
            p: 0.1,
            eps: 0.0,
            abar: 900,
        })
        .unwrap();
        assert!((b.hmax - 2.0 * h(e)).abs() < 1e-8);
        assert!((b.mu_bound - 16.0).abs() < 1e-12);
    }

    #[test]
    fn quantum_six_state_is_fixed() {
        let e = 0.1;
        let range = DensityRangeSpec::BellDiagonal(BellSymmetry::SixState);
        let m = max_entropy_over_range(&range, &xx(), &bell_povm(), &symmetric_stats(e), 0.0, 0.0).unwrap();
        let expect = shannon(&[1.0 - 1.5 * e, e / 2.0, e / 2.0, e / 2.0]);
        assert!((m.value - expect).abs() < 1e-8);
    }

    #[test]
    fn quantum_ball_grid_cross_check() {
        // Brute force over the Bell-diagonal BB84 family λ = (1−2x+y, x−y, x−y, y):
        // feasible when |x − e| ≤ r1, then the outer ball is water-filled.
        let (e, r1, r2) = (0.1, 0.02, 0.01);
        let range = DensityRangeSpec::BellDiagonal(BellSymmetry::Bb84);
        let m = max_entropy_over_range(&range, &xx(), &bell_povm(), &symmetric_stats(e), r1, r2).unwrap();
        let mut best = 0.0f64;
        let steps = 400;
        for i in 0..=steps {
            let x = e - r1 + 2.0 * r1 * i as f64 / steps as f64;
            for j in 0..=steps {
                let y = x * j as f64 / steps as f64;
                let lam = [1.0 - 2.0 * x + y, x - y, x - y, y];
                best = best.max(shannon(&flattest_in_ball(&lam, r2)));
            }
        }
        assert!(m.value >= best - 1e-9 && m.value <= best + 1e-3, "{} vs grid {best}", m.value);
    }

    #[test]
    fn quantum_infeasible() {
        let psi = bell_diagonal_state([1.0, 0.0, 0.0, 0.0]).unwrap();
        let range = DensityRangeSpec::extreme_points(vec![psi]).unwrap();
        let r = max_entropy_over_range(&range, &xx(), &bell_povm(), &symmetric_stats(0.3), 0.01, 0.0);
        assert!(matches!(r, Err(Error::Infeasible(_))));
    }

    #[test]
    fn exchangeable_examples() {
        let point = ProbDist::point_mass(2, 0).unwrap();
        let e = hinf_exchangeable(5, &point, true).unwrap();
        assert_eq!(e.exact, Some(0.0));
        assert!(e.bound <= 0.0);
        let half = ProbDist::uniform(2).unwrap();
        let e = hinf_exchangeable(4, &half, true).unwrap();
        assert!((e.exact.unwrap() - 6f64.log2()).abs() < 1e-12);
        assert!((e.bound + 2.0).abs() < 1e-12);
        let third = ProbDist::from_probs(vec![2.0 / 3.0, 1.0 / 3.0]).unwrap();
        let e = hinf_exchangeable(12, &third, true).unwrap();
        assert!((e.exact.unwrap() - 495f64.log2()).abs() < 1e-12);
        assert!((e.exact.unwrap() - 8.95128).abs() < 1e-5);
        assert!((e.bound - 1.84963).abs() < 1e-5);
        assert!(hinf_exchangeable(5, &half, true).is_err());
        assert_eq!(hinf_exchangeable(5, &half, false).unwrap().exact, None);
    }

    #[test]
    fn reconciliation_and_amplification_examples() {
        assert_eq!(ir_failure_bound(7.0, 7.0, 0.01).unwrap(), 1.01);
        assert!((ir_failure_bound(0.0, 10.0, 0.0).unwrap() - 9.765625e-4).abs() < 1e-15);
        let b = ir_failure_bound(0.0, 20.0, 1e-6).unwrap();
        assert!((b - (2f64.powi(-20) + 1e-6)).abs() < 1e-18);
        assert_eq!(pa_distance_bound(10.0, 4.0, 6.0, 0.0, 0.0).unwrap(), 0.75);
        assert!((pa_distance_bound(30.0, 4.0, 6.0, 0.0, 0.0).unwrap() - 7.32421875e-4).abs() < 1e-15);
        let a = pa_distance_bound(40.0, 4.0, 6.0, 0.0, 0.0).unwrap();
        let b = pa_distance_bound(40.0, 4.0, 8.0, 0.0, 0.0).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn chain_rule_examples() {
        assert_eq!(chain_rule_bound(12.0, 5.0, 1.0).unwrap(), 7.0);
        assert_eq!(chain_rule_bound(100.0, 30.0, 2f64.powi(-10)).unwrap(), 60.0);
        assert!(chain_rule_bound(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn tails_and_balls() {
        let (w, tail) = binomial_tail_weight(24, 0.02, 1e-3);
        assert_eq!(w, 4);
        assert!(tail < 1e-3);
        assert_eq!(binomial_tail_weight(10, 0.0, 0.0).0, 0);
        assert!((log2_hamming_ball(24, 4) - 12951f64.log2()).abs() < 1e-12);
        assert_eq!(log2_hamming_ball(3, 5), 3.0);
    }

    #[test]
    fn report_direction() {
        let r = BoundReport::probability("x", &[("n", 1.0)], 0.1).with_empirical(0.05, 0.0);
        assert!(r.satisfied);
        let r = BoundReport::entropy_lower("y", &[], 2.0).with_empirical(1.5, 1e-9);
        assert!(!r.satisfied);
        let json = serde_json::to_string(&r).unwrap();
        let back: BoundReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
