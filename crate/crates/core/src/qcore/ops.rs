use super::povm::{Povm, QuantumOperation};
use super::state::{c, hermitian_eigenvalues, kron, outer, partial_trace_b, split_dim, CMat, DensityOperator};
use crate::cinfo::{majorizes, maximal_coupling, renyi_of_weights, smooth_h0_weights, smooth_hinf_weights, Order, ProbDist};
use crate::error::{Error, Result};

/// Outcome probabilities below this are treated as zero when conditioning.
pub const OUTCOME_FLOOR: f64 = 1e-12;

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!("{a} vs {b}")));
    }
    Ok(())
}

/// `½ tr|ρ − σ|`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_dim(rho.dim(), sigma.dim())?;
    Ok(trace_norm_half(&(rho.matrix() - sigma.matrix())))
}

/// `½ Σ |eigenvalues|` of a Hermitian matrix.
pub(crate) fn trace_norm_half(m: &CMat) -> f64 {
    0.5 * hermitian_eigenvalues(m).iter().map(|e| e.abs()).sum::<f64>()
}

fn normalised(raw: Vec<f64>) -> Vec<f64> {
    let clamped: Vec<f64> = raw.into_iter().map(|p| p.max(0.0)).collect();
    let s: f64 = clamped.iter().sum();
    clamped.into_iter().map(|p| p / s).collect()
}

/// `P(z) = tr(F_z ρ)`.
pub fn measure(rho: &DensityOperator, povm: &Povm) -> Result<ProbDist> {
    same_dim(rho.dim(), povm.dim())?;
    let raw = povm.elements().iter().map(|f| (f * rho.matrix()).trace().re).collect();
    ProbDist::new(povm.labels().to_vec(), normalised(raw))
}

/// `σ = Σ_z E_z ρ E_z†`.
pub fn apply_operation(op: &QuantumOperation, rho: &DensityOperator) -> Result<DensityOperator> {
    same_dim(rho.dim(), op.dim())?;
    let out = op.kraus().iter().fold(CMat::zeros(rho.dim(), rho.dim()), |acc, k| acc + k * rho.matrix() * k.adjoint());
    DensityOperator::from_noisy(out)
}

/// `√(1 − Σ_z |tr(E_z ρ)|²)`, the disturbance bound for an operation.
pub fn disturbance_bound(op: &QuantumOperation, rho: &DensityOperator) -> Result<f64> {
    same_dim(rho.dim(), op.dim())?;
    let s: f64 = op.kraus().iter().map(|k| (k * rho.matrix()).trace().norm_sqr()).sum();
    Ok((1.0 - s).max(0.0).sqrt())
}

/// State of `H` (first factor, dimension `dim_a`) after measuring the second
/// factor of `ρ` with `F` and observing `label`, together with the outcome
/// probability.
pub fn condition_on_outcome_with_prob(
    rho: &DensityOperator,
    dim_a: usize,
    povm: &Povm,
    label: &str,
) -> Result<(DensityOperator, f64)> {
    let dim_b = split_dim(rho.dim(), dim_a)?;
    same_dim(dim_b, povm.dim())?;
    let lifted = kron(&CMat::identity(dim_a, dim_a), povm.element(label)?);
    let reduced = partial_trace_b(&(lifted * rho.matrix()), dim_a, dim_b);
    let prob = reduced.trace().re;
    if prob <= OUTCOME_FLOOR {
        return Err(Error::ZeroProbability(label.to_string()));
    }
    Ok((DensityOperator::from_noisy(reduced)?, prob))
}

pub fn condition_on_outcome(rho: &DensityOperator, dim_a: usize, povm: &Povm, label: &str) -> Result<DensityOperator> {
    condition_on_outcome_with_prob(rho, dim_a, povm, label).map(|(s, _)| s)
}

/// Quantum Rényi entropy `S_α(ρ) = H_α(λ(ρ))`, smoothed over states that
/// commute with `ρ` when `ε > 0` (orders 0 and ∞ only).
pub fn q_entropy(rho: &DensityOperator, order: Order, eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::OutOfRange(format!("smoothing parameter {eps}")));
    }
    let ev = rho.eigenvalues();
    let order = match order {
        Order::Finite(a) if a.is_nan() || a < 0.0 => return Err(Error::OutOfRange(format!("Rényi order {a}"))),
        Order::Finite(a) if a.is_infinite() => Order::Infinity,
        o => o,
    };
    if eps == 0.0 {
        return Ok(renyi_of_weights(&ev, order));
    }
    match order {
        Order::Infinity => Ok(smooth_hinf_weights(&ev, eps)),
        Order::Finite(0.0) => Ok(smooth_h0_weights(&ev, eps)),
        o => Err(Error::Unsupported(format!("smoothing is implemented for orders 0 and inf, not {o}"))),
    }
}

/// Kraus family moving the statistics of `ρ` under the orthogonal
/// measurement `F` onto `Q`, built from a maximal coupling of `γ_F(ρ)` and `Q`.
pub fn steering_operation(rho: &DensityOperator, povm: &Povm, target: &ProbDist) -> Result<QuantumOperation> {
    if !povm.is_orthogonal() {
        return Err(Error::InvalidOperator("steering needs an orthogonal measurement".into()));
    }
    if target.alphabet() != povm.labels() {
        return Err(Error::AlphabetMismatch("target distribution must use the measurement labels".into()));
    }
    let p = measure(rho, povm)?;
    let joint = maximal_coupling(&p, target)?;
    let basis = povm.basis_vectors()?;
    let d = basis.len();
    // conditional kernel p_{z'|z}; rows with P(z) = 0 stay put
    let kernel: Vec<Vec<f64>> = (0..d)
        .map(|z| {
            let pz = p.probs()[z];
            (0..d)
                .map(|zp| if pz > 0.0 { joint[z][zp] / pz } else { (z == zp) as u8 as f64 })
                .collect()
        })
        .collect();
    let mut kraus = vec![basis.iter().enumerate().fold(CMat::zeros(d, d), |acc, (z, v)| acc + outer(v) * c(kernel[z][z].sqrt()))];
    for z in 0..d {
        for zp in 0..d {
            if z != zp && kernel[z][zp] > 0.0 {
                kraus.push(&basis[zp] * basis[z].adjoint() * c(kernel[z][zp].sqrt()));
            }
        }
    }
    QuantumOperation::new(kraus)
}

/// `σ = E(ρ)` with `γ_F(σ) = Q` and `δ(ρ, σ) ≤ √(2 δ(γ_F(ρ), Q))`.
pub fn steer_to_distribution(rho: &DensityOperator, povm: &Povm, target: &ProbDist) -> Result<DensityOperator> {
    apply_operation(&steering_operation(rho, povm, target)?, rho)
}

/// Whether the statistics of an orthogonal measurement are majorized by the
/// spectrum of `ρ`.
pub fn schur_check(rho: &DensityOperator, povm: &Povm) -> Result<bool> {
    if !povm.is_orthogonal() {
        return Err(Error::InvalidOperator("majorization check needs an orthogonal measurement".into()));
    }
    majorizes(&rho.eigenvalues(), measure(rho, povm)?.probs())
}
