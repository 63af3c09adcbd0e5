use super::povm::Povm;
use super::state::{c, outer, CVec, DensityOperator, CMat};
use crate::error::{Error, Result};

/// Bell vectors in the order `(ψ⁺, ψ⁻, φ⁺, φ⁻)` with
/// `ψ± = (|00⟩ ± |11⟩)/√2` and `φ± = (|01⟩ ± |10⟩)/√2`.
pub fn bell_vectors() -> [CVec; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = |a: f64, b: f64, cc: f64, d: f64| CVec::from_vec(vec![c(a), c(b), c(cc), c(d)]);
    [v(s, 0.0, 0.0, s), v(s, 0.0, 0.0, -s), v(0.0, s, s, 0.0), v(0.0, s, -s, 0.0)]
}

/// Projective measurement onto the Bell basis, labels `psi+, psi-, phi+, phi-`.
pub fn bell_povm() -> Povm {
    let labels = ["psi+", "psi-", "phi+", "phi-"].map(String::from).to_vec();
    Povm::from_basis(&bell_vectors(), labels).expect("Bell basis is orthonormal")
}

/// `Σ_k λ_k |B_k⟩⟨B_k|` over the Bell basis.
pub fn bell_diagonal_state(lambda: [f64; 4]) -> Result<DensityOperator> {
    if lambda.iter().any(|l| !l.is_finite() || *l < 0.0) || (lambda.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("Bell weights {lambda:?} are not a probability vector")));
    }
    let m = bell_vectors().iter().zip(lambda).fold(CMat::zeros(4, 4), |acc, (b, l)| acc + outer(b) * c(l));
    DensityOperator::new(m)
}

/// Bell weights of a two-qubit state, `λ_k = ⟨B_k|ρ|B_k⟩`.
pub fn bell_weights(rho: &DensityOperator) -> Result<[f64; 4]> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(format!("Bell weights need a two-qubit state, got dim {}", rho.dim())));
    }
    let b = bell_vectors();
    Ok(std::array::from_fn(|k| (b[k].adjoint() * rho.matrix() * &b[k])[(0, 0)].re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::state::max_abs;

    #[test]
    fn examples() {
        let psi = bell_diagonal_state([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(max_abs(&(psi.matrix() - outer(&bell_vectors()[0]))) < 1e-15);
        let mixed = bell_diagonal_state([0.25; 4]).unwrap();
        assert!(max_abs(&(mixed.matrix() - CMat::identity(4, 4) * c(0.25))) < 1e-15);
        assert!(bell_diagonal_state([0.5, 0.6, 0.0, -0.1]).is_err());
    }

    #[test]
    fn depolarised_form() {
        let e = 0.1;
        let rho = bell_diagonal_state([1.0 - 1.5 * e, e / 2.0, e / 2.0, e / 2.0]).unwrap();
        let expect = outer(&bell_vectors()[0]) * c(1.0 - 2.0 * e) + CMat::identity(4, 4) * c(2.0 * e / 4.0);
        assert!(max_abs(&(rho.matrix() - expect)) < 1e-15);
        let w = bell_weights(&rho).unwrap();
        assert!((w[0] - 0.85).abs() < 1e-15);
    }
}
