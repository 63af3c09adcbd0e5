use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Tolerance for Hermiticity, trace, positivity and completeness checks.
pub const OPERATOR_TOL: f64 = 1e-9;

/// Eigenvalues below this are treated as zero.
pub const RANK_TOL: f64 = 1e-12;

/// Largest total dimension handled by the dense routines.
pub const MAX_DIM: usize = 4096;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub(crate) fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5)
}

pub(crate) fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues (ascending) of a Hermitian matrix.
pub(crate) fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub(crate) fn is_hermitian(m: &CMat) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) <= OPERATOR_TOL
}

pub(crate) fn is_psd(m: &CMat) -> bool {
    is_hermitian(m) && hermitian_eigenvalues(m).first().is_none_or(|e| *e >= -OPERATOR_TOL)
}

pub(crate) fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub(crate) fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

/// A density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDensity", into = "RawDensity")]
pub struct DensityOperator {
    m: CMat,
}

#[derive(Serialize, Deserialize)]
struct RawDensity {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl TryFrom<RawDensity> for DensityOperator {
    type Error = Error;
    fn try_from(raw: RawDensity) -> Result<Self> {
        let d = raw.dim;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if !shape_ok(&raw.re) || !shape_ok(&raw.im) {
            return Err(Error::DimensionMismatch(format!("expected {d}×{d} real and imaginary parts")));
        }
        DensityOperator::new(CMat::from_fn(d, d, |i, j| Complex64::new(raw.re[i][j], raw.im[i][j])))
    }
}

impl From<DensityOperator> for RawDensity {
    fn from(rho: DensityOperator) -> Self {
        let d = rho.dim();
        let part = |f: fn(&Complex64) -> f64| (0..d).map(|i| (0..d).map(|j| f(&rho.m[(i, j)])).collect()).collect();
        RawDensity { dim: d, re: part(|z| z.re), im: part(|z| z.im) }
    }
}

impl DensityOperator {
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidOperator("density operator must be a non-empty square matrix".into()));
        }
        if m.nrows() > MAX_DIM {
            return Err(Error::TooLarge(format!("dimension {} exceeds {MAX_DIM}", m.nrows())));
        }
        if !is_hermitian(&m) {
            return Err(Error::InvalidOperator("not Hermitian".into()));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > OPERATOR_TOL || tr.im.abs() > OPERATOR_TOL {
            return Err(Error::InvalidOperator(format!("trace {tr} ≠ 1")));
        }
        if let Some(e) = hermitian_eigenvalues(&m).first().filter(|e| **e < -OPERATOR_TOL) {
            return Err(Error::InvalidOperator(format!("negative eigenvalue {e}")));
        }
        Ok(Self { m })
    }

    /// Projects a nearly valid matrix (rounding noise only) onto the
    /// Hermitian part and renormalises the trace.
    pub(crate) fn from_noisy(m: CMat) -> Result<Self> {
        let h = hermitian_part(&m);
        let tr = h.trace().re;
        if tr <= 0.0 {
            return Err(Error::InvalidOperator("non-positive trace".into()));
        }
        Self::new(h / c(tr))
    }

    /// `|ψ⟩⟨ψ|` for a unit vector `ψ`.
    pub fn pure(psi: &CVec) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > OPERATOR_TOL {
            return Err(Error::InvalidOperator(format!("state vector has norm {norm}")));
        }
        Self::new(outer(psi))
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidOperator("zero dimension".into()));
        }
        Self::new(CMat::identity(d, d) / c(d as f64))
    }

    /// Diagonal operator in the computational basis.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(CMat::from_diagonal(&DVector::from_iterator(probs.len(), probs.iter().map(|p| c(*p)))))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    /// Eigenvalues in descending order, clamped to `[0, 1]` and renormalised.
    /// Values below [`RANK_TOL`] count as zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = hermitian_eigenvalues(&self.m)
            .into_iter()
            .rev()
            .map(|e| if e < RANK_TOL { 0.0 } else { e.min(1.0) })
            .collect();
        let s: f64 = ev.iter().sum();
        ev.iter_mut().for_each(|e| *e /= s);
        ev
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.dim() * other.dim() > MAX_DIM {
            return Err(Error::TooLarge(format!("product dimension exceeds {MAX_DIM}")));
        }
        Ok(Self { m: kron(&self.m, &other.m) })
    }

    /// Trace out the second factor of `H_A ⊗ H_B` with `dim(H_A) = dim_a`.
    pub fn partial_trace_b(&self, dim_a: usize) -> Result<Self> {
        let dim_b = split_dim(self.dim(), dim_a)?;
        Self::from_noisy(partial_trace_b(&self.m, dim_a, dim_b))
    }

    /// Trace out the first factor.
    pub fn partial_trace_a(&self, dim_a: usize) -> Result<Self> {
        let dim_b = split_dim(self.dim(), dim_a)?;
        let m = CMat::from_fn(dim_b, dim_b, |i, j| (0..dim_a).map(|a| self.m[(a * dim_b + i, a * dim_b + j)]).sum());
        Self::from_noisy(m)
    }
}

pub(crate) fn split_dim(total: usize, dim_a: usize) -> Result<usize> {
    if dim_a == 0 || !total.is_multiple_of(dim_a) {
        return Err(Error::DimensionMismatch(format!("{dim_a} does not divide {total}")));
    }
    Ok(total / dim_a)
}

pub(crate) fn partial_trace_b(m: &CMat, dim_a: usize, dim_b: usize) -> CMat {
    CMat::from_fn(dim_a, dim_a, |i, j| (0..dim_b).map(|b| m[(i * dim_b + b, j * dim_b + b)]).sum())
}
