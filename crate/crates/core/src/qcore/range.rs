use serde::{Deserialize, Serialize};

use super::state::DensityOperator;
use crate::error::{Error, Result};

/// Symmetry class of a Bell-diagonal density range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellSymmetry {
    /// Equal error rates in the Z and X bases (`λ2 = λ3`).
    Bb84,
    /// Equal error rates in all three bases (`λ2 = λ3 = λ4`).
    SixState,
}

/// A convex set of single-system states.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityRangeSpec {
    /// Convex hull of the listed states.
    ExtremePoints(Vec<DensityOperator>),
    /// Bell-diagonal two-qubit states with the given symmetry.
    BellDiagonal(BellSymmetry),
}

impl DensityRangeSpec {
    pub fn extreme_points(points: Vec<DensityOperator>) -> Result<Self> {
        let d = points.first().ok_or_else(|| Error::Empty("density range without states".into()))?.dim();
        if points.iter().any(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch("extreme points of different dimensions".into()));
        }
        Ok(Self::ExtremePoints(points))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::ExtremePoints(p) => p[0].dim(),
            Self::BellDiagonal(_) => 4,
        }
    }

    /// Mixture `Σ w_i ρ_i` of the extreme points.
    pub fn mixture(&self, weights: &[f64]) -> Result<DensityOperator> {
        let Self::ExtremePoints(points) = self else {
            return Err(Error::Unsupported("mixtures are defined for extreme-point ranges".into()));
        };
        if weights.len() != points.len() {
            return Err(Error::LengthMismatch { expected: points.len(), actual: weights.len() });
        }
        let m = points
            .iter()
            .zip(weights)
            .fold(super::state::CMat::zeros(self.dim(), self.dim()), |acc, (p, w)| acc + p.matrix() * super::state::c(*w));
        DensityOperator::new(m)
    }
}
