//! Random states, unitaries and measurements for property tests and
//! Monte-Carlo experiments.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::povm::Povm;
use super::state::{c, CMat, CVec, DensityOperator};
use crate::error::Result;

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Density operator `G G† / tr(G G†)` with `G` a `d × rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Result<DensityOperator> {
    let g = ginibre(d, rank.max(1), rng);
    DensityOperator::from_noisy(&g * g.adjoint())
}

pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<DensityOperator> {
    let v: CVec = ginibre(d, 1, rng).column(0).into_owned();
    let n = v.norm();
    DensityOperator::pure(&(v / c(n)))
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix, with
/// the phases of `R`'s diagonal divided out.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let qr = ginibre(d, d, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CMat::from_fn(d, d, |i, j| if i == j { r[(i, i)] / c(r[(i, i)].norm()) } else { c(0.0) });
    q * phases
}

/// Projective measurement in a random orthonormal basis.
pub fn random_basis_povm<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Povm> {
    let u = random_unitary(d, rng);
    let basis: Vec<CVec> = (0..d).map(|k| u.column(k).into_owned()).collect();
    Povm::from_basis(&basis, (0..d).map(|k| k.to_string()).collect())
}
