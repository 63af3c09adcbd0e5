use serde::Serialize;

use super::entropy::shannon;
use crate::error::{Error, Result};

/// Largest `q^n` enumerated by [`typical_set_exact`].
pub const ENUMERATION_CAP: u64 = 1 << 20;

const ENTROPY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypicalSet {
    pub q: usize,
    pub n: usize,
    pub r: f64,
    /// `|T^n(r)|` when `q^n` is within [`ENUMERATION_CAP`].
    pub exact: Option<u64>,
    /// `2^{nr} n^{q−1}`.
    pub bound: f64,
    /// Whether `exact ≤ bound` (vacuously true without an exact count).
    pub holds: bool,
}

fn check(q: usize, n: usize, r: f64) -> Result<()> {
    if q < 2 || n < 1 || r.is_nan() || r < 0.0 {
        return Err(Error::OutOfRange(format!("typical set needs q ≥ 2, n ≥ 1, r ≥ 0 (got {q}, {n}, {r})")));
    }
    Ok(())
}

fn tuple_count(q: usize, n: usize) -> Option<u64> {
    (q as u64).checked_pow(n as u32).filter(|c| *c <= ENUMERATION_CAP)
}

/// `2^{nr} n^{q−1}`.
pub fn typical_set_bound(q: usize, n: usize, r: f64) -> Result<f64> {
    check(q, n, r)?;
    Ok((n as f64 * r).exp2() * (n as f64).powi(q as i32 - 1))
}

/// Number of `z ∈ Z^n` with `H(Q_z) ≤ r`, by walking every tuple.
pub fn typical_set_exact(q: usize, n: usize, r: f64) -> Result<u64> {
    check(q, n, r)?;
    let total = tuple_count(q, n)
        .ok_or_else(|| Error::TooLarge(format!("{q}^{n} tuples exceeds the enumeration cap of {ENUMERATION_CAP}")))?;
    let mut digits = vec![0usize; n];
    let mut counts = vec![0usize; q];
    counts[0] = n;
    let mut hits = 0u64;
    for _ in 0..total {
        let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        if shannon(&freq) <= r + ENTROPY_TOL {
            hits += 1;
        }
        // odometer increment
        for d in digits.iter_mut() {
            counts[*d] -= 1;
            *d = (*d + 1) % q;
            counts[*d] += 1;
            if *d != 0 {
                break;
            }
        }
    }
    Ok(hits)
}

/// Exact size (when enumerable) together with the closed-form bound.
pub fn typical_set(q: usize, n: usize, r: f64) -> Result<TypicalSet> {
    let bound = typical_set_bound(q, n, r)?;
    let exact = match tuple_count(q, n) {
        Some(_) => Some(typical_set_exact(q, n, r)?),
        None => None,
    };
    let holds = exact.is_none_or(|e| e as f64 <= bound);
    Ok(TypicalSet { q, n, r, exact, bound, holds })
}
