use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dist::{JointDist, ProbDist};
use crate::error::{Error, Result};

/// Order of a Rényi entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Order {
    Finite(f64),
    Infinity,
}

impl Order {
    pub const ZERO: Order = Order::Finite(0.0);
    pub const SHANNON: Order = Order::Finite(1.0);

    fn validate(self) -> Result<Self> {
        match self {
            Order::Finite(a) if a.is_nan() || a < 0.0 => {
                Err(Error::OutOfRange(format!("Rényi order {a} must be non-negative")))
            }
            Order::Finite(a) if a.is_infinite() => Ok(Order::Infinity),
            o => Ok(o),
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(a) => write!(f, "{a}"),
            Order::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Order {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Order::Infinity),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad Rényi order {s:?}")))
                .and_then(|a| Order::Finite(a).validate()),
        }
    }
}

/// Shannon entropy in bits of a (not necessarily normalised) weight vector,
/// with `0 log 0 = 0`.
pub fn shannon(probs: &[f64]) -> f64 {
    -probs.iter().filter(|p| **p > 0.0).map(|p| p * p.log2()).sum::<f64>()
}

/// `h(ε) = −ε log ε − (1−ε) log(1−ε)`.
pub fn binary_entropy(eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::OutOfRange(format!("binary entropy argument {eps}")));
    }
    Ok(shannon(&[eps, 1.0 - eps]))
}

/// Binary entropy that clamps its argument to `[0, 1]`; for internal use on
/// values that can stray by rounding.
pub(crate) fn h2(eps: f64) -> f64 {
    shannon(&[eps.clamp(0.0, 1.0), 1.0 - eps.clamp(0.0, 1.0)])
}

pub(crate) fn renyi_of_weights(probs: &[f64], order: Order) -> f64 {
    match order {
        Order::Infinity => -probs.iter().copied().fold(0.0, f64::max).log2(),
        Order::Finite(0.0) => (probs.iter().filter(|p| **p > 0.0).count() as f64).log2(),
        Order::Finite(1.0) => shannon(probs),
        Order::Finite(a) => {
            let s: f64 = probs.iter().filter(|p| **p > 0.0).map(|p| p.powf(a)).sum();
            s.log2() / (1.0 - a)
        }
    }
}

/// Rényi entropy `H_α(P)` in bits.
pub fn renyi_entropy(p: &ProbDist, order: Order) -> Result<f64> {
    Ok(renyi_of_weights(p.probs(), order.validate()?))
}

/// `H(X|Y) = Σ_y P(y) H(X|Y=y)`.
pub fn conditional_entropy(pxy: &JointDist) -> f64 {
    let py = pxy.marginal_y();
    (0..pxy.ny())
        .filter_map(|y| pxy.conditional_x(y).map(|c| py.probs()[y] * shannon(c.probs())))
        .sum()
}

/// `I(X;Y) = H(X) − H(X|Y)`.
pub fn mutual_information(pxy: &JointDist) -> f64 {
    (shannon(pxy.marginal_x().probs()) - conditional_entropy(pxy)).max(0.0)
}

/// `min_w H_α(Z|W=w)` over outcomes `w` of positive probability, with
/// `Z` indexing rows of the joint.
pub fn min_entropy_cond(pzw: &JointDist, order: Order) -> Result<f64> {
    let order = order.validate()?;
    Ok((0..pzw.ny())
        .filter_map(|w| pzw.conditional_x(w))
        .map(|c| renyi_of_weights(c.probs(), order))
        .fold(f64::INFINITY, f64::min))
}

/// Tolerance on partial sums in [`majorizes`].
pub const MAJORIZATION_TOL: f64 = 1e-12;

/// True iff `z ≺ zp`: every sum of the `k` largest entries of `z` is at most
/// the corresponding sum for `zp`.
pub fn majorizes(zp: &[f64], z: &[f64]) -> Result<bool> {
    if zp.len() != z.len() {
        return Err(Error::LengthMismatch { expected: zp.len(), actual: z.len() });
    }
    let desc = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    };
    let (a, b) = (desc(zp), desc(z));
    let (mut sa, mut sb) = (0.0, 0.0);
    for k in 0..a.len() {
        sa += a[k];
        sb += b[k];
        if sb > sa + MAJORIZATION_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renyi_examples() {
        let u = ProbDist::uniform(2).unwrap();
        for o in [Order::ZERO, Order::Finite(0.5), Order::SHANNON, Order::Finite(2.0), Order::Infinity] {
            assert!((renyi_entropy(&u, o).unwrap() - 1.0).abs() < 1e-12);
        }
        let p = ProbDist::binary(0.11).unwrap();
        // −Σ p log p evaluated termwise
        let oracle = -(0.11f64 * 0.11f64.ln() + 0.89f64 * 0.89f64.ln()) / 2f64.ln();
        assert!((renyi_entropy(&p, Order::SHANNON).unwrap() - oracle).abs() < 1e-12);
        assert!((oracle - 0.49992).abs() < 1e-4);
        let p = ProbDist::from_probs(vec![0.7, 0.3]).unwrap();
        assert!((renyi_entropy(&p, Order::Infinity).unwrap() - 0.514573).abs() < 1e-6);
        assert!(renyi_entropy(&p, Order::Finite(-1.0)).is_err());
    }

    #[test]
    fn renyi_zero_ignores_null_symbols() {
        let p = ProbDist::from_probs(vec![0.5, 0.0, 0.5, 0.0]).unwrap();
        assert_eq!(renyi_entropy(&p, Order::ZERO).unwrap(), 1.0);
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((binary_entropy(0.061).unwrap() - 1.0 / 3.0).abs() < 3e-3);
        assert!(binary_entropy(1.2).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let indep = JointDist::from_matrix(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        assert!(mutual_information(&indep).abs() < 1e-15);
        let corr = JointDist::from_matrix(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!((mutual_information(&corr) - 1.0).abs() < 1e-15);
        let e = 0.11;
        let bsc = JointDist::from_matrix(&[vec![(1.0 - e) / 2.0, e / 2.0], vec![e / 2.0, (1.0 - e) / 2.0]]).unwrap();
        assert!((mutual_information(&bsc) - 0.500084).abs() < 1e-5);
    }

    #[test]
    fn majorization_examples() {
        assert!(majorizes(&[1.0, 0.0], &[0.5, 0.5]).unwrap());
        assert!(majorizes(&[0.3, 0.7], &[0.3, 0.7]).unwrap());
        assert!(!majorizes(&[0.5, 0.5], &[0.6, 0.4]).unwrap());
        assert!(majorizes(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn order_parsing() {
        assert_eq!("inf".parse::<Order>().unwrap(), Order::Infinity);
        assert_eq!("2".parse::<Order>().unwrap(), Order::Finite(2.0));
        assert!("-1".parse::<Order>().is_err());
    }
}
