use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for simplex membership and distribution equality.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// A finite probability distribution over an ordered alphabet of symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDist", into = "RawDist")]
pub struct ProbDist {
    alphabet: Vec<String>,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawDist {
    alphabet: Vec<String>,
    probs: Vec<f64>,
}

impl TryFrom<RawDist> for ProbDist {
    type Error = Error;
    fn try_from(raw: RawDist) -> Result<Self> {
        ProbDist::new(raw.alphabet, raw.probs)
    }
}

impl From<ProbDist> for RawDist {
    fn from(p: ProbDist) -> Self {
        RawDist { alphabet: p.alphabet, probs: p.probs }
    }
}

fn default_alphabet(q: usize) -> Vec<String> {
    (0..q).map(|i| i.to_string()).collect()
}

fn check_probs(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution("empty alphabet".into()));
    }
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidDistribution(format!("entry {p} is not a probability")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
    }
    Ok(())
}

impl ProbDist {
    pub fn new(alphabet: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if alphabet.len() != probs.len() {
            return Err(Error::LengthMismatch { expected: alphabet.len(), actual: probs.len() });
        }
        let mut seen = HashSet::new();
        for s in &alphabet {
            if !seen.insert(s.as_str()) {
                return Err(Error::InvalidDistribution(format!("duplicate symbol {s:?}")));
            }
        }
        check_probs(&probs)?;
        Ok(Self { alphabet, probs })
    }

    /// Distribution over the alphabet `"0", "1", ...`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        Self::new(default_alphabet(probs.len()), probs)
    }

    pub fn uniform(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        Self::from_probs(vec![1.0 / q as f64; q])
    }

    /// Binary distribution with `P(1) = p`.
    pub fn binary(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange(format!("binary parameter {p}")));
        }
        Self::from_probs(vec![1.0 - p, p])
    }

    pub fn point_mass(q: usize, index: usize) -> Result<Self> {
        if index >= q {
            return Err(Error::OutOfRange(format!("index {index} outside alphabet of size {q}")));
        }
        let mut probs = vec![0.0; q];
        probs[index] = 1.0;
        Self::from_probs(probs)
    }

    /// Uniform distribution over the same alphabet.
    pub fn uniform_like(&self) -> Self {
        let q = self.len();
        Self { alphabet: self.alphabet.clone(), probs: vec![1.0 / q as f64; q] }
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob_of(&self, symbol: &str) -> Option<f64> {
        self.alphabet.iter().position(|s| s == symbol).map(|i| self.probs[i])
    }

    pub fn p_max(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }

    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|p| **p > 0.0).count()
    }
}

/// Joint distribution over `X × Y`, stored row-major as `probs[x * |Y| + y]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJoint", into = "RawJoint")]
pub struct JointDist {
    x_alphabet: Vec<String>,
    y_alphabet: Vec<String>,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawJoint {
    alphabet: Vec<(String, String)>,
    probs: Vec<f64>,
}

impl TryFrom<RawJoint> for JointDist {
    type Error = Error;
    fn try_from(raw: RawJoint) -> Result<Self> {
        if raw.alphabet.len() != raw.probs.len() {
            return Err(Error::LengthMismatch { expected: raw.alphabet.len(), actual: raw.probs.len() });
        }
        let mut xs: Vec<String> = Vec::new();
        let mut ys: Vec<String> = Vec::new();
        for (x, y) in &raw.alphabet {
            if !xs.contains(x) {
                xs.push(x.clone());
            }
            if !ys.contains(y) {
                ys.push(y.clone());
            }
        }
        let mut probs = vec![0.0; xs.len() * ys.len()];
        let mut seen = HashSet::new();
        for ((x, y), p) in raw.alphabet.iter().zip(&raw.probs) {
            if !seen.insert((x.clone(), y.clone())) {
                return Err(Error::InvalidDistribution(format!("duplicate pair ({x}, {y})")));
            }
            let xi = xs.iter().position(|s| s == x).unwrap();
            let yi = ys.iter().position(|s| s == y).unwrap();
            probs[xi * ys.len() + yi] = *p;
        }
        JointDist::new(xs, ys, probs)
    }
}

impl From<JointDist> for RawJoint {
    fn from(j: JointDist) -> Self {
        let mut alphabet = Vec::with_capacity(j.probs.len());
        for x in &j.x_alphabet {
            for y in &j.y_alphabet {
                alphabet.push((x.clone(), y.clone()));
            }
        }
        RawJoint { alphabet, probs: j.probs }
    }
}

impl JointDist {
    pub fn new(x_alphabet: Vec<String>, y_alphabet: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        let expected = x_alphabet.len() * y_alphabet.len();
        if probs.len() != expected {
            return Err(Error::LengthMismatch { expected, actual: probs.len() });
        }
        // reuse symbol checks of the marginal alphabets
        ProbDist::uniform(x_alphabet.len().max(1))?;
        for alph in [&x_alphabet, &y_alphabet] {
            let mut seen = HashSet::new();
            if alph.iter().any(|s| !seen.insert(s.as_str())) {
                return Err(Error::InvalidDistribution("duplicate symbol in marginal alphabet".into()));
            }
        }
        check_probs(&probs)?;
        Ok(Self { x_alphabet, y_alphabet, probs })
    }

    /// Joint over `{0..nx} × {0..ny}` from a row-major matrix.
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let nx = rows.len();
        let ny = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ny) {
            return Err(Error::InvalidDistribution("ragged joint matrix".into()));
        }
        Self::new(default_alphabet(nx), default_alphabet(ny), rows.concat())
    }

    pub fn x_alphabet(&self) -> &[String] {
        &self.x_alphabet
    }

    pub fn y_alphabet(&self) -> &[String] {
        &self.y_alphabet
    }

    pub fn nx(&self) -> usize {
        self.x_alphabet.len()
    }

    pub fn ny(&self) -> usize {
        self.y_alphabet.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.ny() + y]
    }

    pub fn marginal_x(&self) -> ProbDist {
        let probs = (0..self.nx()).map(|x| (0..self.ny()).map(|y| self.get(x, y)).sum()).collect();
        ProbDist { alphabet: self.x_alphabet.clone(), probs }
    }

    pub fn marginal_y(&self) -> ProbDist {
        let probs = (0..self.ny()).map(|y| (0..self.nx()).map(|x| self.get(x, y)).sum()).collect();
        ProbDist { alphabet: self.y_alphabet.clone(), probs }
    }

    /// `P_{X|Y=y}`, or `None` when `P(y) = 0`.
    pub fn conditional_x(&self, y: usize) -> Option<ProbDist> {
        let col: Vec<f64> = (0..self.nx()).map(|x| self.get(x, y)).collect();
        let py: f64 = col.iter().sum();
        (py > 0.0).then(|| ProbDist {
            alphabet: self.x_alphabet.clone(),
            probs: col.iter().map(|p| p / py).collect(),
        })
    }

    /// Flattened view over the product alphabet `"x,y"`.
    pub fn as_prob_dist(&self) -> ProbDist {
        let mut alphabet = Vec::with_capacity(self.probs.len());
        for x in &self.x_alphabet {
            for y in &self.y_alphabet {
                alphabet.push(format!("{x},{y}"));
            }
        }
        ProbDist { alphabet, probs: self.probs.clone() }
    }
}

/// A channel from `Y` to `X`: one distribution over `X` per input symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondChannel {
    inputs: Vec<String>,
    rows: Vec<ProbDist>,
}

impl CondChannel {
    pub fn new(inputs: Vec<String>, rows: Vec<ProbDist>) -> Result<Self> {
        if inputs.len() != rows.len() {
            return Err(Error::LengthMismatch { expected: inputs.len(), actual: rows.len() });
        }
        let first = rows.first().ok_or_else(|| Error::Empty("channel without inputs".into()))?;
        if rows.iter().any(|r| r.alphabet() != first.alphabet()) {
            return Err(Error::AlphabetMismatch("channel rows use different output alphabets".into()));
        }
        Ok(Self { inputs, rows })
    }

    /// Binary symmetric channel with flip probability `flip`.
    pub fn binary_symmetric(flip: f64) -> Result<Self> {
        let rows = vec![ProbDist::binary(flip)?, ProbDist::from_probs(vec![flip, 1.0 - flip])?];
        Self::new(default_alphabet(2), rows)
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        self.rows[0].alphabet()
    }

    pub fn row(&self, y: usize) -> &ProbDist {
        &self.rows[y]
    }

    pub fn rows(&self) -> &[ProbDist] {
        &self.rows
    }
}

/// Radius of a variational-distance ball.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SmoothingParam(f64);

impl SmoothingParam {
    pub fn new(eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::OutOfRange(format!("smoothing parameter {eps} outside [0, 1]")));
        }
        Ok(Self(eps))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Variational distance `½ Σ |P(z) − Q(z)|`.
pub fn variational_distance(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    if p.alphabet != q.alphabet {
        return Err(Error::AlphabetMismatch(format!("{:?} vs {:?}", p.alphabet, q.alphabet)));
    }
    Ok(l1_half(&p.probs, &q.probs))
}

pub(crate) fn l1_half(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Distance to the uniform distribution over the same alphabet.
pub fn non_uniformity(p: &ProbDist) -> f64 {
    let u = 1.0 / p.len() as f64;
    0.5 * p.probs.iter().map(|x| (x - u).abs()).sum::<f64>()
}

/// Empirical distribution of `z` over the declared `alphabet`.
pub fn frequency_distribution<S: AsRef<str>>(z: &[S], alphabet: &[String]) -> Result<ProbDist> {
    if z.is_empty() {
        return Err(Error::Empty("frequency of an empty tuple".into()));
    }
    let mut counts = vec![0usize; alphabet.len()];
    for s in z {
        let i = alphabet
            .iter()
            .position(|a| a == s.as_ref())
            .ok_or_else(|| Error::AlphabetMismatch(format!("symbol {:?} not in alphabet", s.as_ref())))?;
        counts[i] += 1;
    }
    ProbDist::new(alphabet.to_vec(), counts_to_probs(&counts))
}

/// Empirical distribution of a tuple of symbol indices in `0..q`.
pub fn frequency_of_indices(z: &[usize], q: usize) -> Result<ProbDist> {
    if z.is_empty() {
        return Err(Error::Empty("frequency of an empty tuple".into()));
    }
    let mut counts = vec![0usize; q];
    for &i in z {
        if i >= q {
            return Err(Error::OutOfRange(format!("symbol index {i} outside alphabet of size {q}")));
        }
        counts[i] += 1;
    }
    ProbDist::from_probs(counts_to_probs(&counts))
}

fn counts_to_probs(counts: &[usize]) -> Vec<f64> {
    let n: usize = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / n as f64).collect()
}

/// Coupling of `P` and `Q` with `Prob[Z ≠ Z'] = δ(P, Q)`, returned as a
/// row-major matrix `joint[z][z']`.
pub fn maximal_coupling(p: &ProbDist, q: &ProbDist) -> Result<Vec<Vec<f64>>> {
    let delta = variational_distance(p, q)?;
    let n = p.len();
    let mut joint = vec![vec![0.0; n]; n];
    for z in 0..n {
        joint[z][z] = p.probs[z].min(q.probs[z]);
    }
    if delta > 0.0 {
        for z in 0..n {
            let excess = (p.probs[z] - q.probs[z]).max(0.0);
            if excess == 0.0 {
                continue;
            }
            for zp in 0..n {
                let deficit = (q.probs[zp] - p.probs[zp]).max(0.0);
                joint[z][zp] += excess * deficit / delta;
            }
        }
    }
    Ok(joint)
}
