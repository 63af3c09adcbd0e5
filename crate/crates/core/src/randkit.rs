//! Seeded randomness: labeled generator streams, Toeplitz hashing over
//! GF(2), p-random selections and permutations.
//!
//! Bit strings are `Vec<u8>` holding 0/1 values, index 0 first (most
//! significant). Selections hold 0-based indices in increasing order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type StreamRng = ChaCha20Rng;

/// Independent generator for one role, derived from a master seed.
pub fn stream(master: u64, label: &str) -> StreamRng {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(label.as_bytes());
    StreamRng::from_seed(h.finalize().into())
}

/// Parse a seed given in decimal or as `0x`-prefixed hex.
pub fn parse_seed(text: &str) -> Result<u64> {
    let t = text.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse::<u64>(),
    };
    parsed.map_err(|_| Error::Parse(format!("bad seed {text:?}")))
}

pub fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect()
}

pub fn parse_bits(text: &str) -> Result<Vec<u8>> {
    text.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::Parse(format!("bad bit {c:?}"))),
        })
        .collect()
}

fn check_bits(bits: &[u8]) -> Result<()> {
    if bits.iter().any(|b| *b > 1) {
        return Err(Error::Parse("bit strings hold only 0 and 1".into()));
    }
    Ok(())
}

/// `x ⊕ y`.
pub fn xor_bits(x: &[u8], y: &[u8]) -> Vec<u8> {
    x.iter().zip(y).map(|(a, b)| a ^ b).collect()
}

/// A member of the Toeplitz family `{0,1}^{n_in} → {0,1}^{n_out}`:
/// output bit `i` is `Σ_j diag[i + j] x_j mod 2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToeplitzHash {
    pub n_in: usize,
    pub n_out: usize,
    #[serde(with = "diag_hex")]
    pub diag: Vec<u8>,
}

mod diag_hex {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(diag: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::encode_bits_hex(diag))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        let (len, hex) = text.split_once(':').ok_or_else(|| serde::de::Error::custom("expected <len>:<hex>"))?;
        let len: usize = len.parse().map_err(serde::de::Error::custom)?;
        super::decode_bits_hex(hex, len).map_err(serde::de::Error::custom)
    }
}

/// `"<len>:<hex>"`, bits packed most significant first.
pub fn encode_bits_hex(bits: &[u8]) -> String {
    let bytes: Vec<u8> = bits
        .chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, b)| acc | (b << (7 - i))))
        .collect();
    format!("{}:{}", bits.len(), hex::encode(bytes))
}

pub fn decode_bits_hex(hex_text: &str, len: usize) -> Result<Vec<u8>> {
    let bytes = hex::decode(hex_text).map_err(|e| Error::Parse(e.to_string()))?;
    if bytes.len() != len.div_ceil(8) {
        return Err(Error::Parse(format!("{} hex bytes cannot hold exactly {len} bits", bytes.len())));
    }
    Ok((0..len).map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1).collect())
}

impl ToeplitzHash {
    pub fn new(n_in: usize, n_out: usize, diag: Vec<u8>) -> Result<Self> {
        if n_out == 0 || n_out > n_in {
            return Err(Error::OutOfRange(format!("Toeplitz hash needs 1 ≤ n_out ≤ n_in (got {n_out}, {n_in})")));
        }
        if diag.len() != n_in + n_out - 1 {
            return Err(Error::LengthMismatch { expected: n_in + n_out - 1, actual: diag.len() });
        }
        check_bits(&diag)?;
        Ok(Self { n_in, n_out, diag })
    }

    pub fn random<R: Rng + ?Sized>(n_in: usize, n_out: usize, rng: &mut R) -> Result<Self> {
        let len = (n_in + n_out).saturating_sub(1);
        let diag = (0..len).map(|_| rng.random::<bool>() as u8).collect();
        Self::new(n_in, n_out, diag)
    }

    pub fn apply(&self, x: &[u8]) -> Result<Vec<u8>> {
        if x.len() != self.n_in {
            return Err(Error::LengthMismatch { expected: self.n_in, actual: x.len() });
        }
        check_bits(x)?;
        Ok((0..self.n_out)
            .map(|i| x.iter().enumerate().fold(0u8, |acc, (j, b)| acc ^ (self.diag[i + j] & b)))
            .collect())
    }

    pub fn diag_hex(&self) -> String {
        encode_bits_hex(&self.diag)
    }
}

/// Largest `n_in` accepted by [`collision_probability_exhaustive`].
pub const COLLISION_CAP_IN: usize = 10;

/// Maximum over distinct pairs `x ≠ x'` of `Prob[h(x) = h(x')]` for `h`
/// uniform over the Toeplitz family, by enumerating every diagonal.
pub fn collision_probability_exhaustive(n_in: usize, n_out: usize) -> Result<f64> {
    if n_in > COLLISION_CAP_IN {
        return Err(Error::TooLarge(format!("n_in = {n_in} exceeds {COLLISION_CAP_IN}")));
    }
    if n_out == 0 || n_out > n_in {
        return Err(Error::OutOfRange(format!("need 1 ≤ n_out ≤ n_in (got {n_out}, {n_in})")));
    }
    let len = n_in + n_out - 1;
    let n_diff = 1usize << n_in;
    // kernel[d] counts diagonals mapping the difference d to zero
    let mut kernel = vec![0u64; n_diff];
    let mut image = vec![0u32; n_diff];
    for code in 0u64..(1 << len) {
        let diag: Vec<u8> = (0..len).map(|k| ((code >> (len - 1 - k)) & 1) as u8).collect();
        // image of the unit vector e_j as an n_out-bit word
        let unit: Vec<u32> = (0..n_in)
            .map(|j| (0..n_out).fold(0u32, |w, i| (w << 1) | diag[i + j] as u32))
            .collect();
        for d in 1..n_diff {
            let low = d.trailing_zeros() as usize;
            // d's bit `low` (from the least significant end) is x_{n_in-1-low}
            image[d] = image[d & (d - 1)] ^ unit[n_in - 1 - low];
            if image[d] == 0 {
                kernel[d] += 1;
            }
        }
    }
    let worst = kernel[1..].iter().copied().max().unwrap_or(0);
    Ok(worst as f64 / (1u64 << len) as f64)
}

/// Subset of `{0, …, n−1}` including each index independently with
/// probability `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PRandomSelection {
    pub p: f64,
    pub n: usize,
    pub included: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

const SELECTION_LABEL: &str = "selection";

/// Seeded p-random selection; the same `(p, n, seed)` always gives the same
/// subset.
pub fn p_random_select(p: f64, n: usize, seed: u64) -> Result<PRandomSelection> {
    let mut sel = p_random_select_with(p, n, &mut stream(seed, SELECTION_LABEL))?;
    sel.seed = Some(seed);
    Ok(sel)
}

/// p-random selection drawn from a caller-supplied generator.
pub fn p_random_select_with<R: Rng + ?Sized>(p: f64, n: usize, rng: &mut R) -> Result<PRandomSelection> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("selection probability {p}")));
    }
    let included = (0..n).filter(|_| rng.random::<f64>() < p).collect();
    Ok(PRandomSelection { p, n, included, seed: None })
}

impl PRandomSelection {
    pub fn full(n: usize) -> Self {
        Self { p: 1.0, n, included: (0..n).collect(), seed: None }
    }

    pub fn empty(n: usize) -> Self {
        Self { p: 0.0, n, included: Vec::new(), seed: None }
    }

    pub fn from_indices(n: usize, mut included: Vec<usize>) -> Result<Self> {
        included.sort_unstable();
        included.dedup();
        if included.last().is_some_and(|&i| i >= n) {
            return Err(Error::OutOfRange(format!("index outside ground set of size {n}")));
        }
        let p = if n == 0 { 0.0 } else { included.len() as f64 / n as f64 };
        Ok(Self { p, n, included, seed: None })
    }

    pub fn len(&self) -> usize {
        self.included.len()
    }

    pub fn is_empty(&self) -> bool {
        self.included.is_empty()
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &i in &self.included {
            m[i] = true;
        }
        m
    }

    pub fn contains(&self, i: usize) -> bool {
        self.included.binary_search(&i).is_ok()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::LengthMismatch { expected: self.n, actual: other.n });
        }
        Ok(())
    }

    fn combine(&self, other: &Self, p: f64, keep: impl Fn(bool, bool) -> bool) -> Result<Self> {
        self.check_same(other)?;
        let (a, b) = (self.mask(), other.mask());
        let included = (0..self.n).filter(|&i| keep(a[i], b[i])).collect();
        Ok(Self { p, n: self.n, included, seed: None })
    }

    /// Intersection; independent selections give a `p·p'`-random selection.
    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.combine(other, self.p * other.p, |a, b| a && b)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.combine(other, self.p + other.p - self.p * other.p, |a, b| a || b)
    }

    /// Elements of `self` not in `other`.
    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.combine(other, self.p * (1.0 - other.p), |a, b| a && !b)
    }

    pub fn complement(&self) -> Self {
        let m = self.mask();
        let included = (0..self.n).filter(|&i| !m[i]).collect();
        Self { p: 1.0 - self.p, n: self.n, included, seed: None }
    }
}

/// A uniformly random permutation; `apply` maps `x` to `(x[perm[0]], x[perm[1]], …)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededPermutation {
    pub n: usize,
    pub perm: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

const PERMUTATION_LABEL: &str = "permutation";

impl SeededPermutation {
    pub fn from_seed(n: usize, seed: u64) -> Self {
        let mut p = Self::random(n, &mut stream(seed, PERMUTATION_LABEL));
        p.seed = Some(seed);
        p
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        Self { n, perm, seed: None }
    }

    pub fn apply<T: Clone>(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, actual: x.len() });
        }
        Ok(self.perm.iter().map(|&i| x[i].clone()).collect())
    }
}
