use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{binomial_tail_weight, log2_hamming_ball};
use crate::error::{Error, Result};
use crate::randkit::{bits_to_string, SeededPermutation, ToeplitzHash};

/// Largest error weight the decoder tries.
pub const WEIGHT_CAP: usize = 4;
/// Largest number of error patterns the decoder tries per block.
pub const CANDIDATE_CAP: usize = 1 << 16;
/// Up to this length the sifted string is reconciled as a single block.
pub const EXACT_MODE_MAX: usize = 24;
/// Syndromes are handled as machine words.
pub const MAX_BLOCK_BITS: usize = 64;

/// Information-reconciliation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IrParams {
    /// Target probability that a block holds more errors than its design weight.
    pub eps_ir: f64,
    /// Extra syndrome bits per block on top of the Hamming-ball size.
    pub margin: usize,
    /// Length of the final Toeplitz verification tag (0 disables it).
    pub verify_bits: usize,
    /// Fixed syndrome length for a single block, overriding the planner.
    pub bits: Option<usize>,
}

impl Default for IrParams {
    fn default() -> Self {
        Self { eps_ir: 1e-3, margin: 4, verify_bits: 32, bits: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPlan {
    pub start: usize,
    pub len: usize,
    pub bits: usize,
}

fn block_bits(len: usize, qber: f64, params: &IrParams) -> (usize, usize) {
    let w = design_weight(len, qber, params.eps_ir);
    let bits = log2_hamming_ball(len, w).ceil() as usize + params.margin;
    (w, bits.min(len).min(MAX_BLOCK_BITS))
}

fn design_weight(len: usize, qber: f64, eps_ir: f64) -> usize {
    if qber <= 0.0 {
        0
    } else if qber >= 1.0 {
        len
    } else {
        binomial_tail_weight(len, qber, eps_ir).0
    }
}

/// Split `n` positions into blocks and choose each block's syndrome length
/// for an expected error rate `qber`.
///
/// Strings of at most [`EXACT_MODE_MAX`] bits form one block. Longer strings
/// use the largest block size whose design weight is at most
/// [`WEIGHT_CAP`] and whose Hamming ball holds at most [`CANDIDATE_CAP`]
/// patterns.
pub fn plan_blocks(n: usize, qber: f64, params: &IrParams) -> Result<Vec<BlockPlan>> {
    if !(0.0..=1.0).contains(&qber) {
        return Err(Error::OutOfRange(format!("error rate {qber}")));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if let Some(bits) = params.bits {
        if bits > MAX_BLOCK_BITS {
            return Err(Error::TooLarge(format!("{bits} syndrome bits exceed {MAX_BLOCK_BITS}")));
        }
        // a fixed syndrome never exceeds the string it describes
        return Ok(vec![BlockPlan { start: 0, len: n, bits: bits.min(n) }]);
    }
    if n <= EXACT_MODE_MAX {
        return Ok(vec![BlockPlan { start: 0, len: n, bits: block_bits(n, qber, params).1 }]);
    }
    let cap = (CANDIDATE_CAP as f64).log2();
    let b = (1..=n)
        .filter(|&b| {
            let w = design_weight(b, qber, params.eps_ir);
            w <= WEIGHT_CAP && log2_hamming_ball(b, w) <= cap
        })
        .max()
        .unwrap_or(1);
    let count = n.div_ceil(b);
    let mut blocks = Vec::with_capacity(count);
    let mut start = 0;
    for i in 0..count {
        let len = n / count + usize::from(i < n % count);
        blocks.push(BlockPlan { start, len, bits: block_bits(len, qber, params).1 });
        start += len;
    }
    Ok(blocks)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub start: usize,
    pub len: usize,
    pub hash: Option<ToeplitzHash>,
    pub syndrome: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub hash: ToeplitzHash,
    pub tag: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReconcileStatus {
    Ok,
    /// Some block had no matching pattern within the caps.
    Infeasible,
    /// Every block decoded but the verification tags differ.
    VerificationFailed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reconciliation {
    pub blocks: Vec<BlockRecord>,
    pub verify: Option<VerifyRecord>,
    /// Total public bits `r′`.
    pub leakage: usize,
    #[serde(with = "bit_string")]
    pub x_bar: Vec<u8>,
    pub status: ReconcileStatus,
    /// Whether Bob's guess equals Alice's string.
    pub success: bool,
    pub candidates_tried: usize,
}

pub(crate) mod bit_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::randkit::bits_to_string(bits))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        crate::randkit::parse_bits(&String::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Images of the unit vectors under `hash`, one word per input position.
fn columns(hash: &ToeplitzHash) -> Vec<u64> {
    (0..hash.n_in).map(|j| (0..hash.n_out).fold(0u64, |w, i| (w << 1) | hash.diag[i + j] as u64)).collect()
}

fn word(bits: &[u8]) -> u64 {
    bits.iter().fold(0u64, |w, b| (w << 1) | *b as u64)
}

/// Bob's guess of a block: the lowest-weight correction `e` with
/// `hash(y ⊕ e) = syndrome`, trying patterns by weight and then
/// lexicographically. Returns the guess (if any) and the number of
/// patterns tried.
pub fn guess_block(y: &[u8], hash: Option<&ToeplitzHash>, syndrome: &[u8]) -> Result<(Option<Vec<u8>>, usize)> {
    let Some(hash) = hash else {
        return Ok((Some(y.to_vec()), 1));
    };
    if hash.n_out > MAX_BLOCK_BITS {
        return Err(Error::TooLarge(format!("{} syndrome bits", hash.n_out)));
    }
    let cols = columns(hash);
    let target = word(syndrome) ^ word(&hash.apply(y)?);
    let n = y.len();
    let mut tried = 0;
    for w in 0..=WEIGHT_CAP.min(n) {
        let mut idx: Vec<usize> = (0..w).collect();
        loop {
            tried += 1;
            if idx.iter().fold(0u64, |acc, &j| acc ^ cols[j]) == target {
                let mut x = y.to_vec();
                idx.iter().for_each(|&j| x[j] ^= 1);
                return Ok((Some(x), tried));
            }
            if tried >= CANDIDATE_CAP || !next_combination(&mut idx, n) {
                break;
            }
        }
        if tried >= CANDIDATE_CAP {
            break;
        }
    }
    Ok((None, tried))
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// One-way reconciliation of `x` (Alice) and `y` (Bob): Alice sends the
/// syndrome of every planned block and a verification tag; Bob decodes
/// block by block and checks the tag.
pub fn reconcile<R: Rng + ?Sized>(x: &[u8], y: &[u8], plan: &[BlockPlan], verify_bits: usize, rng: &mut R) -> Result<Reconciliation> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), actual: y.len() });
    }
    let mut blocks = Vec::with_capacity(plan.len());
    let mut x_bar = Vec::with_capacity(x.len());
    let mut status = ReconcileStatus::Ok;
    let mut leakage = 0;
    let mut candidates_tried = 0;
    for b in plan {
        let range = b.start..b.start + b.len;
        let hash = if b.bits > 0 { Some(ToeplitzHash::random(b.len, b.bits, rng)?) } else { None };
        let syndrome = match &hash {
            Some(h) => h.apply(&x[range.clone()])?,
            None => Vec::new(),
        };
        leakage += syndrome.len();
        if status == ReconcileStatus::Ok {
            let (guess, tried) = guess_block(&y[range.clone()], hash.as_ref(), &syndrome)?;
            candidates_tried += tried;
            match guess {
                Some(g) => x_bar.extend(g),
                None => status = ReconcileStatus::Infeasible,
            }
        }
        blocks.push(BlockRecord { start: b.start, len: b.len, hash, syndrome: bits_to_string(&syndrome) });
    }
    if status != ReconcileStatus::Ok {
        x_bar = y.to_vec();
    }
    let tag_len = verify_bits.min(x.len());
    let verify = if tag_len > 0 {
        let hash = ToeplitzHash::random(x.len(), tag_len, rng)?;
        let tag = hash.apply(x)?;
        leakage += tag_len;
        if status == ReconcileStatus::Ok && hash.apply(&x_bar)? != tag {
            status = ReconcileStatus::VerificationFailed;
        }
        Some(VerifyRecord { hash, tag: bits_to_string(&tag) })
    } else {
        None
    };
    let success = x_bar == x;
    Ok(Reconciliation { blocks, verify, leakage, x_bar, status, success, candidates_tried })
}

/// All public messages Alice sends about `x`, concatenated.
pub fn public_messages(rec: &Reconciliation, x: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(rec.leakage);
    for b in &rec.blocks {
        if let Some(h) = &b.hash {
            out.extend(h.apply(&x[b.start..b.start + b.len])?);
        }
    }
    if let Some(v) = &rec.verify {
        out.extend(v.hash.apply(x)?);
    }
    Ok(out)
}

/// Privacy amplification: permute, then hash to `hash.n_out` bits. A missing
/// hash gives the empty key.
pub fn amplify(x: &[u8], perm: &SeededPermutation, hash: Option<&ToeplitzHash>) -> Result<Vec<u8>> {
    let permuted = perm.apply(x)?;
    match hash {
        Some(h) => h.apply(&permuted),
        None => Ok(Vec::new()),
    }
}
