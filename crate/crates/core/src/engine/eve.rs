use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::attack::{bell_purification, eve_operator, AttackModel, Basis};
use super::reconcile::{amplify, public_messages};
use super::Transcript;
use crate::bounds::{chain_rule_bound, pa_distance_bound, BoundReport};
use crate::cinfo::{smooth_renyi, Order, ProbDist};
use crate::error::{Error, Result};
use crate::qcore::{c, hermitian_eigenvalues, CMat};

/// Largest `n` accepted by [`eve_distance_exact`].
pub const EXACT_EVE_MAX_N: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EveDistance {
    /// `Σ_f ½‖ρ_{S E, f} − 2^{−s′} 𝟙 ⊗ ρ_{E, f}‖₁` over the public messages `f`.
    pub distance: f64,
    pub n_prime: usize,
    pub leakage: usize,
    pub s_prime: usize,
    /// Smooth min-entropy of the sifted string given the public messages.
    pub hinf_given_messages: f64,
    /// Smooth max-rank of Eve's system on the key positions.
    pub h0_eve: f64,
    pub bound: BoundReport,
}

fn trace_norm(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).iter().map(|e| e.abs()).sum()
}

/// Block `b` (`0`: `ψ±`, `1`: `φ±`) of Eve's operator for a key-basis outcome.
fn block(n: &CMat, b: usize) -> CMat {
    CMat::from_fn(2, 2, |i, j| n[(2 * b + i, 2 * b + j)])
}

fn kron_all(ops: &[&CMat]) -> CMat {
    ops.iter().skip(1).fold(ops[0].clone(), |acc, m| acc.kronecker(m))
}

/// Exact distance of Alice's final key from uniform, given Eve's quantum
/// system and all public messages, for a Bell-diagonal attack.
///
/// Announced positions are independent of the key positions, so only the
/// key positions enter. In Eve's Bell-label basis each key-basis operator is
/// block diagonal (`ψ±` and `φ±`), and the product over positions splits
/// into `2^{n′}` blocks of size `2^{n′}`.
pub fn eve_distance_exact(transcript: &Transcript, attack: &AttackModel) -> Result<EveDistance> {
    let config = &transcript.config;
    if !config.exact_eve {
        return Err(Error::Unsupported("transcript was not produced in exact-Eve mode".into()));
    }
    if config.n > EXACT_EVE_MAX_N {
        return Err(Error::TooLarge(format!("n = {} exceeds {EXACT_EVE_MAX_N}", config.n)));
    }
    let lambdas = attack
        .pauli_weights()
        .ok_or_else(|| Error::Unsupported("exact Eve evaluation needs a Bell-diagonal attack".into()))?;
    attack.validate()?;
    if transcript.aborted {
        return Err(Error::Unsupported(format!(
            "aborted run ({}) has no key",
            transcript.abort_message.as_deref().unwrap_or("unknown reason")
        )));
    }
    let rec = transcript.reconciliation.as_ref().ok_or_else(|| Error::Empty("no reconciliation record".into()))?;
    let amp = transcript.amplification.as_ref().ok_or_else(|| Error::Empty("no amplification record".into()))?;
    let n = transcript.n_prime;
    let s_prime = amp.s_prime;

    let psi = bell_purification(lambdas);
    let ops: Vec<[CMat; 2]> = (0..2u8)
        .map(|x| {
            let full = eve_operator(&psi, Basis::Z, x);
            [block(&full, 0), block(&full, 1)]
        })
        .collect();

    // group the 2^{n′} strings by public message, then by key
    let mut classes: BTreeMap<Vec<u8>, BTreeMap<Vec<u8>, Vec<usize>>> = BTreeMap::new();
    for code in 0..1usize << n {
        let x: Vec<u8> = (0..n).map(|j| ((code >> (n - 1 - j)) & 1) as u8).collect();
        let f = public_messages(rec, &x)?;
        let k = amplify(&x, &amp.permutation, amp.hash.as_ref())?;
        classes.entry(f).or_default().entry(k).or_default().push(code);
    }

    let dim = 1usize << n;
    let uniform = 2f64.powi(-(s_prime as i32));
    let n_keys = 1usize << s_prime;
    let mut distance = 0.0;
    for pattern in 0..1usize << n {
        let product = |code: usize| -> CMat {
            if n == 0 {
                return CMat::identity(1, 1);
            }
            let factors: Vec<&CMat> = (0..n)
                .map(|j| {
                    let x = (code >> (n - 1 - j)) & 1;
                    let b = (pattern >> (n - 1 - j)) & 1;
                    &ops[x][b]
                })
                .collect();
            kron_all(&factors)
        };
        for by_key in classes.values() {
            let per_key: Vec<CMat> = by_key
                .values()
                .map(|codes| codes.iter().fold(CMat::zeros(dim, dim), |acc, &code| acc + product(code)))
                .collect();
            let total = per_key.iter().fold(CMat::zeros(dim, dim), |acc, m| acc + m);
            for k in &per_key {
                distance += 0.5 * trace_norm(&(k - &total * c(uniform)));
            }
            let missing = n_keys - per_key.len();
            distance += 0.5 * missing as f64 * uniform * trace_norm(&total);
        }
    }

    let hinf = chain_rule_bound(n as f64, rec.leakage as f64, config.eps2)?;
    let eve_spectrum = product_distribution(&lambdas, n)?;
    let h0_eve = smooth_renyi(&eve_spectrum, Order::ZERO, config.eps1)?;
    let raw = pa_distance_bound(hinf, h0_eve, s_prime as f64, config.eps2, config.eps1)?;
    let bound = BoundReport::probability(
        "privacy-amplification",
        &[
            ("hinf", hinf),
            ("h0", h0_eve),
            ("s", s_prime as f64),
            ("eps", config.eps2),
            ("eps1", config.eps1),
        ],
        raw,
    )
    .with_empirical(distance, 1e-9);
    Ok(EveDistance { distance, n_prime: n, leakage: rec.leakage, s_prime, hinf_given_messages: hinf, h0_eve, bound })
}

/// `λ^{⊗n}` as a distribution over `4^n` symbols.
fn product_distribution(lambdas: &[f64; 4], n: usize) -> Result<ProbDist> {
    let mut probs = vec![1.0];
    for _ in 0..n {
        probs = probs.iter().flat_map(|p| lambdas.iter().map(move |l| p * l)).collect();
    }
    ProbDist::from_probs(probs)
}
