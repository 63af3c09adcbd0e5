use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analyzers::Protocol;
use crate::cinfo::ProbDist;
use crate::error::{Error, Result};
use crate::qcore::{bell_diagonal_state, bell_vectors, c, measure, pauli_matrices, CMat, CVec,
    DensityOperator, Povm, OPERATOR_TOL};

/// How the channel (or Eve) acts on each transmitted system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackModel {
    /// Pauli channel on Bob's half: `I, σ_z, σ_x, σ_y` with weights `λ`.
    BellDiagonal { lambdas: [f64; 4] },
    /// Pauli weights `(1−p, p/3, p/3, p/3)`.
    Depolarizing { p: f64 },
    /// `|u±⟩|e⟩ ↦ √(1−δ)|u±⟩|e±⟩ + √δ|ũ±⟩|ẽ±⟩` with real overlaps
    /// `⟨e₊|e₋⟩`, `Re⟨e±|ẽ±⟩` and `⟨ẽ₊|ẽ₋⟩`; the cross overlaps
    /// `⟨e±|ẽ∓⟩` follow from unitarity.
    B92Unitary { alpha: f64, delta: f64, e_overlap: f64, re_cross: f64, te_overlap: f64 },
}

const LAMBDA_TOL: f64 = 1e-9;

impl AttackModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::BellDiagonal { lambdas } => {
                if lambdas.iter().any(|l| !(*l >= 0.0)) || (lambdas.iter().sum::<f64>() - 1.0).abs() > LAMBDA_TOL {
                    return Err(Error::InvalidDistribution(format!("Bell weights {lambdas:?}")));
                }
            }
            Self::Depolarizing { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::OutOfRange(format!("depolarizing p = {p} outside [0, 1]")));
                }
            }
            Self::B92Unitary { .. } => {
                b92_environment(self)?;
            }
        }
        Ok(())
    }

    /// Pauli weights for the channel models; `None` for `b92_unitary`.
    pub fn pauli_weights(&self) -> Option<[f64; 4]> {
        match *self {
            Self::BellDiagonal { lambdas } => Some(lambdas),
            Self::Depolarizing { p } => Some([1.0 - p, p / 3.0, p / 3.0, p / 3.0]),
            Self::B92Unitary { .. } => None,
        }
    }
}

/// Measurement basis of one position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Z, Basis::X, Basis::Y];

    pub fn letter(self) -> char {
        match self {
            Basis::Z => 'Z',
            Basis::X => 'X',
            Basis::Y => 'Y',
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    pub fn alice_povm(self) -> Povm {
        match self {
            Basis::Z => Povm::computational(2).expect("qubit"),
            Basis::X => Povm::qubit_x(),
            Basis::Y => Povm::qubit_y(),
        }
    }

    /// Bob measures `σ_y` in the conjugate basis so that `|ψ⁺⟩` gives equal
    /// outcomes in all three bases.
    pub fn bob_povm(self) -> Povm {
        match self {
            Basis::Z => Povm::computational(2).expect("qubit"),
            Basis::X => Povm::qubit_x(),
            Basis::Y => Povm::qubit_y_conjugate(),
        }
    }

    /// Whether the Pauli with index `k` (`I, σ_z, σ_x, σ_y`) flips outcomes
    /// measured in this basis.
    pub fn flipped_by(self, k: usize) -> bool {
        match self {
            Basis::Z => k == 2 || k == 3,
            Basis::X => k == 1 || k == 3,
            Basis::Y => k == 1 || k == 2,
        }
    }
}

/// Per-position joint description produced by an attack.
#[derive(Debug, Clone)]
pub enum AttackState {
    /// `ρ_AB` and its purification `Σ_k √λ_k |B_k⟩|k⟩` on `A ⊗ B ⊗ E`.
    Bell { lambdas: [f64; 4], rho_ab: DensityOperator, purification: CVec },
    /// `|Ψ±⟩` on `B ⊗ E` for Alice's bit 0 (`+`) and 1 (`−`).
    B92 { alpha: f64, psi: [CVec; 2], env_dim: usize },
}

pub fn attack_state(model: &AttackModel, protocol: Protocol) -> Result<AttackState> {
    model.validate()?;
    match (protocol, model.pauli_weights()) {
        (Protocol::Bb84 | Protocol::SixState, Some(lambdas)) => {
            let rho_ab = bell_diagonal_state(lambdas)?;
            Ok(AttackState::Bell { lambdas, rho_ab, purification: bell_purification(lambdas) })
        }
        (Protocol::Bb84 | Protocol::SixState, None) => {
            Err(Error::Unsupported(format!("{protocol} cannot run against a b92_unitary attack")))
        }
        (Protocol::B92, _) => Err(Error::Unsupported(
            "B92 attack states depend on the signal amplitude; use b92_attack_state".into(),
        )),
    }
}

/// `Σ_k √λ_k |B_k⟩ ⊗ |k⟩`, with `A ⊗ B` the leading factor.
pub fn bell_purification(lambdas: [f64; 4]) -> CVec {
    let bell = bell_vectors();
    let mut psi = CVec::zeros(16);
    for (k, b) in bell.iter().enumerate() {
        for i in 0..4 {
            psi[i * 4 + k] += b[i] * c(lambdas[k].sqrt());
        }
    }
    psi
}

/// `|u±⟩ = β|0⟩ ± α|1⟩`.
pub fn b92_signal(alpha: f64, bit: u8) -> CVec {
    let beta = (1.0 - alpha * alpha).sqrt();
    let sign = if bit == 0 { 1.0 } else { -1.0 };
    CVec::from_vec(vec![c(beta), c(sign * alpha)])
}

/// `|ũ±⟩ = α|0⟩ ∓ β|1⟩`.
pub fn b92_orthogonal(alpha: f64, bit: u8) -> CVec {
    let beta = (1.0 - alpha * alpha).sqrt();
    let sign = if bit == 0 { -1.0 } else { 1.0 };
    CVec::from_vec(vec![c(alpha), c(sign * beta)])
}

/// Environment vectors `e₊, e₋, ẽ₊, ẽ₋` realising the overlaps of a
/// `b92_unitary` model.
fn b92_environment(model: &AttackModel) -> Result<[CVec; 4]> {
    let AttackModel::B92Unitary { alpha, delta, e_overlap, re_cross, te_overlap } = *model else {
        return Err(Error::Unsupported("not a b92_unitary model".into()));
    };
    if !(alpha > 0.0 && alpha < std::f64::consts::FRAC_1_SQRT_2) {
        return Err(Error::OutOfRange(format!("α = {alpha} outside (0, 1/√2)")));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::OutOfRange(format!("δ = {delta} outside [0, 1]")));
    }
    for v in [e_overlap, re_cross, te_overlap] {
        if !(-1.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange(format!("overlap {v} outside [−1, 1]")));
        }
    }
    let beta = (1.0 - alpha * alpha).sqrt();
    let d = beta * beta - alpha * alpha;
    let root = ((1.0 - delta) * delta).sqrt();
    let cross = if root == 0.0 {
        let residual = d * (1.0 - (1.0 - delta) * e_overlap + delta * te_overlap);
        if residual.abs() > LAMBDA_TOL {
            return Err(Error::Infeasible(format!("unitarity violated by {residual:e}")));
        }
        re_cross * e_overlap
    } else {
        d * (1.0 - (1.0 - delta) * e_overlap + delta * te_overlap) / (4.0 * alpha * beta * root)
    };
    let gram = [
        [1.0, e_overlap, re_cross, cross],
        [e_overlap, 1.0, cross, re_cross],
        [re_cross, cross, 1.0, te_overlap],
        [cross, re_cross, te_overlap, 1.0],
    ];
    let g = nalgebra::Matrix4::from_fn(|i, j| gram[i][j]);
    let eig = g.symmetric_eigen();
    if eig.eigenvalues.iter().any(|l| *l < -LAMBDA_TOL) {
        return Err(Error::Infeasible(format!(
            "overlaps ⟨e₊|e₋⟩ = {e_overlap}, Re⟨e±|ẽ±⟩ = {re_cross}, ⟨ẽ₊|ẽ₋⟩ = {te_overlap} with unitarity cross term {cross} are not realisable"
        )));
    }
    let vecs = std::array::from_fn(|i| {
        CVec::from_fn(4, |k, _| c(eig.eigenvectors[(i, k)] * eig.eigenvalues[k].max(0.0).sqrt()))
    });
    Ok(vecs)
}

/// Post-interaction states `|Ψ±⟩` on `B ⊗ E` for B92 with signal amplitude
/// `alpha`. Pauli channels are purified with a four-dimensional environment
/// holding the Pauli label.
pub fn b92_attack_state(model: &AttackModel, alpha: f64) -> Result<AttackState> {
    model.validate()?;
    let psi = match *model {
        AttackModel::B92Unitary { alpha: a, delta, .. } => {
            if (a - alpha).abs() > 1e-12 {
                return Err(Error::Infeasible(format!("attack built for α = {a}, protocol uses α = {alpha}")));
            }
            let env = b92_environment(model)?;
            std::array::from_fn(|bit| {
                let (e, te) = (&env[bit], &env[2 + bit]);
                b92_signal(alpha, bit as u8).kronecker(e) * c((1.0 - delta).sqrt())
                    + b92_orthogonal(alpha, bit as u8).kronecker(te) * c(delta.sqrt())
            })
        }
        _ => {
            let lambdas = model.pauli_weights().expect("Pauli model");
            let paulis = pauli_matrices();
            std::array::from_fn(|bit| {
                let u = b92_signal(alpha, bit as u8);
                let mut psi = CVec::zeros(8);
                for (k, s) in paulis.iter().enumerate() {
                    let v = s * &u * c(lambdas[k].sqrt());
                    for b in 0..2 {
                        psi[b * 4 + k] += v[b];
                    }
                }
                psi
            })
        }
    };
    if psi.iter().any(|p| (p.norm() - 1.0).abs() > OPERATOR_TOL) {
        return Err(Error::InvalidOperator("post-interaction state not normalised".into()));
    }
    Ok(AttackState::B92 { alpha, psi, env_dim: 4 })
}

/// Bob's B92 measurement choice `m ∈ {0, 1}` tests for `|ũ₋⟩` (`m = 0`,
/// conclusive bit 0) or `|ũ₊⟩` (`m = 1`, conclusive bit 1).
pub fn b92_conclusive_probability(psi: &CVec, alpha: f64, m: u8) -> f64 {
    let probe = b92_orthogonal(alpha, 1 - m);
    let env_dim = psi.len() / 2;
    (0..env_dim)
        .map(|e| (probe[0].conj() * psi[e] + probe[1].conj() * psi[env_dim + e]).norm_sqr())
        .sum()
}

/// Joint outcome table for each pair of bases of a Bell-diagonal state.
#[derive(Debug, Clone)]
pub struct OutcomeTable {
    dists: Vec<ProbDist>,
}

impl OutcomeTable {
    pub fn new(rho_ab: &DensityOperator) -> Result<Self> {
        let mut dists = Vec::with_capacity(9);
        for a in Basis::ALL {
            for b in Basis::ALL {
                dists.push(measure(rho_ab, &a.alice_povm().tensor(&b.bob_povm())?)?);
            }
        }
        Ok(Self { dists })
    }

    /// `P(x, y)` indexed `2x + y`.
    pub fn joint(&self, a: Basis, b: Basis) -> &ProbDist {
        &self.dists[a.index() * 3 + b.index()]
    }

    pub fn sample<R: Rng + ?Sized>(&self, a: Basis, b: Basis, rng: &mut R) -> (u8, u8) {
        let k = sample_index(self.joint(a, b).probs(), rng);
        ((k / 2) as u8, (k % 2) as u8)
    }
}

pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

/// Eve's operator `N(x) = tr_AB[(|x⟩⟨x|_A ⊗ 𝟙) |Ψ⟩⟨Ψ|]` for Alice outcome `x`
/// in `basis`, from the purification on `A ⊗ B ⊗ E` (`E` four-dimensional).
pub fn eve_operator(purification: &CVec, basis: Basis, x: u8) -> CMat {
    eve_operator_joint(purification, basis, x, None)
}

/// As [`eve_operator`], additionally projecting Bob onto outcome `y` of his
/// measurement when `bob = Some((basis, y))`.
pub fn eve_operator_joint(purification: &CVec, basis: Basis, x: u8, bob: Option<(Basis, u8)>) -> CMat {
    let fa = &basis.alice_povm().elements()[x as usize].clone();
    let fb = match bob {
        Some((b, y)) => b.bob_povm().elements()[y as usize].clone(),
        None => CMat::identity(2, 2),
    };
    let proj = fa.kronecker(&fb);
    let psi = CMat::from_fn(4, 4, |ab, e| purification[ab * 4 + e]);
    // N_{e1 e2} = Σ_{ij} P_ij ψ[j, e1] ψ̄[i, e2]
    psi.transpose() * proj.transpose() * psi.conjugate()
}

#[cfg(test)]
fn min_eigenvalue(m: &CMat) -> f64 {
    crate::qcore::hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}
