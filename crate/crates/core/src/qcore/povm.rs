use num_complex::Complex64;

use super::state::{c, is_psd, kron, max_abs, outer, CMat, CVec, OPERATOR_TOL};
use crate::error::{Error, Result};

/// A measurement: positive elements summing to the identity, one per label.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<CMat>,
    labels: Vec<String>,
    orthogonal: bool,
}

fn check_complete(ops: impl Iterator<Item = CMat>, d: usize) -> Result<()> {
    let sum = ops.fold(CMat::zeros(d, d), |acc, m| acc + m);
    let err = max_abs(&(sum - CMat::identity(d, d)));
    if err > OPERATOR_TOL {
        return Err(Error::InvalidOperator(format!("elements miss the identity by {err}")));
    }
    Ok(())
}

impl Povm {
    pub fn new(elements: Vec<CMat>, labels: Vec<String>, orthogonal: bool) -> Result<Self> {
        if elements.len() != labels.len() {
            return Err(Error::LengthMismatch { expected: elements.len(), actual: labels.len() });
        }
        let d = elements.first().ok_or_else(|| Error::Empty("POVM without elements".into()))?.nrows();
        if elements.iter().any(|e| e.nrows() != d || e.ncols() != d) {
            return Err(Error::DimensionMismatch("POVM elements of different sizes".into()));
        }
        if let Some(i) = elements.iter().position(|e| !is_psd(e)) {
            return Err(Error::InvalidOperator(format!("element {} is not positive", labels[i])));
        }
        check_complete(elements.iter().cloned(), d)?;
        if orthogonal {
            if elements.len() != d {
                return Err(Error::InvalidOperator("orthogonal POVM needs one projector per dimension".into()));
            }
            for (i, a) in elements.iter().enumerate() {
                if max_abs(&(a * a - a)) > OPERATOR_TOL || (a.trace().re - 1.0).abs() > OPERATOR_TOL {
                    return Err(Error::InvalidOperator(format!("element {} is not a rank-1 projector", labels[i])));
                }
                for b in &elements[i + 1..] {
                    if max_abs(&(a * b)) > OPERATOR_TOL {
                        return Err(Error::InvalidOperator("projectors are not orthogonal".into()));
                    }
                }
            }
        }
        Ok(Self { elements, labels, orthogonal })
    }

    /// Projective measurement onto the orthonormal columns of `basis`.
    pub fn from_basis(basis: &[CVec], labels: Vec<String>) -> Result<Self> {
        Self::new(basis.iter().map(outer).collect(), labels, true)
    }

    pub fn computational(d: usize) -> Result<Self> {
        let basis: Vec<CVec> = (0..d).map(|i| CVec::from_fn(d, |j, _| c((i == j) as u8 as f64))).collect();
        Self::from_basis(&basis, (0..d).map(|i| i.to_string()).collect())
    }

    /// Qubit measurement in the eigenbasis of σ_x: labels 0 ↔ |+⟩, 1 ↔ |−⟩.
    pub fn qubit_x() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_basis(&[qubit(c(s), c(s)), qubit(c(s), c(-s))], bit_labels()).expect("valid basis")
    }

    /// Qubit measurement in the eigenbasis of σ_y: labels 0 ↔ |+i⟩, 1 ↔ |−i⟩.
    pub fn qubit_y() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_basis(&[qubit(c(s), Complex64::new(0.0, s)), qubit(c(s), Complex64::new(0.0, -s))], bit_labels())
            .expect("valid basis")
    }

    /// Qubit measurement in the conjugate σ_y basis (`|∓i⟩`), which makes the
    /// outcomes on `|ψ⁺⟩` agree with those of [`Povm::qubit_y`].
    pub fn qubit_y_conjugate() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_basis(&[qubit(c(s), Complex64::new(0.0, -s)), qubit(c(s), Complex64::new(0.0, s))], bit_labels())
            .expect("valid basis")
    }

    /// `{F_z ⊗ G_w}` with labels `z` and `w` concatenated.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut elements = Vec::new();
        let mut labels = Vec::new();
        for (a, la) in self.elements.iter().zip(&self.labels) {
            for (b, lb) in other.elements.iter().zip(&other.labels) {
                elements.push(kron(a, b));
                labels.push(format!("{la}{lb}"));
            }
        }
        Self::new(elements, labels, self.orthogonal && other.orthogonal)
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_orthogonal(&self) -> bool {
        self.orthogonal
    }

    pub fn element(&self, label: &str) -> Result<&CMat> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| &self.elements[i])
            .ok_or_else(|| Error::AlphabetMismatch(format!("no outcome labelled {label:?}")))
    }

    /// Unit vectors `|z⟩` of an orthogonal measurement, each up to a phase.
    pub fn basis_vectors(&self) -> Result<Vec<CVec>> {
        if !self.orthogonal {
            return Err(Error::InvalidOperator("measurement is not orthogonal".into()));
        }
        Ok(self
            .elements
            .iter()
            .map(|p| {
                let k = (0..p.ncols()).max_by(|&i, &j| p[(i, i)].re.total_cmp(&p[(j, j)].re)).unwrap();
                let col: CVec = p.column(k).into_owned();
                let n = col.norm();
                col / c(n)
            })
            .collect())
    }
}

fn qubit(a: Complex64, b: Complex64) -> CVec {
    CVec::from_vec(vec![a, b])
}

fn bit_labels() -> Vec<String> {
    vec!["0".into(), "1".into()]
}

/// A trace-preserving completely positive map given by Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumOperation {
    kraus: Vec<CMat>,
}

impl QuantumOperation {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let d = kraus.first().ok_or_else(|| Error::Empty("operation without Kraus operators".into()))?.ncols();
        if kraus.iter().any(|k| k.nrows() != d || k.ncols() != d) {
            return Err(Error::DimensionMismatch("Kraus operators of different sizes".into()));
        }
        check_complete(kraus.iter().map(|k| k.adjoint() * k), d)?;
        Ok(Self { kraus })
    }

    pub fn identity(d: usize) -> Self {
        Self { kraus: vec![CMat::identity(d, d)] }
    }

    /// Projective dephasing in the computational basis.
    pub fn dephasing(d: usize) -> Self {
        let kraus = (0..d).map(|i| CMat::from_fn(d, d, |r, s| c((r == i && s == i) as u8 as f64))).collect();
        Self { kraus }
    }

    /// Qubit Pauli channel: `I, σ_z, σ_x, σ_y` with probabilities `λ`.
    pub fn pauli(lambda: [f64; 4]) -> Result<Self> {
        if lambda.iter().any(|l| *l < 0.0) || (lambda.iter().sum::<f64>() - 1.0).abs() > OPERATOR_TOL {
            return Err(Error::InvalidDistribution(format!("Pauli weights {lambda:?}")));
        }
        let kraus = pauli_matrices().into_iter().zip(lambda).map(|(s, l)| s * c(l.sqrt())).collect();
        Self::new(kraus)
    }

    /// Depolarizing qubit channel: Pauli weights `(1−p, p/3, p/3, p/3)`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange(format!("depolarizing parameter {p}")));
        }
        Self::pauli([1.0 - p, p / 3.0, p / 3.0, p / 3.0])
    }

    /// `id_A ⊗ E` acting on `H_A ⊗ H`.
    pub fn on_second(&self, dim_a: usize) -> Self {
        let id = CMat::identity(dim_a, dim_a);
        Self { kraus: self.kraus.iter().map(|k| kron(&id, k)).collect() }
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].nrows()
    }
}

/// `[I, σ_z, σ_x, σ_y]`.
pub fn pauli_matrices() -> [CMat; 4] {
    let i = Complex64::i();
    [
        CMat::identity(2, 2),
        CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
        CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        CMat::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]),
    ]
}
