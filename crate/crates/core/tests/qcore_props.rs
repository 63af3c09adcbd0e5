use num_complex::Complex64;
use qkd_core::cinfo::{majorizes, renyi_entropy, smooth_renyi, variational_distance, Order, ProbDist};
use qkd_core::qcore::random::{random_basis_povm, random_density, random_pure, random_unitary};
use qkd_core::qcore::*;
use qkd_core::randkit::stream;
use rand::Rng;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn bell_state_statistics() {
    let psi = bell_diagonal_state([1.0, 0.0, 0.0, 0.0]).unwrap();
    let z = Povm::computational(2).unwrap();
    let zz = z.tensor(&z).unwrap();
    let p = measure(&psi, &zz).unwrap();
    for (label, expect) in [("00", 0.5), ("01", 0.0), ("10", 0.0), ("11", 0.5)] {
        assert!((p.prob_of(label).unwrap() - expect).abs() < 1e-12);
    }
    let cond = condition_on_outcome(&psi, 2, &z, "0").unwrap();
    assert!(max_abs(&(cond.matrix() - DensityOperator::diagonal(&[1.0, 0.0]).unwrap().matrix())) < 1e-12);
    // X⊗X and Y⊗Y(conjugate) outcomes agree on ψ⁺
    for bob in [Povm::qubit_x(), Povm::qubit_y_conjugate()] {
        let alice = if bob == Povm::qubit_x() { Povm::qubit_x() } else { Povm::qubit_y() };
        let p = measure(&psi, &alice.tensor(&bob).unwrap()).unwrap();
        assert!((p.prob_of("00").unwrap() + p.prob_of("11").unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn depolarizing_on_bell_state() {
    let psi = bell_diagonal_state([1.0, 0.0, 0.0, 0.0]).unwrap();
    let p = 0.15;
    let out = apply_operation(&QuantumOperation::depolarizing(p).unwrap().on_second(2), &psi).unwrap();
    let expect = bell_diagonal_state([1.0 - p, p / 3.0, p / 3.0, p / 3.0]).unwrap();
    assert!(max_abs(&(out.matrix() - expect.matrix())) < 1e-12);
    // the same state in the form (1−2ε)|ψ⁺⟩⟨ψ⁺| + 2ε 𝟙/4 with ε = 2p/3
    let e = 2.0 * p / 3.0;
    let alt = psi.matrix() * c(1.0 - 2.0 * e) + CMat::identity(4, 4) * c(e / 2.0);
    assert!(max_abs(&(out.matrix() - alt)) < 1e-12);
}

#[test]
fn bell_diagonal_entropy() {
    let rho = bell_diagonal_state([0.85, 0.05, 0.05, 0.05]).unwrap();
    let oracle = -(0.85f64 * 0.85f64.log2() + 3.0 * 0.05 * 0.05f64.log2());
    assert!((q_entropy(&rho, Order::SHANNON, 0.0).unwrap() - oracle).abs() < 1e-9);
    assert!((oracle - 0.8476).abs() < 1e-4);
}

#[test]
fn measurement_contracts_distance() {
    let mut rng = stream(11, "measdist");
    for t in 0..10_000 {
        let d = 2 + t % 3;
        let rho = random_density(d, 1 + t % d, &mut rng).unwrap();
        let sigma = random_density(d, d, &mut rng).unwrap();
        let f = random_basis_povm(d, &mut rng).unwrap();
        let lhs = variational_distance(&measure(&rho, &f).unwrap(), &measure(&sigma, &f).unwrap()).unwrap();
        assert!(lhs <= trace_distance(&rho, &sigma).unwrap() + 1e-10);
    }
}

#[test]
fn mixture_convexity() {
    let mut rng = stream(12, "trdistconv");
    for _ in 0..2_000 {
        let k = rng.random_range(2..5);
        let w: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        let s: f64 = w.iter().sum();
        let rhos: Vec<_> = (0..k).map(|_| random_density(3, 3, &mut rng).unwrap()).collect();
        let sigmas: Vec<_> = (0..k).map(|_| random_density(3, 2, &mut rng).unwrap()).collect();
        let mix = |xs: &[DensityOperator]| {
            let m = xs.iter().zip(&w).fold(CMat::zeros(3, 3), |a, (x, wi)| a + x.matrix() * c(wi / s));
            DensityOperator::new(m).unwrap()
        };
        let lhs = trace_distance(&mix(&rhos), &mix(&sigmas)).unwrap();
        let rhs: f64 = rhos.iter().zip(&sigmas).zip(&w).map(|((r, q), wi)| wi / s * trace_distance(r, q).unwrap()).sum();
        assert!(lhs <= rhs + 1e-10);
    }
}

#[test]
fn pure_state_distance_formula() {
    let mut rng = stream(13, "trdistpure");
    for _ in 0..1_000 {
        let a = random_pure(3, &mut rng).unwrap();
        let b = random_pure(3, &mut rng).unwrap();
        let overlap = (a.matrix() * b.matrix()).trace().re;
        assert!((trace_distance(&a, &b).unwrap() - (1.0 - overlap).max(0.0).sqrt()).abs() < 1e-9);
    }
}

#[test]
fn entropy_decreases_under_measurement() {
    let mut rng = stream(14, "halphadec");
    let orders = [Order::ZERO, Order::Finite(0.5), Order::SHANNON, Order::Finite(2.0), Order::Infinity];
    for t in 0..2_000 {
        let d = 2 + t % 3;
        let rho = random_density(d, 1 + t % d, &mut rng).unwrap();
        let f = random_basis_povm(d, &mut rng).unwrap();
        let p = measure(&rho, &f).unwrap();
        for o in orders {
            let s = q_entropy(&rho, o, 0.0).unwrap();
            let h = renyi_entropy(&p, o).unwrap();
            assert!(s <= h + 1e-9, "{o}: {s} > {h}");
        }
    }
}

#[test]
fn eigenbasis_minimises_measured_entropy() {
    let mut rng = stream(15, "entrbasis");
    let rho = random_density(3, 3, &mut rng).unwrap();
    let s = q_entropy(&rho, Order::SHANNON, 0.0).unwrap();
    let mut best = f64::INFINITY;
    for _ in 0..1_000 {
        let f = random_basis_povm(3, &mut rng).unwrap();
        let h = renyi_entropy(&measure(&rho, &f).unwrap(), Order::SHANNON).unwrap();
        assert!(h >= s - 1e-9);
        best = best.min(h);
    }
    assert!(best - s < 0.5);
    let eig = nalgebra::SymmetricEigen::new(rho.matrix().clone());
    let basis: Vec<CVec> = (0..3).map(|k| eig.eigenvectors.column(k).into_owned()).collect();
    let f = Povm::from_basis(&basis, vec!["0".into(), "1".into(), "2".into()]).unwrap();
    let h = renyi_entropy(&measure(&rho, &f).unwrap(), Order::SHANNON).unwrap();
    assert!((h - s).abs() < 1e-9);
}

#[test]
fn schur_majorization_holds() {
    let mut rng = stream(16, "schur");
    for t in 0..10_000 {
        let d = 2 + t % 3;
        let rho = random_density(d, 1 + t % d, &mut rng).unwrap();
        let f = random_basis_povm(d, &mut rng).unwrap();
        assert!(schur_check(&rho, &f).unwrap());
    }
    let pure = random_pure(4, &mut rng).unwrap();
    assert!(schur_check(&pure, &Povm::computational(4).unwrap()).unwrap());
}

#[test]
fn steering_meets_both_guarantees() {
    let mut rng = stream(17, "existdist");
    for _ in 0..10_000 {
        let rho = random_density(2, 2, &mut rng).unwrap();
        let f = random_basis_povm(2, &mut rng).unwrap();
        let q0: f64 = rng.random();
        let q = ProbDist::new(f.labels().to_vec(), vec![q0, 1.0 - q0]).unwrap();
        let sigma = steer_to_distribution(&rho, &f, &q).unwrap();
        let got = measure(&sigma, &f).unwrap();
        assert!(got.probs().iter().zip(q.probs()).all(|(a, b)| (a - b).abs() < 1e-10));
        let p = measure(&rho, &f).unwrap();
        let bound = (2.0 * variational_distance(&p, &q).unwrap()).sqrt();
        assert!(trace_distance(&rho, &sigma).unwrap() <= bound + 1e-9);
    }
}

#[test]
fn projection_disturbance_bound() {
    let mut rng = stream(18, "proj");
    for t in 0..10_000 {
        let d = 2 + t % 2;
        let rho = random_density(d, 1 + t % d, &mut rng).unwrap();
        // Kraus family U_k √(w_k) Π_k from a random basis and random unitaries
        let f = random_basis_povm(d, &mut rng).unwrap();
        let kraus: Vec<CMat> = f
            .elements()
            .iter()
            .map(|p| if rng.random::<bool>() { random_unitary(d, &mut rng) * p } else { p.clone() })
            .collect();
        let op = QuantumOperation::new(kraus).unwrap();
        let sigma = apply_operation(&op, &rho).unwrap();
        assert!(trace_distance(&rho, &sigma).unwrap() <= disturbance_bound(&op, &rho).unwrap() + 1e-9);
    }
}

// Smallest trace distance from a qubit state to any pure state, over a
// Bloch-sphere grid.
fn distance_to_pure_states(rho: &DensityOperator, steps: usize) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        let theta = std::f64::consts::PI * i as f64 / steps as f64;
        for j in 0..2 * steps {
            let phi = std::f64::consts::PI * j as f64 / steps as f64;
            let v = CVec::from_vec(vec![c((theta / 2.0).cos()), Complex64::from_polar((theta / 2.0).sin(), phi)]);
            let pure = DensityOperator::pure(&v).unwrap();
            best = best.min(trace_distance(rho, &pure).unwrap());
        }
    }
    best
}

#[test]
fn commuting_smoothing_is_tight_for_qubits() {
    let mut rng = stream(19, "qubit-oracle");
    for _ in 0..20 {
        let rho = random_density(2, 2, &mut rng).unwrap();
        let lmin = rho.eigenvalues()[1];
        let grid = distance_to_pure_states(&rho, 120);
        // no pure state is closer than the eigenvector projector
        assert!(grid >= lmin - 1e-9);
        assert!(grid - lmin < 2e-3, "{grid} vs {lmin}");
        for eps in [0.05, 0.1, 0.2, 0.3] {
            let commuting = q_entropy(&rho, Order::ZERO, eps).unwrap();
            let general = if grid <= eps { 0.0 } else { 1.0 };
            if (grid - eps).abs() > 2e-3 {
                assert_eq!(commuting, general);
            }
        }
    }
}

#[test]
fn h0_smoothing_decreases_under_measurement() {
    let mut rng = stream(20, "h0epsdec");
    for _ in 0..2_000 {
        let rho = random_density(2, 2, &mut rng).unwrap();
        let f = random_basis_povm(2, &mut rng).unwrap();
        let p = measure(&rho, &f).unwrap();
        let eps: f64 = rng.random::<f64>() * 0.5;
        let q = q_entropy(&rho, Order::ZERO, (2.0 * eps).sqrt().min(1.0)).unwrap();
        let h = smooth_renyi(&p, Order::ZERO, eps).unwrap();
        assert!(q <= h + 1e-12);
    }
    // spot-check against the Bloch-sphere oracle
    for _ in 0..5 {
        let rho = random_density(2, 2, &mut rng).unwrap();
        let f = random_basis_povm(2, &mut rng).unwrap();
        let p = measure(&rho, &f).unwrap();
        let eps = 0.1f64;
        let general = if distance_to_pure_states(&rho, 80) <= (2.0 * eps).sqrt() { 0.0 } else { 1.0 };
        assert!(general <= smooth_renyi(&p, Order::ZERO, eps).unwrap());
    }
}

#[test]
fn conditioning_reproduces_marginal() {
    let mut rng = stream(21, "conditioning");
    for _ in 0..500 {
        let rho = random_density(6, 6, &mut rng).unwrap();
        let f = random_basis_povm(3, &mut rng).unwrap();
        let mut mix = CMat::zeros(2, 2);
        for label in f.labels() {
            let (s, pr) = condition_on_outcome_with_prob(&rho, 2, &f, label).unwrap();
            mix += s.matrix() * c(pr);
        }
        assert!(max_abs(&(mix - rho.partial_trace_b(2).unwrap().matrix())) < 1e-10);
    }
}

#[test]
fn majorization_of_spectra() {
    let mut rng = stream(22, "majorize");
    let rho = random_density(4, 4, &mut rng).unwrap();
    assert!(majorizes(&rho.eigenvalues(), &[0.25; 4]).unwrap());
}
