use proptest::prelude::*;
use qkd_core::cinfo::*;

fn dist(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n).prop_filter_map("zero weights", |w| {
        let s: f64 = w.iter().sum();
        (s > 1e-6).then(|| w.iter().map(|x| x / s).collect())
    })
}

fn pd(p: &[f64]) -> ProbDist {
    ProbDist::from_probs(p.to_vec()).unwrap()
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

// Min over the ε-ball of max_z Q(z) for |Z| = 3, by enumerating every
// intersection of the lines bounding the linear pieces of the problem.
fn hinf_vertex_oracle3(p: &[f64], eps: f64) -> f64 {
    let mut lines: Vec<(f64, f64, f64)> = vec![
        (1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
        (1.0, 1.0, 1.0),
        (1.0, 0.0, p[0]),
        (0.0, 1.0, p[1]),
        (1.0, 1.0, 1.0 - p[2]),
        (1.0, -1.0, 0.0),
        (2.0, 1.0, 1.0),
        (1.0, 2.0, 1.0),
    ];
    for s in 0..8 {
        let sg = |k: usize| if s >> k & 1 == 1 { 1.0 } else { -1.0 };
        let (s1, s2, s3) = (sg(0), sg(1), sg(2));
        lines.push((s1 - s3, s2 - s3, 2.0 * eps + s1 * p[0] + s2 * p[1] - s3 * (1.0 - p[2])));
    }
    let mut best = f64::INFINITY;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a1, b1, c1) = lines[i];
            let (a2, b2, c2) = lines[j];
            let det = a1 * b2 - a2 * b1;
            if det.abs() < 1e-14 {
                continue;
            }
            let x = (c1 * b2 - c2 * b1) / det;
            let y = (a1 * c2 - a2 * c1) / det;
            let q = [x, y, 1.0 - x - y];
            if q.iter().any(|v| *v < -1e-12) || l1(&q, p) > eps + 1e-12 {
                continue;
            }
            best = best.min(q.iter().copied().fold(0.0, f64::max));
        }
    }
    -best.log2()
}

fn hinf_oracle2(p: &[f64], eps: f64) -> f64 {
    let best = [0.0, 1.0, 0.5, p[0] - eps, p[0] + eps]
        .into_iter()
        .filter(|x| (0.0..=1.0).contains(x) && (x - p[0]).abs() <= eps + 1e-12)
        .map(|x: f64| x.max(1.0 - x))
        .fold(f64::INFINITY, f64::min);
    -best.log2()
}

// log of the smallest support reachable by a subset of total mass ≥ 1−ε.
fn h0_subset_oracle(p: &[f64], eps: f64) -> f64 {
    let n = p.len();
    let mut best = n;
    for mask in 1u32..(1 << n) {
        let mass: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| p[i]).sum();
        if mass >= 1.0 - eps - 1e-12 {
            best = best.min(mask.count_ones() as usize);
        }
    }
    (best as f64).log2()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn distance_is_a_metric(p in dist(4), q in dist(4), r in dist(4)) {
        let (p, q, r) = (pd(&p), pd(&q), pd(&r));
        let pq = variational_distance(&p, &q).unwrap();
        prop_assert!((pq - variational_distance(&q, &p).unwrap()).abs() < 1e-15);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&pq));
        let pr = variational_distance(&p, &r).unwrap();
        let rq = variational_distance(&r, &q).unwrap();
        prop_assert!(pq <= pr + rq + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn data_processing(p in dist(5), q in dist(5), f in prop::collection::vec(0usize..3, 5)) {
        let push = |v: &[f64]| {
            let mut out = vec![0.0; 3];
            for (z, m) in v.iter().enumerate() { out[f[z]] += m; }
            out
        };
        let before = variational_distance(&pd(&p), &pd(&q)).unwrap();
        let after = variational_distance(&pd(&push(&p)), &pd(&push(&q))).unwrap();
        prop_assert!(after <= before + 1e-12);
    }

    #[test]
    fn conditional_distance_bound(a in dist(6), b in dist(6)) {
        // joints over Z (2) × W (3), row-major
        let rows = |v: &[f64]| vec![v[0..3].to_vec(), v[3..6].to_vec()];
        let ja = JointDist::from_matrix(&rows(&a)).unwrap();
        let jb = JointDist::from_matrix(&rows(&b)).unwrap();
        let joint = l1(&a, &b);
        let pw = ja.marginal_y();
        let mut expected = 0.0;
        for w in 0..3 {
            if let (Some(ca), Some(cb)) = (ja.conditional_x(w), jb.conditional_x(w)) {
                expected += pw.probs()[w] * l1(ca.probs(), cb.probs());
            } else if pw.probs()[w] > 0.0 {
                expected += pw.probs()[w];
            }
        }
        prop_assert!(expected <= 2.0 * joint + 1e-12);
    }

    #[test]
    fn coupling_witness(p in dist(4), q in dist(4)) {
        let (pp, qq) = (pd(&p), pd(&q));
        let joint = maximal_coupling(&pp, &qq).unwrap();
        let mut off = 0.0;
        for z in 0..4 {
            prop_assert!((joint[z].iter().sum::<f64>() - p[z]).abs() < 1e-12);
            prop_assert!((joint.iter().map(|r| r[z]).sum::<f64>() - q[z]).abs() < 1e-12);
            for zp in 0..4 { if z != zp { off += joint[z][zp]; } }
        }
        prop_assert!((off - variational_distance(&pp, &qq).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn hinf_smoothing_matches_vertex_oracle(p in dist(3), eps in 0.0f64..0.6) {
        let v = smooth_renyi(&pd(&p), Order::Infinity, eps).unwrap();
        prop_assert!((v - hinf_vertex_oracle3(&p, eps)).abs() < 1e-6, "{} vs {}", v, hinf_vertex_oracle3(&p, eps));
    }

    #[test]
    fn hinf_smoothing_matches_binary_oracle(p in dist(2), eps in 0.0f64..0.6) {
        let v = smooth_renyi(&pd(&p), Order::Infinity, eps).unwrap();
        prop_assert!((v - hinf_oracle2(&p, eps)).abs() < 1e-6);
    }

    #[test]
    fn h0_smoothing_matches_subset_oracle(p in dist(5), eps in 0.0f64..0.5) {
        let v = smooth_renyi(&pd(&p), Order::ZERO, eps).unwrap();
        prop_assert!((v - h0_subset_oracle(&p, eps)).abs() < 1e-12);
    }

    #[test]
    fn smoothing_is_monotone(p in dist(4), e1 in 0.0f64..0.5, e2 in 0.0f64..0.5) {
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        let p = pd(&p);
        prop_assert!(smooth_renyi(&p, Order::Infinity, lo).unwrap() <= smooth_renyi(&p, Order::Infinity, hi).unwrap() + 1e-12);
        prop_assert!(smooth_renyi(&p, Order::ZERO, lo).unwrap() >= smooth_renyi(&p, Order::ZERO, hi).unwrap());
    }

    #[test]
    fn h0_subadditive(a in dist(6), e1 in 0.0f64..0.3, e2 in 0.0f64..0.3) {
        let joint = JointDist::from_matrix(&[a[0..3].to_vec(), a[3..6].to_vec()]).unwrap();
        let lhs = h0_subset_oracle(&a, e1 + e2);
        let rhs = h0_subset_oracle(joint.marginal_x().probs(), e1) + h0_subset_oracle(joint.marginal_y().probs(), e2);
        prop_assert!(lhs <= rhs + 1e-12);
        let lhs = smooth_renyi(&joint.as_prob_dist(), Order::ZERO, e1 + e2).unwrap();
        let rhs = smooth_renyi(&joint.marginal_x(), Order::ZERO, e1).unwrap()
            + smooth_renyi(&joint.marginal_y(), Order::ZERO, e2).unwrap();
        prop_assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn h0_bounded_by_heavy_sets(p in dist(5), mask in 1u32..32) {
        let mass: f64 = (0..5).filter(|i| mask >> i & 1 == 1).map(|i| p[i]).sum();
        let eps = (1.0 - mass).max(0.0);
        let v = smooth_renyi(&pd(&p), Order::ZERO, eps).unwrap();
        prop_assert!(v <= (mask.count_ones() as f64).log2() + 1e-12);
    }

    #[test]
    fn majorization_is_reflexive(p in dist(5)) {
        prop_assert!(majorizes(&p, &p).unwrap());
        let u = vec![0.2; 5];
        prop_assert!(majorizes(&p, &u).unwrap());
    }

    #[test]
    fn mutual_information_nonnegative(a in dist(6)) {
        let joint = JointDist::from_matrix(&[a[0..2].to_vec(), a[2..4].to_vec(), a[4..6].to_vec()]).unwrap();
        prop_assert!(mutual_information(&joint) >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn max_entropy_ball_beats_grid(p in dist(3), r in 0.0f64..0.4) {
        let v = max_entropy_in_ball(&pd(&p), r).unwrap();
        let steps = 300;
        // grid points within r bound the optimum from below; those within a
        // slightly larger radius bound it from above
        let (mut inner, mut outer) = (0.0f64, 0.0f64);
        for a in 0..=steps {
            for b in 0..=steps - a {
                let q = [a as f64 / steps as f64, b as f64 / steps as f64, (steps - a - b) as f64 / steps as f64];
                let d = l1(&q, &p);
                if d <= r {
                    inner = inner.max(shannon(&q));
                }
                if d <= r + 0.01 {
                    outer = outer.max(shannon(&q));
                }
            }
        }
        prop_assert!(v >= inner - 1e-9);
        prop_assert!(v <= outer + 1e-3);
    }
}
