mod common;

use common::Dense;
use proptest::prelude::*;
use qdel_core::linalg::{
    complete_unitary, measure, partial_trace_qubit, pure_density, random_density, random_state, seeded_rng,
    unitarity_deviation, BasisProjector, DensityMatrix, Matrix, StateVector, C64,
};

fn dense(m: &Matrix) -> Dense {
    (0..m.dim()).map(|r| m.row(r).to_vec()).collect()
}

/// Orthonormalizes `count` random states of `qubits` qubits.
fn orthonormal_set(qubits: usize, count: usize, seed: u64) -> Vec<StateVector> {
    let mut rng = seeded_rng(seed);
    let mut out: Vec<Vec<C64>> = Vec::new();
    while out.len() < count {
        let mut v = random_state(qubits, &mut rng).amplitudes().to_vec();
        for w in &out {
            let ip: C64 = w.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(w) {
                *x -= ip * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            out.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    out.into_iter().map(|v| StateVector::new(v).unwrap()).collect()
}

#[test]
fn partial_trace_matches_oracle_every_position() {
    let mut rng = seeded_rng(11);
    for m in 2..=5 {
        for _ in 0..10 {
            let rho = random_density(m, &mut rng);
            for i in 1..=m {
                let got = partial_trace_qubit(&rho, i).unwrap();
                let want = common::partial_trace(&dense(rho.matrix()), m, i);
                assert!(common::max_diff(&dense(got.matrix()), &want) <= 1e-12);
            }
        }
    }
}

#[test]
fn partial_trace_of_product_state() {
    // Tr_i(σ ⊗ τ) = σ Tr(τ) when i is the last qubit
    let mut rng = seeded_rng(5);
    let s = random_density(2, &mut rng);
    let t = random_density(1, &mut rng);
    let prod = DensityMatrix::new(s.matrix().kron(t.matrix())).unwrap();
    let reduced = partial_trace_qubit(&prod, 3).unwrap();
    assert!(reduced.matrix().max_abs_diff(s.matrix()) < 1e-12);
    let first = partial_trace_qubit(&prod, 1).unwrap();
    let tr1 = partial_trace_qubit(&s, 1).unwrap();
    let want = tr1.matrix().kron(t.matrix());
    assert!(first.matrix().max_abs_diff(&want) < 1e-12);
}

#[test]
fn partial_trace_rejects_bad_position() {
    let rho = random_density(3, &mut seeded_rng(0));
    assert!(partial_trace_qubit(&rho, 0).is_err());
    assert!(partial_trace_qubit(&rho, 4).is_err());
}

#[test]
fn measurement_matches_projection_oracle() {
    let rho = random_density(3, &mut seeded_rng(9));
    let blocks = [vec![0, 7], vec![1, 2, 4], vec![3, 5, 6]];
    let projectors: Vec<BasisProjector> = blocks.iter().map(|b| BasisProjector::new(3, b.clone()).unwrap()).collect();
    let outcomes = measure(&projectors, None, &rho).unwrap();
    let total: f64 = outcomes.iter().map(|o| o.prob).sum();
    assert!((total - 1.0).abs() < 1e-12);
    for (o, b) in outcomes.iter().zip(&blocks) {
        let want = common::projected(&dense(rho.matrix()), b).unwrap();
        let got = o.post.as_ref().unwrap();
        assert!(common::max_diff(&dense(got.matrix()), &want) < 1e-12);
    }
}

#[test]
fn measure_rejects_overlapping_or_incomplete_families() {
    let rho = random_density(2, &mut seeded_rng(1));
    let p = |ix: Vec<usize>| BasisProjector::new(2, ix).unwrap();
    assert!(measure(&[p(vec![0, 1]), p(vec![1, 2, 3])], None, &rho).is_err());
    assert!(measure(&[p(vec![0, 1])], None, &rho).is_err());
    assert!(measure(&[p(vec![0, 1])], Some(&p(vec![2, 3])), &rho).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_preserves_trace_and_hermiticity(m in 2usize..=5, pos in 1usize..=5, seed in any::<u64>()) {
        let pos = 1 + (pos - 1) % m;
        let rho = random_density(m, &mut seeded_rng(seed));
        let red = partial_trace_qubit(&rho, pos).unwrap();
        prop_assert!((red.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(red.trace().im.abs() < 1e-12);
        prop_assert!(red.matrix().hermitian_deviation() < 1e-12);
        prop_assert!(red.matrix().min_hermitian_eigenvalue() > -1e-10);
    }

    #[test]
    fn completion_is_unitary_and_maps_targets(m in 1usize..=7, count in 1usize..=4, seed in any::<u64>()) {
        let count = count.min(1 << m);
        let vs = orthonormal_set(m, count, seed);
        let mut images: Vec<usize> = (0..1usize << m).collect();
        let mut rng = seeded_rng(seed ^ 0xabc);
        use rand::seq::SliceRandom;
        images.shuffle(&mut rng);
        let targets: Vec<(StateVector, usize)> = vs.into_iter().zip(images).collect();
        let u = complete_unitary(&targets).unwrap();
        prop_assert!(unitarity_deviation(u.matrix()) < 1e-10);
        for (v, img) in &targets {
            let out = u.apply(v).unwrap();
            for (k, z) in out.iter().enumerate() {
                let want = if k == *img { 1.0 } else { 0.0 };
                prop_assert!((z - C64::new(want, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn pure_state_conjugation_keeps_purity(m in 1usize..=5, seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let v = random_state(m, &mut rng);
        let rho = pure_density(&v).unwrap();
        let w = orthonormal_set(m, 1, seed.wrapping_add(1)).remove(0);
        let u = complete_unitary(&[(w, 0)]).unwrap();
        let out = rho.conjugate_by(&u).unwrap();
        let sq = out.matrix().mul(out.matrix()).unwrap();
        prop_assert!((sq.trace().re - 1.0).abs() < 1e-10);
        let want = common::mat_mul(&common::mat_mul(&dense(u.matrix()), &dense(rho.matrix())), &dense(&u.matrix().adjoint()));
        prop_assert!(common::max_diff(&dense(out.matrix()), &want) < 1e-12);
    }
}
