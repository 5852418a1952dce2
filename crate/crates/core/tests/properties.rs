use mlpf::structure::{is_irreducible_map, is_irreducible_tensor};
use mlpf::{
    block_normalize, hilbert_distance, multi_start_solve, normalize, power_solve, second_modulus,
    tensor_system, verify_solution, Functional, MapKind, MonotoneMap, NonnegTensor, NormWeights,
    SolveError, SolverConfig,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn positive_tensor(dims: Vec<usize>) -> impl Strategy<Value = NonnegTensor> {
    let len: usize = dims.iter().product();
    prop::collection::vec(0.05f64..2.0, len)
        .prop_map(move |v| NonnegTensor::from_dense(dims.clone(), &v).unwrap())
}

fn positive_psi(n: usize) -> impl Strategy<Value = Functional> {
    prop::collection::vec(0.1f64..3.0, n).prop_map(|v| Functional::new(v).unwrap())
}

fn sparse_irreducible_tensor() -> impl Strategy<Value = NonnegTensor> {
    prop::collection::vec(2usize..4, 3)
        .prop_flat_map(|dims| {
            let len: usize = dims.iter().product();
            let entry = prop_oneof![Just(0.0), 0.1f64..2.0];
            (Just(dims), prop::collection::vec(entry, len))
        })
        .prop_filter_map("reducible", |(dims, v)| {
            let t = NonnegTensor::from_dense(dims, &v).ok()?;
            (t.vanishing_slice().is_none() && is_irreducible_tensor(&t).is_holds()).then_some(t)
        })
}

fn cfg_with(psi: Option<Functional>) -> SolverConfig {
    SolverConfig {
        psi,
        tol: 1e-12,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // Order-2 tensor with p = (2, 2): lambda is the largest singular value.
    #[test]
    fn matrix_case_matches_svd(
        a in (2usize..5, 2usize..5).prop_flat_map(|(m, n)| positive_tensor(vec![m, n]))
    ) {
        let w = NormWeights::uniform(2, 2.0).unwrap();
        let map = MonotoneMap::from_tensor(&a, &w).unwrap();
        // the di-graph is bipartite; damping adds the self-loops it lacks
        let periodic = matches!(
            power_solve(&map, &cfg_with(None)),
            Err(SolveError::NotPrimitive { cyclicity: Some(2) })
        );
        prop_assert!(periodic);
        let cfg = SolverConfig { damping: Some(0.5), allow_nonprimitive: true, ..cfg_with(None) };
        let sol = block_normalize(&power_solve(&map, &cfg).unwrap(), &a, &w).unwrap();
        let (m, n) = (a.dims()[0], a.dims()[1]);
        let mut dense = DMatrix::<f64>::zeros(m, n);
        for (idx, v) in a.entries() {
            dense[(idx[0], idx[1])] = v;
        }
        let sigma = dense.singular_values().max();
        prop_assert!((sol.lambda - sigma).abs() <= 1e-9 * sigma);
    }

    #[test]
    fn limit_ray_does_not_depend_on_psi(
        (a, psi) in positive_tensor(vec![2, 3, 2]).prop_flat_map(|a| (Just(a), positive_psi(7)))
    ) {
        let w = NormWeights::new(vec![3.0, 3.5, 4.0]).unwrap();
        let map = MonotoneMap::from_tensor(&a, &w).unwrap();
        let s1 = power_solve(&map, &cfg_with(None)).unwrap();
        let s2 = power_solve(&map, &cfg_with(Some(psi.clone()))).unwrap();
        prop_assert!(hilbert_distance(&s1.u, &s2.u).unwrap() < 1e-8);
        prop_assert!((s1.mu - s2.mu).abs() < 1e-9 * s1.mu);
        prop_assert!((psi.dot(&s2.u) - 1.0).abs() < 1e-12);

        let b1 = block_normalize(&s1, &a, &w).unwrap();
        let b2 = block_normalize(&s2, &a, &w).unwrap();
        for (x, y) in b1.x().iter().zip(b2.x()) {
            prop_assert!((x - y).abs() < 1e-8);
        }
        prop_assert!(b1.x().iter().all(|&v| v > 0.0));
        let system = MapKind::Tensor { tensor: a.clone(), weights: w.clone() };
        let r = verify_solution(&system, &b1.x(), Some(b1.lambda), 1e-8).unwrap();
        prop_assert!(r.passed, "residual {}", r.residual);
    }

    #[test]
    fn second_modulus_does_not_depend_on_psi(
        (a, psi) in positive_tensor(vec![3, 3]).prop_flat_map(|a| (Just(a), positive_psi(6)))
    ) {
        let w = NormWeights::new(vec![2.0, 3.0]).unwrap();
        let map = MonotoneMap::from_tensor(&a, &w).unwrap();
        let sol = power_solve(&map, &cfg_with(None)).unwrap();
        let m = mlpf::jacobian(&map, &sol.u).unwrap();
        let ones = Functional::ones(6);
        let u2: Vec<f64> = sol.u.iter().map(|v| v / psi.dot(&sol.u)).collect();
        let r1 = second_modulus(&m, &sol.u, &ones).unwrap();
        let r2 = second_modulus(&m, &u2, &psi).unwrap();
        prop_assert!((r1 - r2).abs() < 1e-7 * (1.0 + r1), "{r1} vs {r2}");
        prop_assert!(r1 < sol.mu);
    }

    // Monotone irreducible maps have a single positive eigenvector, so every
    // start of a search lands on the power-algorithm solution.
    #[test]
    fn search_on_monotone_map_finds_one_solution(a in positive_tensor(vec![2, 2, 3])) {
        let w = NormWeights::uniform(3, 3.0).unwrap();
        let map = MonotoneMap::from_tensor(&a, &w).unwrap();
        let cfg = SolverConfig { starts: 8, ..cfg_with(None) };
        let out = multi_start_solve(&map, &cfg).unwrap();
        prop_assert_eq!(out.solutions.len(), 1);
        prop_assert_eq!(out.hits[0], 8);
        let sol = power_solve(&map, &cfg).unwrap();
        prop_assert!(hilbert_distance(&sol.u, &out.solutions[0].u).unwrap() < 1e-8);
        prop_assert_eq!(out.solutions[0].attracting, Some(true));
    }
    // With p_j = d an irreducible tensor has no solution on the boundary.
    #[test]
    fn irreducible_tensor_solutions_are_positive_and_verify(a in sparse_irreducible_tensor()) {
        let w = NormWeights::uniform(3, 3.0).unwrap();
        let map = MonotoneMap::from_tensor(&a, &w).unwrap();
        let cfg = SolverConfig { starts: 6, ..cfg_with(None) };
        let out = multi_start_solve(&map, &cfg).unwrap();
        prop_assert!(!out.solutions.is_empty());
        let system = MapKind::Tensor { tensor: a.clone(), weights: w.clone() };
        for sol in &out.solutions {
            let x = sol.x();
            prop_assert!(x.iter().all(|&v| v > 0.0));
            let r = verify_solution(&system, &x, Some(sol.lambda), 1e-8).unwrap();
            prop_assert!(r.passed, "residual {}", r.residual);
        }
    }

    #[test]
    fn power_iterates_stay_positive(
        (a, x0) in sparse_irreducible_tensor().prop_flat_map(|a| {
            let n = a.total_dim();
            (Just(a), prop::collection::vec(1e-3f64..1.0, n))
        })
    ) {
        let w = NormWeights::new(vec![3.0, 4.0, 5.0]).unwrap();
        let map = MonotoneMap::from_tensor(&a, &w).unwrap();
        let psi = Functional::ones(x0.len());
        let mut x = x0;
        for _ in 0..200 {
            x = normalize(&map, &psi, &x).unwrap();
            prop_assert!(x.iter().all(|&v| v > 0.0 && v.is_finite()));
        }
    }

    // The two notions coincide for order 2; in general only one direction
    // holds (see the counterexample below).
    #[test]
    fn tensor_irreducibility_implies_map_irreducibility(
        (dims, v) in prop::collection::vec(2usize..4, 2..4).prop_flat_map(|dims| {
            let len: usize = dims.iter().product();
            (Just(dims), prop::collection::vec(prop_oneof![2 => Just(0.0), 1 => 0.1f64..2.0], len))
        })
    ) {
        let t = NonnegTensor::from_dense(dims.clone(), &v).unwrap();
        prop_assume!(t.vanishing_slice().is_none());
        let map = is_irreducible_map(&tensor_system(&t).unwrap()).holds().unwrap();
        let tensor = is_irreducible_tensor(&t).holds().unwrap();
        prop_assert!(!tensor || map);
        if dims.len() == 2 {
            prop_assert_eq!(map, tensor);
        }
    }
}

// Support {000, 001, 010, 100}: every component vanishes on the face where
// only the second coordinate of each block is positive, so that face is
// mapped to the origin. The tensor notion calls this reducible; the
// part-invariance notion does not, since the image lies in the trivial part.
#[test]
fn irreducibility_notions_differ_for_order_three() {
    let t = NonnegTensor::new(
        vec![2, 2, 2],
        vec![
            (vec![0, 0, 0], 1.0),
            (vec![0, 0, 1], 1.0),
            (vec![0, 1, 0], 1.0),
            (vec![1, 0, 0], 1.0),
        ],
    )
    .unwrap();
    assert_eq!(is_irreducible_tensor(&t).witness(), Some(&vec![0, 2, 4]));
    assert!(is_irreducible_map(&tensor_system(&t).unwrap()).is_holds());
}

#[test]
fn search_solutions_verify_in_the_non_unique_regime() {
    let mut v = [0.2; 8];
    v[0] = 1.2;
    v[7] = 1.2;
    let a = NonnegTensor::from_dense(vec![2, 2, 2], &v).unwrap();
    let w = NormWeights::uniform(3, 2.0).unwrap();
    let map = MonotoneMap::from_tensor(&a, &w).unwrap();
    let cfg = SolverConfig {
        starts: 40,
        seed: 9,
        ..Default::default()
    };
    let out = multi_start_solve(&map, &cfg).unwrap();
    assert_eq!(out.solutions.len(), 3);
    let system = MapKind::Tensor {
        tensor: a,
        weights: w,
    };
    for sol in &out.solutions {
        let r = verify_solution(&system, &sol.x(), None, 1e-8).unwrap();
        assert!(r.passed, "residual {}", r.residual);
        assert!((r.lambda - sol.lambda).abs() < 1e-8);
    }
}

#[test]
fn search_is_reproducible() {
    let a = NonnegTensor::from_dense(vec![2, 2], &[1.0, 0.3, 0.2, 0.9]).unwrap();
    let w = NormWeights::new(vec![1.3, 2.6]).unwrap();
    let map = MonotoneMap::from_tensor(&a, &w).unwrap();
    let cfg = SolverConfig {
        starts: 32,
        seed: 11,
        ..Default::default()
    };
    let first = multi_start_solve(&map, &cfg).unwrap();
    let second = multi_start_solve(&map, &cfg).unwrap();
    assert_eq!(first, second);
    assert!(!first.solutions.is_empty());
}
