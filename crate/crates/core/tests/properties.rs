//! Randomised properties of the solver, the norms and the oracle.

mod common;

use charmat::boundary::two_point;
use charmat::exprs::MatrixExpression;
use charmat::fredholm::{analyze, solve, ProblemSpec};
use charmat::funcspace::{sobolev_norm, Exponent, Grid, SampledFunction, SobolevIndex};
use charmat::oracle::{oracle_solve, truncation_estimate};
use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn exponent_strategy() -> impl Strategy<Value = Exponent<f64>> {
    prop_oneof![(1.0f64..6.0).prop_map(Exponent::Finite), Just(Exponent::Infinite),]
}

/// `Σ_k a_k sin(ω_k t + φ_k)` with its first derivative.
fn trig_function(grid: &Grid<f64>, terms: &[(f64, f64, f64)]) -> SampledFunction<f64> {
    SampledFunction::from_fn(grid.clone(), 1, 1, 1, |k, t| {
        let v: f64 = terms
            .iter()
            .map(|&(a, w, phi)| match k {
                0 => a * (w * t + phi).sin(),
                _ => a * w * (w * t + phi).cos(),
            })
            .sum();
        DMatrix::from_element(1, 1, C::new(v, 0.0))
    })
    .unwrap()
}

fn terms() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-2.0f64..2.0, 0.0f64..6.0, 0.0f64..6.3), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sobolev_norm_is_a_norm(f in terms(), g in terms(), lambda in -3.0f64..3.0, p in exponent_strategy()) {
        let grid = Grid::uniform(0.0, 1.0, 129).unwrap();
        let (f, g) = (trig_function(&grid, &f), trig_function(&grid, &g));
        let idx = SobolevIndex::new(1, p);
        let norm = |y: &SampledFunction<f64>| sobolev_norm(y, idx).unwrap();
        let sum = f.axpy(C::new(1.0, 0.0), &g).unwrap();
        prop_assert!(norm(&sum) <= norm(&f) + norm(&g) + 1e-12);
        let scaled = norm(&f.scaled(C::new(lambda, 0.0)));
        prop_assert!((scaled - lambda.abs() * norm(&f)).abs() <= 1e-12 * (1.0 + scaled));
        prop_assert!(norm(&f) >= 0.0);
        let zero = f.axpy(C::new(-1.0, 0.0), &f).unwrap();
        prop_assert_eq!(norm(&zero), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn index_is_m_minus_r(seed in any::<u64>()) {
        let ps = with_nodes(random_case(&mut rng(seed)), 129);
        let rep = analyze(&ps).unwrap();
        prop_assert_eq!(rep.index, ps.m() as isize - ps.r() as isize);
        prop_assert_eq!(rep.rank + rep.dim_ker, ps.m());
        prop_assert_eq!(rep.rank + rep.dim_coker, ps.r());
    }

    #[test]
    fn solution_is_linear_in_the_data(seed in any::<u64>(), lambda in -4.0f64..4.0) {
        let mut rng = rng(seed);
        let m = 1 + (seed % 3) as usize;
        let ps = with_nodes(known_defect_case(m, m, 1, m, false, &mut rng), 129);
        let y = solve(&ps).unwrap().y;
        let y_scaled = solve(&ps.scaled_data(lambda)).unwrap().y;
        let expected = y.scaled(C::new(lambda, 0.0));
        let scale = 1.0 + y.max_abs() * lambda.abs();
        prop_assert!(y_scaled.max_node_distance(&expected).unwrap() <= 1e-10 * scale);
    }

    #[test]
    fn oracle_agrees_with_the_solver(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let m = 1 + (seed % 3) as usize;
        let n = 1 + ((seed >> 8) % 2) as usize;
        let multipoint = seed & 1 == 0;
        let ps = with_nodes(known_defect_case(m, m, n, m, multipoint, &mut rng), 257);
        let sol = solve(&ps).unwrap();
        prop_assume!(sol.is_unique());
        let oracle = oracle_solve(&ps).unwrap();
        let diff = sol.y.truncated(0).unwrap().max_node_distance(&oracle.truncated(0).unwrap()).unwrap();
        let bound = 1e-5f64.max(10.0 * truncation_estimate(&ps).unwrap());
        prop_assert!(diff <= bound, "difference {diff:e} exceeds {bound:e}");
    }
}

#[test]
fn single_precision_cauchy_problem() {
    let b = two_point(
        0.0f32,
        1.0,
        1,
        DMatrix::from_element(1, 1, charmat::Cplx::new(1.0f32, 0.0)),
        DMatrix::zeros(1, 1),
    )
    .unwrap();
    let ps = ProblemSpec::new(
        (0.0f32, 1.0),
        1,
        Exponent::Infinite,
        MatrixExpression::parse_rows(&[vec!["1"]]).unwrap(),
        MatrixExpression::zeros(1, 1),
        b,
        DVector::from_element(1, charmat::Cplx::new(1.0f32, 0.0)),
    )
    .unwrap();
    let sol: charmat::BvpSolution32 = solve(&ps).unwrap();
    assert!(sol.is_unique());
    for (i, &t) in sol.y.grid().nodes().iter().enumerate() {
        let y = sol.y.scalar_at(0, i).unwrap();
        assert!((y.re - (-t).exp()).abs() < 1e-4, "t = {t}: {y}");
    }
}
