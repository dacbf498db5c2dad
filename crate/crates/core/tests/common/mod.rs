//! Random problem builders shared by the integration tests.
#![allow(dead_code)]

use charmat::boundary::{BoundaryOperator, CanonicalBoundary, MultipointBoundary, MultipointTerm};
use charmat::exprs::{Expr, MatrixExpression};
use charmat::fredholm::{Numerics, ProblemSpec};
use charmat::funcspace::Exponent;
use charmat::Cplx;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type C = Cplx<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn cmat(rows: usize, cols: usize, rng: &mut ChaCha8Rng, scale: f64) -> DMatrix<C> {
    DMatrix::from_fn(rows, cols, |_, _| {
        C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale
    })
}

pub fn cvec(rows: usize, rng: &mut ChaCha8Rng) -> DVector<C> {
    cmat(rows, 1, rng, 1.0).column(0).into_owned()
}

/// Entries of the form `c0 + c1 t`, `c sin(k t)` or `c cos(k t)` with
/// coefficients bounded by `scale`.
pub fn smooth_expression(rows: usize, cols: usize, rng: &mut ChaCha8Rng, scale: f64) -> MatrixExpression {
    let entries = (0..rows * cols)
        .map(|_| {
            let c0 = scale * rng.gen_range(-1.0..1.0);
            let c1 = scale * rng.gen_range(-1.0..1.0);
            let src = match rng.gen_range(0..3) {
                0 => format!("({c0}) + ({c1})*t"),
                1 => format!("({c0})*sin({}*t)", rng.gen_range(1..4)),
                _ => format!("({c0})*cos({}*t)", rng.gen_range(1..4)),
            };
            charmat::exprs::parse(&src).expect("generated expression parses")
        })
        .collect();
    MatrixExpression::new(rows, cols, entries).expect("shape")
}

pub fn random_exponent(rng: &mut ChaCha8Rng) -> Exponent<f64> {
    match rng.gen_range(0..3) {
        0 => Exponent::Finite(1.0),
        1 => Exponent::Finite(2.0),
        _ => Exponent::Infinite,
    }
}

/// Real `rows × cols` matrix of rank `rank` whose nonzero singular values lie in `[0.5, 2]`.
pub fn matrix_of_rank(rows: usize, cols: usize, rank: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let u = DMatrix::from_fn(rows, rows, |_, _| rng.gen_range(-1.0..1.0)).qr().q();
    let v = DMatrix::from_fn(cols, cols, |_, _| rng.gen_range(-1.0..1.0)).qr().q();
    let mut s = DMatrix::zeros(rows, cols);
    for i in 0..rank {
        s[(i, i)] = rng.gen_range(0.5..2.0);
    }
    u * s * v.transpose()
}

/// `C Φ` for a real matrix `C` acting on an expression matrix.
pub fn left_multiply(c: &DMatrix<f64>, phi: &MatrixExpression) -> MatrixExpression {
    let (r, m) = (c.nrows(), phi.cols());
    let entries = (0..r)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| {
            (0..phi.rows()).fold(Expr::num(0.0), |acc, k| {
                acc + Expr::num(c[(i, k)]) * phi.entry(k, j).clone()
            })
        })
        .collect();
    MatrixExpression::new(r, m, entries).expect("shape")
}

/// `C B` for a real `C` with as many columns as `B` has rows.
pub fn compose(c: &DMatrix<f64>, b: &BoundaryOperator<f64>) -> BoundaryOperator<f64> {
    let cc = c.map(|x| C::new(x, 0.0));
    match b {
        BoundaryOperator::Canonical(can) => BoundaryOperator::Canonical(
            CanonicalBoundary::new(
                can.alphas().iter().map(|a| &cc * a).collect(),
                left_multiply(c, can.phi()),
                0.0,
            )
            .expect("composed canonical operator"),
        ),
        BoundaryOperator::Multipoint(mp) => {
            let groups = mp
                .groups()
                .iter()
                .map(|g| {
                    g.iter()
                        .map(|t| MultipointTerm {
                            point: t.point,
                            betas: t.betas.iter().map(|b| &cc * b).collect(),
                        })
                        .collect()
                })
                .collect();
            BoundaryOperator::Multipoint(
                MultipointBoundary::new(mp.dim(), mp.order(), groups, mp.limit_points().to_vec())
                    .expect("composed multipoint operator"),
            )
        }
    }
}

pub fn random_canonical(r: usize, m: usize, n: usize, rng: &mut ChaCha8Rng) -> BoundaryOperator<f64> {
    let alphas = (0..n).map(|_| cmat(r, m, rng, 1.0)).collect();
    let phi = match rng.gen_range(0..3) {
        0 => MatrixExpression::zeros(r, m),
        _ => smooth_expression(r, m, rng, 1.0),
    };
    BoundaryOperator::Canonical(CanonicalBoundary::new(alphas, phi, 0.0).expect("canonical"))
}

pub fn random_multipoint(m: usize, n: usize, rng: &mut ChaCha8Rng) -> BoundaryOperator<f64> {
    let limits: Vec<f64> = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(0.0..=1.0)).collect();
    let term = |point: f64, rng: &mut ChaCha8Rng| MultipointTerm {
        point,
        betas: (0..=n).map(|_| cmat(m, m, rng, 1.0)).collect(),
    };
    let mut groups = vec![(0..rng.gen_range(0..=1))
        .map(|_| term(rng.gen_range(0.0..=1.0), rng))
        .collect()];
    for &t in &limits {
        let count = rng.gen_range(1..=2);
        let g = (0..count)
            .map(|_| term((t + rng.gen_range(-0.05..0.05)).clamp(0.0, 1.0), rng))
            .collect();
        groups.push(g);
    }
    BoundaryOperator::Multipoint(MultipointBoundary::new(m, n, groups, limits).expect("multipoint"))
}

/// A problem on `[0, 1]` with the given operator and random smooth data.
pub fn problem(
    m: usize,
    n: usize,
    p: Exponent<f64>,
    coefficient: MatrixExpression,
    boundary: BoundaryOperator<f64>,
    rng: &mut ChaCha8Rng,
) -> ProblemSpec<f64> {
    let r = boundary.rows();
    ProblemSpec::new(
        (0.0, 1.0),
        n,
        p,
        coefficient,
        smooth_expression(m, 1, rng, 1.0),
        boundary,
        cvec(r, rng),
    )
    .expect("valid problem")
}

/// One member of the randomized suite: `m, r ∈ 1..=4`, `n ∈ 1..=3`. A quarter
/// of the square cases are made singular by composing with a rank-deficient
/// matrix.
pub fn random_case(rng: &mut ChaCha8Rng) -> ProblemSpec<f64> {
    let m = rng.gen_range(1..=4);
    let r = rng.gen_range(1..=4);
    let n = rng.gen_range(1..=3);
    let p = random_exponent(rng);
    let a = smooth_expression(m, m, rng, 1.0);
    let mut b = if r == m && rng.gen_bool(0.5) {
        random_multipoint(m, n, rng)
    } else {
        random_canonical(r, m, n, rng)
    };
    if r == m && rng.gen_bool(0.25) {
        let rank = rng.gen_range(0..m);
        b = compose(&matrix_of_rank(m, m, rank, rng), &b);
    }
    problem(m, n, p, a, b, rng)
}

/// A problem whose characteristic matrix has rank exactly `rank`, built as
/// `C B₀` with `B₀` provably nondegenerate for the small coefficient used.
pub fn known_defect_case(
    m: usize,
    r: usize,
    n: usize,
    rank: usize,
    multipoint: bool,
    rng: &mut ChaCha8Rng,
) -> ProblemSpec<f64> {
    let a = smooth_expression(m, m, rng, 0.15);
    let b0 = if multipoint {
        assert_eq!(r, m, "multipoint operators are square");
        let mut first = vec![DMatrix::identity(m, m)];
        first.extend((0..n).map(|_| DMatrix::zeros(m, m)));
        let mut second = vec![cmat(m, m, rng, 0.2 / m as f64)];
        second.extend((0..n).map(|_| DMatrix::zeros(m, m)));
        BoundaryOperator::Multipoint(
            MultipointBoundary::new(
                m,
                n,
                vec![
                    vec![],
                    vec![MultipointTerm {
                        point: 0.0,
                        betas: first,
                    }],
                    vec![MultipointTerm {
                        point: 1.0,
                        betas: second,
                    }],
                ],
                vec![0.0, 1.0],
            )
            .expect("two-point operator"),
        )
    } else {
        let mut alphas = vec![DMatrix::identity(m, m)];
        alphas.extend((1..n).map(|_| cmat(m, m, rng, 0.05 / m as f64)));
        let phi = smooth_expression(m, m, rng, 0.02 / m as f64);
        BoundaryOperator::Canonical(CanonicalBoundary::new(alphas, phi, 0.0).expect("canonical"))
    };
    let c = matrix_of_rank(r, m, rank, rng);
    problem(m, n, Exponent::Infinite, a, compose(&c, &b0), rng)
}

/// `y' = 0`, `y(0) − y(1) = 0` in dimension `m`: every constant solves it.
pub fn periodic_difference(m: usize) -> ProblemSpec<f64> {
    let b = charmat::boundary::two_point(0.0, 1.0, 1, DMatrix::identity(m, m), -DMatrix::<C>::identity(m, m))
        .expect("two-point");
    ProblemSpec::new(
        (0.0, 1.0),
        1,
        Exponent::Infinite,
        MatrixExpression::zeros(m, m),
        MatrixExpression::zeros(m, 1),
        b,
        DVector::zeros(m),
    )
    .expect("valid problem")
}

pub fn with_nodes(ps: ProblemSpec<f64>, nodes: usize) -> ProblemSpec<f64> {
    let numerics = Numerics {
        nodes,
        ..*ps.numerics()
    };
    ps.with_numerics(numerics)
}
