//! Ready-made families on `[0, 1]`, with `ε₀ = 1`.
//!
//! Each is generic over the scalar type and returned boxed so they can be
//! collected into one list; [`bundled_families`] returns all of them.

use nalgebra::{DMatrix, DVector};

use super::{Family, FnFamily};
use crate::boundary::{two_point, BoundaryOperator, MultipointBoundary, MultipointTerm};
use crate::error::Result;
use crate::exprs::MatrixExpression;
use crate::fredholm::ProblemSpec;
use crate::funcspace::Exponent;
use crate::scalar::{cplx, Cplx, Real};

fn scalar_matrix<R: Real>(x: R) -> DMatrix<Cplx<R>> {
    DMatrix::from_element(1, 1, cplx(x))
}

/// A scalar term `Σ_l β^(l) y^(l)(point)`.
fn term<R: Real>(point: R, betas: [R; 2]) -> MultipointTerm<R> {
    MultipointTerm {
        point,
        betas: betas.iter().map(|b| scalar_matrix(*b)).collect(),
    }
}

/// Scalar multipoint operator with one accumulating group at `t₁ = 0`.
fn one_group<R: Real>(
    zero_group: Vec<MultipointTerm<R>>,
    group: Vec<MultipointTerm<R>>,
) -> Result<BoundaryOperator<R>> {
    Ok(BoundaryOperator::Multipoint(MultipointBoundary::new(
        1,
        1,
        vec![zero_group, group],
        vec![R::zero()],
    )?))
}

fn scalar_problem<R: Real>(
    a: &str,
    f: &str,
    boundary: BoundaryOperator<R>,
    p: Exponent<R>,
    c: R,
    eps: R,
) -> Result<ProblemSpec<R>> {
    Ok(ProblemSpec::new(
        (R::zero(), R::one()),
        1,
        p,
        MatrixExpression::parse_rows(&[vec![a]])?,
        MatrixExpression::parse_column(&[f])?,
        boundary,
        DVector::from_element(1, cplx(c)),
    )?
    .with_eps(eps))
}

fn initial_value<R: Real>() -> Result<BoundaryOperator<R>> {
    two_point(
        R::zero(),
        R::one(),
        1,
        scalar_matrix(R::one()),
        scalar_matrix(R::zero()),
    )
}

/// `y' + (1 + ε) y = 0`, `y(0) = 1`; solution `e^{−(1+ε)t}`.
pub fn scalar_drift<R: Real>() -> Box<dyn Family<R>> {
    Box::new(FnFamily::new("scalar-drift", R::one(), |eps| {
        scalar_problem("1 + eps", "0", initial_value()?, Exponent::Infinite, R::one(), eps)
    }))
}

/// `y' = 1 + ε`, `y(0) = 0`; solution `(1 + ε) t`.
pub fn forcing_drift<R: Real>() -> Box<dyn Family<R>> {
    Box::new(FnFamily::new("forcing-drift", R::one(), |eps| {
        scalar_problem("0", "1 + eps", initial_value()?, Exponent::Infinite, R::zero(), eps)
    }))
}

/// Rotation at angular speed `1 + ε` in `W_2^2`, started from `(1, 0)`.
pub fn rotation_drift<R: Real>() -> Box<dyn Family<R>> {
    Box::new(FnFamily::new("rotation-drift", R::one(), |eps| {
        let identity = DMatrix::identity(2, 2);
        Ok(ProblemSpec::new(
            (R::zero(), R::one()),
            2,
            Exponent::Finite(R::lit(2.0)),
            MatrixExpression::parse_rows(&[vec!["0", "-(1 + eps)"], vec!["1 + eps", "0"]])?,
            MatrixExpression::zeros(2, 1),
            two_point(R::zero(), R::one(), 2, identity, DMatrix::zeros(2, 2))?,
            DVector::from_vec(vec![cplx(R::one()), cplx(R::zero())]),
        )?
        .with_eps(eps))
    }))
}

/// `y' + y = 0` with `B(ε) y = y(ε)` tending to `y(0)`.
pub fn moving_point<R: Real>() -> Box<dyn Family<R>> {
    Box::new(FnFamily::new("moving-point", R::one(), |eps| {
        let b = one_group(vec![], vec![term(eps, [R::one(), R::zero()])])?;
        scalar_problem("1", "0", b, Exponent::Infinite, R::one(), eps)
    }))
}

/// `y' + y = 0` with `B(ε) y = (y(ε) − y(0)) / ε` tending to `y'(0)`.
pub fn difference_quotient<R: Real>() -> Box<dyn Family<R>> {
    Box::new(FnFamily::new("difference-quotient", R::one(), |eps| {
        let group = if eps == R::zero() {
            vec![term(R::zero(), [R::zero(), R::one()])]
        } else {
            let w = R::one() / eps;
            vec![term(eps, [w, R::zero()]), term(R::zero(), [-w, R::zero()])]
        };
        scalar_problem("1", "0", one_group(vec![], group)?, Exponent::Infinite, R::one(), eps)
    }))
}

/// `A(ε) = 1 + sin(1/ε)`, which has no limit as `ε → 0`; `A(0) = 1`.
pub fn coefficient_oscillation<R: Real>() -> Box<dyn Family<R>> {
    Box::new(FnFamily::new("coefficient-oscillation", R::one(), |eps| {
        let a = if eps == R::zero() { "1" } else { "1 + sin(1/eps)" };
        scalar_problem(a, "0", initial_value()?, Exponent::Infinite, R::one(), eps)
    }))
}

/// `B(ε) y = y(0) + y(1)` for `ε > 0`, where the `y(1)` term belongs to the
/// zero group and does not fade; `B(0) y = y(0)`.
pub fn zero_group_persistent<R: Real>() -> Box<dyn Family<R>> {
    Box::new(FnFamily::new("zero-group-persistent", R::one(), |eps| {
        let zero_group = if eps == R::zero() {
            vec![]
        } else {
            vec![term(R::one(), [R::one(), R::zero()])]
        };
        let b = one_group(zero_group, vec![term(R::zero(), [R::one(), R::zero()])])?;
        scalar_problem("1", "0", b, Exponent::Infinite, R::one(), eps)
    }))
}

/// One term `ε^{−1/2} y(ε)`; the weighted sum `ε^{−1/2}·ε = √ε` vanishes.
/// The coefficients themselves diverge, so the limit `B(0) y = y(0)` is
/// nominal.
pub fn weighted_sum_sqrt<R: Real>() -> Box<dyn Family<R>> {
    Box::new(FnFamily::new("weighted-sum-sqrt", R::one(), |eps| {
        let w = if eps == R::zero() {
            R::one()
        } else {
            R::one() / eps.sqrt()
        };
        let b = one_group(vec![], vec![term(eps, [w, R::zero()])])?;
        scalar_problem("1", "0", b, Exponent::Infinite, R::one(), eps)
    }))
}

/// One term `ε^{−1} y(ε)`; the weighted sum is identically one.
pub fn weighted_sum_unit<R: Real>() -> Box<dyn Family<R>> {
    Box::new(FnFamily::new("weighted-sum-unit", R::one(), |eps| {
        let w = if eps == R::zero() { R::one() } else { R::one() / eps };
        let b = one_group(vec![], vec![term(eps, [w, R::zero()])])?;
        scalar_problem("1", "0", b, Exponent::Infinite, R::one(), eps)
    }))
}

/// `p = 2`, one term `ε^{−1/2} y'(ε)`; `Σ ∥β^(1)∥ |t − t₁|^{1/2} ≡ 1`.
pub fn top_order_weighted_unit<R: Real>() -> Box<dyn Family<R>> {
    Box::new(FnFamily::new("top-order-weighted-unit", R::one(), |eps| {
        let group = if eps == R::zero() {
            vec![term(R::zero(), [R::one(), R::zero()])]
        } else {
            vec![term(eps, [R::zero(), R::one() / eps.sqrt()])]
        };
        scalar_problem(
            "1",
            "0",
            one_group(vec![], group)?,
            Exponent::Finite(R::lit(2.0)),
            R::one(),
            eps,
        )
    }))
}

pub fn bundled_families<R: Real>() -> Vec<Box<dyn Family<R>>> {
    vec![
        scalar_drift(),
        forcing_drift(),
        rotation_drift(),
        moving_point(),
        difference_quotient(),
        coefficient_oscillation(),
        zero_group_persistent(),
        weighted_sum_sqrt(),
        weighted_sum_unit(),
        top_order_weighted_unit(),
    ]
}

/// Looks up a bundled family by name.
pub fn by_name<R: Real>(name: &str) -> Option<Box<dyn Family<R>>> {
    bundled_families().into_iter().find(|f| f.name() == name)
}
