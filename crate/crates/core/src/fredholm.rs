//! Characteristic matrices, solvability analysis, and the boundary-value solver.
//!
//! For `L y = y' + A y` and a boundary operator `B` with `r` conditions, the
//! characteristic matrix `M` has `r` rows and `m` columns; column `j` is
//! `B` applied to column `j` of the fundamental matrix `Y`. The operator
//! `(L, B)` has index `m − r`, and its kernel and cokernel have the
//! dimensions of the kernel and cokernel of `M`. Solutions are assembled as
//! `y = y_p + Y ξ` with `M ξ = c − B y_p`.

use nalgebra::{ColPivQR, DMatrix, DVector};

use crate::boundary::BoundaryOperator;
use crate::error::{contract, Result};
use crate::exprs::{sample_matrix, MatrixExpression};
use crate::funcspace::{euclidean, Exponent, Grid, SampledFunction, SobolevIndex, DEFAULT_NODES};
use crate::integrator::{fundamental_matrix, particular_solution, FundamentalMatrix, IvpConfig, LinearOde};
use crate::linalg::Decomposition;
use crate::scalar::{cplx, Cplx, Real};

/// Discretisation and rank-decision settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics<R> {
    pub nodes: usize,
    pub ivp: IvpConfig<R>,
    /// Singular values at or below `rank_rel_tol · σ_max` count as zero.
    pub rank_rel_tol: R,
    pub rank_abs_floor: R,
}

impl<R: Real> Default for Numerics<R> {
    fn default() -> Self {
        Self {
            nodes: DEFAULT_NODES,
            ivp: IvpConfig::default(),
            rank_rel_tol: R::lit(1e-8),
            rank_abs_floor: R::lit(1e-12),
        }
    }
}

/// A linear boundary-value problem `y' + A(t) y = f(t)`, `B y = c` on `[a, b]`.
#[derive(Debug, Clone)]
pub struct ProblemSpec<R> {
    a: R,
    b: R,
    n: usize,
    p: Exponent<R>,
    eps: R,
    coefficient: MatrixExpression,
    forcing: MatrixExpression,
    boundary: BoundaryOperator<R>,
    rhs: DVector<Cplx<R>>,
    numerics: Numerics<R>,
}

impl<R: Real> ProblemSpec<R> {
    pub fn new(
        interval: (R, R),
        n: usize,
        p: Exponent<R>,
        coefficient: MatrixExpression,
        forcing: MatrixExpression,
        boundary: BoundaryOperator<R>,
        rhs: DVector<Cplx<R>>,
    ) -> Result<Self> {
        let (a, b) = interval;
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return contract(format!("interval requires finite a < b, got [{a}, {b}]"));
        }
        if n == 0 {
            return contract("smoothness order n must be at least 1");
        }
        let m = coefficient.rows();
        if coefficient.cols() != m {
            return contract(format!("A must be square, got {:?}", coefficient.shape()));
        }
        if forcing.shape() != (m, 1) {
            return contract(format!("f must be {m}×1, got {:?}", forcing.shape()));
        }
        if rhs.len() != boundary.rows() {
            return contract(format!(
                "c has length {}, boundary operator has r = {} rows",
                rhs.len(),
                boundary.rows()
            ));
        }
        let spec = Self {
            a,
            b,
            n,
            p,
            eps: R::zero(),
            coefficient,
            forcing,
            boundary,
            rhs,
            numerics: Numerics::default(),
        };
        spec.boundary.validate_for(m, n, &Grid::new(vec![a, b])?)?;
        Ok(spec)
    }

    /// Parameter value substituted for `eps` in `A` and `f`.
    pub fn with_eps(mut self, eps: R) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_numerics(mut self, numerics: Numerics<R>) -> Self {
        self.numerics = numerics;
        self
    }

    pub fn interval(&self) -> (R, R) {
        (self.a, self.b)
    }

    pub fn m(&self) -> usize {
        self.coefficient.rows()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.boundary.rows()
    }

    pub fn p(&self) -> Exponent<R> {
        self.p
    }

    pub fn sobolev_index(&self) -> SobolevIndex<R> {
        SobolevIndex::new(self.n, self.p)
    }

    pub fn eps(&self) -> R {
        self.eps
    }

    pub fn coefficient(&self) -> &MatrixExpression {
        &self.coefficient
    }

    pub fn forcing(&self) -> &MatrixExpression {
        &self.forcing
    }

    pub fn boundary(&self) -> &BoundaryOperator<R> {
        &self.boundary
    }

    pub fn rhs(&self) -> &DVector<Cplx<R>> {
        &self.rhs
    }

    pub fn numerics(&self) -> &Numerics<R> {
        &self.numerics
    }

    pub fn grid(&self) -> Result<Grid<R>> {
        Grid::uniform(self.a, self.b, self.numerics.nodes)
    }

    pub fn ode(&self) -> Result<LinearOde<R>> {
        LinearOde::new(
            self.coefficient.clone(),
            self.forcing.clone(),
            self.eps,
            self.grid()?,
            self.n,
        )
    }

    /// Same problem with `f` and `c` multiplied by `lambda`.
    pub fn scaled_data(&self, lambda: f64) -> Self {
        let scale = |e: &MatrixExpression| {
            let entries = e
                .entries()
                .iter()
                .map(|x| crate::exprs::Expr::Num(lambda) * x.clone())
                .collect();
            MatrixExpression::new(e.rows(), e.cols(), entries).expect("same shape")
        };
        Self {
            forcing: scale(&self.forcing),
            rhs: &self.rhs * cplx(R::lit(lambda)),
            ..self.clone()
        }
    }
}

/// Numerical rank and defect data of a characteristic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvabilityReport<R> {
    pub m: usize,
    pub r: usize,
    pub rank: usize,
    pub dim_ker: usize,
    pub dim_coker: usize,
    /// `dim_ker − dim_coker`, always `m − r`.
    pub index: isize,
    pub invertible: bool,
    pub singular_values: Vec<R>,
    pub sigma_min: R,
    pub sigma_max: R,
    /// Singular values at or below this value are treated as zero.
    pub threshold: R,
}

/// `M(L, B)` together with the data it was built from.
#[derive(Debug, Clone)]
pub struct CharacteristicMatrix<R: Real> {
    matrix: DMatrix<Cplx<R>>,
    decomposition: Decomposition<R>,
    threshold: R,
    fundamental: FundamentalMatrix<R>,
    ode: LinearOde<R>,
}

impl<R: Real> CharacteristicMatrix<R> {
    pub fn matrix(&self) -> &DMatrix<Cplx<R>> {
        &self.matrix
    }

    /// Nonincreasing.
    pub fn singular_values(&self) -> &[R] {
        self.decomposition.singular_values()
    }

    pub fn rank_threshold(&self) -> R {
        self.threshold
    }

    pub fn fundamental(&self) -> &FundamentalMatrix<R> {
        &self.fundamental
    }

    pub fn report(&self) -> SolvabilityReport<R> {
        let (r, m) = self.matrix.shape();
        let rank = self.decomposition.rank(self.threshold);
        let sigma_min = self.decomposition.sigma_min();
        SolvabilityReport {
            m,
            r,
            rank,
            dim_ker: m - rank,
            dim_coker: r - rank,
            index: m as isize - r as isize,
            invertible: r == m && sigma_min > self.threshold,
            singular_values: self.singular_values().to_vec(),
            sigma_min,
            sigma_max: self.decomposition.sigma_max(),
            threshold: self.threshold,
        }
    }
}

/// Builds `M(L, B)` column by column from the fundamental matrix.
pub fn characteristic_matrix<R: Real>(ps: &ProblemSpec<R>) -> Result<CharacteristicMatrix<R>> {
    let ode = ps.ode()?;
    let fundamental = fundamental_matrix(&ode, &ps.numerics.ivp)?;
    let (m, r) = (ps.m(), ps.r());
    let mut matrix = DMatrix::zeros(r, m);
    for j in 0..m {
        let col = ps.boundary.apply(&fundamental.column(j)?)?;
        matrix.set_column(j, &col);
    }
    let decomposition = Decomposition::new(&matrix);
    let threshold = decomposition.threshold(ps.numerics.rank_rel_tol, ps.numerics.rank_abs_floor);
    Ok(CharacteristicMatrix {
        matrix,
        decomposition,
        threshold,
        fundamental,
        ode,
    })
}

/// Rank, kernel and cokernel dimensions, index, and invertibility.
pub fn analyze<R: Real>(ps: &ProblemSpec<R>) -> Result<SolvabilityReport<R>> {
    Ok(characteristic_matrix(ps)?.report())
}

/// Solution of a boundary-value problem; for defective problems `y` is the
/// minimum-norm least-squares solution and `kernel_basis` spans the
/// homogeneous solutions satisfying `B y = 0`.
#[derive(Debug, Clone)]
pub struct BvpSolution<R: Real> {
    pub y: SampledFunction<R>,
    /// Coefficients in `y = y_p + Y ξ`.
    pub xi: DVector<Cplx<R>>,
    pub kernel_basis: Vec<SampledFunction<R>>,
    /// `|M ξ − (c − B y_p)|`.
    pub residual_boundary: R,
    pub report: SolvabilityReport<R>,
}

impl<R: Real> BvpSolution<R> {
    pub fn is_unique(&self) -> bool {
        self.report.invertible
    }
}

/// Solves `(L, B) y = (f, c)` by superposition.
pub fn solve<R: Real>(ps: &ProblemSpec<R>) -> Result<BvpSolution<R>> {
    let cm = characteristic_matrix(ps)?;
    let report = cm.report();
    let particular = particular_solution(&cm.ode, &ps.numerics.ivp)?;
    let defect = &ps.rhs - ps.boundary.apply(&particular)?;

    let pivoted = if report.invertible {
        ColPivQR::new(cm.matrix.clone()).solve(&defect)
    } else {
        None
    };
    let (xi, kernel) = match pivoted {
        Some(xi) => (xi, Vec::new()),
        None => (
            cm.decomposition.solve(&defect, cm.threshold),
            cm.decomposition.null_space(cm.threshold),
        ),
    };
    let values = cm.fundamental.values();
    let y = particular.axpy(cplx(R::one()), &values.mul_vector(&xi)?)?;
    let kernel_basis = kernel
        .iter()
        .map(|v| values.mul_vector(v))
        .collect::<Result<Vec<_>>>()?;
    let residual_boundary = euclidean((&cm.matrix * &xi - &defect).iter().copied());
    Ok(BvpSolution {
        y,
        xi,
        kernel_basis,
        residual_boundary,
        report,
    })
}

/// Independent residuals of a candidate solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals<R> {
    /// `max_t |y'(t) + A(t) y(t) − f(t)|` over nodes, using layer 1.
    pub ode: R,
    /// `|B y − c|`.
    pub boundary: R,
}

pub fn verify_solution<R: Real>(ps: &ProblemSpec<R>, y: &SampledFunction<R>) -> Result<Residuals<R>> {
    if y.shape() != (ps.m(), 1) || y.order() < ps.n {
        return contract("solution shape or derivative order does not match the problem");
    }
    let grid = y.grid();
    let a = sample_matrix(&ps.coefficient, grid, ps.eps, 0)?;
    let f = sample_matrix(&ps.forcing, grid, ps.eps, 0)?;
    let mut ode = R::zero();
    for i in 0..grid.len() {
        let res = y.node_vector(1, i)? + a.node_matrix(0, i)? * y.node_vector(0, i)? - f.node_vector(0, i)?;
        ode = ode.max(euclidean(res.iter().copied()));
    }
    let boundary = euclidean((ps.boundary.apply(y)? - &ps.rhs).iter().copied());
    Ok(Residuals { ode, boundary })
}
