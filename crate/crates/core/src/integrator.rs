//! Initial-value solves for `y' + A(t) y = f(t)` on a fixed grid.
//!
//! Layer 0 comes from the classical fourth-order Runge–Kutta method with a
//! fixed number of substeps per grid cell. Higher derivative layers are never
//! obtained by numerical differentiation; they follow from the differentiated
//! equation
//!
//! ```text
//! y^(k+1) = f^(k) − Σ_{i=0}^{k} C(k, i) A^(i) y^(k−i)
//! ```
//!
//! evaluated node by node.

use nalgebra::{DMatrix, DVector};

use crate::error::{contract, Error, Result};
use crate::exprs::{sample_matrix, MatrixExpression};
use crate::funcspace::{euclidean, Grid, SampledFunction};
use crate::scalar::{binomial, cplx, is_finite, Cplx, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpConfig<R> {
    pub substeps_per_cell: usize,
    /// Target for the step-halving self-check.
    pub tolerance: R,
}

impl<R: Real> Default for IvpConfig<R> {
    fn default() -> Self {
        Self {
            substeps_per_cell: 1,
            tolerance: R::lit(1e-10),
        }
    }
}

impl<R: Real> IvpConfig<R> {
    pub fn validate(&self) -> Result<()> {
        if self.substeps_per_cell == 0 {
            return contract("substeps_per_cell must be at least 1");
        }
        if !(self.tolerance > R::zero()) {
            return contract("integration tolerance must be positive");
        }
        Ok(())
    }

    pub fn with_substeps(self, substeps_per_cell: usize) -> Self {
        Self {
            substeps_per_cell,
            ..self
        }
    }
}

/// The equation `y' + A(t) y = f(t)` on a grid, with its coefficients
/// available both as closed forms (for Runge–Kutta stages between nodes) and
/// as sampled derivative layers `0..n−1` (for the derivative recurrence).
#[derive(Debug, Clone)]
pub struct LinearOde<R> {
    grid: Grid<R>,
    n: usize,
    eps: R,
    coefficient: MatrixExpression,
    forcing: MatrixExpression,
    a_layers: SampledFunction<R>,
    f_layers: SampledFunction<R>,
}

impl<R: Real> LinearOde<R> {
    /// `n ≥ 1` is the Sobolev order of the solution space; coefficients are
    /// sampled with derivatives up to `n − 1`.
    pub fn new(
        coefficient: MatrixExpression,
        forcing: MatrixExpression,
        eps: R,
        grid: Grid<R>,
        n: usize,
    ) -> Result<Self> {
        let m = coefficient.rows();
        if coefficient.cols() != m {
            return contract(format!("A must be square, got {:?}", coefficient.shape()));
        }
        if forcing.shape() != (m, 1) {
            return contract(format!("f must be {m}×1, got {:?}", forcing.shape()));
        }
        if n == 0 {
            return contract("smoothness order n must be at least 1");
        }
        let a_layers = sample_matrix(&coefficient, &grid, eps, n - 1)?;
        let f_layers = sample_matrix(&forcing, &grid, eps, n - 1)?;
        Ok(Self {
            grid,
            n,
            eps,
            coefficient,
            forcing,
            a_layers,
            f_layers,
        })
    }

    /// Same equation with `f ≡ 0`.
    pub fn homogeneous(&self) -> Self {
        let m = self.dim();
        Self {
            forcing: MatrixExpression::zeros(m, 1),
            f_layers: SampledFunction::zeros(self.grid.clone(), m, 1, self.n - 1),
            ..self.clone()
        }
    }

    pub fn dim(&self) -> usize {
        self.coefficient.rows()
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> R {
        self.eps
    }

    pub fn grid(&self) -> &Grid<R> {
        &self.grid
    }

    pub fn coefficient(&self) -> &MatrixExpression {
        &self.coefficient
    }

    pub fn forcing(&self) -> &MatrixExpression {
        &self.forcing
    }

    /// `A, A', …, A^(n−1)` on the grid.
    pub fn coefficient_layers(&self) -> &SampledFunction<R> {
        &self.a_layers
    }

    /// `f, f', …, f^(n−1)` on the grid.
    pub fn forcing_layers(&self) -> &SampledFunction<R> {
        &self.f_layers
    }

    fn a_at(&self, t: R) -> Result<DMatrix<Cplx<R>>> {
        Ok(self.coefficient.eval(t, self.eps)?)
    }

    fn f_at(&self, t: R) -> Result<DMatrix<Cplx<R>>> {
        Ok(self.forcing.eval(t, self.eps)?)
    }
}

/// Fundamental matrix `Y` with `Y' + A Y = 0`, `Y(a) = I`.
#[derive(Debug, Clone)]
pub struct FundamentalMatrix<R> {
    values: SampledFunction<R>,
    config: IvpConfig<R>,
}

impl<R: Real> FundamentalMatrix<R> {
    /// `m×m` matrix-valued samples with layers `0..=n`.
    pub fn values(&self) -> &SampledFunction<R> {
        &self.values
    }

    pub fn column(&self, j: usize) -> Result<SampledFunction<R>> {
        self.values.column(j)
    }

    pub fn config(&self) -> &IvpConfig<R> {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.values.shape().0
    }
}

// RK4 for Y' = F(t)·[forced] − A(t)·Y, returning Y at every node.
fn march<R: Real>(
    ode: &LinearOde<R>,
    y0: DMatrix<Cplx<R>>,
    forced: bool,
    substeps: usize,
) -> Result<Vec<DMatrix<Cplx<R>>>> {
    let grid = ode.grid();
    let rhs = |a: &DMatrix<Cplx<R>>, f: &Option<DMatrix<Cplx<R>>>, y: &DMatrix<Cplx<R>>| {
        let mut d = -(a * y);
        if let Some(f) = f {
            d += f;
        }
        d
    };
    let forcing_at = |t: R| -> Result<Option<DMatrix<Cplx<R>>>> {
        if forced {
            Ok(Some(ode.f_at(t)?))
        } else {
            Ok(None)
        }
    };

    let mut out = Vec::with_capacity(grid.len());
    let mut y = y0;
    out.push(y.clone());
    let half = R::lit(0.5);
    let sixth = R::lit(1.0 / 6.0);
    let nodes = grid.nodes();
    let mut a_left = ode.a_at(nodes[0])?;
    let mut f_left = forcing_at(nodes[0])?;
    for i in 0..nodes.len() - 1 {
        let h = (nodes[i + 1] - nodes[i]) / R::lit(substeps as f64);
        let hc = cplx(h);
        for s in 0..substeps {
            let t0 = nodes[i] + h * R::lit(s as f64);
            let t1 = if s + 1 == substeps { nodes[i + 1] } else { t0 + h };
            let tm = t0 + h * half;
            let (a_mid, f_mid) = (ode.a_at(tm)?, forcing_at(tm)?);
            let (a_right, f_right) = (ode.a_at(t1)?, forcing_at(t1)?);
            let k1 = rhs(&a_left, &f_left, &y);
            let k2 = rhs(&a_mid, &f_mid, &(&y + &k1 * cplx(h * half)));
            let k3 = rhs(&a_mid, &f_mid, &(&y + &k2 * cplx(h * half)));
            let k4 = rhs(&a_right, &f_right, &(&y + &k3 * hc));
            y += (k1 + (k2 + k3) * cplx(R::lit(2.0)) + k4) * cplx(h * sixth);
            a_left = a_right;
            f_left = f_right;
        }
        if !y.iter().all(|v| is_finite(*v)) {
            return Err(Error::Divergence {
                node: i + 1,
                t: nodes[i + 1].as_f64(),
            });
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Completes layer 0 to layers `0..=n` with the derivative recurrence.
///
/// `a` must carry layers `0..n−1` (`m×m`) and `f` layers `0..n−1` with the
/// same shape as `y_layer0`.
pub fn derivative_stack<R: Real>(
    y_layer0: &SampledFunction<R>,
    a: &SampledFunction<R>,
    f: &SampledFunction<R>,
    n: usize,
) -> Result<SampledFunction<R>> {
    let (m, k) = y_layer0.shape();
    if n == 0 {
        return y_layer0.truncated(0);
    }
    if a.shape() != (m, m) || f.shape() != (m, k) {
        return contract(format!(
            "coefficient shapes {:?}/{:?} do not match solution shape {:?}",
            a.shape(),
            f.shape(),
            (m, k)
        ));
    }
    if a.order() + 1 < n || f.order() + 1 < n {
        return contract(format!(
            "derivative recurrence to order {n} needs coefficient layers 0..={}",
            n - 1
        ));
    }
    let grid = y_layer0.grid();
    if a.grid() != grid || f.grid() != grid {
        return contract("coefficients and solution live on different grids");
    }
    let mut layers: Vec<Vec<DMatrix<Cplx<R>>>> = vec![Vec::with_capacity(grid.len()); n + 1];
    for i in 0..grid.len() {
        let mut stack = vec![y_layer0.node_matrix(0, i)?];
        for order in 0..n {
            let mut next = f.node_matrix(order, i)?;
            for j in 0..=order {
                let c = cplx(binomial::<R>(order, j));
                next -= (a.node_matrix(j, i)? * &stack[order - j]) * c;
            }
            stack.push(next);
        }
        for (layer, v) in layers.iter_mut().zip(stack) {
            layer.push(v);
        }
    }
    SampledFunction::from_node_values(grid.clone(), layers)
}

fn node_layer<R: Real>(grid: &Grid<R>, values: Vec<DMatrix<Cplx<R>>>) -> Result<SampledFunction<R>> {
    SampledFunction::from_node_values(grid.clone(), vec![values])
}

/// Solves `y' + A y = f`, `y(a) = y0` and returns layers `0..=n`.
pub fn solve_ivp<R: Real>(
    ode: &LinearOde<R>,
    y0: &DVector<Cplx<R>>,
    config: &IvpConfig<R>,
) -> Result<SampledFunction<R>> {
    config.validate()?;
    let m = ode.dim();
    if y0.len() != m {
        return contract(format!("initial value has length {}, expected {m}", y0.len()));
    }
    let start = DMatrix::from_column_slice(m, 1, y0.as_slice());
    let values = march(ode, start, true, config.substeps_per_cell)?;
    let layer0 = node_layer(ode.grid(), values)?;
    derivative_stack(&layer0, &ode.a_layers, &ode.f_layers, ode.n)
}

/// `Y(t)` with `Y' + A Y = 0`, `Y(a) = I_m`. The forcing of `ode` is ignored.
pub fn fundamental_matrix<R: Real>(ode: &LinearOde<R>, config: &IvpConfig<R>) -> Result<FundamentalMatrix<R>> {
    config.validate()?;
    let m = ode.dim();
    let values = march(ode, DMatrix::identity(m, m), false, config.substeps_per_cell)?;
    let layer0 = node_layer(ode.grid(), values)?;
    let zero_forcing = SampledFunction::zeros(ode.grid().clone(), m, m, ode.n - 1);
    let values = derivative_stack(&layer0, &ode.a_layers, &zero_forcing, ode.n)?;
    Ok(FundamentalMatrix {
        values,
        config: *config,
    })
}

/// The solution with `y_p(a) = 0`.
pub fn particular_solution<R: Real>(ode: &LinearOde<R>, config: &IvpConfig<R>) -> Result<SampledFunction<R>> {
    solve_ivp(ode, &DVector::zeros(ode.dim()), config)
}

/// `y(b)` computed with the given number of substeps per cell.
pub fn endpoint_value<R: Real>(ode: &LinearOde<R>, y0: &DVector<Cplx<R>>, substeps: usize) -> Result<DVector<Cplx<R>>> {
    if substeps == 0 {
        return contract("substeps must be at least 1");
    }
    let start = DMatrix::from_column_slice(ode.dim(), 1, y0.as_slice());
    let values = march(ode, start, true, substeps)?;
    Ok(values.last().expect("grid has nodes").column(0).into_owned())
}

/// `|y_s(b) − y_2s(b)| / |y_2s(b) − y_4s(b)|`; close to 16 for a
/// fourth-order method in its asymptotic regime.
pub fn step_halving_ratio<R: Real>(ode: &LinearOde<R>, y0: &DVector<Cplx<R>>, substeps: usize) -> Result<R> {
    let y1 = endpoint_value(ode, y0, substeps)?;
    let y2 = endpoint_value(ode, y0, 2 * substeps)?;
    let y4 = endpoint_value(ode, y0, 4 * substeps)?;
    let coarse = euclidean((y1 - &y2).iter().copied());
    let fine = euclidean((y2 - y4).iter().copied());
    Ok(coarse / fine)
}

/// Outcome of the step-halving self-check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfCheck<R> {
    /// `|y_s(b) − y_2s(b)|`.
    pub change: R,
    pub passed: bool,
}

/// Halving the substep must move `y(b)` by less than `16 × tolerance`.
pub fn self_check<R: Real>(ode: &LinearOde<R>, y0: &DVector<Cplx<R>>, config: &IvpConfig<R>) -> Result<SelfCheck<R>> {
    config.validate()?;
    let s = config.substeps_per_cell;
    let y1 = endpoint_value(ode, y0, s)?;
    let y2 = endpoint_value(ode, y0, 2 * s)?;
    let change = euclidean((y1 - y2).iter().copied());
    Ok(SelfCheck {
        change,
        passed: change < R::lit(16.0) * config.tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::DEFAULT_NODES;
    use std::f64::consts::FRAC_PI_2;

    fn ode(a: &[Vec<&str>], f: &[&str], b: f64, n: usize, nodes: usize) -> LinearOde<f64> {
        LinearOde::new(
            MatrixExpression::parse_rows(a).unwrap(),
            MatrixExpression::parse_column(f).unwrap(),
            0.0,
            Grid::uniform(0.0, b, nodes).unwrap(),
            n,
        )
        .unwrap()
    }

    fn vec_c(v: &[f64]) -> DVector<Cplx<f64>> {
        DVector::from_iterator(v.len(), v.iter().map(|x| Cplx::new(*x, 0.0)))
    }

    /// Truncated-Taylor matrix exponential with scaling and squaring.
    fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
        let norm = a.abs().row_sum().max();
        let squarings = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
        let scaled = a / 2f64.powi(squarings);
        let mut term = DMatrix::identity(a.nrows(), a.ncols());
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &scaled / k as f64;
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn constant_forcing_is_exact() {
        let o = ode(&[vec!["0"]], &["1"], 1.0, 1, 33);
        let y = solve_ivp(&o, &vec_c(&[0.0]), &IvpConfig::default()).unwrap();
        for (i, t) in o.grid().nodes().iter().enumerate() {
            assert!((y.scalar_at(0, i).unwrap().re - t).abs() < 1e-10);
        }
    }

    #[test]
    fn exponential_decay() {
        let o = ode(&[vec!["1"]], &["0"], 1.0, 1, DEFAULT_NODES);
        let y = solve_ivp(&o, &vec_c(&[1.0]), &IvpConfig::default()).unwrap();
        let last = o.grid().len() - 1;
        assert!((y.scalar_at(0, last).unwrap().re - (-1f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn rotation_matches_matrix_exponential() {
        let o = ode(
            &[vec!["0", "-1"], vec!["1", "0"]],
            &["0", "0"],
            FRAC_PI_2,
            1,
            DEFAULT_NODES,
        );
        let y = solve_ivp(&o, &vec_c(&[1.0, 0.0]), &IvpConfig::default()).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let oracle = expm(&(-a * FRAC_PI_2)) * DVector::from_vec(vec![1.0, 0.0]);
        let got = y.node_vector(0, o.grid().len() - 1).unwrap();
        for i in 0..2 {
            assert!((got[i].re - oracle[i]).abs() < 1e-8);
        }
        // y' = -A y with this A rotates (1, 0) to (0, -1) at π/2.
        assert!((got[1].re + 1.0).abs() < 1e-8);
    }

    #[test]
    fn fundamental_matrix_cases() {
        let zero = ode(&[vec!["0", "0"], vec!["0", "0"]], &["0", "0"], 1.0, 2, 17);
        let y = fundamental_matrix(&zero, &IvpConfig::default()).unwrap();
        for i in 0..17 {
            assert_eq!(y.values().node_matrix(0, i).unwrap(), DMatrix::identity(2, 2));
        }

        let diag = ode(&[vec!["1", "0"], vec!["0", "2"]], &["0", "0"], 1.0, 1, DEFAULT_NODES);
        let y = fundamental_matrix(&diag, &IvpConfig::default()).unwrap();
        assert_eq!(y.values().node_matrix(0, 0).unwrap(), DMatrix::identity(2, 2));
        let yb = y.values().node_matrix(0, DEFAULT_NODES - 1).unwrap();
        assert!((yb[(0, 0)].re - (-1f64).exp()).abs() < 1e-8);
        assert!((yb[(1, 1)].re - (-2f64).exp()).abs() < 1e-8);
        assert!(yb[(0, 1)].norm() < 1e-15 && yb[(1, 0)].norm() < 1e-15);

        let rot = ode(
            &[vec!["0", "-1"], vec!["1", "0"]],
            &["0", "0"],
            FRAC_PI_2,
            1,
            DEFAULT_NODES,
        );
        let y = fundamental_matrix(&rot, &IvpConfig::default()).unwrap();
        let yb = y.values().node_matrix(0, DEFAULT_NODES - 1).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let oracle = expm(&(-a * FRAC_PI_2));
        for (got, want) in yb.iter().zip(oracle.iter()) {
            assert!((got.re - want).abs() < 1e-8);
        }
        assert!((yb[(0, 1)].re - 1.0).abs() < 1e-8 && (yb[(1, 0)].re + 1.0).abs() < 1e-8);
    }

    #[test]
    fn particular_solutions() {
        let o = ode(&[vec!["0"]], &["t"], 1.0, 1, 65);
        let y = particular_solution(&o, &IvpConfig::default()).unwrap();
        for (i, t) in o.grid().nodes().iter().enumerate() {
            assert!((y.scalar_at(0, i).unwrap().re - t * t / 2.0).abs() < 1e-13);
        }
        let o = ode(&[vec!["1"]], &["1"], 1.0, 1, DEFAULT_NODES);
        let y = particular_solution(&o, &IvpConfig::default()).unwrap();
        for (i, t) in o.grid().nodes().iter().enumerate() {
            assert!((y.scalar_at(0, i).unwrap().re - (1.0 - (-t).exp())).abs() < 1e-8);
        }
        let o = ode(&[vec!["3"]], &["0"], 1.0, 1, 9);
        assert_eq!(particular_solution(&o, &IvpConfig::default()).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn recurrence_layers() {
        // A = 0, f = t, y = t²/2 → (t²/2, t, 1).
        let o = ode(&[vec!["0"]], &["t"], 1.0, 2, 9);
        let y = particular_solution(&o, &IvpConfig::default()).unwrap();
        for (i, t) in o.grid().nodes().iter().enumerate() {
            assert!((y.scalar_at(1, i).unwrap().re - t).abs() < 1e-15);
            assert!((y.scalar_at(2, i).unwrap().re - 1.0).abs() < 1e-15);
        }

        // f = 0, A = a0, closed-form layer k = (−a0)^k e^{−a0 t}, applied to exact samples.
        let a0 = 1.7;
        let o = ode(&[vec!["1.7"]], &["0"], 1.0, 3, 9);
        let exact = SampledFunction::from_fn(o.grid().clone(), 1, 1, 0, |_, t| {
            DMatrix::from_element(1, 1, Cplx::new((-a0 * t).exp(), 0.0))
        })
        .unwrap();
        let y = derivative_stack(&exact, o.coefficient_layers(), o.forcing_layers(), 3).unwrap();
        for (i, t) in o.grid().nodes().iter().enumerate() {
            for k in 0..=3 {
                let want = (-a0).powi(k as i32) * (-a0 * t).exp();
                assert!((y.scalar_at(k, i).unwrap().re - want).abs() < 1e-14);
            }
        }

        let same = derivative_stack(&exact, o.coefficient_layers(), o.forcing_layers(), 0).unwrap();
        assert_eq!(same, exact);
    }

    #[test]
    fn missing_coefficient_layers() {
        let o = ode(&[vec!["1"]], &["0"], 1.0, 1, 5);
        let y0 = particular_solution(&o, &IvpConfig::default())
            .unwrap()
            .truncated(0)
            .unwrap();
        assert!(derivative_stack(&y0, o.coefficient_layers(), o.forcing_layers(), 2).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let o = ode(&[vec!["-1e100"]], &["0"], 1.0, 1, 5);
        match solve_ivp(&o, &vec_c(&[1.0]), &IvpConfig::default()) {
            Err(Error::Divergence { node, .. }) => assert!(node >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn fourth_order_halving() {
        let o = ode(&[vec!["1 + t"]], &["sin(3*t)"], 1.0, 1, 5);
        let ratio = step_halving_ratio(&o, &vec_c(&[1.0]), 1).unwrap();
        assert!((11.0..=21.0).contains(&ratio), "ratio {ratio}");
        let check = self_check(
            &o,
            &vec_c(&[1.0]),
            &IvpConfig {
                substeps_per_cell: 64,
                tolerance: 1e-10,
            },
        )
        .unwrap();
        assert!(check.passed, "{check:?}");
    }

    #[test]
    fn config_validation() {
        let o = ode(&[vec!["1"]], &["0"], 1.0, 1, 5);
        let bad = IvpConfig {
            substeps_per_cell: 0,
            tolerance: 1e-9,
        };
        assert!(solve_ivp(&o, &vec_c(&[1.0]), &bad).is_err());
        assert!(solve_ivp(&o, &vec_c(&[1.0, 2.0]), &IvpConfig::default()).is_err());
    }
}
