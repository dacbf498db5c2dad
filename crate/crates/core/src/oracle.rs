//! Reference solver by global finite differences.
//!
//! Each cell contributes the box-scheme equations
//! `y_{i+1} − y_i + h A(t_{i+½}) (y_i + y_{i+1}) / 2 = h f(t_{i+½})`, which are
//! second-order accurate. Boundary rows come from the node expansion of `B`,
//! where derivative layers are written as affine maps of node values through
//! the derivative recurrence. This shares no code path with the
//! shooting-based solver in [`crate::fredholm`] except the boundary expansion.

use nalgebra::{DMatrix, DVector};

use crate::error::{contract, Error, Result};
use crate::exprs::sample_matrix;
use crate::fredholm::ProblemSpec;
use crate::funcspace::{Grid, SampledFunction};
use crate::integrator::derivative_stack;
use crate::linalg::Decomposition;
use crate::scalar::{binomial, cplx, Cplx, Real};

/// `y^(l)(t_i) = P_l y_i + g_l` for `l = 0..=n` at one node.
fn layer_maps<R: Real>(
    a: &SampledFunction<R>,
    f: &SampledFunction<R>,
    node: usize,
    n: usize,
) -> Result<Vec<(DMatrix<Cplx<R>>, DVector<Cplx<R>>)>> {
    let m = a.shape().0;
    let mut maps = vec![(DMatrix::identity(m, m), DVector::zeros(m))];
    for k in 0..n {
        let mut p = DMatrix::zeros(m, m);
        let mut g = f.node_vector(k, node)?;
        for i in 0..=k {
            let a_i = a.node_matrix(i, node)? * cplx(binomial::<R>(k, i));
            p -= &a_i * &maps[k - i].0;
            g -= &a_i * &maps[k - i].1;
        }
        maps.push((p, g));
    }
    Ok(maps)
}

/// Per-cell data of the box scheme: `(I − hA/2)`, `(I + hA/2)`, `h f`, all at
/// the midpoint.
fn cell_blocks<R: Real>(
    ps: &ProblemSpec<R>,
    grid: &Grid<R>,
) -> Result<Vec<(DMatrix<Cplx<R>>, DMatrix<Cplx<R>>, DVector<Cplx<R>>)>> {
    let m = ps.m();
    let half = R::lit(0.5);
    grid.nodes()
        .windows(2)
        .map(|w| {
            let h = w[1] - w[0];
            let mid = (w[0] + w[1]) * half;
            let a = ps.coefficient().eval(mid, ps.eps())? * cplx(h * half);
            let f = ps.forcing().eval(mid, ps.eps())?.column(0).into_owned() * cplx(h);
            let id = DMatrix::<Cplx<R>>::identity(m, m);
            Ok((&id - &a, &id + &a, f))
        })
        .collect()
}

/// Boundary rows in node form: for each node touched by `B`, the matrix
/// multiplying `y_node`, plus the constant contributed by the forcing.
fn boundary_rows<R: Real>(
    ps: &ProblemSpec<R>,
    grid: &Grid<R>,
) -> Result<(Vec<(usize, DMatrix<Cplx<R>>)>, DVector<Cplx<R>>)> {
    let n = ps.n();
    let order = n.saturating_sub(1);
    let a = sample_matrix(ps.coefficient(), grid, ps.eps(), order)?;
    let f = sample_matrix(ps.forcing(), grid, ps.eps(), order)?;
    let mut blocks: Vec<(usize, DMatrix<Cplx<R>>)> = Vec::new();
    let mut constant = DVector::zeros(ps.r());
    let mut cache: Option<(usize, Vec<(DMatrix<Cplx<R>>, DVector<Cplx<R>>)>)> = None;
    for func in ps.boundary().functionals(grid)? {
        if cache.as_ref().map(|c| c.0) != Some(func.node) {
            cache = Some((func.node, layer_maps(&a, &f, func.node, n)?));
        }
        let (p, g) = &cache.as_ref().expect("filled above").1[func.layer];
        constant += &func.weight * g;
        let block = &func.weight * p;
        match blocks.iter_mut().find(|(i, _)| *i == func.node) {
            Some((_, acc)) => *acc += block,
            None => blocks.push((func.node, block)),
        }
    }
    Ok((blocks, constant))
}

/// The assembled linear system on `N` nodes: `m(N−1)` scheme rows followed by
/// `r` boundary rows, acting on stacked node values `(y_0, …, y_{N−1})`.
#[derive(Debug, Clone)]
pub struct CollocationSystem<R: Real> {
    grid: Grid<R>,
    m: usize,
    r: usize,
    matrix: DMatrix<Cplx<R>>,
    rhs: DVector<Cplx<R>>,
}

impl<R: Real> CollocationSystem<R> {
    /// Dense assembly on the problem's grid. Meant for small grids; the
    /// matrix has `(m(N−1) + r) × mN` entries.
    pub fn assemble(ps: &ProblemSpec<R>) -> Result<Self> {
        let grid = ps.grid()?;
        let (m, r, count) = (ps.m(), ps.r(), grid.len());
        let mut matrix = DMatrix::zeros(m * (count - 1) + r, m * count);
        let mut rhs = DVector::zeros(m * (count - 1) + r);
        for (i, (minus, plus, f)) in cell_blocks(ps, &grid)?.into_iter().enumerate() {
            // (I + hA/2) y_{i+1} − (I − hA/2) y_i = h f
            matrix.view_mut((i * m, i * m), (m, m)).copy_from(&(-minus));
            matrix.view_mut((i * m, (i + 1) * m), (m, m)).copy_from(&plus);
            rhs.rows_mut(i * m, m).copy_from(&f);
        }
        let base = m * (count - 1);
        let (blocks, constant) = boundary_rows(ps, &grid)?;
        for (node, block) in blocks {
            matrix.view_mut((base, node * m), (r, m)).copy_from(&block);
        }
        rhs.rows_mut(base, r).copy_from(&(ps.rhs() - constant));
        Ok(Self {
            grid,
            m,
            r,
            matrix,
            rhs,
        })
    }

    pub fn grid(&self) -> &Grid<R> {
        &self.grid
    }

    pub fn matrix(&self) -> &DMatrix<Cplx<R>> {
        &self.matrix
    }

    pub fn rhs(&self) -> &DVector<Cplx<R>> {
        &self.rhs
    }

    pub fn boundary_row_count(&self) -> usize {
        self.r
    }

    /// Always `m·(N−1) + r`.
    pub fn row_count(&self) -> usize {
        self.matrix.nrows()
    }

    /// `(dim ker, dim coker)` of the assembled matrix, with rank decided by
    /// `max(rel·σ_max, floor)`.
    pub fn defect(&self, rel: R, floor: R) -> (usize, usize) {
        let d = Decomposition::new(&self.matrix);
        let rank = d.rank(d.threshold(rel, floor));
        (self.matrix.ncols() - rank, self.matrix.nrows() - rank)
    }

    /// Least-squares solution of the dense system, reshaped to node values.
    pub fn solve_least_squares(&self, rel: R, floor: R) -> Result<SampledFunction<R>> {
        let d = Decomposition::new(&self.matrix);
        let x = d.solve(&self.rhs, d.threshold(rel, floor));
        let values = (0..self.grid.len())
            .map(|i| DMatrix::from_iterator(self.m, 1, x.rows(i * self.m, self.m).iter().copied()))
            .collect();
        SampledFunction::from_node_values(self.grid.clone(), vec![values])
    }
}

/// Reference solution on the problem's grid, with derivative layers `0..=n`
/// from the derivative recurrence.
///
/// The scheme is eliminated cell by cell (`y_i = T_i y_0 + s_i`), which leaves
/// an `m × m` system for `y_0`; a numerically singular one is reported as
/// [`Error::Defective`].
pub fn oracle_solve<R: Real>(ps: &ProblemSpec<R>) -> Result<SampledFunction<R>> {
    let (m, r) = (ps.m(), ps.r());
    if r != m {
        return contract(format!("the reference solver needs r = m, got r = {r}, m = {m}"));
    }
    let grid = ps.grid()?;
    let mut transfer = vec![DMatrix::<Cplx<R>>::identity(m, m)];
    let mut shift = vec![DVector::<Cplx<R>>::zeros(m)];
    for (minus, plus, f) in cell_blocks(ps, &grid)? {
        let lu = plus.lu();
        let step = lu
            .solve(&minus)
            .ok_or_else(|| Error::Unsupported("singular cell matrix; refine the grid".into()))?;
        let load = lu.solve(&f).expect("same factorisation");
        let (t, s) = (transfer.last().expect("nonempty"), shift.last().expect("nonempty"));
        let next = (&step * t, &step * s + load);
        transfer.push(next.0);
        shift.push(next.1);
    }

    let (blocks, constant) = boundary_rows(ps, &grid)?;
    let mut system = DMatrix::zeros(r, m);
    let mut rhs = ps.rhs() - constant;
    for (node, block) in &blocks {
        system += block * &transfer[*node];
        rhs -= block * &shift[*node];
    }
    let numerics = ps.numerics();
    let d = Decomposition::new(&system);
    let threshold = d.threshold(numerics.rank_rel_tol, numerics.rank_abs_floor);
    let rank = d.rank(threshold);
    if rank < m {
        return Err(Error::Defective {
            dim_ker: m - rank,
            dim_coker: r - rank,
        });
    }
    let y0 = d.solve(&rhs, threshold);
    let values = transfer
        .iter()
        .zip(&shift)
        .map(|(t, s)| DMatrix::from_iterator(m, 1, (t * &y0 + s).iter().copied()))
        .collect();
    let layer0 = SampledFunction::from_node_values(grid.clone(), vec![values])?;
    let order = ps.n() - 1;
    let a = sample_matrix(ps.coefficient(), &grid, ps.eps(), order)?;
    let f = sample_matrix(ps.forcing(), &grid, ps.eps(), order)?;
    derivative_stack(&layer0, &a, &f, ps.n())
}

/// Richardson estimate of the reference solver's node error on layer 0:
/// `4/3 · max |y_N − y_{2N−1}|` over shared nodes.
pub fn truncation_estimate<R: Real>(ps: &ProblemSpec<R>) -> Result<R> {
    let coarse = oracle_solve(ps)?;
    let mut numerics = *ps.numerics();
    numerics.nodes = 2 * numerics.nodes - 1;
    let fine = oracle_solve(&ps.clone().with_numerics(numerics))?;
    let mut worst = R::zero();
    for i in 0..coarse.grid().len() {
        let diff = coarse.node_vector(0, i)? - fine.node_vector(0, 2 * i)?;
        worst = worst.max(crate::funcspace::euclidean(diff.iter().copied()));
    }
    Ok(worst * R::lit(4.0 / 3.0))
}
