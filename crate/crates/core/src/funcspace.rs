//! Grids, sampled functions with derivative stacks, and `L_p` / `W_p^n` norms.
//!
//! A [`SampledFunction`] stores a vector- or matrix-valued function together
//! with its derivatives `y, y', ..., y^(order)` at every grid node. Norms are
//! computed with the composite trapezoid rule on the stored grid.

use nalgebra::{DMatrix, DVector};

use crate::error::{contract, Result};
use crate::scalar::{modulus, Cplx, Real};

/// Default number of grid nodes (1024 uniform cells).
pub const DEFAULT_NODES: usize = 1025;

/// Strictly increasing nodes covering `[a, b]`, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<R> {
    nodes: Vec<R>,
}

impl<R: Real> Grid<R> {
    pub fn new(nodes: Vec<R>) -> Result<Self> {
        if nodes.len() < 2 {
            return contract("a grid needs at least 2 nodes");
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return contract("grid nodes must be finite");
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return contract("grid nodes must be strictly increasing");
        }
        Ok(Self { nodes })
    }

    /// `count` equally spaced nodes on `[a, b]`; the last node is exactly `b`.
    pub fn uniform(a: R, b: R, count: usize) -> Result<Self> {
        if !(a < b) {
            return contract(format!("interval requires a < b, got [{a}, {b}]"));
        }
        if count < 2 {
            return contract("a grid needs at least 2 nodes");
        }
        let cells = R::lit((count - 1) as f64);
        let mut nodes: Vec<R> = (0..count).map(|i| a + (b - a) * R::lit(i as f64) / cells).collect();
        nodes[count - 1] = b;
        Self::new(nodes)
    }

    pub fn a(&self) -> R {
        self.nodes[0]
    }

    pub fn b(&self) -> R {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn nodes(&self) -> &[R] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, t: R) -> bool {
        t >= self.a() && t <= self.b()
    }

    /// Trapezoid quadrature weights for `∫_a^b`.
    pub fn trapezoid_weights(&self) -> Vec<R> {
        let n = self.nodes.len();
        let half = R::lit(0.5);
        let mut w = vec![R::zero(); n];
        for i in 0..n - 1 {
            let h = self.nodes[i + 1] - self.nodes[i];
            w[i] += half * h;
            w[i + 1] += half * h;
        }
        w
    }

    /// Index `i` of the cell `[t_i, t_{i+1}]` containing `t` (clamped to the last cell).
    pub fn cell_of(&self, t: R) -> usize {
        let n = self.nodes.len();
        let idx = self.nodes.partition_point(|x| *x <= t);
        idx.saturating_sub(1).min(n - 2)
    }

    /// Lagrange weights reproducing the value at `t` from at most four
    /// neighbouring nodes (cubic interpolation; exact at nodes).
    pub fn interpolation_weights(&self, t: R) -> Result<Vec<(usize, R)>> {
        if !self.contains(t) {
            return contract(format!("point {t} lies outside [{}, {}]", self.a(), self.b()));
        }
        if let Ok(i) = self.nodes.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            return Ok(vec![(i, R::one())]);
        }
        let n = self.nodes.len();
        let cell = self.cell_of(t);
        let width = n.min(4);
        let start = cell.saturating_sub(1).min(n - width);
        let stencil: Vec<usize> = (start..start + width).collect();
        let weights = stencil
            .iter()
            .map(|&i| {
                let xi = self.nodes[i];
                let w = stencil.iter().filter(|&&j| j != i).fold(R::one(), |acc, &j| {
                    let xj = self.nodes[j];
                    acc * (t - xj) / (xi - xj)
                });
                (i, w)
            })
            .collect();
        Ok(weights)
    }

    /// Grid with every cell bisected.
    pub fn refined(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push((w[0] + w[1]) * R::lit(0.5));
        }
        nodes.push(self.b());
        Self { nodes }
    }
}

/// Extended real exponent `p ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent<R> {
    Finite(R),
    Infinite,
}

impl<R: Real> Exponent<R> {
    pub fn new(p: R) -> Result<Self> {
        if !(p >= R::one()) {
            return contract(format!("exponent p must lie in [1, ∞], got {p}"));
        }
        if p.is_finite() {
            Ok(Exponent::Finite(p))
        } else {
            Ok(Exponent::Infinite)
        }
    }

    /// `p'` with `1/p + 1/p' = 1`.
    pub fn conjugate(self) -> Self {
        match self {
            Exponent::Infinite => Exponent::Finite(R::one()),
            Exponent::Finite(p) if p == R::one() => Exponent::Infinite,
            Exponent::Finite(p) => Exponent::Finite(p / (p - R::one())),
        }
    }

    /// `1/p`, zero for `p = ∞`.
    pub fn reciprocal(self) -> R {
        match self {
            Exponent::Infinite => R::zero(),
            Exponent::Finite(p) => R::one() / p,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Infinite => f64::INFINITY,
            Exponent::Finite(p) => p.as_f64(),
        }
    }
}

/// Smoothness order and integrability exponent of `W_p^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevIndex<R> {
    pub n: usize,
    pub p: Exponent<R>,
}

impl<R: Real> SobolevIndex<R> {
    pub fn new(n: usize, p: Exponent<R>) -> Self {
        Self { n, p }
    }
}

/// A vector- or matrix-valued function sampled on a grid together with its
/// derivative layers `0..=order`.
///
/// Each layer is stored node-major; the `rows × cols` block of one node is
/// column-major, matching `nalgebra`'s storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction<R> {
    grid: Grid<R>,
    rows: usize,
    cols: usize,
    layers: Vec<Vec<Cplx<R>>>,
}

impl<R: Real> SampledFunction<R> {
    pub fn new(grid: Grid<R>, rows: usize, cols: usize, layers: Vec<Vec<Cplx<R>>>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return contract("sampled functions need at least one component");
        }
        if layers.is_empty() {
            return contract("sampled functions need at least layer 0");
        }
        let expected = grid.len() * rows * cols;
        if let Some(k) = layers.iter().position(|l| l.len() != expected) {
            return contract(format!("layer {k} has {} values, expected {expected}", layers[k].len()));
        }
        Ok(Self {
            grid,
            rows,
            cols,
            layers,
        })
    }

    pub fn zeros(grid: Grid<R>, rows: usize, cols: usize, order: usize) -> Self {
        let len = grid.len() * rows * cols;
        Self {
            grid,
            rows,
            cols,
            layers: vec![vec![Cplx::new(R::zero(), R::zero()); len]; order + 1],
        }
    }

    /// Builds a function from per-node matrices of each layer.
    pub fn from_node_values(grid: Grid<R>, layers: Vec<Vec<DMatrix<Cplx<R>>>>) -> Result<Self> {
        let Some(first) = layers.first().and_then(|l| l.first()) else {
            return contract("no samples supplied");
        };
        let (rows, cols) = first.shape();
        let mut flat = Vec::with_capacity(layers.len());
        for (k, layer) in layers.iter().enumerate() {
            if layer.len() != grid.len() {
                return contract(format!("layer {k} has {} nodes, grid has {}", layer.len(), grid.len()));
            }
            let mut values = Vec::with_capacity(grid.len() * rows * cols);
            for mat in layer {
                if mat.shape() != (rows, cols) {
                    return contract(format!(
                        "layer {k} mixes shapes {:?} and {:?}",
                        (rows, cols),
                        mat.shape()
                    ));
                }
                values.extend_from_slice(mat.as_slice());
            }
            flat.push(values);
        }
        Self::new(grid, rows, cols, flat)
    }

    /// Samples `value(k, t)` for every layer `k ≤ order` and node `t`.
    pub fn from_fn(
        grid: Grid<R>,
        rows: usize,
        cols: usize,
        order: usize,
        mut value: impl FnMut(usize, R) -> DMatrix<Cplx<R>>,
    ) -> Result<Self> {
        let layers = (0..=order)
            .map(|k| grid.nodes().iter().map(|&t| value(k, t)).collect())
            .collect();
        let f = Self::from_node_values(grid, layers)?;
        if f.shape() != (rows, cols) {
            return contract(format!("expected shape {:?}, got {:?}", (rows, cols), f.shape()));
        }
        Ok(f)
    }

    pub fn grid(&self) -> &Grid<R> {
        &self.grid
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn order(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn layer(&self, k: usize) -> Result<&[Cplx<R>]> {
        match self.layers.get(k) {
            Some(l) => Ok(l),
            None => contract(format!(
                "derivative layer {k} requested, function carries layers 0..={}",
                self.order()
            )),
        }
    }

    fn block(&self) -> usize {
        self.rows * self.cols
    }

    /// Raw column-major block of layer `k` at node `i`.
    pub fn node_slice(&self, k: usize, i: usize) -> Result<&[Cplx<R>]> {
        let b = self.block();
        Ok(&self.layer(k)?[i * b..(i + 1) * b])
    }

    pub fn node_matrix(&self, k: usize, i: usize) -> Result<DMatrix<Cplx<R>>> {
        Ok(DMatrix::from_column_slice(self.rows, self.cols, self.node_slice(k, i)?))
    }

    pub fn node_vector(&self, k: usize, i: usize) -> Result<DVector<Cplx<R>>> {
        Ok(DVector::from_column_slice(self.node_slice(k, i)?))
    }

    /// Layer `k` at node `i`, for a scalar (1×1) function.
    pub fn scalar_at(&self, k: usize, i: usize) -> Result<Cplx<R>> {
        Ok(self.node_slice(k, i)?[0])
    }

    /// Value of layer `k` at an arbitrary `t ∈ [a, b]` by cubic interpolation.
    pub fn interpolate(&self, k: usize, t: R) -> Result<DMatrix<Cplx<R>>> {
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for (i, w) in self.grid.interpolation_weights(t)? {
            let block = self.node_slice(k, i)?;
            for (o, v) in out.iter_mut().zip(block) {
                *o += v.scale(w);
            }
        }
        Ok(out)
    }

    /// Keeps layers `0..=order`.
    pub fn truncated(&self, order: usize) -> Result<Self> {
        if order > self.order() {
            return contract(format!(
                "cannot truncate to order {order}, function has order {}",
                self.order()
            ));
        }
        let mut out = self.clone();
        out.layers.truncate(order + 1);
        Ok(out)
    }

    /// Column `j` of a matrix-valued function as a vector-valued function.
    pub fn column(&self, j: usize) -> Result<Self> {
        if j >= self.cols {
            return contract(format!("column {j} out of range for {} columns", self.cols));
        }
        let (rows, b) = (self.rows, self.block());
        let layers = self
            .layers
            .iter()
            .map(|layer| {
                layer
                    .chunks(b)
                    .flat_map(|node| node[j * rows..(j + 1) * rows].iter().copied())
                    .collect()
            })
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            rows,
            cols: 1,
            layers,
        })
    }

    /// Node-wise product `F(t)·v` for a constant vector `v`.
    pub fn mul_vector(&self, v: &DVector<Cplx<R>>) -> Result<Self> {
        if v.len() != self.cols {
            return contract(format!(
                "vector of length {} cannot multiply {} columns",
                v.len(),
                self.cols
            ));
        }
        let (rows, b) = (self.rows, self.block());
        let layers = self
            .layers
            .iter()
            .map(|layer| {
                let mut out = Vec::with_capacity(self.grid.len() * rows);
                for node in layer.chunks(b) {
                    for r in 0..rows {
                        let mut acc = Cplx::new(R::zero(), R::zero());
                        for (c, vc) in v.iter().enumerate() {
                            acc += node[c * rows + r] * *vc;
                        }
                        out.push(acc);
                    }
                }
                out
            })
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            rows,
            cols: 1,
            layers,
        })
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return contract("functions live on different grids");
        }
        if self.shape() != other.shape() {
            return contract(format!("shape mismatch: {:?} vs {:?}", self.shape(), other.shape()));
        }
        if self.order() != other.order() {
            return contract(format!(
                "derivative layer count mismatch: {} vs {}",
                self.order() + 1,
                other.order() + 1
            ));
        }
        Ok(())
    }

    /// `self + λ·other`, layer-wise.
    pub fn axpy(&self, lambda: Cplx<R>, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let layers = self
            .layers
            .iter()
            .zip(&other.layers)
            .map(|(x, y)| x.iter().zip(y).map(|(a, b)| *a + *b * lambda).collect())
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            rows: self.rows,
            cols: self.cols,
            layers,
        })
    }

    pub fn scaled(&self, lambda: Cplx<R>) -> Self {
        let mut out = self.clone();
        for layer in &mut out.layers {
            for v in layer.iter_mut() {
                *v *= lambda;
            }
        }
        out
    }

    /// Largest magnitude over all stored values.
    pub fn max_abs(&self) -> R {
        self.layers
            .iter()
            .flatten()
            .map(|v| modulus(*v))
            .fold(R::zero(), |a, b| a.max(b))
    }

    /// Largest per-node Euclidean distance between layer 0 of two functions.
    pub fn max_node_distance(&self, other: &Self) -> Result<R> {
        if self.grid != other.grid || self.shape() != other.shape() {
            return contract("functions are not comparable");
        }
        let b = self.block();
        let (x, y) = (&self.layers[0], &other.layers[0]);
        Ok(x.chunks(b)
            .zip(y.chunks(b))
            .map(|(u, v)| euclidean(u.iter().zip(v).map(|(p, q)| *p - *q)))
            .fold(R::zero(), |a, d| a.max(d)))
    }
}

pub(crate) fn euclidean<R: Real>(values: impl Iterator<Item = Cplx<R>>) -> R {
    // Scaled sum of squares to avoid overflow.
    let vals: Vec<R> = values.map(modulus).collect();
    let scale = vals.iter().fold(R::zero(), |a, b| a.max(*b));
    if scale == R::zero() || !scale.is_finite() {
        return scale;
    }
    let sum = vals
        .iter()
        .map(|v| {
            let q = *v / scale;
            q * q
        })
        .fold(R::zero(), |a, b| a + b);
    scale * sum.sqrt()
}

/// Node-wise Euclidean magnitude of layer `k`.
fn magnitudes<R: Real>(f: &SampledFunction<R>, k: usize) -> Result<Vec<R>> {
    let b = f.block();
    Ok(f.layer(k)?
        .chunks(b)
        .map(|node| euclidean(node.iter().copied()))
        .collect())
}

/// `L_p` norm of derivative layer `k`: trapezoid quadrature of `|f|^p` for
/// finite `p`, node-wise maximum for `p = ∞`.
pub fn lp_norm<R: Real>(f: &SampledFunction<R>, k: usize, p: Exponent<R>) -> Result<R> {
    let mags = magnitudes(f, k)?;
    Ok(lp_of_magnitudes(f.grid(), &mags, p))
}

pub(crate) fn lp_of_magnitudes<R: Real>(grid: &Grid<R>, mags: &[R], p: Exponent<R>) -> R {
    match p {
        Exponent::Infinite => mags.iter().fold(R::zero(), |a, b| a.max(*b)),
        Exponent::Finite(p) => {
            let scale = mags.iter().fold(R::zero(), |a, b| a.max(*b));
            if scale == R::zero() {
                return R::zero();
            }
            let integral = grid
                .trapezoid_weights()
                .iter()
                .zip(mags)
                .map(|(w, m)| *w * (*m / scale).powf(p))
                .fold(R::zero(), |a, b| a + b);
            scale * integral.powf(R::one() / p)
        }
    }
}

/// `∥y∥_{n,p} = Σ_{k=0}^{n} ∥y^{(k)}∥_p`.
pub fn sobolev_norm<R: Real>(y: &SampledFunction<R>, idx: SobolevIndex<R>) -> Result<R> {
    if y.order() < idx.n {
        return contract(format!(
            "W^{}_p norm needs layers 0..={}, function has order {}",
            idx.n,
            idx.n,
            y.order()
        ));
    }
    (0..=idx.n).try_fold(R::zero(), |acc, k| Ok(acc + lp_norm(y, k, idx.p)?))
}

/// Layer-wise `y1 − y2`.
pub fn function_difference<R: Real>(y1: &SampledFunction<R>, y2: &SampledFunction<R>) -> Result<SampledFunction<R>> {
    y1.axpy(Cplx::new(-R::one(), R::zero()), y2)
}
