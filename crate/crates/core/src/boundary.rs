//! General boundary operators `B : (W_p^n)^m → C^r`.
//!
//! Two representations are implemented:
//!
//! * canonical: `B y = Σ_{k<n} α_k y^(k)(a) + ∫_a^b Φ(t) y^(n)(t) dt`;
//! * multipoint: `B y = Σ_{j=0}^{r} Σ_k Σ_{l=0}^{n} β_{j,k}^(l) y^(l)(t_{j,k})`,
//!   where the points of group `j ≥ 1` accumulate at a limit point `t_j` and
//!   group `0` carries no such requirement.
//!
//! Point values between grid nodes use cubic interpolation of the stored
//! layers. Layer `n` is evaluated pointwise for every `p`; on sampled
//! functions it is continuous.

use nalgebra::{DMatrix, DVector};

use crate::error::{contract, Error, Result};
use crate::exprs::{sample_matrix, MatrixExpression};
use crate::funcspace::{lp_of_magnitudes, Exponent, Grid, SampledFunction};
use crate::linalg::spectral_norm;
use crate::scalar::{cplx, Cplx, Real};

/// `Σ_{k<n} α_k y^(k)(a) + ∫ Φ y^(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalBoundary<R> {
    alphas: Vec<DMatrix<Cplx<R>>>,
    phi: MatrixExpression,
    eps: R,
}

impl<R: Real> CanonicalBoundary<R> {
    /// `alphas` holds `α_0 … α_{n−1}`, each `r×m`; `phi` is `r×m` and is
    /// evaluated at the parameter value `eps`.
    pub fn new(alphas: Vec<DMatrix<Cplx<R>>>, phi: MatrixExpression, eps: R) -> Result<Self> {
        let Some(first) = alphas.first() else {
            return contract("canonical boundary operators need n ≥ 1 alpha matrices");
        };
        let shape = first.shape();
        if let Some(k) = alphas.iter().position(|a| a.shape() != shape) {
            return contract(format!(
                "alpha_{k} has shape {:?}, expected {shape:?}",
                alphas[k].shape()
            ));
        }
        if phi.shape() != shape {
            return contract(format!("Phi has shape {:?}, expected {shape:?}", phi.shape()));
        }
        Ok(Self { alphas, phi, eps })
    }

    pub fn alphas(&self) -> &[DMatrix<Cplx<R>>] {
        &self.alphas
    }

    pub fn phi(&self) -> &MatrixExpression {
        &self.phi
    }

    pub fn rows(&self) -> usize {
        self.alphas[0].nrows()
    }

    pub fn dim(&self) -> usize {
        self.alphas[0].ncols()
    }

    pub fn order(&self) -> usize {
        self.alphas.len()
    }

    fn phi_samples(&self, grid: &Grid<R>) -> Result<Option<SampledFunction<R>>> {
        if self.phi.is_zero() {
            return Ok(None);
        }
        Ok(Some(sample_matrix(&self.phi, grid, self.eps, 0)?))
    }
}

/// One point evaluation `Σ_l β^(l) y^(l)(point)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipointTerm<R> {
    pub point: R,
    /// `β^(0) … β^(n)`, each `m×m`.
    pub betas: Vec<DMatrix<Cplx<R>>>,
}

/// Multipoint operator with point groups `0..=r`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipointBoundary<R> {
    dim: usize,
    order: usize,
    groups: Vec<Vec<MultipointTerm<R>>>,
    limit_points: Vec<R>,
}

impl<R: Real> MultipointBoundary<R> {
    /// `groups[0]` is the zero group; `groups[j]` for `j ≥ 1` accumulates at
    /// `limit_points[j − 1]`. Every term carries `n + 1` matrices of shape `m×m`.
    pub fn new(dim: usize, order: usize, groups: Vec<Vec<MultipointTerm<R>>>, limit_points: Vec<R>) -> Result<Self> {
        if dim == 0 || order == 0 {
            return contract("multipoint operators need m ≥ 1 and n ≥ 1");
        }
        if groups.len() != limit_points.len() + 1 {
            return contract(format!(
                "{} point groups but {} limit points; expected groups = limit points + 1",
                groups.len(),
                limit_points.len()
            ));
        }
        for (j, group) in groups.iter().enumerate() {
            for (k, term) in group.iter().enumerate() {
                if term.betas.len() != order + 1 {
                    return contract(format!(
                        "term ({j}, {k}) has {} beta matrices, expected n + 1 = {}",
                        term.betas.len(),
                        order + 1
                    ));
                }
                if let Some(l) = term.betas.iter().position(|b| b.shape() != (dim, dim)) {
                    return Err(Error::Unsupported(format!(
                        "term ({j}, {k}) beta^({l}) has shape {:?}; multipoint operators require m×m = {dim}×{dim} blocks",
                        term.betas[l].shape()
                    )));
                }
                if !term.point.is_finite() {
                    return contract(format!("term ({j}, {k}) has a non-finite point"));
                }
            }
        }
        Ok(Self {
            dim,
            order,
            groups,
            limit_points,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of accumulating groups `r` (excluding the zero group).
    pub fn group_count(&self) -> usize {
        self.limit_points.len()
    }

    pub fn groups(&self) -> &[Vec<MultipointTerm<R>>] {
        &self.groups
    }

    pub fn limit_points(&self) -> &[R] {
        &self.limit_points
    }

    pub fn terms(&self) -> impl Iterator<Item = &MultipointTerm<R>> {
        self.groups.iter().flatten()
    }
}

/// A boundary operator in one of the implemented forms.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryOperator<R> {
    Canonical(CanonicalBoundary<R>),
    Multipoint(MultipointBoundary<R>),
}

/// `weight · y^(layer)(t_node)`; a boundary operator on samples is a sum of these.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFunctional<R> {
    pub node: usize,
    pub layer: usize,
    pub weight: DMatrix<Cplx<R>>,
}

fn is_zero_matrix<R: Real>(m: &DMatrix<Cplx<R>>) -> bool {
    m.iter().all(|v| v.re == R::zero() && v.im == R::zero())
}

impl<R: Real> BoundaryOperator<R> {
    /// Number of scalar conditions `r` (the codomain is `C^r`).
    pub fn rows(&self) -> usize {
        match self {
            BoundaryOperator::Canonical(c) => c.rows(),
            BoundaryOperator::Multipoint(mp) => mp.dim(),
        }
    }

    /// Number of unknown functions `m`.
    pub fn dim(&self) -> usize {
        match self {
            BoundaryOperator::Canonical(c) => c.dim(),
            BoundaryOperator::Multipoint(mp) => mp.dim(),
        }
    }

    /// Sobolev order `n` of the domain.
    pub fn order(&self) -> usize {
        match self {
            BoundaryOperator::Canonical(c) => c.order(),
            BoundaryOperator::Multipoint(mp) => mp.order(),
        }
    }

    pub fn as_multipoint(&self) -> Option<&MultipointBoundary<R>> {
        match self {
            BoundaryOperator::Multipoint(mp) => Some(mp),
            BoundaryOperator::Canonical(_) => None,
        }
    }

    /// Checks the operator against problem dimensions and the grid.
    pub fn validate_for(&self, m: usize, n: usize, grid: &Grid<R>) -> Result<()> {
        if self.dim() != m || self.order() != n {
            return contract(format!(
                "boundary operator acts on (W^{})^{}, problem has n = {n}, m = {m}",
                self.order(),
                self.dim()
            ));
        }
        if let BoundaryOperator::Multipoint(mp) = self {
            for t in mp.terms().map(|t| t.point).chain(mp.limit_points.iter().copied()) {
                if !grid.contains(t) {
                    return contract(format!("boundary point {t} lies outside [{}, {}]", grid.a(), grid.b()));
                }
            }
        }
        Ok(())
    }

    fn check_argument(&self, y: &SampledFunction<R>) -> Result<()> {
        if y.shape() != (self.dim(), 1) {
            return contract(format!(
                "boundary operator expects an {}-vector function, got shape {:?}",
                self.dim(),
                y.shape()
            ));
        }
        if y.order() < self.order() {
            return contract(format!(
                "boundary operator needs derivative layers 0..={}, function has 0..={}",
                self.order(),
                y.order()
            ));
        }
        Ok(())
    }

    /// `B y ∈ C^r`.
    pub fn apply(&self, y: &SampledFunction<R>) -> Result<DVector<Cplx<R>>> {
        self.check_argument(y)?;
        let mut out = DVector::zeros(self.rows());
        match self {
            BoundaryOperator::Canonical(c) => {
                for (k, alpha) in c.alphas.iter().enumerate() {
                    out += alpha * y.node_vector(k, 0)?;
                }
                if let Some(phi) = c.phi_samples(y.grid())? {
                    let n = c.order();
                    for (i, w) in y.grid().trapezoid_weights().into_iter().enumerate() {
                        out += (phi.node_matrix(0, i)? * y.node_vector(n, i)?) * cplx(w);
                    }
                }
            }
            BoundaryOperator::Multipoint(mp) => {
                for term in mp.terms() {
                    for (l, beta) in term.betas.iter().enumerate() {
                        if is_zero_matrix(beta) {
                            continue;
                        }
                        out += beta * y.interpolate(l, term.point)?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Expansion of `B` on `grid` as weighted node values of derivative layers:
    /// `B y = Σ weight · y^(layer)(t_node)`.
    pub fn functionals(&self, grid: &Grid<R>) -> Result<Vec<NodeFunctional<R>>> {
        let mut out = Vec::new();
        match self {
            BoundaryOperator::Canonical(c) => {
                for (k, alpha) in c.alphas.iter().enumerate() {
                    out.push(NodeFunctional {
                        node: 0,
                        layer: k,
                        weight: alpha.clone(),
                    });
                }
                if let Some(phi) = c.phi_samples(grid)? {
                    for (i, w) in grid.trapezoid_weights().into_iter().enumerate() {
                        out.push(NodeFunctional {
                            node: i,
                            layer: c.order(),
                            weight: phi.node_matrix(0, i)? * cplx(w),
                        });
                    }
                }
            }
            BoundaryOperator::Multipoint(mp) => {
                for term in mp.terms() {
                    let weights = grid.interpolation_weights(term.point)?;
                    for (l, beta) in term.betas.iter().enumerate() {
                        if is_zero_matrix(beta) {
                            continue;
                        }
                        for &(node, w) in &weights {
                            out.push(NodeFunctional {
                                node,
                                layer: l,
                                weight: beta * cplx(w),
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// A constant `C` with `|B y| ≤ C ∥y∥_{n,p}` on `[a, b]`, built from
    /// matrix norms and `∥Φ∥_{p'}`. `None` for multipoint operators that
    /// evaluate `y^(n)` at points when `p < ∞`, which are not bounded in
    /// `W_p^n`.
    pub fn continuity_bound(&self, grid: &Grid<R>, p: Exponent<R>) -> Result<Option<R>> {
        let len = grid.b() - grid.a();
        // |g(t)| ≤ L^{-1/p} ∥g∥_p + L^{1/p'} ∥g'∥_p.
        let point_constant = len.powf(-p.reciprocal()).max(len.powf(p.conjugate().reciprocal()));
        match self {
            BoundaryOperator::Canonical(c) => {
                let alpha_part = c.alphas.iter().map(spectral_norm).fold(R::zero(), |a, b| a + b);
                let phi_part = match c.phi_samples(grid)? {
                    None => R::zero(),
                    Some(phi) => {
                        let mags = (0..grid.len())
                            .map(|i| phi.node_matrix(0, i).map(|m| spectral_norm(&m)))
                            .collect::<Result<Vec<R>>>()?;
                        lp_of_magnitudes(grid, &mags, p.conjugate())
                    }
                };
                Ok(Some(point_constant * alpha_part + phi_part))
            }
            BoundaryOperator::Multipoint(mp) => {
                let n = mp.order();
                let mut total = R::zero();
                for term in mp.terms() {
                    for (l, beta) in term.betas.iter().enumerate() {
                        let norm = spectral_norm(beta);
                        if norm == R::zero() {
                            continue;
                        }
                        if l < n {
                            total += point_constant * norm;
                        } else if p.is_infinite() {
                            total += norm;
                        } else {
                            return Ok(None);
                        }
                    }
                }
                Ok(Some(total))
            }
        }
    }
}

/// Classical two-point operator `B y = B_a y(a) + B_b y(b)`.
pub fn two_point<R: Real>(
    a: R,
    b: R,
    n: usize,
    at_a: DMatrix<Cplx<R>>,
    at_b: DMatrix<Cplx<R>>,
) -> Result<BoundaryOperator<R>> {
    if at_a.shape() != at_b.shape() {
        return contract(format!(
            "B_a has shape {:?} but B_b has shape {:?}",
            at_a.shape(),
            at_b.shape()
        ));
    }
    let (r, m) = at_a.shape();
    if r != m {
        return Err(Error::Unsupported(format!(
            "two-point operators are multipoint and require r = m, got {r}×{m}"
        )));
    }
    let term = |point: R, lead: DMatrix<Cplx<R>>| {
        let mut betas = vec![lead];
        betas.extend((0..n).map(|_| DMatrix::zeros(m, m)));
        MultipointTerm { point, betas }
    };
    Ok(BoundaryOperator::Multipoint(MultipointBoundary::new(
        m,
        n,
        vec![vec![], vec![term(a, at_a)], vec![term(b, at_b)]],
        vec![a, b],
    )?))
}
