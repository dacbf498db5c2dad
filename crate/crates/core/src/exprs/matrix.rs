use nalgebra::DMatrix;

use super::{parse, Expr, ExprError};
use crate::error::{contract, Result};
use crate::funcspace::{Grid, SampledFunction};
use crate::scalar::{Cplx, Real};

/// Matrix of expressions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixExpression {
    rows: usize,
    cols: usize,
    entries: Vec<Expr>,
}

impl MatrixExpression {
    pub fn new(rows: usize, cols: usize, entries: Vec<Expr>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return contract("matrix expressions need at least one row and column");
        }
        if rows * cols != entries.len() {
            return contract(format!(
                "{rows}×{cols} matrix expression given {} entries",
                entries.len()
            ));
        }
        Ok(Self { rows, cols, entries })
    }

    /// Parses a matrix from rows of expression strings.
    pub fn parse_rows<S: AsRef<str>>(rows: &[Vec<S>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != cols) {
            return contract(format!("row {i} has {} entries, expected {cols}", rows[i].len()));
        }
        let entries = rows
            .iter()
            .flatten()
            .map(|s| parse(s.as_ref()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(rows.len(), cols, entries)
    }

    /// Column vector of expressions.
    pub fn parse_column<S: AsRef<str>>(entries: &[S]) -> Result<Self> {
        let entries = entries
            .iter()
            .map(|s| parse(s.as_ref()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(entries.len(), 1, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Expr::Num(0.0); rows * cols],
        }
    }

    pub fn identity(m: usize) -> Self {
        let mut e = Self::zeros(m, m);
        for i in 0..m {
            e.entries[i * m + i] = Expr::Num(1.0);
        }
        e
    }

    /// Constant matrix from row-major values.
    pub fn constant(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(rows, cols, values.iter().map(|v| Expr::Num(*v)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entry(&self, row: usize, col: usize) -> &Expr {
        &self.entries[row * self.cols + col]
    }

    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }

    pub fn depends_on_t(&self) -> bool {
        self.entries.iter().any(Expr::depends_on_t)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| *e == Expr::Num(0.0))
    }

    /// Entry-wise `d/dt`.
    pub fn derivative(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(Expr::diff).collect(),
        }
    }

    pub fn eval<R: Real>(&self, t: R, eps: R) -> std::result::Result<DMatrix<Cplx<R>>, ExprError> {
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = self.entry(r, c).eval(t, eps)?;
            }
        }
        Ok(out)
    }
}

/// Samples `m` and its first `order` derivatives at every grid node.
pub fn sample_matrix<R: Real>(
    m: &MatrixExpression,
    grid: &Grid<R>,
    eps: R,
    order: usize,
) -> Result<SampledFunction<R>> {
    let mut derivs = vec![m.clone()];
    for k in 0..order {
        let next = derivs[k].derivative();
        derivs.push(next);
    }
    let mut layers = Vec::with_capacity(order + 1);
    for d in &derivs {
        let mut layer = Vec::with_capacity(grid.len());
        for (node, &t) in grid.nodes().iter().enumerate() {
            let mut mat = DMatrix::zeros(m.rows, m.cols);
            for r in 0..m.rows {
                for c in 0..m.cols {
                    mat[(r, c)] = d.entry(r, c).eval(t, eps).map_err(|e| ExprError::AtNode {
                        row: r,
                        col: c,
                        node,
                        t: t.as_f64(),
                        source: Box::new(e),
                    })?;
                }
            }
            layer.push(mat);
        }
        layers.push(layer);
    }
    SampledFunction::from_node_values(grid.clone(), layers)
}
