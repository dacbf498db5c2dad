//! Problem files: JSON documents whose matrix and vector entries are
//! expression strings (or plain numbers) in `t` and `eps`.
//!
//! ```json
//! {
//!   "interval": {"a": 0, "b": 1},
//!   "dims": {"m": 1, "n": 1, "r": 1, "p": "inf"},
//!   "A": [["1 + eps"]],
//!   "f": ["0"],
//!   "boundary": {"two_point": {"at_a": [[1]], "at_b": [[0]]}},
//!   "c": [1],
//!   "family": {"eps0": 1},
//!   "numerics": {"nodes": 1025}
//! }
//! ```
//!
//! Boundary sections are `canonical` (`alphas`: n matrices r×m, optional
//! `phi`: r×m kernel), `multipoint` (`limit_points`, `groups` of
//! `{point, betas}` terms with n + 1 matrices m×m each, group 0 being the
//! zero group) or `two_point` (`at_a`, `at_b`). Everything except `A`, `f`
//! and `phi` must be constant in `t`; all of it may depend on `eps`.

use std::path::Path;

use anyhow::{bail, Context, Result};
use charmat::boundary::{BoundaryOperator, CanonicalBoundary, MultipointBoundary, MultipointTerm};
use charmat::exprs::{parse, Expr, MatrixExpression};
use charmat::fredholm::{Numerics, ProblemSpec};
use charmat::funcspace::Exponent;
use charmat::Cplx;
use nalgebra::DMatrix;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Entry {
    Number(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntervalFile {
    a: f64,
    b: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DimsFile {
    m: usize,
    n: usize,
    r: usize,
    p: Entry,
}

type Rows = Vec<Vec<Entry>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermFile {
    point: Entry,
    betas: Vec<Rows>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
enum BoundaryFile {
    Canonical {
        alphas: Vec<Rows>,
        #[serde(default)]
        phi: Option<Rows>,
    },
    Multipoint {
        limit_points: Vec<Entry>,
        groups: Vec<Vec<TermFile>>,
    },
    TwoPoint {
        at_a: Rows,
        at_b: Rows,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    eps0: f64,
    #[serde(default)]
    eps_grid: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TolerancesFile {
    rank_rel: Option<f64>,
    rank_abs: Option<f64>,
    ivp: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NumericsFile {
    nodes: Option<usize>,
    substeps: Option<usize>,
    #[serde(default)]
    tolerances: TolerancesFile,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    interval: IntervalFile,
    dims: DimsFile,
    #[serde(rename = "A")]
    a: Rows,
    f: Vec<Entry>,
    boundary: BoundaryFile,
    c: Vec<Entry>,
    #[serde(default)]
    family: Option<FamilyFile>,
    #[serde(default)]
    numerics: NumericsFile,
}

/// The `family` section after validation.
#[derive(Debug, Clone)]
pub struct FamilySection {
    pub eps0: f64,
    pub eps_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
struct Term {
    point: Expr,
    betas: Vec<MatrixExpression>,
}

#[derive(Debug, Clone)]
enum BoundarySource {
    Canonical {
        alphas: Vec<MatrixExpression>,
        phi: MatrixExpression,
    },
    Multipoint {
        limit_points: Vec<Expr>,
        groups: Vec<Vec<Term>>,
    },
}

/// A validated problem file, ready to be instantiated at any `ε`.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    interval: (f64, f64),
    n: usize,
    p: Exponent<f64>,
    coefficient: MatrixExpression,
    forcing: MatrixExpression,
    boundary: BoundarySource,
    rhs: MatrixExpression,
    pub family: Option<FamilySection>,
    pub numerics: Numerics<f64>,
}

fn expr(entry: &Entry, field: &str) -> Result<Expr> {
    match entry {
        Entry::Number(x) => Ok(Expr::num(*x)),
        Entry::Text(src) => parse(src).with_context(|| format!("{field}: cannot parse {src:?}")),
    }
}

fn matrix(rows: &Rows, field: &str, shape: (usize, usize)) -> Result<MatrixExpression> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        let got: Vec<usize> = rows.iter().map(Vec::len).collect();
        bail!(
            "{field}: expected a {}×{} matrix, got {} row(s) of lengths {got:?}",
            shape.0,
            shape.1,
            rows.len()
        );
    }
    let entries = rows
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, e)| (i, j, e)))
        .map(|(i, j, e)| expr(e, &format!("{field}[{i}][{j}]")))
        .collect::<Result<Vec<_>>>()?;
    Ok(MatrixExpression::new(shape.0, shape.1, entries)?)
}

fn column(entries: &[Entry], field: &str, len: usize) -> Result<MatrixExpression> {
    if entries.len() != len {
        bail!("{field}: expected {len} entries, got {}", entries.len());
    }
    let parsed = entries
        .iter()
        .enumerate()
        .map(|(i, e)| expr(e, &format!("{field}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    Ok(MatrixExpression::new(len, 1, parsed)?)
}

fn constant_in_t(m: MatrixExpression, field: &str) -> Result<MatrixExpression> {
    if m.depends_on_t() {
        bail!("{field}: entries must not depend on t");
    }
    Ok(m)
}

fn constant_expr(entry: &Entry, field: &str) -> Result<Expr> {
    let e = expr(entry, field)?;
    if e.depends_on_t() {
        bail!("{field}: must not depend on t");
    }
    Ok(e)
}

fn exponent(entry: &Entry) -> Result<Exponent<f64>> {
    let p = match entry {
        Entry::Number(p) => *p,
        Entry::Text(s) => match s.trim() {
            "inf" | "infinity" | "∞" => return Ok(Exponent::Infinite),
            other => other
                .parse()
                .with_context(|| format!("dims.p: expected a number ≥ 1 or \"inf\", got {other:?}"))?,
        },
    };
    Exponent::new(p).context("dims.p")
}

impl Problem {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "problem".into());
        Self::from_json(&text, name).with_context(|| format!("invalid problem file {}", path.display()))
    }

    pub fn from_json(text: &str, name: String) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text)?;
        let DimsFile { m, n, r, .. } = file.dims;
        if m == 0 || n == 0 || r == 0 {
            bail!("dims: m, n and r must be positive");
        }
        let p = exponent(&file.dims.p)?;
        let coefficient = matrix(&file.a, "A", (m, m))?;
        let forcing = column(&file.f, "f", m)?;
        let rhs = constant_in_t(column(&file.c, "c", r)?, "c")?;

        let boundary = match &file.boundary {
            BoundaryFile::Canonical { alphas, phi } => {
                if alphas.len() != n {
                    bail!(
                        "boundary.canonical.alphas: expected n = {n} matrices, got {}",
                        alphas.len()
                    );
                }
                let alphas = alphas
                    .iter()
                    .enumerate()
                    .map(|(l, a)| {
                        let field = format!("boundary.canonical.alphas[{l}]");
                        constant_in_t(matrix(a, &field, (r, m))?, &field)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let phi = match phi {
                    Some(rows) => matrix(rows, "boundary.canonical.phi", (r, m))?,
                    None => MatrixExpression::zeros(r, m),
                };
                BoundarySource::Canonical { alphas, phi }
            }
            BoundaryFile::Multipoint { limit_points, groups } => {
                if r != m {
                    bail!("boundary.multipoint: multipoint operators need r = m, got r = {r}, m = {m}");
                }
                let limit_points = limit_points
                    .iter()
                    .enumerate()
                    .map(|(j, e)| constant_expr(e, &format!("boundary.multipoint.limit_points[{j}]")))
                    .collect::<Result<Vec<_>>>()?;
                let groups = groups
                    .iter()
                    .enumerate()
                    .map(|(j, group)| {
                        group
                            .iter()
                            .enumerate()
                            .map(|(k, term)| {
                                let field = format!("boundary.multipoint.groups[{j}][{k}]");
                                if term.betas.len() != n + 1 {
                                    bail!(
                                        "{field}.betas: expected n + 1 = {} matrices, got {}",
                                        n + 1,
                                        term.betas.len()
                                    );
                                }
                                let betas = term
                                    .betas
                                    .iter()
                                    .enumerate()
                                    .map(|(l, b)| {
                                        let f = format!("{field}.betas[{l}]");
                                        constant_in_t(matrix(b, &f, (m, m))?, &f)
                                    })
                                    .collect::<Result<Vec<_>>>()?;
                                Ok(Term {
                                    point: constant_expr(&term.point, &format!("{field}.point"))?,
                                    betas,
                                })
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                if groups.len() != limit_points.len() + 1 {
                    bail!(
                        "boundary.multipoint.groups: expected limit_points + 1 = {} groups (group 0 is the zero group), got {}",
                        limit_points.len() + 1,
                        groups.len()
                    );
                }
                BoundarySource::Multipoint { limit_points, groups }
            }
            BoundaryFile::TwoPoint { at_a, at_b } => {
                if r != m {
                    bail!("boundary.two_point: two-point operators need r = m, got r = {r}, m = {m}");
                }
                let (a, b) = (file.interval.a, file.interval.b);
                let term = |rows: &Rows, field: &str, point: f64| -> Result<Term> {
                    let mut betas = vec![constant_in_t(matrix(rows, field, (m, m))?, field)?];
                    betas.extend((0..n).map(|_| MatrixExpression::zeros(m, m)));
                    Ok(Term {
                        point: Expr::num(point),
                        betas,
                    })
                };
                BoundarySource::Multipoint {
                    limit_points: vec![Expr::num(a), Expr::num(b)],
                    groups: vec![
                        vec![],
                        vec![term(at_a, "boundary.two_point.at_a", a)?],
                        vec![term(at_b, "boundary.two_point.at_b", b)?],
                    ],
                }
            }
        };

        let family = match file.family {
            Some(FamilyFile { eps0, eps_grid }) => {
                if !(eps0 > 0.0 && eps0.is_finite()) {
                    bail!("family.eps0: must be positive and finite, got {eps0}");
                }
                Some(FamilySection { eps0, eps_grid })
            }
            None => None,
        };

        let mut numerics = Numerics::default();
        let nf = &file.numerics;
        if let Some(nodes) = nf.nodes {
            numerics.nodes = nodes;
        }
        if let Some(substeps) = nf.substeps {
            numerics.ivp.substeps_per_cell = substeps;
        }
        if let Some(tol) = nf.tolerances.rank_rel {
            numerics.rank_rel_tol = tol;
        }
        if let Some(tol) = nf.tolerances.rank_abs {
            numerics.rank_abs_floor = tol;
        }
        if let Some(tol) = nf.tolerances.ivp {
            numerics.ivp.tolerance = tol;
        }

        let problem = Self {
            name,
            interval: (file.interval.a, file.interval.b),
            n,
            p,
            coefficient,
            forcing,
            boundary,
            rhs,
            family,
            numerics,
        };
        // Instantiating once surfaces shape and domain errors at load time.
        problem.spec(0.0).context("problem at eps = 0")?;
        Ok(problem)
    }

    pub fn m(&self) -> usize {
        self.coefficient.rows()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The problem with `eps` substituted everywhere.
    pub fn spec(&self, eps: f64) -> charmat::Result<ProblemSpec<f64>> {
        let constant = |m: &MatrixExpression| -> charmat::Result<DMatrix<Cplx<f64>>> { Ok(m.eval(0.0, eps)?) };
        let boundary = match &self.boundary {
            BoundarySource::Canonical { alphas, phi } => BoundaryOperator::Canonical(CanonicalBoundary::new(
                alphas.iter().map(constant).collect::<charmat::Result<_>>()?,
                phi.clone(),
                eps,
            )?),
            BoundarySource::Multipoint { limit_points, groups } => {
                let limit_points = limit_points
                    .iter()
                    .map(|e| Ok(e.eval(0.0, eps)?.re))
                    .collect::<charmat::Result<Vec<f64>>>()?;
                let groups = groups
                    .iter()
                    .map(|g| {
                        g.iter()
                            .map(|term| {
                                Ok(MultipointTerm {
                                    point: term.point.eval(0.0, eps)?.re,
                                    betas: term.betas.iter().map(constant).collect::<charmat::Result<_>>()?,
                                })
                            })
                            .collect::<charmat::Result<Vec<_>>>()
                    })
                    .collect::<charmat::Result<Vec<_>>>()?;
                BoundaryOperator::Multipoint(MultipointBoundary::new(self.m(), self.n, groups, limit_points)?)
            }
        };
        let rhs = constant(&self.rhs)?.column(0).into_owned();
        Ok(ProblemSpec::new(
            self.interval,
            self.n,
            self.p,
            self.coefficient.clone(),
            self.forcing.clone(),
            boundary,
            rhs,
        )?
        .with_eps(eps)
        .with_numerics(self.numerics))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAUCHY: &str = r#"{
        "interval": {"a": 0, "b": 1},
        "dims": {"m": 1, "n": 1, "r": 1, "p": "inf"},
        "A": [["1"]],
        "f": ["0"],
        "boundary": {"two_point": {"at_a": [[1]], "at_b": [[0]]}},
        "c": [1]
    }"#;

    #[test]
    fn loads_a_cauchy_problem() {
        let p = Problem::from_json(CAUCHY, "cauchy".into()).unwrap();
        let ps = p.spec(0.0).unwrap();
        assert_eq!((ps.m(), ps.r(), ps.n()), (1, 1, 1));
        assert!(ps.p().is_infinite());
    }

    #[test]
    fn malformed_expression_names_the_field() {
        let text = CAUCHY.replace(r#""A": [["1"]]"#, r#""A": [["1 + * t"]]"#);
        let err = format!("{:#}", Problem::from_json(&text, "bad".into()).unwrap_err());
        assert!(err.contains("A[0][0]"), "{err}");
    }

    #[test]
    fn shape_mismatch_names_the_field() {
        let text = CAUCHY.replace(r#""c": [1]"#, r#""c": [1, 2]"#);
        let err = format!("{:#}", Problem::from_json(&text, "bad".into()).unwrap_err());
        assert!(err.contains("c: expected 1 entries"), "{err}");
    }

    #[test]
    fn syntax_errors_report_the_line() {
        let err = format!(
            "{:#}",
            Problem::from_json("{\n  \"interval\": ,\n}", "bad".into()).unwrap_err()
        );
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn t_dependent_boundary_data_is_rejected() {
        let text = CAUCHY.replace(r#""at_a": [[1]]"#, r#""at_a": [["t"]]"#);
        let err = format!("{:#}", Problem::from_json(&text, "bad".into()).unwrap_err());
        assert!(err.contains("boundary.two_point.at_a"), "{err}");
    }

    #[test]
    fn eps_reaches_boundary_points() {
        let text = r#"{
            "interval": {"a": 0, "b": 1},
            "dims": {"m": 1, "n": 1, "r": 1, "p": 2},
            "A": [["0"]],
            "f": ["0"],
            "boundary": {"multipoint": {"limit_points": [0], "groups": [[], [{"point": "eps", "betas": [[[1]], [[0]]]}]]}},
            "c": ["1 + eps"]
        }"#;
        let p = Problem::from_json(text, "moving".into()).unwrap();
        let ps = p.spec(0.25).unwrap();
        let mp = ps.boundary().as_multipoint().unwrap();
        assert_eq!(mp.groups()[1][0].point, 0.25);
        assert_eq!(ps.rhs()[0].re, 1.25);
    }
}
