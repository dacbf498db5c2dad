//! The four pipelines behind the subcommands. Each returns the process exit
//! code; input problems surface as errors and map to exit code 1 in `main`.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use charmat::fredholm::{characteristic_matrix, solve, verify_solution, SolvabilityReport};
use charmat::funcspace::SampledFunction;
use charmat::oracle::{oracle_solve, truncation_estimate};
use charmat::paramlab::{
    self, check_condition_0, check_condition_i, check_condition_ii, check_multipoint_assumptions,
    estimate_gamma_bounds, ConditionReport, FnFamily, Verdict,
};
use charmat::Error;
use serde::Serialize;

use crate::input::Problem;
use crate::output::{sci_vec, to_json, write_file, Cell, ComplexMatrix, Format, Sci, Table};

pub const EXIT_OK: u8 = 0;
pub const EXIT_DEFECTIVE: u8 = 2;
/// A numerical threshold was exceeded or a hypothesis check failed.
pub const EXIT_BREACH: u8 = 3;

/// Flags shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Settings {
    pub eps: f64,
    pub eps_grid: Option<Vec<f64>>,
    pub layers: usize,
    pub threshold: f64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl Settings {
    fn emit(&self, name: &str, contents: &str) -> Result<()> {
        match &self.output {
            Some(dir) => write_file(dir, name, contents),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Serialize)]
struct ReportJson {
    m: usize,
    r: usize,
    rank: usize,
    dim_ker: usize,
    dim_coker: usize,
    index: isize,
    invertible: bool,
    singular_values: Vec<Sci>,
    sigma_min: Sci,
    sigma_max: Sci,
    threshold: Sci,
}

impl From<&SolvabilityReport<f64>> for ReportJson {
    fn from(r: &SolvabilityReport<f64>) -> Self {
        Self {
            m: r.m,
            r: r.r,
            rank: r.rank,
            dim_ker: r.dim_ker,
            dim_coker: r.dim_coker,
            index: r.index,
            invertible: r.invertible,
            singular_values: sci_vec(&r.singular_values),
            sigma_min: Sci(r.sigma_min),
            sigma_max: Sci(r.sigma_max),
            threshold: Sci(r.threshold),
        }
    }
}

/// Node values of layers `0..=layers`; imaginary columns appear only when
/// some sample has a nonzero imaginary part.
fn samples_table(y: &SampledFunction<f64>, layers: usize) -> Result<Table> {
    let m = y.shape().0;
    let complex = (0..=layers).any(|k| y.layer(k).is_ok_and(|l| l.iter().any(|z| z.im != 0.0)));
    let name = |j: usize, k: usize| match k {
        0 => format!("y{}", j + 1),
        _ => format!("y{}_d{k}", j + 1),
    };
    let mut columns = vec!["t".to_owned()];
    for k in 0..=layers {
        columns.extend((0..m).map(|j| name(j, k)));
        if complex {
            columns.extend((0..m).map(|j| format!("{}_im", name(j, k))));
        }
    }
    let mut rows = Vec::with_capacity(y.grid().len());
    for (i, &t) in y.grid().nodes().iter().enumerate() {
        let mut row = vec![Cell::from(t)];
        for k in 0..=layers {
            let v = y.node_slice(k, i)?;
            row.extend(v.iter().map(|z| Cell::from(z.re)));
            if complex {
                row.extend(v.iter().map(|z| Cell::from(z.im)));
            }
        }
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

pub fn cmd_solve(problem: &Problem, s: &Settings) -> Result<u8> {
    if s.layers > problem.n() {
        bail!("--layers {} exceeds the smoothness order n = {}", s.layers, problem.n());
    }
    let ps = problem.spec(s.eps)?;
    let sol = solve(&ps)?;
    let residuals = verify_solution(&ps, &sol.y)?;

    #[derive(Serialize)]
    struct Residuals {
        ode: Sci,
        boundary: Sci,
        characteristic_system: Sci,
    }
    #[derive(Serialize)]
    struct SolveJson {
        problem: String,
        status: &'static str,
        eps: Sci,
        nodes: usize,
        report: ReportJson,
        residuals: Residuals,
        xi: ComplexVec,
        kernel_basis_size: usize,
    }
    let xi = &sol.xi;
    let out = SolveJson {
        problem: problem.name.clone(),
        status: if sol.is_unique() { "unique" } else { "defective" },
        eps: Sci(s.eps),
        nodes: ps.numerics().nodes,
        report: (&sol.report).into(),
        residuals: Residuals {
            ode: Sci(residuals.ode),
            boundary: Sci(residuals.boundary),
            characteristic_system: Sci(sol.residual_boundary),
        },
        xi: ComplexVec {
            re: xi.iter().map(|z| Sci(z.re)).collect(),
            im: xi.iter().map(|z| Sci(z.im)).collect(),
        },
        kernel_basis_size: sol.kernel_basis.len(),
    };
    let report = to_json(&out)?;
    s.emit("report.json", &report)?;
    s.emit(
        &format!("solution.{}", s.format.extension()),
        &samples_table(&sol.y, s.layers)?.render(s.format)?,
    )?;
    print!("{report}");
    Ok(if sol.is_unique() { EXIT_OK } else { EXIT_DEFECTIVE })
}

#[derive(Debug, Serialize)]
struct ComplexVec {
    re: Vec<Sci>,
    im: Vec<Sci>,
}

pub fn cmd_analyze(problem: &Problem, s: &Settings) -> Result<u8> {
    let ps = problem.spec(s.eps)?;
    let cm = characteristic_matrix(&ps)?;
    let report = cm.report();

    #[derive(Serialize)]
    struct AnalyzeJson {
        problem: String,
        eps: Sci,
        #[serde(flatten)]
        report: ReportJson,
        characteristic_matrix: ComplexMatrix,
    }
    let text = to_json(&AnalyzeJson {
        problem: problem.name.clone(),
        eps: Sci(s.eps),
        report: (&report).into(),
        characteristic_matrix: cm.matrix().into(),
    })?;
    s.emit("report.json", &text)?;
    print!("{text}");
    Ok(if report.invertible { EXIT_OK } else { EXIT_DEFECTIVE })
}

#[derive(Debug, Serialize)]
struct EvidenceJson {
    eps: Sci,
    value: Sci,
}

#[derive(Debug, Serialize)]
struct CheckJson {
    condition: &'static str,
    verdict: String,
    quantity: String,
    slope: Option<Sci>,
    note: String,
    evidence: Vec<EvidenceJson>,
}

impl From<&ConditionReport<f64>> for CheckJson {
    fn from(r: &ConditionReport<f64>) -> Self {
        Self {
            condition: r.condition.label(),
            verdict: r.verdict.to_string(),
            quantity: r.quantity.clone(),
            slope: r.slope.map(Sci),
            note: r.note.clone(),
            evidence: r
                .evidence
                .iter()
                .map(|e| EvidenceJson {
                    eps: Sci(e.eps),
                    value: Sci(e.value),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
struct BandJson {
    status: &'static str,
    eps_1: Option<Sci>,
    eps_2: Option<Sci>,
    gamma_1: Option<Sci>,
    gamma_2: Option<Sci>,
    band_width: Option<Sci>,
    samples: usize,
}

pub fn cmd_sweep(problem: &Problem, s: &Settings) -> Result<u8> {
    let Some(section) = &problem.family else {
        bail!("sweep needs a `family` section in the problem file");
    };
    let grid = match (&s.eps_grid, &section.eps_grid) {
        (Some(g), _) | (None, Some(g)) => g.clone(),
        (None, None) => paramlab::default_eps_grid(),
    };
    let family = FnFamily::new(problem.name.clone(), section.eps0, |eps| problem.spec(eps));
    let limit = problem.spec(0.0)?;
    let multipoint = limit.boundary().as_multipoint().is_some();

    let mut hypotheses = vec!["general: (0), (I), (II)".to_owned()];
    let mut checks = vec![check_condition_0(&family)?, check_condition_i(&family, &grid)?];
    let probes = paramlab::default_probes(&limit.grid()?, limit.m(), limit.n(), paramlab::probe_seed())?;
    checks.push(check_condition_ii(&family, &grid, &probes)?);
    if multipoint {
        let set = check_multipoint_assumptions(&family, &grid)?;
        let labels: Vec<_> = set.iter().map(|r| r.condition.label()).collect();
        let regime = if limit.p().is_infinite() { "p = inf" } else { "p < inf" };
        hypotheses.push(format!("multipoint, {regime}: {}", labels.join(", ")));
        checks.extend(set);
    }
    let failed = checks.iter().any(|c| c.verdict == Verdict::Fail);

    let (records, defect) = match paramlab::sweep(&family, &grid) {
        Ok(records) => (records, None),
        Err(Error::Defective { dim_ker, dim_coker }) => (Vec::new(), Some((dim_ker, dim_coker))),
        Err(e) => return Err(e.into()),
    };
    let table = Table {
        columns: ["eps", "error", "discrepancy", "ratio", "solvable"]
            .map(String::from)
            .to_vec(),
        rows: records
            .iter()
            .map(|r| {
                vec![
                    r.eps.into(),
                    Cell::opt(r.error),
                    r.discrepancy.into(),
                    Cell::opt(r.ratio),
                    Cell::Flag(r.solvable()),
                ]
            })
            .collect(),
    };
    let band = match (defect, estimate_gamma_bounds(&records)) {
        (Some(_), _) => None,
        (None, Some(b)) => Some(BandJson {
            status: "estimated",
            eps_1: b.eps_1.map(Sci),
            eps_2: Some(Sci(b.eps_2)),
            gamma_1: Some(Sci(b.gamma_1)),
            gamma_2: Some(Sci(b.gamma_2)),
            band_width: Some(Sci(b.band_width())),
            samples: b.samples,
        }),
        (None, None) => Some(BandJson {
            status: "inconclusive",
            eps_1: None,
            eps_2: None,
            gamma_1: None,
            gamma_2: None,
            band_width: None,
            samples: records.iter().filter(|r| r.ratio.is_some()).count(),
        }),
    };

    #[derive(Serialize)]
    struct SweepJson {
        family: String,
        eps0: Sci,
        eps_grid: Vec<Sci>,
        probe_seed: u64,
        hypotheses_checked: Vec<String>,
        checks: Vec<CheckJson>,
        limit_problem: &'static str,
        band: Option<BandJson>,
        records: Table,
    }
    let summary = to_json(&SweepJson {
        family: problem.name.clone(),
        eps0: Sci(section.eps0),
        eps_grid: sci_vec(&grid),
        probe_seed: paramlab::probe_seed(),
        hypotheses_checked: hypotheses,
        checks: checks.iter().map(CheckJson::from).collect(),
        limit_problem: if defect.is_some() {
            "defective"
        } else {
            "uniquely solvable"
        },
        band,
        records: table.clone(),
    })?;
    s.emit("summary.json", &summary)?;
    s.emit(&format!("sweep.{}", s.format.extension()), &table.render(s.format)?)?;
    print!("{summary}");
    Ok(match (defect, failed) {
        (Some(_), _) => EXIT_DEFECTIVE,
        (None, true) => EXIT_BREACH,
        (None, false) => EXIT_OK,
    })
}

pub fn cmd_oracle_compare(problem: &Problem, s: &Settings) -> Result<u8> {
    let ps = problem.spec(s.eps)?;
    if ps.r() != ps.m() {
        bail!("oracle-compare needs r = m, got r = {}, m = {}", ps.r(), ps.m());
    }

    #[derive(Serialize)]
    struct CompareJson {
        problem: String,
        eps: Sci,
        nodes: usize,
        status: &'static str,
        max_node_difference: Option<Sci>,
        truncation_estimate: Option<Sci>,
        threshold: Sci,
        report: ReportJson,
    }
    let report = characteristic_matrix(&ps)?.report();
    let mut out = CompareJson {
        problem: problem.name.clone(),
        eps: Sci(s.eps),
        nodes: ps.numerics().nodes,
        status: "skipped: defective problem",
        max_node_difference: None,
        truncation_estimate: None,
        threshold: Sci(s.threshold),
        report: (&report).into(),
    };
    let code = if report.invertible {
        let sol = solve(&ps)?;
        let oracle = oracle_solve(&ps).context("oracle solve")?;
        let diff = sol.y.truncated(0)?.max_node_distance(&oracle.truncated(0)?)?;
        out.max_node_difference = Some(Sci(diff));
        out.truncation_estimate = Some(Sci(truncation_estimate(&ps)?));
        if diff < s.threshold {
            out.status = "agree";
            EXIT_OK
        } else {
            out.status = "threshold exceeded";
            EXIT_BREACH
        }
    } else {
        EXIT_DEFECTIVE
    };
    let text = to_json(&out)?;
    s.emit("compare.json", &text)?;
    print!("{text}");
    Ok(code)
}
