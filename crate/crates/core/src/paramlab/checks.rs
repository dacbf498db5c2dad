use nalgebra::DMatrix;

use super::{
    decay_verdict, validate_eps_grid, ConditionId, ConditionReport, Evidence, Family, Verdict, TREND_TOLERANCE,
};
use crate::boundary::MultipointBoundary;
use crate::error::{contract, Result};
use crate::exprs::sample_matrix;
use crate::fredholm::{analyze, ProblemSpec};
use crate::funcspace::{euclidean, function_difference, sobolev_norm, SampledFunction, SobolevIndex};
use crate::linalg::spectral_norm;
use crate::scalar::{Cplx, Real};

fn values<R: Real>(evidence: &[Evidence<R>]) -> Vec<f64> {
    evidence.iter().map(|e| e.value.as_f64()).collect()
}

/// Fails with a contract error unless `ps` shares `a, b, m, n, p` with `limit`.
fn check_compatible<R: Real>(limit: &ProblemSpec<R>, ps: &ProblemSpec<R>, eps: R) -> Result<()> {
    if ps.interval() != limit.interval() || ps.m() != limit.m() || ps.n() != limit.n() || ps.p() != limit.p() {
        return contract(format!(
            "member at ε = {eps} differs from the limit problem in (a, b, m, n, p)"
        ));
    }
    Ok(())
}

fn members<R: Real>(fam: &dyn Family<R>, eps_grid: &[R]) -> Result<(ProblemSpec<R>, Vec<ProblemSpec<R>>)> {
    validate_eps_grid(fam, eps_grid)?;
    let limit = fam.limit()?;
    let members = eps_grid
        .iter()
        .map(|&eps| {
            let ps = fam.generate(eps)?;
            check_compatible(&limit, &ps, eps)?;
            Ok(ps)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((limit, members))
}

/// Condition (0): the limit problem is uniquely solvable.
pub fn check_condition_0<R: Real>(fam: &dyn Family<R>) -> Result<ConditionReport<R>> {
    let limit = fam.limit()?;
    let report = analyze(&limit)?;
    let evidence = vec![Evidence {
        eps: R::zero(),
        value: report.sigma_min,
    }];
    let (verdict, note) = if report.r != report.m {
        (
            Verdict::Fail,
            format!(
                "r = {} ≠ m = {}: nonzero index rules out unique solvability",
                report.r, report.m
            ),
        )
    } else if report.invertible {
        (Verdict::Pass, "characteristic matrix is nondegenerate".to_owned())
    } else {
        (
            Verdict::Fail,
            format!("homogeneous limit problem has {} independent solutions", report.dim_ker),
        )
    };
    Ok(ConditionReport::from_evidence(
        ConditionId::Zero,
        verdict,
        "smallest singular value of M at ε = 0",
        evidence,
        note,
    ))
}

/// Condition (I): `∥A(ε) − A(0)∥_{n−1,p}` decays.
pub fn check_condition_i<R: Real>(fam: &dyn Family<R>, eps_grid: &[R]) -> Result<ConditionReport<R>> {
    let (limit, members) = members(fam, eps_grid)?;
    let grid = limit.grid()?;
    let order = limit.n() - 1;
    let a0 = sample_matrix(limit.coefficient(), &grid, limit.eps(), order)?;
    let idx = SobolevIndex::new(order, limit.p());
    let evidence = members
        .iter()
        .zip(eps_grid)
        .map(|(ps, &eps)| {
            let a = sample_matrix(ps.coefficient(), &grid, ps.eps(), order)?;
            Ok(Evidence {
                eps,
                value: sobolev_norm(&function_difference(&a, &a0)?, idx)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = decay_verdict(&values(&evidence), TREND_TOLERANCE);
    Ok(ConditionReport::from_evidence(
        ConditionId::I,
        verdict,
        "W^{n-1}_p distance of A(eps) from A(0)",
        evidence,
        "",
    ))
}

/// Condition (II) on a finite probe set: `max_y |B(ε)y − B(0)y|` decays.
/// A pass means no counterexample was found among the probes.
pub fn check_condition_ii<R: Real>(
    fam: &dyn Family<R>,
    eps_grid: &[R],
    probes: &[SampledFunction<R>],
) -> Result<ConditionReport<R>> {
    if probes.is_empty() {
        return contract("condition (II) needs at least one probe");
    }
    let (limit, members) = members(fam, eps_grid)?;
    let b0 = limit.boundary();
    let base = probes.iter().map(|y| b0.apply(y)).collect::<Result<Vec<_>>>()?;
    let evidence = members
        .iter()
        .zip(eps_grid)
        .map(|(ps, &eps)| {
            let mut worst = R::zero();
            for (y, b0y) in probes.iter().zip(&base) {
                let diff = ps.boundary().apply(y)? - b0y;
                worst = worst.max(euclidean(diff.iter().copied()));
            }
            Ok(Evidence { eps, value: worst })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = decay_verdict(&values(&evidence), TREND_TOLERANCE);
    Ok(ConditionReport::from_evidence(
        ConditionId::II,
        verdict,
        "max over probes of |B(eps)y - B(0)y|",
        evidence,
        format!("sampled check over {} probes, not exhaustive", probes.len()),
    ))
}

/// Per-ε quantities entering the multipoint assumptions.
struct MultipointSums<R: Real> {
    alpha: R,
    /// `Σ_k β_{j,k}^{(l)}` indexed by `[j − 1][l]`.
    group_sums: Vec<Vec<DMatrix<Cplx<R>>>>,
    gamma: R,
    gamma_prime: R,
    gamma_p: R,
    delta: R,
}

fn multipoint_sums<R: Real>(mp: &MultipointBoundary<R>, inv_conj: R) -> MultipointSums<R> {
    let n = mp.order();
    let m = mp.dim();
    let mut out = MultipointSums {
        alpha: R::zero(),
        group_sums: Vec::new(),
        gamma: R::zero(),
        gamma_prime: R::zero(),
        gamma_p: R::zero(),
        delta: R::zero(),
    };
    for l in 0..=n {
        let zero_group = mp.groups()[0]
            .iter()
            .map(|term| spectral_norm(&term.betas[l]))
            .fold(R::zero(), |a, b| a + b);
        out.delta = out.delta.max(zero_group);
    }
    for (group, &limit) in mp.groups()[1..].iter().zip(mp.limit_points()) {
        let mut sums = vec![DMatrix::zeros(m, m); n + 1];
        let mut weighted = vec![R::zero(); n + 1];
        let mut top = R::zero();
        for term in group {
            let dist = (term.point - limit).abs();
            out.alpha = out.alpha.max(dist);
            for (l, beta) in term.betas.iter().enumerate() {
                sums[l] += beta;
                weighted[l] += spectral_norm(beta) * dist;
            }
            top += spectral_norm(&term.betas[n]) * dist.powf(inv_conj);
        }
        out.gamma = weighted.iter().fold(out.gamma, |a, b| a.max(*b));
        out.gamma_prime = weighted[..n].iter().fold(out.gamma_prime, |a, b| a.max(*b));
        out.gamma_p = out.gamma_p.max(top);
        out.group_sums.push(sums);
    }
    out
}

/// (α), (β), (δ), and either (γ) when `p = ∞` or (γ_p) and (γ′) when
/// `p < ∞`, evaluated on every member of the family.
pub fn check_multipoint_assumptions<R: Real>(fam: &dyn Family<R>, eps_grid: &[R]) -> Result<Vec<ConditionReport<R>>> {
    let (limit, members) = members(fam, eps_grid)?;
    let p = limit.p();
    let inv_conj = p.conjugate().reciprocal();
    let mut sums = Vec::with_capacity(members.len());
    for (ps, &eps) in members.iter().zip(eps_grid) {
        let Some(mp) = ps.boundary().as_multipoint() else {
            return contract(format!(
                "member at ε = {eps} does not have a multipoint boundary operator"
            ));
        };
        sums.push(multipoint_sums(mp, inv_conj));
    }
    let series = |pick: &dyn Fn(&MultipointSums<R>) -> R| -> Vec<Evidence<R>> {
        sums.iter()
            .zip(eps_grid)
            .map(|(s, &eps)| Evidence { eps, value: pick(s) })
            .collect()
    };
    let decay = |id, quantity: &str, evidence: Vec<Evidence<R>>| {
        let verdict = decay_verdict(&values(&evidence), TREND_TOLERANCE);
        ConditionReport::from_evidence(id, verdict, quantity, evidence, "")
    };

    let mut reports = vec![decay(ConditionId::Alpha, "max |t_jk(eps) - t_j|", series(&|s| s.alpha))];

    let mut beta_steps = Vec::new();
    let mut group_mismatch = false;
    for (pair, &eps) in sums.windows(2).zip(&eps_grid[1..]) {
        if pair[0].group_sums.len() != pair[1].group_sums.len() {
            group_mismatch = true;
            break;
        }
        let mut step = R::zero();
        for (a, b) in pair[0].group_sums.iter().zip(&pair[1].group_sums) {
            for (x, y) in a.iter().zip(b) {
                step = step.max(spectral_norm(&(x - y)));
            }
        }
        beta_steps.push(Evidence { eps, value: step });
    }
    reports.push(if group_mismatch {
        ConditionReport::from_evidence(
            ConditionId::Beta,
            Verdict::Fail,
            "successive differences of group coefficient sums",
            beta_steps,
            "number of accumulating groups changes with eps",
        )
    } else if beta_steps.is_empty() {
        ConditionReport::from_evidence(
            ConditionId::Beta,
            Verdict::Inconclusive,
            "successive differences of group coefficient sums",
            beta_steps,
            "needs at least two eps values",
        )
    } else {
        decay(
            ConditionId::Beta,
            "successive differences of group coefficient sums",
            beta_steps,
        )
    });

    if p.is_infinite() {
        reports.push(decay(
            ConditionId::Gamma,
            "max_{j,l} sum_k |beta^(l)| |t_jk - t_j|",
            series(&|s| s.gamma),
        ));
    } else {
        let evidence = series(&|s| s.gamma_p);
        let vals = values(&evidence);
        let mut sorted = vals.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        let bound = 10.0 * median;
        let bounded = vals.iter().all(|v| v.is_finite() && *v <= bound);
        reports.push(ConditionReport::from_evidence(
            ConditionId::GammaP,
            if bounded { Verdict::Pass } else { Verdict::Fail },
            "max_j sum_k |beta^(n)| |t_jk - t_j|^(1/p')",
            evidence,
            format!("bounded by 10 x median = {bound:e}"),
        ));
        reports.push(decay(
            ConditionId::GammaPrime,
            "max_{j,l<n} sum_k |beta^(l)| |t_jk - t_j|",
            series(&|s| s.gamma_prime),
        ));
    }

    reports.push(decay(
        ConditionId::Delta,
        "max_l sum_k |beta_0k^(l)|",
        series(&|s| s.delta),
    ));
    Ok(reports)
}
