use super::{validate_eps_grid, Family};
use crate::error::{contract, Error, Result};
use crate::exprs::sample_matrix;
use crate::fredholm::{solve, BvpSolution, ProblemSpec};
use crate::funcspace::{euclidean, function_difference, sobolev_norm, SampledFunction, SobolevIndex};
use crate::scalar::{binomial, cplx, Real};

/// Error and discrepancy of the limit solution at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecord<R> {
    pub eps: R,
    /// `∥y(ε) − y(0)∥_{n,p}`; `None` when the ε-problem is not uniquely solvable.
    pub error: Option<R>,
    /// `∥L(ε)y(0) − f(ε)∥_{n−1,p} + |B(ε)y(0) − c(ε)|`.
    pub discrepancy: R,
    /// `error / discrepancy` when both are defined and the discrepancy is positive.
    pub ratio: Option<R>,
}

impl<R: Real> ConvergenceRecord<R> {
    pub fn solvable(&self) -> bool {
        self.error.is_some()
    }
}

/// `∥L(ε)y₀ − f(ε)∥_{n−1,p} + |B(ε)y₀ − c(ε)|` for the limit solution `y₀`.
///
/// The residual's derivative layers follow from the Leibniz rule applied to
/// `y₀' + A(ε) y₀ − f(ε)` using the layers of `y₀` itself.
pub fn discrepancy<R: Real>(ps: &ProblemSpec<R>, y0: &SampledFunction<R>) -> Result<R> {
    let n = ps.n();
    if y0.shape() != (ps.m(), 1) || y0.order() < n {
        return contract("limit solution does not match the problem's shape and order");
    }
    let grid = y0.grid();
    let a = sample_matrix(ps.coefficient(), grid, ps.eps(), n - 1)?;
    let f = sample_matrix(ps.forcing(), grid, ps.eps(), n - 1)?;
    let mut layers = vec![Vec::with_capacity(grid.len()); n];
    for i in 0..grid.len() {
        for (k, layer) in layers.iter_mut().enumerate() {
            let mut res = y0.node_matrix(k + 1, i)? - f.node_matrix(k, i)?;
            for j in 0..=k {
                res += (a.node_matrix(j, i)? * y0.node_matrix(k - j, i)?) * cplx(binomial::<R>(k, j));
            }
            layer.push(res);
        }
    }
    let residual = SampledFunction::from_node_values(grid.clone(), layers)?;
    let interior = sobolev_norm(&residual, SobolevIndex::new(n - 1, ps.p()))?;
    let boundary = euclidean((ps.boundary().apply(y0)? - ps.rhs()).iter().copied());
    Ok(interior + boundary)
}

fn record<R: Real>(
    fam: &dyn Family<R>,
    eps: R,
    limit: &ProblemSpec<R>,
    y0: &BvpSolution<R>,
) -> Result<ConvergenceRecord<R>> {
    let ps = fam.generate(eps)?;
    if ps.interval() != limit.interval() || ps.m() != limit.m() || ps.n() != limit.n() || ps.p() != limit.p() {
        return contract(format!(
            "member at ε = {eps} differs from the limit problem in (a, b, m, n, p)"
        ));
    }
    if ps.numerics().nodes != limit.numerics().nodes {
        return contract(format!(
            "member at ε = {eps} uses a different grid than the limit problem"
        ));
    }
    let discrepancy = discrepancy(&ps, &y0.y)?;
    let error = match solve(&ps) {
        Ok(sol) if sol.is_unique() => Some(sobolev_norm(
            &function_difference(&sol.y, &y0.y)?,
            limit.sobolev_index(),
        )?),
        Ok(_) | Err(Error::Divergence { .. }) => None,
        Err(e) => return Err(e),
    };
    let ratio = match error {
        Some(err) if discrepancy > R::zero() => Some(err / discrepancy),
        _ => None,
    };
    Ok(ConvergenceRecord {
        eps,
        error,
        discrepancy,
        ratio,
    })
}

/// Solves the limit problem and every member on `eps_grid` (in parallel) and
/// returns one record per ε in grid order.
pub fn sweep<R: Real>(fam: &dyn Family<R>, eps_grid: &[R]) -> Result<Vec<ConvergenceRecord<R>>> {
    validate_eps_grid(fam, eps_grid)?;
    let limit = fam.limit()?;
    let y0 = solve(&limit)?;
    if !y0.is_unique() {
        return Err(Error::Defective {
            dim_ker: y0.report.dim_ker,
            dim_coker: y0.report.dim_coker,
        });
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = eps_grid
            .iter()
            .map(|&eps| {
                let (limit, y0) = (&limit, &y0);
                scope.spawn(move || record(fam, eps, limit, y0))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    })
}

/// Empirical two-sided band `γ₁ d̃ ≤ error ≤ γ₂ d̃` over the sampled ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioEstimate<R> {
    /// Largest sampled ε below which every sampled problem is uniquely solvable.
    pub eps_1: Option<R>,
    /// Largest ε among the records used for the band.
    pub eps_2: R,
    pub gamma_1: R,
    pub gamma_2: R,
    pub samples: usize,
}

impl<R: Real> RatioEstimate<R> {
    /// `γ₂ / γ₁`.
    pub fn band_width(&self) -> R {
        self.gamma_2 / self.gamma_1
    }

    pub fn contains(&self, ratio: R) -> bool {
        ratio >= self.gamma_1 && ratio <= self.gamma_2
    }
}

/// Discrepancies at or below this value are not used for ratios.
pub const DISCREPANCY_FLOOR: f64 = 1e-14;

/// Minimum and maximum of `error / discrepancy` over records with a
/// discrepancy above `1e−14`; `None` (inconclusive) with fewer than three.
pub fn estimate_gamma_bounds<R: Real>(records: &[ConvergenceRecord<R>]) -> Option<RatioEstimate<R>> {
    let floor = R::lit(DISCREPANCY_FLOOR);
    let used: Vec<(R, R)> = records
        .iter()
        .filter(|r| r.discrepancy > floor)
        .filter_map(|r| r.error.map(|e| (r.eps, e / r.discrepancy)))
        .collect();
    if used.len() < 3 {
        return None;
    }
    let mut by_eps: Vec<&ConvergenceRecord<R>> = records.iter().collect();
    by_eps.sort_by(|x, y| x.eps.partial_cmp(&y.eps).expect("finite ε"));
    let eps_1 = by_eps.iter().take_while(|r| r.solvable()).last().map(|r| r.eps);
    Some(RatioEstimate {
        eps_1,
        eps_2: used.iter().map(|u| u.0).fold(used[0].0, |a, b| a.max(b)),
        gamma_1: used.iter().map(|u| u.1).fold(used[0].1, |a, b| a.min(b)),
        gamma_2: used.iter().map(|u| u.1).fold(used[0].1, |a, b| a.max(b)),
        samples: used.len(),
    })
}

/// Least-squares slope of `ln y` against `ln x` over pairs with both
/// positive and finite; `None` with fewer than two distinct `x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let count = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / count;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(errors: &[f64], discrepancies: &[f64]) -> Vec<ConvergenceRecord<f64>> {
        errors
            .iter()
            .zip(discrepancies)
            .enumerate()
            .map(|(i, (e, d))| ConvergenceRecord {
                eps: 0.1 / (i + 1) as f64,
                error: Some(*e),
                discrepancy: *d,
                ratio: Some(e / d),
            })
            .collect()
    }

    #[test]
    fn identical_arrays_give_unit_band() {
        let v = [1e-1, 1e-2, 1e-3, 1e-4];
        let est = estimate_gamma_bounds(&records(&v, &v)).unwrap();
        assert_eq!((est.gamma_1, est.gamma_2), (1.0, 1.0));
        assert_eq!(est.eps_2, 0.1);
        assert_eq!(est.samples, 4);
    }

    #[test]
    fn doubled_error_gives_band_two() {
        let d = [3e-1, 2e-2, 5e-3];
        let e: Vec<f64> = d.iter().map(|x| 2.0 * x).collect();
        let est = estimate_gamma_bounds(&records(&e, &d)).unwrap();
        assert_eq!((est.gamma_1, est.gamma_2), (2.0, 2.0));
        assert_eq!(est.band_width(), 1.0);
    }

    #[test]
    fn vanishing_discrepancies_are_inconclusive() {
        assert!(estimate_gamma_bounds(&records(&[0.0; 5], &[0.0; 5])).is_none());
        assert!(estimate_gamma_bounds(&records(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1e-15])).is_none());
    }

    #[test]
    fn eps_1_stops_at_first_unsolvable() {
        let mut recs = records(&[1.0, 1.0, 1.0, 1.0], &[1.0, 1.0, 1.0, 1.0]);
        recs[1].error = None;
        let est = estimate_gamma_bounds(&recs).unwrap();
        assert_eq!(est.eps_1, Some(recs[2].eps));
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1e-1, 1e-2, 1e-3];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.sqrt()).collect();
        assert!((log_log_slope(&xs, &ys).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(log_log_slope(&[1.0], &[1.0]), None);
    }
}

#[cfg(test)]
mod sweep_tests {
    use super::*;
    use crate::paramlab::families::{forcing_drift, scalar_drift};
    use crate::paramlab::{default_eps_grid, FnFamily};

    #[test]
    fn constant_family_has_zero_error() {
        let fam = FnFamily::new("const", 1.0, |_eps: f64| scalar_drift::<f64>().generate(0.0));
        for r in sweep(&fam, &[0.1, 0.01]).unwrap() {
            assert_eq!(r.error, Some(0.0));
            assert!(r.discrepancy < 1e-15);
        }
    }

    #[test]
    fn forcing_drift_discrepancy_is_eps() {
        for r in sweep(&*forcing_drift::<f64>(), &default_eps_grid()).unwrap() {
            assert!((r.discrepancy - r.eps).abs() < 1e-12 * r.eps.max(1e-3), "{r:?}");
            assert!((r.error.unwrap() - 2.0 * r.eps).abs() < 1e-10);
        }
    }

    #[test]
    fn scalar_drift_matches_closed_form() {
        let grid = [1e-1, 1e-3, 1e-5];
        let recs = sweep(&*scalar_drift::<f64>(), &grid).unwrap();
        let nodes = scalar_drift::<f64>().limit().unwrap().grid().unwrap();
        for r in recs {
            let k = 1.0 + r.eps;
            // W^1_∞ norm of e^{−kt} − e^{−t}
            let (mut d0, mut d1) = (0.0f64, 0.0f64);
            for &t in nodes.nodes() {
                d0 = d0.max(((-k * t).exp() - (-t).exp()).abs());
                d1 = d1.max((-k * (-k * t).exp() + (-t).exp()).abs());
            }
            assert!((r.error.unwrap() - (d0 + d1)).abs() < 1e-9, "{r:?}");
            // discrepancy: ∥ε e^{−t}∥_∞
            assert!((r.discrepancy - r.eps).abs() < 1e-9);
        }
    }

    #[test]
    fn unsolvable_members_are_recorded() {
        // y' = 0 with B(ε) y = y(0) − 2ε y(1), degenerate only at ε = 0.5
        let fam = FnFamily::new("gap", 1.0, |eps: f64| {
            let base = forcing_drift::<f64>().generate(0.0)?;
            let b = crate::boundary::two_point(
                0.0,
                1.0,
                1,
                nalgebra::DMatrix::from_element(1, 1, crate::scalar::Cplx::new(1.0, 0.0)),
                nalgebra::DMatrix::from_element(1, 1, crate::scalar::Cplx::new(-2.0 * eps, 0.0)),
            )?;
            ProblemSpec::new(
                base.interval(),
                1,
                base.p(),
                crate::exprs::MatrixExpression::zeros(1, 1),
                crate::exprs::MatrixExpression::zeros(1, 1),
                b,
                base.rhs().clone(),
            )
        });
        let recs = sweep(&fam, &[0.6, 0.5, 0.4]).unwrap();
        assert_eq!(
            recs.iter().map(|r| r.solvable()).collect::<Vec<_>>(),
            vec![true, false, true]
        );
        assert!(recs[1].ratio.is_none());
    }
}
