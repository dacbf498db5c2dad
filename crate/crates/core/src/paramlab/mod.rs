//! Problems depending on a parameter `ε ∈ [0, ε₀)`: limit conditions,
//! assumption checks for multipoint operators, convergence sweeps, and
//! error/discrepancy ratio bands.

mod checks;
pub mod families;
mod probes;
mod sweep;

pub use checks::{check_condition_0, check_condition_i, check_condition_ii, check_multipoint_assumptions};
pub use probes::{default_probes, probe_seed, DEFAULT_SEED, SEED_ENV};
pub use sweep::{discrepancy, estimate_gamma_bounds, log_log_slope, sweep, ConvergenceRecord, RatioEstimate};

use std::fmt;

use crate::error::{contract, Result};
use crate::fredholm::ProblemSpec;
use crate::scalar::Real;

/// A family of problems indexed by `ε ∈ [0, ε₀)`; `generate(0)` is the limit
/// problem. All members must share `a, b, m, n, p`.
pub trait Family<R: Real>: Send + Sync {
    fn eps0(&self) -> R;
    fn generate(&self, eps: R) -> Result<ProblemSpec<R>>;
    fn name(&self) -> &str {
        "family"
    }

    fn limit(&self) -> Result<ProblemSpec<R>> {
        self.generate(R::zero())
    }
}

/// A [`Family`] backed by a closure.
pub struct FnFamily<R, F> {
    name: String,
    eps0: R,
    generator: F,
}

impl<R: Real, F> FnFamily<R, F>
where
    F: Fn(R) -> Result<ProblemSpec<R>> + Send + Sync,
{
    pub fn new(name: impl Into<String>, eps0: R, generator: F) -> Self {
        Self {
            name: name.into(),
            eps0,
            generator,
        }
    }
}

impl<R: Real, F> Family<R> for FnFamily<R, F>
where
    F: Fn(R) -> Result<ProblemSpec<R>> + Send + Sync,
{
    fn eps0(&self) -> R {
        self.eps0
    }

    fn generate(&self, eps: R) -> Result<ProblemSpec<R>> {
        (self.generator)(eps)
    }

    fn name(&self) -> &str {
        &self.name
    }
}

impl<R: Real> Family<R> for Box<dyn Family<R>> {
    fn eps0(&self) -> R {
        (**self).eps0()
    }

    fn generate(&self, eps: R) -> Result<ProblemSpec<R>> {
        (**self).generate(eps)
    }

    fn name(&self) -> &str {
        (**self).name()
    }
}

/// Conditions on the family as a whole and assumptions on multipoint data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConditionId {
    /// The limit homogeneous problem has only the trivial solution.
    Zero,
    /// `A(ε) → A(0)` in `W_p^{n−1}`.
    I,
    /// `B(ε) y → B(0) y` for every `y`.
    II,
    /// Points of group `j` tend to `t_j`.
    Alpha,
    /// Group sums of coefficients converge.
    Beta,
    /// `Σ ∥β^(l)∥ |t − t_j| → 0` for `l ≤ n`.
    Gamma,
    /// Zero-group coefficient sums vanish.
    Delta,
    /// `Σ ∥β^(n)∥ |t − t_j|^{1/p'}` stays bounded.
    GammaP,
    /// `Σ ∥β^(l)∥ |t − t_j| → 0` for `l < n`.
    GammaPrime,
}

impl ConditionId {
    pub fn label(self) -> &'static str {
        match self {
            ConditionId::Zero => "(0)",
            ConditionId::I => "(I)",
            ConditionId::II => "(II)",
            ConditionId::Alpha => "(alpha)",
            ConditionId::Beta => "(beta)",
            ConditionId::Gamma => "(gamma)",
            ConditionId::Delta => "(delta)",
            ConditionId::GammaP => "(gamma_p)",
            ConditionId::GammaPrime => "(gamma')",
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// One sampled quantity at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evidence<R> {
    pub eps: R,
    pub value: R,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport<R> {
    pub condition: ConditionId,
    pub verdict: Verdict,
    /// What was measured, e.g. "max probe distance".
    pub quantity: String,
    pub evidence: Vec<Evidence<R>>,
    /// Least-squares slope of `log value` against `log ε`, when defined.
    pub slope: Option<f64>,
    pub note: String,
}

impl<R: Real> ConditionReport<R> {
    fn from_evidence(
        condition: ConditionId,
        verdict: Verdict,
        quantity: &str,
        evidence: Vec<Evidence<R>>,
        note: impl Into<String>,
    ) -> Self {
        let (eps, values): (Vec<f64>, Vec<f64>) = evidence.iter().map(|e| (e.eps.as_f64(), e.value.as_f64())).unzip();
        Self {
            condition,
            verdict,
            quantity: quantity.to_owned(),
            slope: log_log_slope(&eps, &values),
            evidence,
            note: note.into(),
        }
    }
}

/// Values at or below this are treated as zero by the trend rule.
pub const TREND_TOLERANCE: f64 = 1e-8;

/// Decay verdict for values ordered by decreasing `ε`.
///
/// Pass when every value is at most `tol`, or when the last three values
/// strictly decrease and the final value is at most `max(tol, 1e−2 · peak)`.
/// Inconclusive when the final value is that small without the decrease;
/// fail otherwise.
pub fn decay_verdict(values: &[f64], tol: f64) -> Verdict {
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Verdict::Fail;
    }
    if values.iter().all(|v| *v <= tol) {
        return Verdict::Pass;
    }
    let peak = values.iter().copied().fold(0.0, f64::max);
    let last = *values.last().expect("nonempty");
    let tail = &values[values.len().saturating_sub(3)..];
    let decreasing = tail.len() >= 2 && tail.windows(2).all(|w| w[1] < w[0]);
    let small = last <= tol.max(1e-2 * peak);
    match (decreasing, small) {
        (true, true) => Verdict::Pass,
        (false, true) => Verdict::Inconclusive,
        _ => Verdict::Fail,
    }
}

/// Geometric grid of `count` points from `hi` down to `lo`.
pub fn geometric_grid(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    let ratio = (lo / hi).ln() / (count - 1) as f64;
    (0..count)
        .map(|i| match i {
            0 => hi,
            _ if i == count - 1 => lo,
            _ => hi * (ratio * i as f64).exp(),
        })
        .collect()
}

/// Twelve points from `1e−1` down to `1e−6`.
pub fn default_eps_grid<R: Real>() -> Vec<R> {
    geometric_grid(1e-1, 1e-6, 12).into_iter().map(R::lit).collect()
}

pub(crate) fn validate_eps_grid<R: Real>(fam: &dyn Family<R>, grid: &[R]) -> Result<()> {
    if grid.is_empty() {
        return contract("the ε grid is empty");
    }
    if grid.iter().any(|e| !(*e > R::zero() && *e < fam.eps0())) {
        return contract(format!("ε values must lie in (0, {})", fam.eps0()));
    }
    if grid.windows(2).any(|w| !(w[1] < w[0])) {
        return contract("the ε grid must be strictly decreasing");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_rule() {
        assert_eq!(decay_verdict(&[0.0, 0.0, 0.0], 1e-8), Verdict::Pass);
        assert_eq!(decay_verdict(&[1e-1, 1e-2, 1e-3, 1e-4], 1e-8), Verdict::Pass);
        assert_eq!(decay_verdict(&[1.0, 1.0, 1.0], 1e-8), Verdict::Fail);
        assert_eq!(decay_verdict(&[1.0, 0.5, 0.9], 1e-8), Verdict::Fail);
        assert_eq!(decay_verdict(&[1.0, 1e-4, 2e-4, 1e-4], 1e-8), Verdict::Inconclusive);
        assert_eq!(decay_verdict(&[1.0, f64::NAN], 1e-8), Verdict::Fail);
    }

    #[test]
    fn default_grid_shape() {
        let g: Vec<f64> = default_eps_grid();
        assert_eq!(g.len(), 12);
        assert_eq!((g[0], g[11]), (1e-1, 1e-6));
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        let r = g[1] / g[0];
        assert!(g.windows(2).all(|w| (w[1] / w[0] - r).abs() < 1e-12));
    }
}
