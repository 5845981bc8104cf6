//! Cumulative cancer-incidence curves I(t), the probability of cancer by
//! age t.
//!
//! Note on terminology: epidemiological "incidence" often means a hazard
//! rate. Here it is the cumulative probability 1 − exp(−M(t)).

use log::warn;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::rate::{RateModel, SuccessModel};

/// Above this M(t) the approximation I ≈ M is reported as degraded.
pub const APPROX_WARN_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    AnalyticExact,
    AnalyticApprox,
    Empirical,
}

/// Cumulative probability of cancer on an age grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceCurve {
    ages: Vec<f64>,
    values: Vec<f64>,
    provenance: Provenance,
}

impl IncidenceCurve {
    /// Checks the grid and the probability invariants: values in [0, 1],
    /// nondecreasing, and 0 at age 0.
    pub fn new(ages: Vec<f64>, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        check_grid(&ages)?;
        if values.len() != ages.len() {
            return domain("incidence values must match the age grid in length");
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return domain("incidence values must lie in [0, 1]");
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return domain("incidence values must be nondecreasing");
        }
        if ages.first() == Some(&0.0) && values[0] != 0.0 {
            return domain("incidence at age 0 must be 0");
        }
        Ok(Self {
            ages,
            values,
            provenance,
        })
    }

    /// Builds a curve from observed data without the monotonicity and [0, 1]
    /// checks, for inputs to fitting.
    pub fn observed(ages: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_grid(&ages)?;
        if values.len() != ages.len() || values.iter().any(|v| !v.is_finite()) {
            return domain("observed incidence values must be finite and match the grid");
        }
        Ok(Self {
            ages,
            values,
            provenance: Provenance::Empirical,
        })
    }

    pub fn ages(&self) -> &[f64] {
        &self.ages
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.ages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ages.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ages.iter().copied().zip(self.values.iter().copied())
    }
}

/// Ages must be finite, nonnegative and strictly increasing.
pub fn check_grid(ages: &[f64]) -> Result<()> {
    if ages.iter().any(|a| !a.is_finite() || *a < 0.0) {
        return domain("ages must be finite and nonnegative");
    }
    if ages.windows(2).any(|w| w[1] <= w[0]) {
        return domain("ages must be strictly increasing");
    }
    Ok(())
}

fn effective(rate: &RateModel, success: &SuccessModel, ages: &[f64]) -> Result<Vec<f64>> {
    check_grid(ages)?;
    ages.iter()
        .map(|&t| rate.effective_cumulative_rate(success, t))
        .collect()
}

fn exact_from_effective(m: f64) -> f64 {
    -(-m).exp_m1()
}

/// I(t) = 1 − exp(−M(t)).
pub fn incidence_exact(rate: &RateModel, success: &SuccessModel, ages: &[f64]) -> Result<IncidenceCurve> {
    let values = effective(rate, success, ages)?
        .into_iter()
        .map(exact_from_effective)
        .collect();
    Ok(IncidenceCurve {
        ages: ages.to_vec(),
        values,
        provenance: Provenance::AnalyticExact,
    })
}

/// I(t) ≈ M(t), clamped at 1. Logs a warning when any M exceeds
/// [`APPROX_WARN_THRESHOLD`].
pub fn incidence_approx(rate: &RateModel, success: &SuccessModel, ages: &[f64]) -> Result<IncidenceCurve> {
    let effective = effective(rate, success, ages)?;
    if let Some(&worst) = effective.iter().filter(|&&m| m > APPROX_WARN_THRESHOLD).last() {
        warn!(
            "cumulative effective rate reaches {worst:.4} > {APPROX_WARN_THRESHOLD}; \
             the small-M approximation overstates incidence"
        );
    }
    Ok(IncidenceCurve {
        ages: ages.to_vec(),
        values: effective.into_iter().map(|m| m.min(1.0)).collect(),
        provenance: Provenance::AnalyticApprox,
    })
}

/// Exact curve with M evaluated at `max(t − fixation_delay − detection_delay, 0)`.
pub fn incidence_with_delay(
    rate: &RateModel,
    success: &SuccessModel,
    ages: &[f64],
    fixation_delay: f64,
    detection_delay: f64,
) -> Result<IncidenceCurve> {
    for (name, d) in [("fixation", fixation_delay), ("detection", detection_delay)] {
        if !d.is_finite() || d < 0.0 {
            return domain(format!("{name} delay must be finite and nonnegative, got {d}"));
        }
    }
    check_grid(ages)?;
    let values = ages
        .iter()
        .map(|&t| {
            let shifted = (t - fixation_delay - detection_delay).max(0.0);
            Ok(exact_from_effective(rate.effective_cumulative_rate(success, shifted)?))
        })
        .collect::<Result<_>>()?;
    Ok(IncidenceCurve {
        ages: ages.to_vec(),
        values,
        provenance: Provenance::AnalyticExact,
    })
}
