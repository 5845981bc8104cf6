//! Monte Carlo cohort simulation of the full mutation → expansion pipeline
//! and comparison of the empirical incidence with the analytic curve.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::incidence::{check_grid, incidence_exact, IncidenceCurve, Provenance};
use crate::process::{first_success_time, mark_events, sample_nhpp, EventTrajectory};
use crate::rate::{RateModel, SuccessModel};
use crate::stream::RandomStream;

/// Environment variable capping simulation threads.
pub const THREADS_ENV: &str = "ONCOPOISSON_THREADS";

/// Ages with fewer expected successes than this are reported but not gated.
pub const MIN_GATED_COUNT: f64 = 10.0;

/// Lane of the per-individual stream used for success marks.
const MARK_LANE: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CohortConfig {
    pub cohort_size: u64,
    pub horizon: f64,
    pub rate: RateModel,
    pub success: SuccessModel,
    pub master_seed: u64,
    pub age_grid: Vec<f64>,
}

impl CohortConfig {
    /// Config with the default output grid: integer ages 0..=⌊horizon⌋.
    pub fn new(
        cohort_size: u64,
        horizon: f64,
        rate: RateModel,
        success: SuccessModel,
        master_seed: u64,
    ) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return domain(format!("horizon must be positive and finite, got {horizon}"));
        }
        let age_grid = (0..=horizon.floor() as u64).map(|a| a as f64).collect();
        let config = Self {
            cohort_size,
            horizon,
            rate,
            success,
            master_seed,
            age_grid,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_age_grid(mut self, age_grid: Vec<f64>) -> Result<Self> {
        self.age_grid = age_grid;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cohort_size < 1 {
            return domain("cohort size must be at least 1");
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return domain(format!("horizon must be positive and finite, got {}", self.horizon));
        }
        if self.age_grid.is_empty() {
            return domain("age grid must not be empty");
        }
        check_grid(&self.age_grid)?;
        if self.age_grid.last().is_some_and(|&a| a > self.horizon) {
            return domain("age grid must lie within [0, horizon]");
        }
        Ok(())
    }

    /// Stream used to sample individual `index`'s mutation times.
    pub fn stream(&self, index: u64) -> RandomStream {
        RandomStream::new(self.master_seed, index)
    }
}

/// Simulates one cohort member: sampled on stream `(master_seed, index)`,
/// marked on that stream's second lane.
pub fn simulate_individual(config: &CohortConfig, index: u64) -> Result<EventTrajectory> {
    let stream = config.stream(index);
    let traj = sample_nhpp(&config.rate, config.horizon, stream)?;
    mark_events(traj, &config.success, stream.lane(MARK_LANE))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortResult {
    pub config: CohortConfig,
    pub empirical_curve: IncidenceCurve,
    pub std_errors: Vec<f64>,
    pub total_mutations: u64,
    pub total_successes: u64,
}

impl CohortResult {
    pub fn analytic_curve(&self) -> Result<IncidenceCurve> {
        incidence_exact(&self.config.rate, &self.config.success, &self.config.age_grid)
    }

    /// `(age, incidence)` at ages with at least [`MIN_GATED_COUNT`] cases,
    /// the same reliability rule used to gate validation.
    pub fn reliable_points(&self) -> Vec<(f64, f64)> {
        let n = self.config.cohort_size as f64;
        self.empirical_curve
            .points()
            .filter(|&(_, v)| v * n >= MIN_GATED_COUNT)
            .collect()
    }
}

struct Individual {
    first_success: Option<f64>,
    mutations: u64,
    successes: u64,
}

fn summarize(config: &CohortConfig, index: u64) -> Result<Individual> {
    let traj = simulate_individual(config, index).map_err(|e| Error::Individual {
        index,
        source: Box::new(e),
    })?;
    Ok(Individual {
        first_success: first_success_time(&traj)?,
        mutations: traj.len() as u64,
        successes: traj.success_count()? as u64,
    })
}

/// Thread cap from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs the cohort with the thread cap from the environment.
pub fn simulate_cohort(config: &CohortConfig) -> Result<CohortResult> {
    simulate_cohort_with_threads(config, threads_from_env())
}

/// Runs the cohort on at most `threads` workers (`None`: rayon default).
///
/// Each individual depends only on `(master_seed, index)`, and results are
/// reduced in index order, so the output does not depend on `threads`.
pub fn simulate_cohort_with_threads(config: &CohortConfig, threads: Option<usize>) -> Result<CohortResult> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Domain(format!("cannot start simulation threads: {e}")))?;
    let individuals: Vec<Individual> = pool.install(|| {
        (0..config.cohort_size)
            .into_par_iter()
            .map(|i| summarize(config, i))
            .collect::<Result<_>>()
    })?;

    let grid = &config.age_grid;
    // onset[j]: individuals whose first success falls in (grid[j-1], grid[j]]
    let mut onset = vec![0u64; grid.len()];
    let (mut total_mutations, mut total_successes) = (0u64, 0u64);
    for ind in &individuals {
        total_mutations += ind.mutations;
        total_successes += ind.successes;
        if let Some(t) = ind.first_success {
            let j = grid.partition_point(|&a| a < t);
            if j < grid.len() {
                onset[j] += 1;
            }
        }
    }
    let n = config.cohort_size as f64;
    let mut cumulative = 0u64;
    let values: Vec<f64> = onset
        .iter()
        .map(|&k| {
            cumulative += k;
            cumulative as f64 / n
        })
        .collect();
    let std_errors = values.iter().map(|&p| (p * (1.0 - p) / n).sqrt()).collect();
    Ok(CohortResult {
        config: config.clone(),
        empirical_curve: IncidenceCurve::new(grid.clone(), values, Provenance::Empirical)?,
        std_errors,
        total_mutations,
        total_successes,
    })
}

/// Per-age comparison of an empirical curve with the analytic one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub max_abs_z: f64,
    pub n_ages_gated: usize,
    pub pass: bool,
    pub tolerance_sigmas: f64,
    pub ages: Vec<f64>,
    pub z_scores: Vec<f64>,
    pub gated: Vec<bool>,
}

/// z-scores use the binomial standard error under the analytic curve,
/// √(I(1−I)/n). An age is gated when the empirical count Î·n is at least
/// [`MIN_GATED_COUNT`]; the report passes iff every gated |z| is within
/// `tolerance_sigmas`.
pub fn validate_curves(
    empirical: &IncidenceCurve,
    analytic: &IncidenceCurve,
    cohort_size: u64,
    tolerance_sigmas: f64,
) -> Result<ValidationReport> {
    if empirical.ages() != analytic.ages() {
        return domain("empirical and analytic curves are on different age grids");
    }
    if cohort_size == 0 {
        return domain("cohort size must be positive");
    }
    if !(tolerance_sigmas > 0.0) {
        return domain(format!("tolerance must be positive, got {tolerance_sigmas}"));
    }
    let n = cohort_size as f64;
    let mut z_scores = Vec::with_capacity(empirical.len());
    let mut gated = Vec::with_capacity(empirical.len());
    for (&observed, &expected) in empirical.values().iter().zip(analytic.values()) {
        let se = (expected * (1.0 - expected) / n).sqrt();
        let diff = observed - expected;
        let z = if diff == 0.0 {
            0.0
        } else if se == 0.0 {
            f64::INFINITY.copysign(diff)
        } else {
            diff / se
        };
        z_scores.push(z);
        gated.push(observed * n >= MIN_GATED_COUNT);
    }
    let max_abs_z = z_scores
        .iter()
        .zip(&gated)
        .filter(|(_, &g)| g)
        .map(|(z, _)| z.abs())
        .fold(0.0, f64::max);
    let n_ages_gated = gated.iter().filter(|&&g| g).count();
    Ok(ValidationReport {
        max_abs_z,
        n_ages_gated,
        pass: max_abs_z <= tolerance_sigmas,
        tolerance_sigmas,
        ages: empirical.ages().to_vec(),
        z_scores,
        gated,
    })
}

pub fn validate_against_analytic(result: &CohortResult, tolerance_sigmas: f64) -> Result<ValidationReport> {
    validate_curves(
        &result.empirical_curve,
        &result.analytic_curve()?,
        result.config.cohort_size,
        tolerance_sigmas,
    )
}
