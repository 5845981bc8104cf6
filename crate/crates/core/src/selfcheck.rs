//! Built-in statistical checks of the sampler and the reference cohort
//! scenario, shared by the `validate` subcommand and the test suites.
//!
//! All checks run on fixed seeds so their outcome is reproducible; the
//! significance levels below are the false-alarm rates for a fresh seed.

use serde::Serialize;

use crate::cohort::{simulate_cohort, validate_against_analytic, CohortConfig, CohortResult, ValidationReport};
use crate::error::Result;
use crate::process::{mark_events, sample_nhpp, sample_nhpp_with, Sampler};
use crate::rate::{RateModel, SuccessModel};
use crate::stats::{ks_one_sample, ks_two_sample, total_variation_poisson};
use crate::stream::RandomStream;

/// Seeds for the fixed property checks.
pub const GAP_SEED: u64 = 0x6761_7073;
pub const SAMPLER_SEED: u64 = 0x7468_696e;
pub const COUNT_SEED: u64 = 0x636f_756e;

/// Default seed of the reference cohort scenario.
pub const SCENARIO_SEED: u64 = 20_240_101;
pub const KS_SIGNIFICANCE: f64 = 0.01;
pub const TV_THRESHOLD: f64 = 0.01;

/// Reference scenario: μ(t) = 6e-6 t², σ = 0.01, horizon 80 years.
pub fn scenario_config(cohort_size: u64, seed: u64) -> Result<CohortConfig> {
    CohortConfig::new(
        cohort_size,
        80.0,
        RateModel::power_law(6e-6, 3.0)?,
        SuccessModel::constant(0.01)?,
        seed,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value >= threshold,
        }
    }

    fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value < threshold,
        }
    }
}

/// Inter-event gaps of a rate-μ process, pooled across trajectories until
/// `n` gaps are collected. The gap before the first event starts at 0.
pub fn constant_rate_gaps(mu: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let rate = RateModel::constant(mu)?;
    let mut gaps = Vec::with_capacity(n);
    let mut index = 0;
    // 100 / μ years holds ~100 events per trajectory
    let horizon = 100.0 / mu;
    while gaps.len() < n {
        let traj = sample_nhpp(&rate, horizon, RandomStream::new(seed, index))?;
        let mut prev = 0.0;
        for &t in traj.mutation_times() {
            gaps.push(t - prev);
            prev = t;
        }
        index += 1;
    }
    gaps.truncate(n);
    Ok(gaps)
}

/// KS test of constant-rate gaps against Exponential(μ); p-value as value.
pub fn check_exponential_gaps(n: usize) -> Result<Check> {
    let mu = 1.5;
    let gaps = constant_rate_gaps(mu, n, GAP_SEED)?;
    let ks = ks_one_sample(&gaps, |x| -(-mu * x).exp_m1())?;
    Ok(Check::at_least("exponential_gaps_ks_p", ks.p_value, KS_SIGNIFICANCE))
}

/// Piecewise-constant rate used to cross-check the two samplers.
pub fn piecewise_test_rate() -> Result<RateModel> {
    RateModel::piecewise_constant(vec![1.0, 3.0, 6.0], vec![0.2, 1.0, 0.05, 0.5])
}

/// First-event times from `n` trajectories that have at least one event.
pub fn first_event_times(rate: &RateModel, horizon: f64, sampler: Sampler, n: usize, seed: u64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    let mut index = 0;
    while out.len() < n {
        let traj = sample_nhpp_with(rate, horizon, RandomStream::new(seed, index), sampler)?;
        if let Some(&t) = traj.mutation_times().first() {
            out.push(t);
        }
        index += 1;
    }
    Ok(out)
}

/// Two-sample KS between inversion and thinning first-event times.
pub fn check_sampler_agreement(n: usize) -> Result<Check> {
    let rate = piecewise_test_rate()?;
    let horizon = 30.0;
    let inverted = first_event_times(&rate, horizon, Sampler::Inversion, n, SAMPLER_SEED)?;
    let thinned = first_event_times(&rate, horizon, Sampler::Thinning, n, SAMPLER_SEED + 1)?;
    let ks = ks_two_sample(&inverted, &thinned)?;
    Ok(Check::at_least("inversion_vs_thinning_ks_p", ks.p_value, KS_SIGNIFICANCE))
}

/// Total and successful event counts of `replicates` trajectories.
pub fn event_counts(
    rate: &RateModel,
    horizon: f64,
    success: &SuccessModel,
    replicates: u64,
    seed: u64,
) -> Result<(Vec<u64>, Vec<u64>)> {
    let mut all = Vec::with_capacity(replicates as usize);
    let mut marked = Vec::with_capacity(replicates as usize);
    for i in 0..replicates {
        let stream = RandomStream::new(seed, i);
        let traj = mark_events(sample_nhpp(rate, horizon, stream)?, success, stream.lane(1))?;
        all.push(traj.len() as u64);
        marked.push(traj.success_count()? as u64);
    }
    Ok((all, marked))
}

/// N(2) under μ(t) = 3t² against Poisson(8), and the σ = 0.3 marked
/// counts against Poisson(2.4), both by total variation.
pub fn check_count_distributions(replicates: u64) -> Result<[Check; 2]> {
    let rate = RateModel::power_law(3.0, 3.0)?;
    let sigma = 0.3;
    let mean = rate.cumulative_rate(2.0)?;
    let (all, marked) = event_counts(&rate, 2.0, &SuccessModel::constant(sigma)?, replicates, COUNT_SEED)?;
    Ok([
        Check::below("count_tv_poisson", total_variation_poisson(&all, mean)?, TV_THRESHOLD),
        Check::below(
            "marked_count_tv_poisson",
            total_variation_poisson(&marked, sigma * mean)?,
            TV_THRESHOLD,
        ),
    ])
}

/// Reference cohort run and its comparison with the analytic curve.
pub fn run_scenario(cohort_size: u64, seed: u64) -> Result<(CohortResult, ValidationReport)> {
    let result = simulate_cohort(&scenario_config(cohort_size, seed)?)?;
    let report = validate_against_analytic(&result, 3.0)?;
    Ok((result, report))
}

/// The fixed property checks at their documented sizes.
pub fn property_checks() -> Result<Vec<Check>> {
    let mut checks = vec![check_exponential_gaps(10_000)?, check_sampler_agreement(10_000)?];
    checks.extend(check_count_distributions(100_000)?);
    Ok(checks)
}
