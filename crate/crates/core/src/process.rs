//! Sampling of mutation times from the non-homogeneous Poisson process with
//! intensity μ(t), independent success marking, and the Poisson counting law.

use rand::distr::Open01;
use rand::Rng;
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};
use crate::rate::{RateModel, SuccessModel};
use crate::stream::RandomStream;

/// Mutation times of one individual on `(0, horizon]`, optionally marked.
#[derive(Debug, Clone, PartialEq)]
pub struct EventTrajectory {
    horizon: f64,
    mutation_times: Vec<f64>,
    success_flags: Option<Vec<bool>>,
    seed_record: RandomStream,
}

impl EventTrajectory {
    /// Builds a trajectory from explicit event times. Times must be strictly
    /// increasing inside `(0, horizon]`; flags, if given, must match in length.
    pub fn new(
        horizon: f64,
        mutation_times: Vec<f64>,
        success_flags: Option<Vec<bool>>,
        seed_record: RandomStream,
    ) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return domain(format!("horizon must be positive and finite, got {horizon}"));
        }
        let mut prev = 0.0;
        for &t in &mutation_times {
            if !(t > prev) || t > horizon {
                return domain("event times must be strictly increasing within (0, horizon]");
            }
            prev = t;
        }
        if let Some(flags) = &success_flags {
            if flags.len() != mutation_times.len() {
                return domain("success flags must match event times in length");
            }
        }
        Ok(Self {
            horizon,
            mutation_times,
            success_flags,
            seed_record,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn mutation_times(&self) -> &[f64] {
        &self.mutation_times
    }

    pub fn success_flags(&self) -> Option<&[bool]> {
        self.success_flags.as_deref()
    }

    pub fn seed_record(&self) -> RandomStream {
        self.seed_record
    }

    pub fn len(&self) -> usize {
        self.mutation_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mutation_times.is_empty()
    }

    /// Number of events in `(a, b]`.
    pub fn count_in(&self, a: f64, b: f64) -> usize {
        let lo = self.mutation_times.partition_point(|&t| t <= a);
        let hi = self.mutation_times.partition_point(|&t| t <= b);
        hi.saturating_sub(lo)
    }

    /// Number of successful events; errors when unmarked.
    pub fn success_count(&self) -> Result<usize> {
        Ok(self.flags()?.iter().filter(|&&f| f).count())
    }

    fn flags(&self) -> Result<&[bool]> {
        self.success_flags
            .as_deref()
            .ok_or_else(|| Error::State("trajectory has not been marked".into()))
    }
}

/// Sampling algorithm for [`sample_nhpp_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    /// Unit-rate arrivals mapped through m⁻¹. Needs a closed-form inverse.
    Inversion,
    /// Lewis–Shedler thinning against a piecewise-constant envelope.
    Thinning,
    /// Thinning against a single constant bound over the whole horizon.
    ThinningGlobalBound,
}

/// Samples an NHPP trajectory (flags unset), choosing inversion when m(t)
/// has a closed-form inverse and thinning otherwise.
pub fn sample_nhpp(rate: &RateModel, horizon: f64, stream: RandomStream) -> Result<EventTrajectory> {
    let sampler = match rate {
        RateModel::Constant(_) | RateModel::PowerLaw(_) => Sampler::Inversion,
        RateModel::PiecewiseConstant(_) | RateModel::Tabulated(_) => Sampler::Thinning,
    };
    sample_nhpp_with(rate, horizon, stream, sampler)
}

pub fn sample_nhpp_with(
    rate: &RateModel,
    horizon: f64,
    stream: RandomStream,
    sampler: Sampler,
) -> Result<EventTrajectory> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return domain(format!("horizon must be positive and finite, got {horizon}"));
    }
    let total = rate.cumulative_rate(horizon)?;
    if !total.is_finite() {
        return domain(format!("cumulative rate at horizon {horizon} is not finite"));
    }
    let mut rng = stream.rng();
    let times = if total == 0.0 {
        Vec::new()
    } else {
        match sampler {
            Sampler::Inversion => by_inversion(rate, horizon, total, &mut rng)?,
            Sampler::Thinning => by_thinning(rate, &envelope(rate, horizon)?, &mut rng)?,
            Sampler::ThinningGlobalBound => {
                let bound = envelope(rate, horizon)?
                    .iter()
                    .map(|p| p.bound)
                    .fold(0.0, f64::max);
                let whole = [EnvelopePiece {
                    start: 0.0,
                    end: horizon,
                    bound,
                }];
                by_thinning(rate, &whole, &mut rng)?
            }
        }
    };
    Ok(EventTrajectory {
        horizon,
        mutation_times: times,
        success_flags: None,
        seed_record: stream,
    })
}

fn exp_gap<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    -u.ln()
}

fn by_inversion<R: Rng>(rate: &RateModel, horizon: f64, total: f64, rng: &mut R) -> Result<Vec<f64>> {
    let invert: Box<dyn Fn(f64) -> f64 + '_> = match rate {
        RateModel::Constant(c) => Box::new(move |m| m / c.mu()),
        RateModel::PowerLaw(p) => Box::new(move |m| p.inverse_cumulative(m)),
        RateModel::PiecewiseConstant(pc) => {
            Box::new(move |m| pc.inverse_cumulative(m).unwrap_or(f64::INFINITY))
        }
        RateModel::Tabulated(_) => {
            return domain("inversion sampling needs a closed-form cumulative inverse");
        }
    };
    let mut times = Vec::new();
    let mut arrival = exp_gap(rng);
    while arrival <= total {
        let t = invert(arrival).min(horizon);
        if t > 0.0 && times.last().is_none_or(|&last| t > last) {
            times.push(t);
        }
        arrival += exp_gap(rng);
    }
    Ok(times)
}

/// One piece of a dominating intensity: μ(t) ≤ `bound` on `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopePiece {
    pub start: f64,
    pub end: f64,
    pub bound: f64,
}

/// Piecewise-constant upper bound of μ on `(0, horizon]`.
pub fn envelope(rate: &RateModel, horizon: f64) -> Result<Vec<EnvelopePiece>> {
    let mut cuts = vec![0.0];
    match rate {
        RateModel::Constant(_) => {}
        RateModel::PowerLaw(p) => {
            if p.gamma() < 1.0 {
                return domain("power-law rate with gamma < 1 has no finite envelope near t = 0");
            }
        }
        RateModel::PiecewiseConstant(pc) => {
            cuts.extend(pc.breakpoints().iter().copied().filter(|&b| b < horizon))
        }
        RateModel::Tabulated(tab) => {
            cuts.extend(tab.ages().iter().copied().filter(|&a| a > 0.0 && a < horizon))
        }
    }
    cuts.push(horizon);
    cuts.windows(2)
        .map(|w| {
            let (start, end) = (w[0], w[1]);
            // Every supported μ is monotone on each piece, so its maximum sits
            // at an endpoint. Step functions take their value from the left.
            let bound = match rate {
                RateModel::PiecewiseConstant(_) => rate.eval_rate(start)?,
                _ => rate.eval_rate(start)?.max(rate.eval_rate(end)?),
            };
            Ok(EnvelopePiece { start, end, bound })
        })
        .collect()
}

fn by_thinning<R: Rng>(rate: &RateModel, pieces: &[EnvelopePiece], rng: &mut R) -> Result<Vec<f64>> {
    let mut times = Vec::new();
    for piece in pieces {
        if piece.bound <= 0.0 {
            continue;
        }
        let mut t = piece.start;
        loop {
            t += exp_gap(rng) / piece.bound;
            if t > piece.end {
                break;
            }
            let accept: f64 = rng.random();
            if accept * piece.bound < rate.eval_rate(t)? {
                times.push(t);
            }
        }
    }
    Ok(times)
}

/// Marks each event successful independently with probability σ.
pub fn mark_events(
    traj: EventTrajectory,
    success: &SuccessModel,
    stream: RandomStream,
) -> Result<EventTrajectory> {
    if traj.success_flags.is_some() {
        return Err(Error::State("trajectory is already marked".into()));
    }
    let sigma = success.eval_success();
    let mut rng = stream.rng();
    let flags = traj
        .mutation_times
        .iter()
        .map(|_| rng.random::<f64>() < sigma)
        .collect();
    Ok(EventTrajectory {
        success_flags: Some(flags),
        ..traj
    })
}

/// Earliest successful mutation time, if any.
pub fn first_success_time(traj: &EventTrajectory) -> Result<Option<f64>> {
    let flags = traj.flags()?;
    Ok(traj
        .mutation_times
        .iter()
        .zip(flags)
        .find_map(|(&t, &ok)| ok.then_some(t)))
}

/// P(N = k) for N ~ Poisson(mean).
pub fn poisson_pmf(k: u64, mean: f64) -> Result<f64> {
    if mean.is_nan() || mean < 0.0 {
        return domain(format!("Poisson mean must be nonnegative, got {mean}"));
    }
    if mean == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    if mean.is_infinite() {
        return Ok(0.0);
    }
    let p = if k > 20 || mean > 700.0 {
        let kf = k as f64;
        (-mean + kf * mean.ln() - ln_gamma(kf + 1.0)).exp()
    } else {
        let factorial: f64 = (1..=k).map(|i| i as f64).product();
        (-mean).exp() * mean.powi(k as i32) / factorial
    };
    Ok(p.clamp(0.0, 1.0))
}
