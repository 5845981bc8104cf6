//! Mutation-rate functions μ(t), success probabilities σ, and their
//! cumulative integrals m(t) = ∫₀ᵗ μ and M(t) = σ·m(t).
//!
//! Ages are in years throughout.

use std::fmt;

use crate::error::{domain, Result};
use crate::expansion::{branching_survival, moran_fixation, BranchingParams, MoranParams};
use crate::quadrature;

/// Absolute tolerance for quadrature of tabulated rates.
pub const QUAD_ABS_TOL: f64 = 1e-10;
/// Relative tolerance for quadrature of tabulated rates.
pub const QUAD_REL_TOL: f64 = 1e-8;

fn check_age(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return domain(format!("age must be nonnegative, got {t}"));
    }
    Ok(())
}

fn check_rate(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return domain(format!("{name} must be finite and nonnegative, got {v}"));
    }
    Ok(())
}

/// μ(t) = μ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantRate {
    mu: f64,
}

impl ConstantRate {
    pub fn new(mu: f64) -> Result<Self> {
        check_rate("mu", mu)?;
        Ok(Self { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// μ(t) = μ₀ t^(γ−1), so m(t) = μ₀ t^γ / γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawRate {
    mu0: f64,
    gamma: f64,
}

impl PowerLawRate {
    pub fn new(mu0: f64, gamma: f64) -> Result<Self> {
        check_rate("mu0", mu0)?;
        if !gamma.is_finite() || gamma <= 0.0 {
            return domain(format!("gamma must be positive, got {gamma}"));
        }
        Ok(Self { mu0, gamma })
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Solves m(t) = `mean` for t.
    pub fn inverse_cumulative(&self, mean: f64) -> f64 {
        (self.gamma * mean / self.mu0).powf(1.0 / self.gamma)
    }
}

/// Step function: `rates[0]` on `[0, breakpoints[0])`, `rates[i]` on
/// `[breakpoints[i-1], breakpoints[i])`, and the last rate from the final
/// breakpoint onward.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstantRate {
    breakpoints: Vec<f64>,
    rates: Vec<f64>,
    // m at each breakpoint
    cumulative: Vec<f64>,
}

impl PiecewiseConstantRate {
    pub fn new(breakpoints: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if rates.len() != breakpoints.len() + 1 {
            return domain(format!(
                "piecewise-constant rate needs one more rate than breakpoints ({} breakpoints, {} rates)",
                breakpoints.len(),
                rates.len()
            ));
        }
        for &r in &rates {
            check_rate("rate", r)?;
        }
        let mut prev = 0.0;
        for &b in &breakpoints {
            if !b.is_finite() || b <= prev {
                return domain("breakpoints must be positive, finite and strictly increasing");
            }
            prev = b;
        }
        let mut cumulative = Vec::with_capacity(breakpoints.len());
        let mut acc = 0.0;
        let mut start = 0.0;
        for (b, r) in breakpoints.iter().zip(&rates) {
            acc += r * (b - start);
            cumulative.push(acc);
            start = *b;
        }
        Ok(Self {
            breakpoints,
            rates,
            cumulative,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    fn piece(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= t)
    }

    fn start_of(&self, piece: usize) -> f64 {
        if piece == 0 {
            0.0
        } else {
            self.breakpoints[piece - 1]
        }
    }

    fn cumulative_at_start(&self, piece: usize) -> f64 {
        if piece == 0 {
            0.0
        } else {
            self.cumulative[piece - 1]
        }
    }

    pub fn rate(&self, t: f64) -> f64 {
        self.rates[self.piece(t)]
    }

    pub fn cumulative(&self, t: f64) -> f64 {
        let i = self.piece(t);
        self.cumulative_at_start(i) + self.rates[i] * (t - self.start_of(i))
    }

    /// Smallest t with m(t) = `mean`, or `None` if m never reaches it.
    pub fn inverse_cumulative(&self, mean: f64) -> Option<f64> {
        // first piece whose end value is >= mean
        let i = self.cumulative.partition_point(|&c| c < mean);
        let base = self.cumulative_at_start(i);
        let rate = self.rates[i];
        if rate == 0.0 {
            // only reachable for the open-ended final piece
            return (mean <= base).then(|| self.start_of(i));
        }
        Some(self.start_of(i) + (mean - base) / rate)
    }
}

/// Linear interpolation between `(ages[i], rates[i])`, clamped to the first
/// value before the grid and to the last value beyond it.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedRate {
    ages: Vec<f64>,
    rates: Vec<f64>,
}

impl TabulatedRate {
    pub fn new(ages: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if ages.is_empty() || ages.len() != rates.len() {
            return domain(format!(
                "tabulated rate needs matching, nonempty age and rate columns ({} ages, {} rates)",
                ages.len(),
                rates.len()
            ));
        }
        for &r in &rates {
            check_rate("rate", r)?;
        }
        check_age(ages[0])?;
        if !ages.iter().all(|a| a.is_finite()) || ages.windows(2).any(|w| w[1] <= w[0]) {
            return domain("tabulated age grid must be finite and strictly increasing");
        }
        Ok(Self { ages, rates })
    }

    pub fn ages(&self) -> &[f64] {
        &self.ages
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn rate(&self, t: f64) -> f64 {
        let n = self.ages.len();
        if t <= self.ages[0] {
            return self.rates[0];
        }
        if t >= self.ages[n - 1] {
            return self.rates[n - 1];
        }
        let j = self.ages.partition_point(|&a| a <= t);
        let (a0, a1) = (self.ages[j - 1], self.ages[j]);
        let (r0, r1) = (self.rates[j - 1], self.rates[j]);
        let w = (t - a0) / (a1 - a0);
        r0 + w * (r1 - r0)
    }

    /// Segment boundaries of the interpolant inside `(0, t)`.
    pub(crate) fn knots_below(&self, t: f64) -> impl Iterator<Item = f64> + '_ {
        self.ages.iter().copied().filter(move |&a| a > 0.0 && a < t)
    }

    pub fn cumulative(&self, t: f64) -> f64 {
        let mut total = 0.0;
        let mut start = 0.0;
        let knots: Vec<f64> = self.knots_below(t).chain(std::iter::once(t)).collect();
        let n = knots.len() as f64;
        for end in knots {
            // each segment is smooth, so quadrature never straddles a kink
            total += quadrature::integrate(|s| self.rate(s), start, end, QUAD_ABS_TOL / n, QUAD_REL_TOL).value;
            start = end;
        }
        total
    }
}

/// A mutation-rate function μ(t) ≥ 0.
#[derive(Debug, Clone, PartialEq)]
pub enum RateModel {
    Constant(ConstantRate),
    PowerLaw(PowerLawRate),
    PiecewiseConstant(PiecewiseConstantRate),
    Tabulated(TabulatedRate),
}

impl RateModel {
    pub fn constant(mu: f64) -> Result<Self> {
        ConstantRate::new(mu).map(Self::Constant)
    }

    pub fn power_law(mu0: f64, gamma: f64) -> Result<Self> {
        PowerLawRate::new(mu0, gamma).map(Self::PowerLaw)
    }

    pub fn piecewise_constant(breakpoints: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        PiecewiseConstantRate::new(breakpoints, rates).map(Self::PiecewiseConstant)
    }

    pub fn tabulated(ages: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        TabulatedRate::new(ages, rates).map(Self::Tabulated)
    }

    /// μ(t).
    pub fn eval_rate(&self, t: f64) -> Result<f64> {
        check_age(t)?;
        Ok(match self {
            Self::Constant(c) => c.mu,
            Self::PowerLaw(p) => {
                if t == 0.0 {
                    if p.gamma < 1.0 {
                        return domain(format!(
                            "power-law rate with gamma = {} is unbounded at t = 0",
                            p.gamma
                        ));
                    }
                    if p.gamma == 1.0 {
                        return Ok(p.mu0);
                    }
                    return Ok(0.0);
                }
                p.mu0 * t.powf(p.gamma - 1.0)
            }
            Self::PiecewiseConstant(pc) => pc.rate(t),
            Self::Tabulated(tab) => tab.rate(t),
        })
    }

    /// m(t) = ∫₀ᵗ μ(s) ds.
    pub fn cumulative_rate(&self, t: f64) -> Result<f64> {
        check_age(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(match self {
            Self::Constant(c) => c.mu * t,
            Self::PowerLaw(p) => p.mu0 * t.powf(p.gamma) / p.gamma,
            Self::PiecewiseConstant(pc) => pc.cumulative(t),
            Self::Tabulated(tab) => tab.cumulative(t),
        })
    }

    /// M(t) = ∫₀ᵗ σ μ(s) ds. Every supported success model is constant in
    /// time, so this is σ·m(t).
    pub fn effective_cumulative_rate(&self, success: &SuccessModel, t: f64) -> Result<f64> {
        Ok(success.eval_success() * self.cumulative_rate(t)?)
    }
}

impl fmt::Display for RateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "constant:mu={}", c.mu),
            Self::PowerLaw(p) => write!(f, "powerlaw:mu0={},gamma={}", p.mu0, p.gamma),
            Self::PiecewiseConstant(pc) => {
                let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
                write!(
                    f,
                    "piecewise:breaks={},rates={}",
                    join(&pc.breakpoints),
                    join(&pc.rates)
                )
            }
            Self::Tabulated(t) => write!(f, "tabulated:points={}", t.ages.len()),
        }
    }
}

/// Constant success probability σ ∈ [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantSuccess {
    sigma: f64,
}

impl ConstantSuccess {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&sigma) {
            return domain(format!("sigma must lie in [0, 1], got {sigma}"));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Probability σ that a newly arisen mutation expands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SuccessModel {
    Constant(ConstantSuccess),
    Moran(MoranParams),
    Branching(BranchingParams),
}

impl SuccessModel {
    pub fn constant(sigma: f64) -> Result<Self> {
        ConstantSuccess::new(sigma).map(Self::Constant)
    }

    pub fn moran(r: f64, n: u64) -> Result<Self> {
        MoranParams::new(r, n).map(Self::Moran)
    }

    pub fn branching(p: f64) -> Result<Self> {
        BranchingParams::new(p).map(Self::Branching)
    }

    pub fn eval_success(&self) -> f64 {
        match self {
            Self::Constant(c) => c.sigma,
            Self::Moran(m) => moran_fixation(m),
            Self::Branching(b) => branching_survival(b),
        }
    }
}

impl fmt::Display for SuccessModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "constant:sigma={}", c.sigma),
            Self::Moran(m) => write!(f, "moran:r={},n={}", m.r(), m.n()),
            Self::Branching(b) => write!(f, "branching:p={}", b.p()),
        }
    }
}
