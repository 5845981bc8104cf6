//! Probability that a single new mutant expands: fixation in a Moran
//! population, or survival of a binary branching process.

use crate::error::{domain, Result};

/// Below this distance from 1 the relative fitness is treated as neutral.
pub const NEUTRAL_BAND: f64 = 1e-9;

/// Iteration cap for [`extinction_fixed_point`]; only the critical case
/// `p = 1/2` (sublinear convergence) can reach it.
pub const MAX_FIXED_POINT_ITERATIONS: u64 = 10_000_000;

/// Moran model parameters: mutant relative fitness `r` and organ size `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoranParams {
    r: f64,
    n: u64,
}

impl MoranParams {
    pub fn new(r: f64, n: u64) -> Result<Self> {
        if !r.is_finite() || r <= 0.0 {
            return domain(format!("relative fitness r must be positive and finite, got {r}"));
        }
        if n < 1 {
            return domain("organ cell count n must be at least 1");
        }
        Ok(Self { r, n })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn n(&self) -> u64 {
        self.n
    }
}

/// Binary branching: each cell divides with probability `p`, dies otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchingParams {
    p: f64,
}

impl BranchingParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return domain(format!("division probability p must lie in [0, 1], got {p}"));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// Fixation probability (1 − 1/r) / (1 − 1/rⁿ) of a single mutant.
///
/// Written as `expm1(−ln r) / expm1(−n ln r)`, which keeps full precision
/// near r = 1 and saturates cleanly when rⁿ leaves the double range.
pub fn moran_fixation(params: &MoranParams) -> f64 {
    let MoranParams { r, n } = *params;
    if n == 1 {
        return 1.0;
    }
    if (r - 1.0).abs() < NEUTRAL_BAND {
        return 1.0 / n as f64;
    }
    let log_r = (r - 1.0).ln_1p();
    let sigma = (-log_r).exp_m1() / (-(n as f64) * log_r).exp_m1();
    sigma.clamp(0.0, 1.0)
}

/// Survival probability 2 − 1/p for p > 1/2, and 0 otherwise.
pub fn branching_survival(params: &BranchingParams) -> f64 {
    let p = params.p;
    if p > 0.5 {
        (2.0 - 1.0 / p).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Smallest root in [0, 1] of x = (1 − p) + p x², by fixed-point iteration
/// from x = 0.
///
/// The iterates increase monotonically to the root. Iteration stops once the
/// a-posteriori error bound `ρ/(1−ρ)·|Δx|` falls below `tol`, where ρ is the
/// observed contraction ratio of successive steps, or after
/// [`MAX_FIXED_POINT_ITERATIONS`] steps.
pub fn extinction_fixed_point(params: &BranchingParams, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    let p = params.p;
    let step = |x: f64| (1.0 - p) + p * x * x;
    let mut x = 0.0;
    let mut prev_delta = f64::NAN;
    for _ in 0..MAX_FIXED_POINT_ITERATIONS {
        let next = step(x);
        let delta = (next - x).abs();
        x = next;
        if delta == 0.0 {
            break;
        }
        let ratio = delta / prev_delta;
        if ratio.is_finite() && ratio < 1.0 && delta * ratio / (1.0 - ratio) < tol {
            break;
        }
        prev_delta = delta;
    }
    Ok(x.min(1.0))
}
