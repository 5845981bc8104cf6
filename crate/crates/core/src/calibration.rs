//! Calibration of mutation-rate schedules from power-law incidence.
//!
//! With constant σ the incidence is (approximately) σ·m(t), so a curve
//! I(t) = c t^γ is produced by μ(t) = μ₀ t^(γ−1) with μ₀ = cγ/σ, and in
//! general μ(t) = I′(t)/σ.

use log::warn;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::incidence::IncidenceCurve;
use crate::rate::RateModel;

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return domain(format!("sigma must lie in (0, 1], got {sigma}"));
    }
    Ok(())
}

/// μ₀ = cγ/σ.
pub fn power_law_mu0(c: f64, gamma: f64, sigma: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return domain(format!("scale c must be positive, got {c}"));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return domain(format!("exponent gamma must be positive, got {gamma}"));
    }
    check_sigma(sigma)?;
    Ok(c * gamma / sigma)
}

/// Least-squares power-law fit in log-log space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub c: f64,
    pub gamma: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub n_excluded: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu0: Option<f64>,
}

impl PowerLawFit {
    /// Attaches μ₀ = cγ/σ.
    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        self.mu0 = Some(power_law_mu0(self.c, self.gamma, sigma)?);
        Ok(self)
    }

    /// Incidence that does not increase with age cannot come from a
    /// nonnegative mutation rate; such fits are reported but flagged.
    pub fn is_increasing(&self) -> bool {
        self.gamma > 0.0
    }
}

/// Fits I = c t^γ by ordinary least squares on (ln t, ln I). Points with a
/// nonpositive age or incidence are excluded and counted.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, i)| *t > 0.0 && *i > 0.0 && t.is_finite() && i.is_finite())
        .map(|(t, i)| (t.ln(), i.ln()))
        .collect();
    let n_excluded = points.len() - usable.len();
    if usable.len() < 2 {
        return domain(format!(
            "power-law fit needs at least 2 points with positive age and incidence, got {}",
            usable.len()
        ));
    }
    let n = usable.len() as f64;
    let mean_x = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in &usable {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return domain("power-law fit needs at least two distinct ages");
    }
    let gamma = sxy / sxx;
    let intercept = mean_y - gamma * mean_x;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        let ss_res: f64 = usable
            .iter()
            .map(|(x, y)| {
                let e = y - (intercept + gamma * x);
                e * e
            })
            .sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    let fit = PowerLawFit {
        c: intercept.exp(),
        gamma,
        r_squared,
        n_points: usable.len(),
        n_excluded,
        mu0: None,
    };
    if !fit.is_increasing() {
        warn!("fitted exponent {gamma} is not positive");
    }
    Ok(fit)
}

/// Tabulated mutation rate recovered from an incidence curve.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub rate: RateModel,
    /// Grid points whose derivative estimate was negative and clamped to 0.
    pub n_clamped: usize,
}

/// μ(tᵢ) = I′(tᵢ)/σ with second-order finite differences: three-point central
/// differences inside the grid and three-point one-sided differences at the
/// ends. Nonuniform grids are supported.
pub fn rate_from_incidence(curve: &IncidenceCurve, sigma: f64) -> Result<RateEstimate> {
    check_sigma(sigma)?;
    let t = curve.ages();
    let f = curve.values();
    let n = t.len();
    if n < 3 {
        return domain(format!("rate recovery needs at least 3 points, got {n}"));
    }
    if f.windows(2).any(|w| w[1] < w[0]) {
        return domain("incidence curve must be nondecreasing");
    }
    let mut derivative = Vec::with_capacity(n);
    {
        let (h1, h2) = (t[1] - t[0], t[2] - t[1]);
        derivative.push(
            -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1]
                - h1 / (h2 * (h1 + h2)) * f[2],
        );
    }
    for i in 1..n - 1 {
        let (h1, h2) = (t[i] - t[i - 1], t[i + 1] - t[i]);
        derivative.push(
            -h2 / (h1 * (h1 + h2)) * f[i - 1]
                + (h2 - h1) / (h1 * h2) * f[i]
                + h1 / (h2 * (h1 + h2)) * f[i + 1],
        );
    }
    {
        let (h1, h2) = (t[n - 2] - t[n - 3], t[n - 1] - t[n - 2]);
        derivative.push(
            h2 / (h1 * (h1 + h2)) * f[n - 3] - (h1 + h2) / (h1 * h2) * f[n - 2]
                + (2.0 * h2 + h1) / (h2 * (h1 + h2)) * f[n - 1],
        );
    }
    let mut n_clamped = 0;
    let rates = derivative
        .into_iter()
        .map(|d| {
            if d < 0.0 {
                n_clamped += 1;
                0.0
            } else {
                d / sigma
            }
        })
        .collect();
    if n_clamped > 0 {
        warn!("{n_clamped} negative derivative estimates clamped to 0");
    }
    Ok(RateEstimate {
        rate: RateModel::tabulated(t.to_vec(), rates)?,
        n_clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incidence::{incidence_approx, Provenance};
    use crate::rate::SuccessModel;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn mu0_examples() {
        assert_relative_eq!(power_law_mu0(2e-8, 3.0, 0.01).unwrap(), 6e-6, max_relative = 1e-14);
        assert_eq!(power_law_mu0(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(power_law_mu0(0.5, 2.0, 0.5).unwrap(), 2.0);
        assert!(power_law_mu0(1.0, 1.0, 0.0).is_err());
        assert!(power_law_mu0(1.0, 1.0, 1.2).is_err());
        assert!(power_law_mu0(0.0, 1.0, 0.5).is_err());
        assert!(power_law_mu0(1.0, -1.0, 0.5).is_err());
    }

    #[test]
    fn fit_exact_cubic() {
        let fit = fit_power_law(&[(1.0, 2e-8), (2.0, 1.6e-7), (4.0, 1.28e-6)]).unwrap();
        assert_relative_eq!(fit.c, 2e-8, max_relative = 1e-10);
        assert_relative_eq!(fit.gamma, 3.0, max_relative = 1e-10);
        assert_relative_eq!(fit.r_squared, 1.0, max_relative = 1e-12);
        assert_eq!((fit.n_points, fit.n_excluded), (3, 0));
        let with = fit.with_sigma(0.01).unwrap();
        assert_relative_eq!(with.mu0.unwrap(), 6e-6, max_relative = 1e-9);
    }

    #[test]
    fn fit_constant_data() {
        let fit = fit_power_law(&[(1.0, 5.0), (2.0, 5.0), (10.0, 5.0)]).unwrap();
        assert_eq!(fit.gamma, 0.0);
        assert_relative_eq!(fit.c, 5.0, max_relative = 1e-14);
        assert_eq!(fit.r_squared, 1.0);
        assert!(!fit.is_increasing());
    }

    #[test]
    fn fit_exclusions_and_errors() {
        let fit = fit_power_law(&[(0.0, 0.0), (1.0, 2e-8), (2.0, 0.0), (2.0, 1.6e-7), (4.0, 1.28e-6)]).unwrap();
        assert_eq!((fit.n_points, fit.n_excluded), (3, 2));
        assert_relative_eq!(fit.gamma, 3.0, max_relative = 1e-10);
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 0.0)]).is_err());
        assert!(fit_power_law(&[(2.0, 1.0), (2.0, 3.0)]).is_err());
        assert!(fit_power_law(&[]).is_err());
    }

    #[test]
    fn fit_round_trip_grid() {
        let ages: Vec<f64> = (1..=80).map(f64::from).collect();
        for c in [1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3] {
            for gamma in [0.5, 1.0, 2.0, 3.0, 6.0] {
                let pts: Vec<(f64, f64)> = ages.iter().map(|&t| (t, c * t.powf(gamma))).collect();
                let fit = fit_power_law(&pts).unwrap();
                assert_relative_eq!(fit.c, c, max_relative = 1e-9);
                assert_relative_eq!(fit.gamma, gamma, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn rate_from_cubic_curve() {
        let (c, sigma) = (2e-8, 0.01);
        let ages: Vec<f64> = (10..=800).map(|i| i as f64 * 0.1).collect();
        let values: Vec<f64> = ages.iter().map(|&t| c * t.powi(3)).collect();
        let curve = IncidenceCurve::observed(ages.clone(), values).unwrap();
        let est = rate_from_incidence(&curve, sigma).unwrap();
        assert_eq!(est.n_clamped, 0);
        let RateModel::Tabulated(tab) = &est.rate else { panic!("expected tabulated") };
        let h = 0.1;
        for i in 1..ages.len() - 1 {
            let t = ages[i];
            let truth = 3.0 * c * t * t / sigma;
            let rel = (tab.rates()[i] - truth).abs() / truth;
            // central difference of t³ overshoots by exactly h², i.e. relative h²/(3t²)
            assert!(rel <= h * h / (3.0 * t * t) * (1.0 + 1e-6), "t={t}: {rel}");
            if t >= 2.0 {
                assert!(rel < 1e-3);
            }
        }
    }

    #[test]
    fn rate_from_linear_and_flat() {
        let ages: Vec<f64> = (0..=50).map(f64::from).collect();
        let linear = IncidenceCurve::observed(ages.clone(), ages.iter().map(|t| 0.001 * t).collect()).unwrap();
        let est = rate_from_incidence(&linear, 0.5).unwrap();
        let RateModel::Tabulated(tab) = &est.rate else { panic!() };
        for &r in tab.rates() {
            assert_relative_eq!(r, 0.002, max_relative = 1e-10);
        }
        let flat = IncidenceCurve::observed(ages.clone(), vec![0.0; ages.len()]).unwrap();
        let est = rate_from_incidence(&flat, 0.5).unwrap();
        let RateModel::Tabulated(tab) = &est.rate else { panic!() };
        assert!(tab.rates().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn rate_from_incidence_errors() {
        let short = IncidenceCurve::observed(vec![0.0, 1.0], vec![0.0, 0.1]).unwrap();
        assert!(rate_from_incidence(&short, 0.5).is_err());
        let down = IncidenceCurve::observed(vec![0.0, 1.0, 2.0], vec![0.0, 0.2, 0.1]).unwrap();
        assert!(rate_from_incidence(&down, 0.5).is_err());
        let ok = IncidenceCurve::observed(vec![0.0, 1.0, 2.0], vec![0.0, 0.1, 0.2]).unwrap();
        assert!(rate_from_incidence(&ok, 0.0).is_err());
    }

    #[test]
    fn noisy_step_clamps() {
        // nonuniform grid: the one-sided end stencil goes negative on a late jump
        let curve = IncidenceCurve::observed(vec![0.0, 1.0, 1.1, 5.0], vec![0.0, 0.0, 0.5, 0.5]).unwrap();
        let est = rate_from_incidence(&curve, 1.0).unwrap();
        assert!(est.n_clamped > 0);
        let RateModel::Tabulated(tab) = &est.rate else { panic!() };
        assert!(tab.rates().iter().all(|&r| r >= 0.0));
    }

    #[test]
    fn inverse_consistency_with_power_law() {
        let sigma = 0.02;
        let rate = RateModel::power_law(4e-6, 2.5).unwrap();
        let success = SuccessModel::constant(sigma).unwrap();
        let ages: Vec<f64> = (0..=400).map(|i| 20.0 + i as f64 * 0.1).collect();
        let curve = incidence_approx(&rate, &success, &ages).unwrap();
        assert_eq!(curve.provenance(), Provenance::AnalyticApprox);
        let est = rate_from_incidence(&curve, sigma).unwrap();
        let RateModel::Tabulated(tab) = &est.rate else { panic!() };
        for i in 1..ages.len() - 1 {
            let truth = rate.eval_rate(ages[i]).unwrap();
            // O(h²) with h = 0.1: |μ''|·h²/6 / μ ≈ (γ−1)(γ−2)/(6t²)·h², tiny at t ≥ 20
            assert_relative_eq!(tab.rates()[i], truth, max_relative = 1e-5);
        }
    }

    #[test]
    fn mu0_then_approx_reproduces_power_law() {
        let ages: Vec<f64> = (0..=90).map(f64::from).collect();
        for (c, gamma, sigma) in [(2e-8, 3.0, 0.01), (1e-5, 1.0, 0.3), (1e-12, 6.0, 1.0)] {
            let mu0 = power_law_mu0(c, gamma, sigma).unwrap();
            let rate = RateModel::power_law(mu0, gamma).unwrap();
            let curve = incidence_approx(&rate, &SuccessModel::constant(sigma).unwrap(), &ages).unwrap();
            for (t, v) in curve.points() {
                assert_relative_eq!(v, c * t.powf(gamma), max_relative = 4.0 * f64::EPSILON);
            }
        }
    }

    proptest! {
        #[test]
        fn fit_is_scale_equivariant(
            c in 1e-9..1e-3f64,
            gamma in 0.5..6.0f64,
            lambda in 0.01..100.0f64,
            noise in proptest::collection::vec(0.8..1.25f64, 10),
        ) {
            let pts: Vec<(f64, f64)> = noise
                .iter()
                .enumerate()
                .map(|(i, z)| {
                    let t = 5.0 + 7.0 * i as f64;
                    (t, z * c * t.powf(gamma))
                })
                .collect();
            let scaled: Vec<(f64, f64)> = pts.iter().map(|&(t, v)| (t, lambda * v)).collect();
            let a = fit_power_law(&pts).unwrap();
            let b = fit_power_law(&scaled).unwrap();
            prop_assert!((b.c / (lambda * a.c) - 1.0).abs() < 1e-10);
            prop_assert!((b.gamma - a.gamma).abs() < 1e-10);
        }
    }
}
