//! Goodness-of-fit helpers used by the self-validation checks.

use crate::error::{domain, Result};
use crate::process::poisson_pmf;

/// Outcome of a Kolmogorov–Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsTest {
    /// Supremum distance between the distribution functions.
    pub statistic: f64,
    /// Asymptotic p-value.
    pub p_value: f64,
}

impl KsTest {
    pub fn passes(&self, significance: f64) -> bool {
        self.p_value >= significance
    }
}

/// Survival function of the Kolmogorov distribution,
/// Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²λ²).
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        // the alternating series converges slowly here; Q is 1 to double precision
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn p_value(d: f64, effective_n: f64) -> f64 {
    let sqrt_n = effective_n.sqrt();
    kolmogorov_sf((sqrt_n + 0.12 + 0.11 / sqrt_n) * d)
}

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return domain("KS test needs a nonempty sample");
    }
    if xs.iter().any(|x| x.is_nan()) {
        return domain("KS sample contains NaN");
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// One-sample KS test of `xs` against the continuous distribution function `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> Result<KsTest> {
    let v = sorted(xs)?;
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max);
    Ok(KsTest {
        statistic: d,
        p_value: p_value(d, n),
    })
}

/// Two-sample KS test.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<KsTest> {
    let a = sorted(xs)?;
    let b = sorted(ys)?;
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let (nf, mf) = (n as f64, m as f64);
    Ok(KsTest {
        statistic: d,
        p_value: p_value(d, nf * mf / (nf + mf)),
    })
}

/// Total-variation distance between the empirical law of `counts` and
/// Poisson(`mean`), including the Poisson mass above the largest observed count.
pub fn total_variation_poisson(counts: &[u64], mean: f64) -> Result<f64> {
    if counts.is_empty() {
        return domain("total variation needs at least one observation");
    }
    let k_max = *counts.iter().max().unwrap_or(&0) as usize;
    let mut hist = vec![0u64; k_max + 1];
    for &c in counts {
        hist[c as usize] += 1;
    }
    let n = counts.len() as f64;
    let mut dist = 0.0;
    let mut covered = 0.0;
    for (k, &h) in hist.iter().enumerate() {
        let p = poisson_pmf(k as u64, mean)?;
        covered += p;
        dist += (h as f64 / n - p).abs();
    }
    dist += (1.0 - covered).max(0.0);
    Ok(0.5 * dist)
}

/// Pearson correlation of two equally long samples.
pub fn correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return domain("correlation needs two samples of equal length >= 2");
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok(sxy / (sxx * syy).sqrt())
}
