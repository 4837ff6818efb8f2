//! Non-central chi-squared distribution functions.
//!
//! `Phi_{k,lambda}(x) = sum_j Pois(j; lambda/2) P(k/2 + j, x/2)`. Only Poisson
//! weights above `1e-32` are kept; the window grows outward from the mode.
//! The CDF is accumulated downward in the gamma shape using
//! `P(a - 1, y) = P(a, y) + D(a - 1, y)`, the survival function upward using
//! `Q(a + 1, y) = Q(a, y) + D(a, y)`. Both recurrences only add positive
//! terms, so tails keep their relative accuracy.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use super::gamma::{dpois_raw, gamma_p, gamma_q};
use crate::{Error, Result};

const WEIGHT_CUTOFF: f64 = 1e-32;

fn check(k: f64, lambda: f64, x: f64) -> Result<()> {
    if !(k > 0.0) || !(lambda >= 0.0) || x.is_nan() || x < 0.0 || lambda.is_infinite() {
        return Err(Error::InvalidParameter(
            "chi-squared needs k > 0, finite lambda >= 0 and x >= 0",
        ));
    }
    Ok(())
}

// Inclusive range of mixture indices and their Poisson weights.
fn weights(lambda: f64) -> (usize, Vec<f64>) {
    let h = lambda / 2.0;
    if h == 0.0 {
        return (0, alloc::vec![1.0]);
    }
    let mode = libm::floor(h) as usize;
    let w = |j: usize| dpois_raw(j as f64, h);
    let mut lo = mode;
    while lo > 0 && w(lo - 1) >= WEIGHT_CUTOFF {
        lo -= 1;
    }
    let mut hi = mode;
    while w(hi + 1) >= WEIGHT_CUTOFF {
        hi += 1;
    }
    (lo, (lo..=hi).map(w).collect())
}

/// `P(X <= x)` for `X ~ chi'^2_k(lambda)`.
pub fn ncx2_cdf(k: f64, lambda: f64, x: f64) -> Result<f64> {
    check(k, lambda, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let y = x / 2.0;
    let (lo, w) = weights(lambda);
    let a = |j: usize| k / 2.0 + j as f64;
    let hi = lo + w.len() - 1;
    let mut p = gamma_p(a(hi), y);
    let mut sum = w[w.len() - 1] * p;
    for j in (lo..hi).rev() {
        p += dpois_raw(a(j), y);
        sum += w[j - lo] * p;
    }
    Ok(sum.min(1.0))
}

/// `P(X > x)` for `X ~ chi'^2_k(lambda)`.
pub fn ncx2_sf(k: f64, lambda: f64, x: f64) -> Result<f64> {
    check(k, lambda, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let y = x / 2.0;
    let (lo, w) = weights(lambda);
    let a = |j: usize| k / 2.0 + j as f64;
    let mut q = gamma_q(a(lo), y);
    let mut sum = w[0] * q;
    for (i, &wi) in w.iter().enumerate().skip(1) {
        q += dpois_raw(a(lo + i - 1), y);
        sum += wi * q;
    }
    Ok(sum.min(1.0))
}

/// Outcome of a monotonicity scan in the noncentrality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotonicityReport {
    pub pairs: usize,
    /// Largest increase `Phi(lambda_{i+1}) - Phi(lambda_i)` seen (negative when strictly decreasing).
    pub max_increase: f64,
    pub violations: usize,
}

impl MonotonicityReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Checks that `Phi_{k,lambda}(x)` does not increase along an ascending `lambda` grid,
/// allowing `1e-12` slack.
pub fn check_cdf_monotonicity(k: f64, x: f64, lambdas: &[f64]) -> Result<MonotonicityReport> {
    if lambdas.windows(2).any(|p| !(p[0] <= p[1])) {
        return Err(Error::InvalidParameter("lambda grid must be ascending"));
    }
    let values = lambdas.iter().map(|&l| ncx2_cdf(k, l, x)).collect::<Result<Vec<_>>>()?;
    let mut report = MonotonicityReport {
        pairs: values.len().saturating_sub(1),
        max_increase: f64::NEG_INFINITY,
        violations: 0,
    };
    for p in values.windows(2) {
        let inc = p[1] - p[0];
        report.max_increase = report.max_increase.max(inc);
        if inc > 1e-12 {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// Monte-Carlo estimate of `Phi_{k,lambda}(x)` with its standard error, sampling
/// `sum_i (mu_i + xi_i)^2` with `mu_i = sqrt(lambda / k)`.
pub fn ncx2_monte_carlo<R: Rng>(k: usize, lambda: f64, x: f64, samples: usize, rng: &mut R) -> (f64, f64) {
    let mu = libm::sqrt(lambda / k as f64);
    let mut hits = 0usize;
    for _ in 0..samples {
        let mut s = 0.0;
        for _ in 0..k {
            let v = mu + rng.sample::<f64, _>(StandardNormal);
            s += v * v;
        }
        if s <= x {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    (p, libm::sqrt(p * (1.0 - p) / samples as f64))
}
