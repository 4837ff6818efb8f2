//! Lower bound on the probability that a noisy element satisfies the
//! refinement property `sum eta(R_i)^2 <= (2 + 2C) eta(R)^2`:
//!
//! `p >= (1 - Phi_{448,0}(delta^2 z / (C^2 - delta^2))) * Phi_{64, eps^-2}(z)`.
//!
//! Everything here works with the gap `1 - p`, since `p` itself is within a
//! few ulps of one for the interesting noise levels.

use super::ncx2::{ncx2_cdf, ncx2_sf};
use crate::transform::BLOCK;
use crate::{Error, Result};

/// Degrees of freedom of the kept 8x8 block.
pub const KEPT_DOF: u32 = (BLOCK * BLOCK) as u32;
/// Degrees of freedom outside the kept block for the smallest element that counts.
pub const REST_DOF: u32 = 448;

/// Grid points of the coarse scan before the golden-section search.
const SCAN_POINTS: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbBoundParams {
    /// Noise amplitude relative to a unit-norm element.
    pub epsilon: f64,
    /// Bound on the norm of the refinement operator.
    pub delta: f64,
    /// Refinement constant; the property holds with `C0 = 2 + 2C`.
    pub c: f64,
    pub z: f64,
    pub k_kept: u32,
    pub k_rest: u32,
}

impl ProbBoundParams {
    pub fn new(epsilon: f64, delta: f64, c: f64, z: f64) -> Result<Self> {
        let p = Self {
            epsilon,
            delta,
            c,
            z,
            k_kept: KEPT_DOF,
            k_rest: REST_DOF,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter("epsilon must be positive"));
        }
        if !(self.delta > 0.0) || !(self.delta < self.c) {
            return Err(Error::InvalidParameter("the bound needs 0 < delta < C"));
        }
        if !(self.z >= 0.0) {
            return Err(Error::InvalidParameter("z must be nonnegative"));
        }
        Ok(())
    }

    /// `C0 = 2 + 2C`.
    pub fn c0(&self) -> f64 {
        2.0 + 2.0 * self.c
    }

    pub fn noncentrality(&self) -> f64 {
        1.0 / (self.epsilon * self.epsilon)
    }

    pub fn with_z(self, z: f64) -> Self {
        Self { z, ..self }
    }

    // (Phi_rest(a), 1 - Phi_kept(z))
    fn parts(&self) -> Result<(f64, f64)> {
        self.validate()?;
        let d2 = self.delta * self.delta;
        let a = d2 * self.z / (self.c * self.c - d2);
        let rest = ncx2_cdf(self.k_rest as f64, 0.0, a)?;
        let kept_sf = ncx2_sf(self.k_kept as f64, self.noncentrality(), self.z)?;
        Ok((rest, kept_sf))
    }
}

/// `(1 - Phi_rest(delta^2 z / (C^2 - delta^2))) * Phi_kept(z)`.
pub fn p_ref_lower_bound(p: &ProbBoundParams) -> Result<f64> {
    let (rest, kept_sf) = p.parts()?;
    Ok((1.0 - rest) * (1.0 - kept_sf))
}

/// `1 - p_ref_lower_bound`, computed without cancellation.
pub fn p_ref_gap(p: &ProbBoundParams) -> Result<f64> {
    let (a, b) = p.parts()?;
    Ok(a + b - a * b)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundOptimum {
    pub z: f64,
    /// `1 - p` at the optimum.
    pub gap: f64,
}

impl BoundOptimum {
    pub fn bound(&self) -> f64 {
        1.0 - self.gap
    }
}

/// Minimizes the gap over `z` in `[0, 10 (eps^-2 + 64)]`: a coarse scan
/// locates the basin, golden-section search refines it.
pub fn maximize_bound(epsilon: f64, delta: f64, c: f64) -> Result<BoundOptimum> {
    let base = ProbBoundParams::new(epsilon, delta, c, 0.0)?;
    let upper = 10.0 * (base.noncentrality() + base.k_kept as f64);
    let gap = |z: f64| p_ref_gap(&base.with_z(z));
    let step = upper / SCAN_POINTS as f64;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..=SCAN_POINTS {
        let g = gap(i as f64 * step)?;
        if g < best.1 {
            best = (i, g);
        }
    }
    let mut lo = best.0.saturating_sub(1) as f64 * step;
    let mut hi = ((best.0 + 1).min(SCAN_POINTS)) as f64 * step;
    let r = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = gap(x1)?;
    let mut f2 = gap(x2)?;
    while hi - lo > 1e-9 * hi.max(1.0) {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = gap(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = gap(x2)?;
        }
    }
    let (z, g) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    let (z, g) = if best.1 < g {
        (best.0 as f64 * step, best.1)
    } else {
        (z, g)
    };
    Ok(BoundOptimum { z, gap: g })
}

/// Coefficients of an `h x w` element outside the kept 8x8 block.
pub fn rest_degrees_of_freedom(height: usize, width: usize) -> usize {
    (height * width).saturating_sub(BLOCK * BLOCK)
}

/// Smallest rest count over elements that can be split and whose children
/// are not exactly represented (power-of-two sides up to `max_side`).
pub fn min_rest_degrees_of_freedom(max_side: usize) -> Option<usize> {
    let sides = || (4..=max_side.trailing_zeros()).map(|e| 1usize << e);
    sides()
        .flat_map(|h| sides().map(move |w| (h, w)))
        .filter(|&(h, w)| h.min(w) >= 2 * BLOCK && h.max(w) > 2 * BLOCK)
        .map(|(h, w)| rest_degrees_of_freedom(h, w))
        .min()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_gaps_within_factor_two() {
        for (eps, stated) in [(0.0075, 7.3e-6), (0.008, 5.4e-9), (0.0085, 1.6e-12)] {
            let opt = maximize_bound(eps, 0.13, 1.0).unwrap();
            assert!(opt.gap <= stated, "eps {eps}: {}", opt.gap);
            assert!(opt.gap >= stated / 2.0, "eps {eps}: {}", opt.gap);
        }
    }

    #[test]
    fn z_zero_gives_zero() {
        let p = ProbBoundParams::new(0.0075, 0.13, 1.0, 0.0).unwrap();
        assert_eq!(p_ref_lower_bound(&p).unwrap(), 0.0);
        assert_eq!(p_ref_gap(&p).unwrap(), 1.0);
    }

    #[test]
    fn rises_then_falls_with_interior_maximum() {
        let opt = maximize_bound(0.0075, 0.13, 1.0).unwrap();
        let base = ProbBoundParams::new(0.0075, 0.13, 1.0, 0.0).unwrap();
        let upper = 10.0 * (base.noncentrality() + 64.0);
        assert!(opt.z > 0.0 && opt.z < upper);
        let g = |z: f64| p_ref_gap(&base.with_z(z)).unwrap();
        assert!(g(0.5 * opt.z) > opt.gap);
        assert!(g(1.5 * opt.z) > opt.gap);
        assert!(g(opt.z * 0.99) >= opt.gap && g(opt.z * 1.01) >= opt.gap);
    }

    #[test]
    fn parameter_validation() {
        assert!(ProbBoundParams::new(0.0075, 1.0, 1.0, 1.0).is_err());
        assert!(ProbBoundParams::new(0.0075, 1.2, 1.0, 1.0).is_err());
        assert!(ProbBoundParams::new(0.0, 0.1, 1.0, 1.0).is_err());
        assert!(ProbBoundParams::new(0.01, 0.1, 1.0, -1.0).is_err());
        assert_eq!(ProbBoundParams::new(0.01, 0.1, 1.0, 1.0).unwrap().c0(), 4.0);
    }

    #[test]
    fn rest_dof_bookkeeping() {
        assert_eq!(rest_degrees_of_freedom(32, 16), 448);
        assert_eq!(rest_degrees_of_freedom(8, 8), 0);
        assert_eq!(min_rest_degrees_of_freedom(1024), Some(REST_DOF as usize));
        assert_eq!(min_rest_degrees_of_freedom(16), None);
    }
}
