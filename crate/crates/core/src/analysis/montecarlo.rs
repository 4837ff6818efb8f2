//! Monte-Carlo checks of `sum_i eta(R_i)^2 <= C0 eta(R)^2` under pixel noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::image::{Plane, RasterImage};
use crate::refiner::{refine_element, Element};
use crate::transform::{TlTransform, BLOCK};
use crate::{Error, Result};

/// Slack (relative to a unit-norm element) below which a comparison counts as a tie.
pub const TIE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub epsilon: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(epsilon: f64, seed: u64) -> Result<Self> {
        if !(epsilon >= 0.0) || epsilon.is_infinite() {
            return Err(Error::InvalidParameter(
                "noise amplitude must be finite and nonnegative",
            ));
        }
        Ok(Self { epsilon, seed })
    }
}

/// Independent generator for trial `stream` of a seeded experiment.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `x + epsilon * zeta` with i.i.d. standard normal `zeta`, no clamping.
pub fn add_noise<R: Rng>(x: &Plane, epsilon: f64, rng: &mut R) -> Plane {
    let mut out = x.clone();
    if epsilon != 0.0 {
        for v in out.data_mut() {
            *v += epsilon * rng.sample::<f64, _>(StandardNormal);
        }
    }
    out
}

/// Noised copy of an image, clamped to `[0, 1]`.
pub fn add_noise_image(img: &RasterImage, model: &NoiseModel) -> Result<RasterImage> {
    if model.epsilon == 0.0 {
        return Ok(img.clone());
    }
    let mut rng = trial_rng(model.seed, 0);
    let data = img
        .data()
        .iter()
        .map(|&v| (v + model.epsilon * rng.sample::<f64, _>(StandardNormal)).clamp(0.0, 1.0))
        .collect();
    RasterImage::new(img.height(), img.width(), data)
}

/// `x / ||x||_2`.
pub fn normalize(x: &Plane) -> Result<Plane> {
    let n = libm::sqrt(x.squared_norm());
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidParameter("cannot normalize a zero element"));
    }
    let mut out = x.clone();
    out.data_mut().iter_mut().for_each(|v| *v /= n);
    Ok(out)
}

/// Evaluates both sides of the refinement property on one element shape,
/// with unweighted squared errors.
#[derive(Clone, Debug)]
pub struct RefpropEvaluator {
    parent: TlTransform,
    child: Option<TlTransform>,
    children: [Element; 4],
    height: usize,
    width: usize,
}

impl RefpropEvaluator {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        let root = Element::root(height, width);
        let children = refine_element(&root)?;
        let child = if height / 2 > BLOCK || width / 2 > BLOCK {
            Some(TlTransform::new(height / 2, width / 2)?)
        } else {
            None
        };
        Ok(Self {
            parent: TlTransform::new(height, width)?,
            child,
            children,
            height,
            width,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    fn residual_sq(t: &TlTransform, x: &Plane) -> f64 {
        let approx = t.approximate(x);
        x.data().iter().zip(approx.data()).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    /// `(eta(R)^2, sum_i eta(R_i)^2)`.
    pub fn sides(&self, x: &Plane) -> (f64, f64) {
        let parent = Self::residual_sq(&self.parent, x);
        let children = match &self.child {
            Some(t) => self
                .children
                .iter()
                .map(|c| Self::residual_sq(t, &x.sub(c.row, c.col, c.height, c.width)))
                .sum(),
            None => 0.0,
        };
        (parent, children)
    }

    pub fn violates(&self, x: &Plane, c0: f64) -> bool {
        let (p, c) = self.sides(x);
        c > c0 * p + TIE_SLACK * x.squared_norm()
    }
}

/// One noisy evaluation of a unit-norm element: returns `(eta(R)^2, sum_i eta(R_i)^2)`.
pub fn refprop_trial<R: Rng>(eval: &RefpropEvaluator, unit: &Plane, epsilon: f64, rng: &mut R) -> (f64, f64) {
    eval.sides(&add_noise(unit, epsilon, rng))
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RefpropReport {
    pub trials: u64,
    pub violations: u64,
    /// Largest observed `sum_i eta(R_i)^2 / eta(R)^2`.
    pub max_ratio: f64,
}

impl RefpropReport {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.violations as f64 / self.trials as f64
        }
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            trials: self.trials + other.trials,
            violations: self.violations + other.violations,
            max_ratio: self.max_ratio.max(other.max_ratio),
        }
    }
}

/// Runs trials `first..first + count` of the experiment; trial `t` draws from
/// `trial_rng(seed, t)`, so any split of the trial range gives the same totals.
pub fn monte_carlo_refprop_range(
    element: &Plane,
    epsilon: f64,
    c0: f64,
    seed: u64,
    first: u64,
    count: u64,
) -> Result<RefpropReport> {
    if !(c0 > 0.0) {
        return Err(Error::InvalidParameter("C0 must be positive"));
    }
    NoiseModel::new(epsilon, seed)?;
    let (h, w) = element.dims();
    let eval = RefpropEvaluator::new(h, w)?;
    let unit = normalize(element)?;
    let mut report = RefpropReport::default();
    for t in first..first + count {
        let mut rng = trial_rng(seed, t);
        let noisy = add_noise(&unit, epsilon, &mut rng);
        let (p, c) = eval.sides(&noisy);
        report.trials += 1;
        if c > c0 * p + TIE_SLACK * noisy.squared_norm() {
            report.violations += 1;
        }
        let ratio = if p > 0.0 {
            c / p
        } else if c > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        report.max_ratio = report.max_ratio.max(ratio);
    }
    Ok(report)
}

/// Violation frequency of the refinement property with constant `c0` over
/// `trials` noisy copies of the normalized `element`.
pub fn monte_carlo_refprop(element: &Plane, epsilon: f64, c0: f64, trials: u64, seed: u64) -> Result<RefpropReport> {
    monte_carlo_refprop_range(element, epsilon, c0, seed, 0, trials)
}
