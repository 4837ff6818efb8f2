//! Drivers for the numerical analysis: operator norms, the probability bound,
//! Monte-Carlo refinement checks and noise images.

use std::fmt::Write as _;

use ajpeg_core::analysis::bound::maximize_bound;
use ajpeg_core::analysis::montecarlo::{monte_carlo_refprop_range, RefpropReport};
use ajpeg_core::analysis::refinement_operator_norm;
use ajpeg_core::{Plane, RasterImage};
use rayon::prelude::*;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormRow {
    pub height: usize,
    pub width: usize,
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn norms(sizes: &[(usize, usize)]) -> Result<Vec<NormRow>> {
    sizes
        .par_iter()
        .map(|&(height, width)| {
            let e = refinement_operator_norm(height, width)?;
            Ok(NormRow {
                height,
                width,
                norm: e.norm,
                iterations: e.iterations,
                converged: e.converged,
            })
        })
        .collect()
}

pub fn norms_csv(rows: &[NormRow]) -> String {
    let mut out = String::from("height,width,norm,iterations,converged\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{:.10},{},{}",
            r.height, r.width, r.norm, r.iterations, r.converged
        )
        .unwrap();
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundRow {
    pub epsilon: f64,
    pub delta: f64,
    pub c: f64,
    pub z: f64,
    /// `1 - p` at the optimal `z`.
    pub gap: f64,
}

pub fn bounds(epsilons: &[f64], delta: f64, c: f64) -> Result<Vec<BoundRow>> {
    epsilons
        .par_iter()
        .map(|&epsilon| {
            let opt = maximize_bound(epsilon, delta, c)?;
            Ok(BoundRow {
                epsilon,
                delta,
                c,
                z: opt.z,
                gap: opt.gap,
            })
        })
        .collect()
}

pub fn bounds_csv(rows: &[BoundRow]) -> String {
    let mut out = String::from("epsilon,delta,c,z,gap,bound\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.4},{:.6e},{:.15}",
            r.epsilon,
            r.delta,
            r.c,
            r.z,
            r.gap,
            1.0 - r.gap
        )
        .unwrap();
    }
    out
}

const MC_CHUNK: u64 = 2048;

/// Monte-Carlo violation count for one element, split into chunks across threads.
/// The totals do not depend on the thread count.
pub fn monte_carlo(element: &Plane, epsilon: f64, c0: f64, trials: u64, seed: u64) -> Result<RefpropReport> {
    let chunks: Vec<u64> = (0..trials.div_ceil(MC_CHUNK)).collect();
    let parts = chunks
        .par_iter()
        .map(|&k| {
            let first = k * MC_CHUNK;
            let count = MC_CHUNK.min(trials - first);
            monte_carlo_refprop_range(element, epsilon, c0, seed, first, count)
        })
        .collect::<ajpeg_core::Result<Vec<_>>>()?;
    Ok(parts.into_iter().fold(RefpropReport::default(), RefpropReport::merge))
}

#[derive(Clone, Debug, PartialEq)]
pub struct McRow {
    pub name: String,
    pub epsilon: f64,
    pub report: RefpropReport,
}

pub fn mc_csv(rows: &[McRow]) -> String {
    let mut out = String::from("element,epsilon,trials,violations,rate,max_ratio\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:.6e},{:.6}",
            r.name,
            r.epsilon,
            r.report.trials,
            r.report.violations,
            r.report.rate(),
            r.report.max_ratio
        )
        .unwrap();
    }
    out
}

/// Luma of an image's top-left `size x size` block, the element used by the Monte-Carlo check.
pub fn corner_element(img: &RasterImage, size: usize) -> Plane {
    let [y, _, _] = ajpeg_core::image::rgb_to_ycbcr(img);
    y.sub(0, 0, size.min(y.height()), size.min(y.width()))
}
