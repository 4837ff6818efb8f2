//! Deterministic synthetic test images.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use ajpeg_core::analysis::counterexample_element;
use ajpeg_core::RasterImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{AppError, Result};
use crate::io::write_image;

pub const DEFAULT_SEED: u64 = 2024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Constant,
    GradientH,
    GradientDiag,
    Sinusoid,
    Cartoon,
    Noise,
    Counterexample,
}

impl Kind {
    pub const ALL: [Kind; 7] = [
        Kind::Constant,
        Kind::GradientH,
        Kind::GradientDiag,
        Kind::Sinusoid,
        Kind::Cartoon,
        Kind::Noise,
        Kind::Counterexample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Constant => "constant",
            Kind::GradientH => "gradient_h",
            Kind::GradientDiag => "gradient_diag",
            Kind::Sinusoid => "sinusoid",
            Kind::Cartoon => "cartoon",
            Kind::Noise => "noise",
            Kind::Counterexample => "counterexample",
        }
    }

    /// Smooth content that an adaptive mesh should cover with few elements.
    pub fn is_smooth(self) -> bool {
        matches!(
            self,
            Kind::Constant | Kind::GradientH | Kind::GradientDiag | Kind::Sinusoid
        )
    }
}

#[derive(Clone, Debug)]
pub struct CorpusImage {
    pub kind: Kind,
    pub name: String,
    pub image: RasterImage,
}

pub fn constant(h: usize, w: usize) -> RasterImage {
    RasterImage::from_fn(h, w, |_, _| [0.62, 0.45, 0.3]).unwrap()
}

pub fn gradient_h(h: usize, w: usize) -> RasterImage {
    let d = (w.max(2) - 1) as f64;
    RasterImage::from_fn(h, w, |_, j| {
        let t = j as f64 / d;
        [0.1 + 0.8 * t, 0.5, 0.9 - 0.6 * t]
    })
    .unwrap()
}

pub fn gradient_diag(h: usize, w: usize) -> RasterImage {
    let d = (h + w).max(3) as f64 - 2.0;
    RasterImage::from_fn(h, w, |i, j| {
        let t = (i + j) as f64 / d;
        [t, 0.3 + 0.4 * t, 1.0 - t]
    })
    .unwrap()
}

/// A few low-frequency sinusoids per channel (at most 3 periods across the frame).
pub fn sinusoid(h: usize, w: usize, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<[(f64, f64, f64, f64); 2]> = (0..3)
        .map(|_| {
            [0, 1].map(|_| {
                (
                    rng.random_range(0.0..3.0),
                    rng.random_range(0.0..3.0),
                    rng.random_range(0.0..2.0 * PI),
                    rng.random_range(0.05..0.2),
                )
            })
        })
        .collect();
    RasterImage::from_fn(h, w, |i, j| {
        let (y, x) = (i as f64 / h as f64, j as f64 / w as f64);
        let v = |c: usize| {
            0.5 + waves[c]
                .iter()
                .map(|&(fy, fx, ph, a)| a * (2.0 * PI * (fy * y + fx * x) + ph).sin())
                .sum::<f64>()
        };
        [v(0), v(1), v(2)]
    })
    .unwrap()
}

/// Piecewise-constant shapes: background, rectangles and discs.
pub fn cartoon(h: usize, w: usize, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut color = || [0, 1, 2].map(|_| rng.random_range(0.05..0.95));
    let background = color();
    let rects: Vec<_> = (0..4).map(|_| color()).collect();
    let discs: Vec<_> = (0..3).map(|_| color()).collect();
    let mut geo = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let rect_geo: Vec<[f64; 4]> = (0..4)
        .map(|_| {
            let (a, b): (f64, f64) = (geo.random_range(0.0..1.0), geo.random_range(0.0..1.0));
            let (c, d): (f64, f64) = (geo.random_range(0.0..1.0), geo.random_range(0.0..1.0));
            [a.min(b), a.max(b), c.min(d), c.max(d)]
        })
        .collect();
    let disc_geo: Vec<[f64; 3]> = (0..3)
        .map(|_| {
            [
                geo.random_range(0.0..1.0),
                geo.random_range(0.0..1.0),
                geo.random_range(0.05..0.25),
            ]
        })
        .collect();
    RasterImage::from_fn(h, w, |i, j| {
        let (y, x) = (i as f64 / h as f64, j as f64 / w as f64);
        let mut px = background;
        for (g, c) in rect_geo.iter().zip(&rects) {
            if (g[0]..g[1]).contains(&y) && (g[2]..g[3]).contains(&x) {
                px = *c;
            }
        }
        for (g, c) in disc_geo.iter().zip(&discs) {
            if (y - g[0]).powi(2) + (x - g[1]).powi(2) < g[2] * g[2] {
                px = *c;
            }
        }
        px
    })
    .unwrap()
}

/// Gaussian white noise around mid-gray, clamped to `[0, 1]`.
pub fn noise(h: usize, w: usize, sigma: f64, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..h * w * 3)
        .map(|_| (0.5 + sigma * rng.sample::<f64, _>(StandardNormal)).clamp(0.0, 1.0))
        .collect();
    RasterImage::new(h, w, data).unwrap()
}

/// Mid-gray frame whose top-left 32x32 block is the single-coefficient
/// counterexample image, rescaled into `[0, 1]`.
pub fn counterexample_frame(h: usize, w: usize) -> RasterImage {
    let element = counterexample_element();
    let peak = element.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    RasterImage::from_fn(h, w, |i, j| {
        let v = if i < 32 && j < 32 {
            0.5 + 0.45 * element.get(i, j) / peak
        } else {
            0.5
        };
        [v; 3]
    })
    .unwrap()
}

pub fn generate_kind(kind: Kind, h: usize, w: usize, seed: u64) -> RasterImage {
    match kind {
        Kind::Constant => constant(h, w),
        Kind::GradientH => gradient_h(h, w),
        Kind::GradientDiag => gradient_diag(h, w),
        Kind::Sinusoid => sinusoid(h, w, seed),
        Kind::Cartoon => cartoon(h, w, seed),
        Kind::Noise => noise(h, w, 0.2, seed),
        Kind::Counterexample => counterexample_frame(h.max(32), w.max(32)),
    }
}

/// The whole corpus at one size.
pub fn generate(h: usize, w: usize, seed: u64) -> Vec<CorpusImage> {
    Kind::ALL
        .iter()
        .map(|&kind| CorpusImage {
            kind,
            name: kind.name().to_string(),
            image: generate_kind(kind, h, w, seed),
        })
        .collect()
}

/// Writes the corpus as `<name>.ppm` files; returns the paths in corpus order.
pub fn write_corpus(dir: &Path, h: usize, w: usize, seed: u64) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    generate(h, w, seed)
        .into_iter()
        .map(|c| {
            let path = dir.join(format!("{}.ppm", c.name));
            write_image(&path, &c.image)?;
            Ok(path)
        })
        .collect()
}
