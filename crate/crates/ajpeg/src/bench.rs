//! Adaptive versus uniform-grid comparison over a set of images.

use std::fmt::Write as _;
use std::path::Path;

use ajpeg_core::{decode, EncodeConfig, RasterImage};
use rayon::prelude::*;

use crate::error::{AppError, Result};
use crate::io::read_image;
use crate::metrics::{format_psnr, psnr};
use crate::parallel::encode_parallel;

pub const CSV_HEADER: &str = "image,tau,adaptive_bytes,uniform_bytes,size_ratio,adaptive_elements,uniform_elements,adaptive_psnr,uniform_psnr,y_error,y_termination";

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub image: String,
    pub tau: f64,
    pub adaptive_bytes: usize,
    pub uniform_bytes: usize,
    /// Summed over the three channels.
    pub adaptive_elements: usize,
    pub uniform_elements: usize,
    pub adaptive_psnr: f64,
    pub uniform_psnr: f64,
    /// Unquantized luma mesh error.
    pub y_error: f64,
    pub y_termination: String,
}

impl BenchRow {
    pub fn size_ratio(&self) -> f64 {
        self.adaptive_bytes as f64 / self.uniform_bytes as f64
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{:.4},{},{},{},{},{:.6e},{}",
            self.image,
            self.tau,
            self.adaptive_bytes,
            self.uniform_bytes,
            self.size_ratio(),
            self.adaptive_elements,
            self.uniform_elements,
            format_psnr(self.adaptive_psnr),
            format_psnr(self.uniform_psnr),
            self.y_error,
            self.y_termination
        )
    }
}

struct Encoded {
    bytes: usize,
    elements: usize,
    psnr: f64,
    y_error: f64,
    y_termination: String,
}

fn run_one(img: &RasterImage, config: &EncodeConfig) -> Result<Encoded> {
    let out = encode_parallel(img, config)?;
    let bytes = out.to_bytes()?;
    let back = decode(&bytes)?;
    Ok(Encoded {
        bytes: bytes.len(),
        elements: out.element_counts().iter().sum(),
        psnr: psnr(img, &back)?,
        y_error: out.channels[0].error,
        y_termination: format!("{:?}", out.channels[0].termination).to_lowercase(),
    })
}

/// One row per image and tolerance, in input order.
pub fn run_bench(images: &[(String, RasterImage)], taus: &[f64]) -> Result<Vec<BenchRow>> {
    if let Some(t) = taus.iter().find(|t| t.is_nan() || **t <= 0.0) {
        return Err(AppError::Usage(format!("tolerance must be positive, got {t}")));
    }
    let uniform: Vec<Encoded> = images
        .par_iter()
        .map(|(_, img)| run_one(img, &EncodeConfig::uniform()))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, f64)> = (0..images.len())
        .flat_map(|i| taus.iter().map(move |&t| (i, t)))
        .collect();
    jobs.par_iter()
        .map(|&(i, tau)| {
            let a = run_one(&images[i].1, &EncodeConfig::new(tau))?;
            let u = &uniform[i];
            Ok(BenchRow {
                image: images[i].0.clone(),
                tau,
                adaptive_bytes: a.bytes,
                uniform_bytes: u.bytes,
                adaptive_elements: a.elements,
                uniform_elements: u.elements,
                adaptive_psnr: a.psnr,
                uniform_psnr: u.psnr,
                y_error: a.y_error,
                y_termination: a.y_termination,
            })
        })
        .collect()
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    writeln!(out, "{CSV_HEADER}").unwrap();
    for r in rows {
        writeln!(out, "{}", r.csv_line()).unwrap();
    }
    out
}

/// `.ppm` and `.png` files of a directory, sorted by file name.
pub fn load_corpus(dir: &Path) -> Result<Vec<(String, RasterImage)>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| AppError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "ppm" | "png"))
        })
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or("?").to_string();
            Ok((name, read_image(p)?))
        })
        .collect()
}
