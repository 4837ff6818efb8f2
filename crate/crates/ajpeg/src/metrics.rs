//! Distortion metrics between two RGB images of equal size.

use std::fmt;

use ajpeg_core::estimator::{local_error_bv, local_error_l2};
use ajpeg_core::RasterImage;

use crate::error::{AppError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    /// `sqrt(sum of squared sample errors / (h w))`, summed over the three channels.
    pub weighted_l2: f64,
    /// Per-channel BV errors with weight `1 / (h w)`, summed.
    pub bv: f64,
    /// Peak signal-to-noise ratio in dB over all samples; infinite for identical images.
    pub psnr: f64,
    pub max_abs: f64,
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "l2 {:.6e}  bv {:.6e}  psnr {}  max {:.6}",
            self.weighted_l2,
            self.bv,
            format_psnr(self.psnr),
            self.max_abs
        )
    }
}

pub fn format_psnr(psnr: f64) -> String {
    if psnr.is_infinite() {
        "inf".into()
    } else {
        format!("{psnr:.3}")
    }
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * mse.log10()
    }
}

pub fn psnr(a: &RasterImage, b: &RasterImage) -> Result<f64> {
    Ok(compare(a, b)?.psnr)
}

pub fn compare(a: &RasterImage, b: &RasterImage) -> Result<Metrics> {
    if (a.height(), a.width()) != (b.height(), b.width()) {
        return Err(AppError::Usage(format!(
            "size mismatch: {}x{} vs {}x{}",
            a.height(),
            a.width(),
            b.height(),
            b.width()
        )));
    }
    let area = (a.height() * a.width()) as f64;
    let mut l2_sq = 0.0;
    let mut bv = 0.0;
    for c in 0..3 {
        let (pa, pb) = (a.channel(c), b.channel(c));
        let e = local_error_l2(&pa, &pb, area)?;
        l2_sq += e * e;
        bv += local_error_bv(&pa, &pb, area)?;
    }
    let (sum_sq, max_abs) = a.data().iter().zip(b.data()).fold((0.0, 0.0f64), |(s, m), (x, y)| {
        (s + (x - y) * (x - y), m.max((x - y).abs()))
    });
    Ok(Metrics {
        weighted_l2: l2_sq.sqrt(),
        bv,
        psnr: psnr_from_mse(sum_sq / a.data().len() as f64),
        max_abs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(h: usize, w: usize, f: impl Fn(usize, usize) -> f64) -> RasterImage {
        RasterImage::from_fn(h, w, |i, j| [f(i, j); 3]).unwrap()
    }

    #[test]
    fn identical_images() {
        let a = gray(4, 4, |i, j| (i + j) as f64 / 8.0);
        let m = compare(&a, &a).unwrap();
        assert_eq!((m.weighted_l2, m.bv, m.max_abs), (0.0, 0.0, 0.0));
        assert!(m.psnr.is_infinite());
        assert_eq!(format_psnr(m.psnr), "inf");
    }

    #[test]
    fn one_sample_difference() {
        let a = gray(4, 8, |_, _| 0.5);
        let mut data = a.data().to_vec();
        data[3 * 9 + 1] += 0.25;
        let b = RasterImage::new(4, 8, data).unwrap();
        let m = compare(&a, &b).unwrap();
        assert!((m.weighted_l2 - 0.25 / 32f64.sqrt()).abs() < 1e-15);
        let mse: f64 = 0.0625 / 96.0;
        assert!((m.psnr - (-10.0 * mse.log10())).abs() < 1e-12);
    }

    #[test]
    fn bv_two_pixel_case() {
        let a = gray(2, 1, |_, _| 0.5);
        let b = RasterImage::new(2, 1, vec![0.6, 0.5, 0.5, 0.2, 0.5, 0.5]).unwrap();
        // red channel errors (-0.1, 0.3): (|a| + |b| + |a - b|) / 2
        let m = compare(&a, &b).unwrap();
        assert!((m.bv - (0.1 + 0.3 + 0.4) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn size_mismatch() {
        assert!(compare(&gray(2, 2, |_, _| 0.0), &gray(2, 3, |_, _| 0.0)).is_err());
    }
}
