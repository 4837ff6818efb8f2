//! Local and global error functionals and the modified error recursion.
//!
//! Both norms are weighted by the pixel count of the padded channel frame
//! (`h w`): the L2 norm by `(h w)^(-1/2)`, the BV norm by `(h w)^(-1)`. Errors
//! are stored as `eta`, never as `eta^2`.

use crate::image::Plane;
use crate::{Error, Result};

/// Which error functional drives refinement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
#[repr(u8)]
pub enum NormKind {
    /// Weighted L2 norm of the error image.
    #[default]
    L2 = 0,
    /// Weighted L1 norm plus total variation of the error image.
    Bv = 1,
}

impl NormKind {
    pub fn to_byte(self) -> u8 {
        self as u8
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(NormKind::L2),
            1 => Some(NormKind::Bv),
            _ => None,
        }
    }
}

/// A norm together with the frame it is weighted against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorNorm {
    kind: NormKind,
    frame_area: f64,
}

impl ErrorNorm {
    /// Norm weighted by the pixel count of a `frame_height x frame_width` channel.
    pub fn new(kind: NormKind, frame_height: usize, frame_width: usize) -> Self {
        Self {
            kind,
            frame_area: (frame_height * frame_width) as f64,
        }
    }

    /// Plain (unit weight) norm.
    pub fn unweighted(kind: NormKind) -> Self {
        Self { kind, frame_area: 1.0 }
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn frame_area(&self) -> f64 {
        self.frame_area
    }

    /// `eta(R)` of an element given its exact and approximated pixels.
    pub fn local_error(&self, exact: &Plane, approx: &Plane) -> Result<f64> {
        match self.kind {
            NormKind::L2 => local_error_l2(exact, approx, self.frame_area),
            NormKind::Bv => local_error_bv(exact, approx, self.frame_area),
        }
    }

    /// `E(T)` from the leaf errors.
    pub fn global_error(&self, etas: &[f64]) -> f64 {
        global_error(etas, self.kind)
    }
}

fn check_dims(exact: &Plane, approx: &Plane) -> Result<()> {
    if exact.dims() != approx.dims() {
        return Err(Error::DimensionMismatch {
            expected: exact.dims(),
            found: approx.dims(),
        });
    }
    Ok(())
}

/// `eta(R) = sqrt(sum (approx - exact)^2 / frame_area)`.
pub fn local_error_l2(exact: &Plane, approx: &Plane, frame_area: f64) -> Result<f64> {
    check_dims(exact, approx)?;
    let sum: f64 = exact
        .data()
        .iter()
        .zip(approx.data())
        .map(|(x, y)| {
            let d = y - x;
            d * d
        })
        .sum();
    Ok(libm::sqrt(sum / frame_area))
}

/// `eta(R) = (sum |err| + sum of |jumps of err| across interfaces inside R) / frame_area`.
pub fn local_error_bv(exact: &Plane, approx: &Plane, frame_area: f64) -> Result<f64> {
    check_dims(exact, approx)?;
    let (h, w) = exact.dims();
    let err = |i: usize, j: usize| approx.get(i, j) - exact.get(i, j);
    let mut l1 = 0.0;
    let mut tv = 0.0;
    for i in 0..h {
        for j in 0..w {
            let e = err(i, j);
            l1 += libm::fabs(e);
            if j + 1 < w {
                tv += libm::fabs(e - err(i, j + 1));
            }
            if i + 1 < h {
                tv += libm::fabs(e - err(i + 1, j));
            }
        }
    }
    Ok((l1 + tv) / frame_area)
}

/// L2: `sqrt(sum eta^2)`; BV: `sum eta`.
pub fn global_error(etas: &[f64], kind: NormKind) -> f64 {
    match kind {
        NormKind::L2 => libm::sqrt(etas.iter().map(|e| e * e).sum::<f64>()),
        NormKind::Bv => etas.iter().sum(),
    }
}

/// Error pair stored per tree node.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ElementError {
    pub eta: f64,
    pub eta_tilde: f64,
}

impl ElementError {
    /// The root's modified error equals its error.
    pub fn root(eta: f64) -> Self {
        Self { eta, eta_tilde: eta }
    }
}

/// Modified error shared by the four children of a refined element:
/// `eta_tilde_child^2 = sum eta_i^2 / (eta^2 + eta_tilde^2) * eta_tilde^2`,
/// and zero when `eta = eta_tilde = 0`.
pub fn modified_error_children(eta_parent: f64, eta_tilde_parent: f64, child_etas: &[f64; 4]) -> f64 {
    let scale = child_etas
        .iter()
        .fold(eta_parent.max(eta_tilde_parent), |m, &e| m.max(e));
    if scale == 0.0 {
        return 0.0;
    }
    let e = eta_parent / scale;
    let t = eta_tilde_parent / scale;
    let den = e * e + t * t;
    if den == 0.0 {
        return 0.0;
    }
    let num: f64 = child_etas.iter().map(|c| (c / scale) * (c / scale)).sum();
    libm::sqrt(num / den) * eta_tilde_parent
}
