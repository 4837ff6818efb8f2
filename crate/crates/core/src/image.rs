//! Raster images, single-channel planes and the color pipeline around them.
//!
//! Samples are `f64` in `[0, 1]` throughout; 8-bit quantization only happens
//! at the file boundary.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Row-major grid of real samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter("plane dimensions must be positive"));
        }
        if data.len() != height * width {
            return Err(Error::DimensionMismatch {
                expected: (height, width),
                found: (data.len() / width.max(1), width),
            });
        }
        Ok(Self { height, width, data })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        assert!(height > 0 && width > 0, "plane dimensions must be positive");
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(height > 0 && width > 0, "plane dimensions must be positive");
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self { height, width, data }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    /// Copies the `height x width` window whose top-left sample is `(row, col)`.
    pub fn sub(&self, row: usize, col: usize, height: usize, width: usize) -> Plane {
        assert!(row + height <= self.height && col + width <= self.width);
        let mut data = Vec::with_capacity(height * width);
        for r in row..row + height {
            data.extend_from_slice(&self.row(r)[col..col + width]);
        }
        Plane { height, width, data }
    }

    /// Writes `block` with its top-left sample at `(row, col)`.
    pub fn write_block(&mut self, row: usize, col: usize, block: &Plane) {
        assert!(row + block.height <= self.height && col + block.width <= self.width);
        for r in 0..block.height {
            let dst = (row + r) * self.width + col;
            self.data[dst..dst + block.width].copy_from_slice(block.row(r));
        }
    }

    /// Keeps the top-left `height x width` corner.
    pub fn crop(&self, height: usize, width: usize) -> Plane {
        self.sub(0, 0, height, width)
    }

    pub fn squared_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

/// A plane prepared for refinement: both dimensions are powers of two.
///
/// `orig_height`/`orig_width` remember the extent before padding.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelPlane {
    plane: Plane,
    orig_height: usize,
    orig_width: usize,
}

impl ChannelPlane {
    pub fn new(plane: Plane, orig_height: usize, orig_width: usize) -> Result<Self> {
        let (h, w) = plane.dims();
        if !h.is_power_of_two() || !w.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { height: h, width: w });
        }
        if orig_height == 0 || orig_width == 0 || orig_height > h || orig_width > w {
            return Err(Error::InvalidParameter("original dimensions must fit inside the plane"));
        }
        Ok(Self {
            plane,
            orig_height,
            orig_width,
        })
    }

    /// Wraps a plane whose dimensions are already powers of two.
    pub fn from_plane(plane: Plane) -> Result<Self> {
        let (h, w) = plane.dims();
        Self::new(plane, h, w)
    }

    #[inline]
    pub fn plane(&self) -> &Plane {
        &self.plane
    }

    pub fn into_plane(self) -> Plane {
        self.plane
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.plane.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.plane.width
    }

    #[inline]
    pub fn orig_height(&self) -> usize {
        self.orig_height
    }

    #[inline]
    pub fn orig_width(&self) -> usize {
        self.orig_width
    }

    /// The unpadded content.
    pub fn cropped(&self) -> Plane {
        self.plane.crop(self.orig_height, self.orig_width)
    }
}

/// RGB image with interleaved samples in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RasterImage {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl RasterImage {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter("image dimensions must be positive"));
        }
        if data.len() != 3 * height * width {
            return Err(Error::DimensionMismatch {
                expected: (height, width),
                found: (data.len() / (3 * width), width),
            });
        }
        if let Some((index, &value)) = data.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::SampleOutOfRange { index, value });
        }
        Ok(Self { height, width, data })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(3 * height * width);
        for r in 0..height {
            for c in 0..width {
                data.extend_from_slice(&f(r, c));
            }
        }
        Self::new(height, width, data)
    }

    /// Gray image from one plane (all three channels equal).
    pub fn from_gray(plane: &Plane) -> Result<Self> {
        Self::from_fn(plane.height(), plane.width(), |r, c| {
            let v = plane.get(r, c);
            [v, v, v]
        })
    }

    pub fn from_rgb8(height: usize, width: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != 3 * height * width {
            return Err(Error::DimensionMismatch {
                expected: (height, width),
                found: (bytes.len() / (3 * width.max(1)), width),
            });
        }
        Self::new(height, width, bytes.iter().map(|&b| b as f64 / 255.0).collect())
    }

    /// Rounds every sample to the nearest 8-bit level.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|&v| libm::round(v * 255.0).clamp(0.0, 255.0) as u8)
            .collect()
    }

    /// The image as stored in an 8-bit file.
    pub fn quantized_8bit(&self) -> RasterImage {
        RasterImage {
            height: self.height,
            width: self.width,
            data: self.to_rgb8().into_iter().map(|b| b as f64 / 255.0).collect(),
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> [f64; 3] {
        let i = 3 * (row * self.width + col);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// One color component as a plane (0 = R, 1 = G, 2 = B).
    pub fn channel(&self, index: usize) -> Plane {
        assert!(index < 3);
        Plane {
            height: self.height,
            width: self.width,
            data: self.data.iter().skip(index).step_by(3).copied().collect(),
        }
    }
}

/// Full-range BT.601 luma and offset chroma.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColorTriple {
    pub y: f64,
    pub cb: f64,
    pub cr: f64,
}

const KR: f64 = 0.299;
const KG: f64 = 0.587;
const KB: f64 = 0.114;
const CB_SCALE: f64 = 2.0 * (1.0 - KB);
const CR_SCALE: f64 = 2.0 * (1.0 - KR);

impl ColorTriple {
    pub fn from_rgb([r, g, b]: [f64; 3]) -> Self {
        let y = KR * r + KG * g + KB * b;
        ColorTriple {
            y,
            cb: 0.5 + (b - y) / CB_SCALE,
            cr: 0.5 + (r - y) / CR_SCALE,
        }
    }

    /// Exact inverse of [`ColorTriple::from_rgb`]; not clamped.
    pub fn to_rgb(self) -> [f64; 3] {
        let r = self.y + CR_SCALE * (self.cr - 0.5);
        let b = self.y + CB_SCALE * (self.cb - 0.5);
        let g = (self.y - KR * r - KB * b) / KG;
        [r, g, b]
    }
}

/// Splits an image into Y, Cb and Cr planes at full resolution.
pub fn rgb_to_ycbcr(img: &RasterImage) -> [Plane; 3] {
    let n = img.height * img.width;
    let mut out = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for px in img.data.chunks_exact(3) {
        let t = ColorTriple::from_rgb([px[0], px[1], px[2]]);
        out[0].push(t.y);
        out[1].push(t.cb);
        out[2].push(t.cr);
    }
    out.map(|data| Plane {
        height: img.height,
        width: img.width,
        data,
    })
}

/// Recombines three equally sized planes; RGB is clamped into `[0, 1]`.
pub fn ycbcr_to_rgb(y: &Plane, cb: &Plane, cr: &Plane) -> Result<RasterImage> {
    for p in [cb, cr] {
        if p.dims() != y.dims() {
            return Err(Error::DimensionMismatch {
                expected: y.dims(),
                found: p.dims(),
            });
        }
    }
    let mut data = Vec::with_capacity(3 * y.data.len());
    for i in 0..y.data.len() {
        let rgb = ColorTriple {
            y: y.data[i],
            cb: cb.data[i],
            cr: cr.data[i],
        }
        .to_rgb();
        data.extend(rgb.iter().map(|v| v.clamp(0.0, 1.0)));
    }
    Ok(RasterImage {
        height: y.height,
        width: y.width,
        data,
    })
}

/// Halves both dimensions by averaging 2x2 blocks.
pub fn downsample_chroma(p: &Plane) -> Result<Plane> {
    let (h, w) = p.dims();
    if !h.is_multiple_of(2) || !w.is_multiple_of(2) {
        return Err(Error::OddDimension { height: h, width: w });
    }
    Ok(Plane::from_fn(h / 2, w / 2, |r, c| {
        let (r2, c2) = (2 * r, 2 * c);
        0.25 * ((p.get(r2, c2) + p.get(r2, c2 + 1)) + (p.get(r2 + 1, c2) + p.get(r2 + 1, c2 + 1)))
    }))
}

/// Doubles both dimensions by pixel replication.
///
/// The doubled plane must fit inside the `target_height x target_width` frame.
pub fn upsample_chroma(p: &Plane, target_height: usize, target_width: usize) -> Result<Plane> {
    let (h, w) = (2 * p.height, 2 * p.width);
    if h > target_height || w > target_width {
        return Err(Error::DimensionMismatch {
            expected: (target_height, target_width),
            found: (h, w),
        });
    }
    Ok(Plane::from_fn(h, w, |r, c| p.get(r / 2, c / 2)))
}

/// Pads to the next power of two in each dimension by edge replication.
pub fn pad_to_pow2(p: &Plane) -> ChannelPlane {
    pad_to_pow2_min(p, 1)
}

/// Like [`pad_to_pow2`], with every padded dimension at least `min` (a power of two).
pub fn pad_to_pow2_min(p: &Plane, min: usize) -> ChannelPlane {
    debug_assert!(min.is_power_of_two());
    let (h, w) = p.dims();
    let ph = h.next_power_of_two().max(min);
    let pw = w.next_power_of_two().max(min);
    let plane = if (ph, pw) == (h, w) {
        p.clone()
    } else {
        Plane::from_fn(ph, pw, |r, c| p.get(r.min(h - 1), c.min(w - 1)))
    };
    ChannelPlane {
        plane,
        orig_height: h,
        orig_width: w,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn black_and_white_map_to_neutral_chroma() {
        let black = ColorTriple::from_rgb([0.0, 0.0, 0.0]);
        assert_eq!((black.y, black.cb, black.cr), (0.0, 0.5, 0.5));
        let white = ColorTriple::from_rgb([1.0, 1.0, 1.0]);
        assert!(close(white.y, 1.0, 1e-15));
        assert!(close(white.cb, 0.5, 1e-15));
        assert!(close(white.cr, 0.5, 1e-15));
        for g in [0.1, 0.37, 0.9] {
            let t = ColorTriple::from_rgb([g, g, g]);
            assert!(close(t.y, g, 1e-15) && close(t.cb, 0.5, 1e-15) && close(t.cr, 0.5, 1e-15));
        }
    }

    #[test]
    fn inverse_of_black() {
        let rgb = ColorTriple {
            y: 0.0,
            cb: 0.5,
            cr: 0.5,
        }
        .to_rgb();
        assert_eq!(rgb, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn out_of_gamut_clamps() {
        let y = Plane::filled(1, 1, 1.0);
        let cb = Plane::filled(1, 1, 1.0);
        let cr = Plane::filled(1, 1, 0.0);
        let img = ycbcr_to_rgb(&y, &cb, &cr).unwrap();
        assert!(img.data().iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(img.pixel(0, 0)[2], 1.0);
    }

    #[test]
    fn mismatched_planes_are_rejected() {
        let y = Plane::zeros(2, 2);
        let cb = Plane::zeros(2, 4);
        assert!(matches!(
            ycbcr_to_rgb(&y, &cb, &y),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn downsample_means() {
        let p = Plane::filled(4, 6, 0.3);
        let d = downsample_chroma(&p).unwrap();
        assert_eq!(d.dims(), (2, 3));
        assert!(d.data().iter().all(|&v| close(v, 0.3, 1e-15)));

        let p = Plane::new(2, 2, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(downsample_chroma(&p).unwrap().data(), &[0.5]);

        let checker = Plane::from_fn(4, 4, |r, c| ((r + c) % 2) as f64);
        let d = downsample_chroma(&checker).unwrap();
        assert_eq!(d.data(), &[0.5; 4]);

        assert!(matches!(
            downsample_chroma(&Plane::zeros(3, 4)),
            Err(Error::OddDimension { .. })
        ));
    }

    #[test]
    fn upsample_replicates() {
        let p = Plane::filled(1, 1, 0.7);
        let u = upsample_chroma(&p, 2, 2).unwrap();
        assert_eq!(u.data(), &[0.7; 4]);

        let p = Plane::new(2, 1, vec![0.1, 0.2]).unwrap();
        assert_eq!(upsample_chroma(&p, 4, 2).unwrap().dims(), (4, 2));
        assert!(upsample_chroma(&p, 4, 1).is_err());
        assert!(upsample_chroma(&p, 3, 8).is_err());
    }

    #[test]
    fn padding_rules() {
        let p = Plane::from_fn(8, 8, |r, c| (r * 8 + c) as f64);
        let padded = pad_to_pow2(&p);
        assert_eq!(padded.plane(), &p);
        assert_eq!((padded.orig_height(), padded.orig_width()), (8, 8));

        let p = Plane::from_fn(6, 6, |r, c| (r * 6 + c) as f64);
        let padded = pad_to_pow2(&p);
        assert_eq!(padded.plane().dims(), (8, 8));
        for r in 6..8 {
            for c in 0..6 {
                assert_eq!(padded.plane().get(r, c), p.get(5, c));
            }
        }
        assert_eq!(padded.plane().get(7, 7), p.get(5, 5));

        let padded = pad_to_pow2(&Plane::zeros(5, 9));
        assert_eq!(padded.plane().dims(), (8, 16));
        assert_eq!((padded.orig_height(), padded.orig_width()), (5, 9));

        let padded = pad_to_pow2_min(&Plane::zeros(5, 9), 16);
        assert_eq!(padded.plane().dims(), (16, 16));
    }

    #[test]
    fn channel_plane_requires_powers_of_two() {
        assert!(ChannelPlane::from_plane(Plane::zeros(8, 12)).is_err());
        assert!(ChannelPlane::from_plane(Plane::zeros(8, 16)).is_ok());
        assert!(ChannelPlane::new(Plane::zeros(8, 16), 9, 16).is_err());
    }

    #[test]
    fn raster_rejects_out_of_range() {
        assert!(matches!(
            RasterImage::new(1, 1, vec![0.0, 1.5, 0.0]),
            Err(Error::SampleOutOfRange { index: 1, .. })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn color_round_trip(r in 0.0..=1.0f64, g in 0.0..=1.0f64, b in 0.0..=1.0f64) {
                let t = ColorTriple::from_rgb([r, g, b]);
                prop_assert!((0.0..=1.0).contains(&t.y));
                prop_assert!((-1e-15..=1.0 + 1e-15).contains(&t.cb));
                prop_assert!((-1e-15..=1.0 + 1e-15).contains(&t.cr));
                let back = t.to_rgb();
                prop_assert!(close(back[0], r, 1e-6) && close(back[1], g, 1e-6) && close(back[2], b, 1e-6));
            }

            #[test]
            fn pad_then_crop_is_identity(h in 1usize..40, w in 1usize..40, seed in any::<u64>()) {
                let p = Plane::from_fn(h, w, |r, c| ((seed ^ (r * 131 + c) as u64) % 97) as f64 / 97.0);
                let padded = pad_to_pow2(&p);
                prop_assert!(padded.height().is_power_of_two() && padded.width().is_power_of_two());
                prop_assert_eq!(padded.cropped(), p);
            }

            #[test]
            fn downsample_inverts_upsample(h in 1usize..20, w in 1usize..20, seed in any::<u64>()) {
                let p = Plane::from_fn(h, w, |r, c| ((seed ^ (r * 31 + c) as u64) % 101) as f64 / 100.0);
                let up = upsample_chroma(&p, 2 * h, 2 * w).unwrap();
                prop_assert_eq!(downsample_chroma(&up).unwrap(), p);
            }
        }
    }

    #[test]
    fn color_round_trip_ten_thousand() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let rgb: [f64; 3] = [rng.random(), rng.random(), rng.random()];
            let back = ColorTriple::from_rgb(rgb).to_rgb();
            for k in 0..3 {
                assert!(close(back[k], rgb[k], 1e-6));
            }
        }
    }
}
