//! Whole-image encoding: color conversion, padding, chroma subsampling,
//! per-channel meshing and assembly of the stream.

use alloc::vec::Vec;

use crate::bitstream::{CompressedImage, ElementRecord, CHANNELS};
use crate::estimator::NormKind;
use crate::image::{downsample_chroma, pad_to_pow2_min, rgb_to_ycbcr, Plane, RasterImage};
use crate::refiner::{run_adaptive, uniform_mesh, MeshResult};
use crate::{Error, Result};

/// Padded planes are at least this large so that chroma keeps 8x8 blocks.
pub const MIN_PADDED: usize = 16;

/// How the mesh of each channel is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MeshMode {
    /// Greedy refinement up to the tolerance.
    #[default]
    Adaptive,
    /// The fixed grid of 8-pixel-high elements, as in baseline JPEG.
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EncodeConfig {
    /// Tolerance for the luma channel.
    pub tolerance: f64,
    /// Tolerance for both chroma channels; twice the luma tolerance if unset.
    pub chroma_tolerance: Option<f64>,
    pub norm: NormKind,
    pub mesh: MeshMode,
}

impl EncodeConfig {
    pub fn new(tolerance: f64) -> Self {
        Self {
            tolerance,
            chroma_tolerance: None,
            norm: NormKind::L2,
            mesh: MeshMode::Adaptive,
        }
    }

    pub fn uniform() -> Self {
        Self {
            mesh: MeshMode::Uniform,
            ..Self::new(f64::INFINITY)
        }
    }

    pub fn with_norm(mut self, norm: NormKind) -> Self {
        self.norm = norm;
        self
    }

    pub fn with_chroma_tolerance(mut self, tolerance: f64) -> Self {
        self.chroma_tolerance = Some(tolerance);
        self
    }

    /// Tolerance applied to channel `c` (0 = Y).
    pub fn channel_tolerance(&self, c: usize) -> f64 {
        if c == 0 {
            self.tolerance
        } else {
            self.chroma_tolerance.unwrap_or(2.0 * self.tolerance)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mesh == MeshMode::Uniform {
            return Ok(());
        }
        let ok = |t: f64| t > 0.0;
        if !ok(self.tolerance) || !self.chroma_tolerance.is_none_or(ok) {
            return Err(Error::InvalidParameter("tolerance must be positive"));
        }
        Ok(())
    }
}

/// The three planes to be meshed plus the frame geometry.
#[derive(Clone, Debug)]
pub struct PreparedImage {
    /// Y at padded size, Cb and Cr at half the padded size.
    pub channels: [Plane; CHANNELS],
    pub height: usize,
    pub width: usize,
    pub orig_height: usize,
    pub orig_width: usize,
}

pub fn prepare_channels(img: &RasterImage) -> Result<PreparedImage> {
    let [y, cb, cr] = rgb_to_ycbcr(img);
    let y = pad_to_pow2_min(&y, MIN_PADDED);
    let cb = downsample_chroma(pad_to_pow2_min(&cb, MIN_PADDED).plane())?;
    let cr = downsample_chroma(pad_to_pow2_min(&cr, MIN_PADDED).plane())?;
    Ok(PreparedImage {
        height: y.height(),
        width: y.width(),
        orig_height: img.height(),
        orig_width: img.width(),
        channels: [y.into_plane(), cb, cr],
    })
}

/// Meshes and quantizes one channel.
pub fn encode_channel(plane: &Plane, tolerance: f64, norm: NormKind, mesh: MeshMode) -> Result<MeshResult> {
    match mesh {
        MeshMode::Adaptive => run_adaptive(plane, tolerance, norm),
        MeshMode::Uniform => uniform_mesh(plane, norm),
    }
}

/// Builds the stream from per-channel results.
pub fn assemble(prepared: &PreparedImage, norm: NormKind, meshes: &[MeshResult; CHANNELS]) -> Result<CompressedImage> {
    let dim = |v: usize| u32::try_from(v).map_err(|_| Error::InvalidParameter("image too large"));
    let mut channels: [Vec<ElementRecord>; CHANNELS] = Default::default();
    for (records, m) in channels.iter_mut().zip(meshes) {
        *records = m
            .leaves
            .iter()
            .zip(&m.blocks)
            .map(|(e, b)| ElementRecord::from_block(e.level, b))
            .collect();
    }
    Ok(CompressedImage {
        height: dim(prepared.height)?,
        width: dim(prepared.width)?,
        orig_height: dim(prepared.orig_height)?,
        orig_width: dim(prepared.orig_width)?,
        norm,
        channels,
    })
}

#[derive(Clone, Debug)]
pub struct EncodeOutput {
    pub compressed: CompressedImage,
    /// Y, Cb, Cr.
    pub channels: [MeshResult; CHANNELS],
}

impl EncodeOutput {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        Ok(self.compressed.serialize()?)
    }

    pub fn element_counts(&self) -> [usize; CHANNELS] {
        [0, 1, 2].map(|c| self.channels[c].leaves.len())
    }
}

/// Encodes an image sequentially, one channel after the other.
pub fn encode(img: &RasterImage, config: &EncodeConfig) -> Result<EncodeOutput> {
    config.validate()?;
    let prepared = prepare_channels(img)?;
    let [a, b, c] = [0, 1, 2].map(|i| {
        encode_channel(
            &prepared.channels[i],
            config.channel_tolerance(i),
            config.norm,
            config.mesh,
        )
    });
    let channels = [a?, b?, c?];
    let compressed = assemble(&prepared, config.norm, &channels)?;
    Ok(EncodeOutput { compressed, channels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::{decode, place_records};

    #[test]
    fn constant_image_round_trip() {
        let img = RasterImage::from_fn(64, 64, |_, _| [0.2, 0.6, 0.9]).unwrap();
        let out = encode(&img, &EncodeConfig::new(0.01)).unwrap();
        assert_eq!(out.element_counts(), [1, 1, 1]);
        let bytes = out.to_bytes().unwrap();
        assert!(bytes.len() < 100);
        let back = decode(&bytes).unwrap();
        assert_eq!((back.height(), back.width()), (64, 64));
        for (a, b) in back.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 0.01, "{a} vs {b}");
        }
    }

    #[test]
    fn odd_sizes_are_padded_and_cropped() {
        let img = RasterImage::from_fn(5, 9, |i, j| [i as f64 / 5.0, j as f64 / 9.0, 0.5]).unwrap();
        let out = encode(&img, &EncodeConfig::new(1e-3)).unwrap();
        assert_eq!((out.compressed.height, out.compressed.width), (16, 16));
        let back = decode(&out.to_bytes().unwrap()).unwrap();
        assert_eq!((back.height(), back.width()), (5, 9));
    }

    #[test]
    fn positions_survive_the_stream() {
        let img = RasterImage::from_fn(48, 80, |i, j| {
            let v = if (i / 7 + j / 11) % 3 == 0 { 0.9 } else { 0.2 };
            [v, 1.0 - v, (i as f64 / 48.0)]
        })
        .unwrap();
        let out = encode(&img, &EncodeConfig::new(2e-3)).unwrap();
        let parsed = CompressedImage::deserialize(&out.to_bytes().unwrap()).unwrap();
        for c in 0..CHANNELS {
            let (h, w) = parsed.channel_dims(c);
            let placed = place_records(&parsed.channels[c], h, w, c).unwrap();
            assert_eq!(placed, out.channels[c].leaves);
        }
    }

    #[test]
    fn config_defaults_and_validation() {
        let c = EncodeConfig::new(0.01);
        assert_eq!(c.channel_tolerance(0), 0.01);
        assert_eq!(c.channel_tolerance(2), 0.02);
        assert_eq!(c.with_chroma_tolerance(0.5).channel_tolerance(1), 0.5);
        assert!(EncodeConfig::new(0.0).validate().is_err());
        assert!(EncodeConfig::new(f64::NAN).validate().is_err());
        assert!(EncodeConfig::new(0.1).with_chroma_tolerance(-1.0).validate().is_err());
        assert!(EncodeConfig::uniform().validate().is_ok());
    }
}
