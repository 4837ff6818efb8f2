//! Adaptive quadtree image compression with JPEG-style block coding.
//!
//! Each color channel is covered by a quadtree mesh of rectangles that share
//! the frame's aspect ratio. On every element only the lowest 8x8 DCT
//! frequencies are kept and quantized with the JPEG luminance table. The mesh
//! is grown greedily on a modified (ancestor-coupled) error indicator, which
//! yields near-optimal meshes whenever the children of an element do not
//! carry much more error than the element itself.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. File formats,
//! the command line front end and parallel drivers live in the `ajpeg` crate.
//!
//! Module map:
//!
//! * [`image`]: raster and channel planes, YCbCr conversion, chroma resampling, padding.
//! * [`transform`]: orthonormal DCT-II, top-left 8x8 restriction, quantization.
//! * [`estimator`]: weighted L2 and BV local/global errors, modified error recursion.
//! * [`refiner`]: the greedy refinement loop and the mesh tree.
//! * [`bitstream`]: the `.ajpg` byte layout, zigzag enumeration, run-length stage.
//! * [`decoder`]: position-free reconstruction from ordered element records.
//! * [`codec`]: whole-image encode pipeline.
//! * [`analysis`]: operator norms, non-central chi-squared CDFs, probability bounds, Monte-Carlo checks.
#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::needless_range_loop, clippy::excessive_precision))]

extern crate alloc;

pub mod analysis;
pub mod bitstream;
pub mod codec;
pub mod decoder;
mod error;
pub mod estimator;
pub mod image;
pub mod refiner;
pub mod transform;

pub use error::{Error, Result};

pub use bitstream::{CompressedImage, ElementRecord, FormatError};
pub use codec::{encode, EncodeConfig, EncodeOutput, MeshMode};
pub use decoder::decode;
pub use estimator::{ErrorNorm, NormKind};
pub use image::{ChannelPlane, Plane, RasterImage};
pub use refiner::{Element, MeshTree};
pub use transform::{CoeffBlock, QuantMatrix, QUANT_MATRIX};
