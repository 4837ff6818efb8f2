//! Orthonormal 2D DCT-II, the top-left 8x8 restriction/embedding, and
//! quantization against the JPEG luminance table.
//!
//! Frequency indices are zero-based; `(0, 0)` is the DC coefficient. The 2D
//! transform of an `h x w` block is separable with scaling
//! `2 / sqrt(h w) * C(i) C(j)`, `C(0) = 1/sqrt(2)`, which makes it orthonormal.
//!
//! Element approximations only ever touch the top-left 8x8 frequencies, so
//! they use [`TlTransform`], a partial transform costing `O(16 h w)` instead of
//! a full `O(h w (h + w))` DCT.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Deref;

use crate::image::Plane;
use crate::{Error, Result};

/// Side of the stored frequency block.
pub const BLOCK: usize = 8;

/// Sample value mapped to zero before coding (JPEG's level shift of 128).
pub const LEVEL_SHIFT: f64 = 0.5;

/// Factor from `[0, 1]` samples to the 8-bit range the quantization table is designed for.
pub const SAMPLE_SCALE: f64 = 255.0;

pub type Block8 = [[f64; BLOCK]; BLOCK];

/// 8x8 table of positive quantization divisors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuantMatrix(pub [[u16; BLOCK]; BLOCK]);

/// The JPEG standard luminance quantization table.
pub const QUANT_MATRIX: QuantMatrix = QuantMatrix([
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
]);

/// Quantized top-left DCT coefficients of one element.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct CoeffBlock(pub [[i32; BLOCK]; BLOCK]);

impl CoeffBlock {
    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(|&v| v == 0)
    }
}

/// Real DCT coefficients of an `h x w` block; `(0, 0)` is DC.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffMatrix(Plane);

impl CoeffMatrix {
    pub fn new(values: Plane) -> Self {
        CoeffMatrix(values)
    }

    pub fn into_plane(self) -> Plane {
        self.0
    }
}

impl Deref for CoeffMatrix {
    type Target = Plane;

    fn deref(&self) -> &Plane {
        &self.0
    }
}

/// The first `rows` orthonormal DCT-II basis vectors of length `n`.
#[derive(Clone, Debug)]
pub struct DctBasis {
    n: usize,
    rows: usize,
    table: Vec<f64>,
}

impl DctBasis {
    pub fn new(n: usize, rows: usize) -> Self {
        assert!(n > 0 && rows <= n);
        let mut table = Vec::with_capacity(rows * n);
        let dc = libm::sqrt(1.0 / n as f64);
        let ac = libm::sqrt(2.0 / n as f64);
        let period = 4 * n;
        for k in 0..rows {
            let scale = if k == 0 { dc } else { ac };
            for i in 0..n {
                // cos((2i+1) k pi / 2n) with the integer phase reduced mod 4n
                let phase = ((2 * i + 1) * k) % period;
                table.push(scale * libm::cos(phase as f64 * PI / (2 * n) as f64));
            }
        }
        Self { n, rows, table }
    }

    pub fn full(n: usize) -> Self {
        Self::new(n, n)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn row(&self, k: usize) -> &[f64] {
        &self.table[k * self.n..(k + 1) * self.n]
    }
}

/// Full 2D DCT of any block.
pub fn dct2(block: &Plane) -> CoeffMatrix {
    let (h, w) = block.dims();
    let bh = DctBasis::full(h);
    let bw = DctBasis::full(w);
    CoeffMatrix(separable(block, &bh, &bw, false))
}

/// Inverse of [`dct2`].
pub fn idct2(coeffs: &CoeffMatrix) -> Plane {
    let (h, w) = coeffs.dims();
    let bh = DctBasis::full(h);
    let bw = DctBasis::full(w);
    separable(coeffs, &bh, &bw, true)
}

// y = Bh x Bw^T (forward) or y = Bh^T x Bw (inverse) for square full bases.
fn separable(x: &Plane, bh: &DctBasis, bw: &DctBasis, inverse: bool) -> Plane {
    let (h, w) = x.dims();
    let mut tmp = vec![0.0; h * w];
    for r in 0..h {
        let row = x.row(r);
        let out = &mut tmp[r * w..(r + 1) * w];
        if inverse {
            for (l, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    for (o, b) in out.iter_mut().zip(bw.row(l)) {
                        *o += v * b;
                    }
                }
            }
        } else {
            for (l, o) in out.iter_mut().enumerate() {
                *o = dot(row, bw.row(l));
            }
        }
    }
    let mut out = vec![0.0; h * w];
    for k in 0..h {
        let basis = bh.row(k);
        if inverse {
            // out[i][:] += basis[i] * tmp[k][:]
            let src = &tmp[k * w..(k + 1) * w];
            for (i, &b) in basis.iter().enumerate() {
                let dst = &mut out[i * w..(i + 1) * w];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += b * s;
                }
            }
        } else {
            let dst = &mut out[k * w..(k + 1) * w];
            for (i, &b) in basis.iter().enumerate() {
                let src = &tmp[i * w..(i + 1) * w];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += b * s;
                }
            }
        }
    }
    Plane::new(h, w, out).expect("dimensions preserved")
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Entries with both frequency indices below 8.
pub fn tl_restrict(coeffs: &CoeffMatrix) -> Result<Block8> {
    let (h, w) = coeffs.dims();
    if h < BLOCK || w < BLOCK {
        return Err(Error::TooSmall {
            height: h,
            width: w,
            min: BLOCK,
        });
    }
    let mut out = [[0.0; BLOCK]; BLOCK];
    for (k, row) in out.iter_mut().enumerate() {
        row.copy_from_slice(&coeffs.row(k)[..BLOCK]);
    }
    Ok(out)
}

/// Zero-padded embedding of an 8x8 block into an `h x w` coefficient matrix.
pub fn tl_embed(block: &Block8, height: usize, width: usize) -> Result<CoeffMatrix> {
    if height < BLOCK || width < BLOCK {
        return Err(Error::TooSmall {
            height,
            width,
            min: BLOCK,
        });
    }
    let mut plane = Plane::zeros(height, width);
    for (k, row) in block.iter().enumerate() {
        for (l, &v) in row.iter().enumerate() {
            plane.set(k, l, v);
        }
    }
    Ok(CoeffMatrix(plane))
}

/// Entrywise `round(c ./ Q)`, rounding half away from zero.
pub fn quantize(c8: &Block8, q: &QuantMatrix) -> CoeffBlock {
    let mut out = [[0i32; BLOCK]; BLOCK];
    for k in 0..BLOCK {
        for l in 0..BLOCK {
            out[k][l] = libm::round(c8[k][l] / q.0[k][l] as f64) as i32;
        }
    }
    CoeffBlock(out)
}

/// Entrywise `Q .* f`.
pub fn dequantize(f: &CoeffBlock, q: &QuantMatrix) -> Block8 {
    core::array::from_fn(|k| core::array::from_fn(|l| f.0[k][l] as f64 * q.0[k][l] as f64))
}

/// Partial transform pair for one element size: `TL(DCT(x))` and `IDCT(TL^-1(c))`.
#[derive(Clone, Debug)]
pub struct TlTransform {
    rows: DctBasis,
    cols: DctBasis,
}

impl TlTransform {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height < BLOCK || width < BLOCK {
            return Err(Error::TooSmall {
                height,
                width,
                min: BLOCK,
            });
        }
        Ok(Self {
            rows: DctBasis::new(height, BLOCK),
            cols: DctBasis::new(width, BLOCK),
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows.len(), self.cols.len())
    }

    /// `TL(DCT(x))` for a block of this transform's size.
    pub fn forward(&self, x: &Plane) -> Block8 {
        let (h, w) = self.dims();
        assert_eq!(x.dims(), (h, w));
        // t[i][l] = sum_j x[i][j] * Bw[l][j]
        let mut t = vec![[0.0; BLOCK]; h];
        for (i, ti) in t.iter_mut().enumerate() {
            let row = x.row(i);
            for (l, v) in ti.iter_mut().enumerate() {
                *v = dot(row, self.cols.row(l));
            }
        }
        let mut c = [[0.0; BLOCK]; BLOCK];
        for (k, ck) in c.iter_mut().enumerate() {
            let bk = self.rows.row(k);
            for (i, ti) in t.iter().enumerate() {
                let b = bk[i];
                for l in 0..BLOCK {
                    ck[l] += b * ti[l];
                }
            }
        }
        c
    }

    /// `IDCT(TL^-1(c))` at this transform's size.
    pub fn inverse(&self, c: &Block8) -> Plane {
        let (h, w) = self.dims();
        // u[k][j] = sum_l c[k][l] * Bw[l][j]
        let mut u = vec![0.0; BLOCK * w];
        for (uk, ck) in u.chunks_exact_mut(w).zip(c) {
            for (l, &v) in ck.iter().enumerate() {
                if v != 0.0 {
                    for (o, b) in uk.iter_mut().zip(self.cols.row(l)) {
                        *o += v * b;
                    }
                }
            }
        }
        let mut out = vec![0.0; h * w];
        for k in 0..BLOCK {
            let uk = &u[k * w..(k + 1) * w];
            if uk.iter().all(|&v| v == 0.0) {
                continue;
            }
            for (i, &b) in self.rows.row(k).iter().enumerate() {
                let dst = &mut out[i * w..(i + 1) * w];
                for (d, s) in dst.iter_mut().zip(uk) {
                    *d += b * s;
                }
            }
        }
        Plane::new(h, w, out).expect("dimensions preserved")
    }

    /// Unquantized approximation: keep the top-left 8x8 frequencies only.
    pub fn approximate(&self, x: &Plane) -> Plane {
        self.inverse(&self.forward(x))
    }

    /// Quantized coefficients of `x` in the level-shifted 8-bit domain.
    pub fn encode(&self, x: &Plane, q: &QuantMatrix) -> CoeffBlock {
        let mut c = self.forward(x);
        let (h, w) = self.dims();
        // the level shift only moves DC: DCT(const) = const * sqrt(h w) at (0, 0)
        c[0][0] -= LEVEL_SHIFT * libm::sqrt((h * w) as f64);
        for v in c.iter_mut().flatten() {
            *v *= SAMPLE_SCALE;
        }
        quantize(&c, q)
    }

    /// Reconstruction of an element from its quantized coefficients.
    pub fn decode(&self, f: &CoeffBlock, q: &QuantMatrix) -> Plane {
        let mut c = dequantize(f, q);
        for v in c.iter_mut().flatten() {
            *v /= SAMPLE_SCALE;
        }
        let mut out = self.inverse(&c);
        for v in out.data_mut() {
            *v += LEVEL_SHIFT;
        }
        out
    }
}

/// `IDCT(TL^-1(TL(DCT(x))))`, the approximation used while adapting the mesh.
pub fn approx_block_unquantized(block: &Plane) -> Result<Plane> {
    let (h, w) = block.dims();
    Ok(TlTransform::new(h, w)?.approximate(block))
}

/// Quantized approximation of one element, identical to what the decoder produces.
pub fn approx_block_final(block: &Plane, q: &QuantMatrix) -> Result<Plane> {
    let (h, w) = block.dims();
    let t = TlTransform::new(h, w)?;
    Ok(t.decode(&t.encode(block, q), q))
}
