//! The refinement operator `A` and its spectral norm.
//!
//! For an element `R` with children `R_1..R_4`, `A` maps an image on `R` to
//! its top-left-8x8 approximation on `R` and then keeps, on every child, the
//! part of that approximation the child's own top-left block cannot
//! represent. `A` vanishes on everything outside the kept block of `R`, so its
//! norm is the norm of a `(h w) x 64` map. [`RefinementOperator`] evaluates
//! this map in the pixel domain, which is unitarily equivalent to the
//! coefficient-domain definition; [`build_a_matrix`] assembles the literal
//! coefficient-domain matrix for small sizes.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::Plane;
use crate::refiner::{refine_element, Element};
use crate::transform::{dct2, idct2, tl_embed, tl_restrict, Block8, CoeffMatrix, TlTransform, BLOCK};
use crate::{Error, Result};

pub trait LinearOperator {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// `x = A^T y`.
    fn apply_transpose(&self, y: &[f64], x: &mut [f64]);
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn set_column(&mut self, j: usize, col: &[f64]) {
        for (i, &v) in col.iter().enumerate() {
            self.data[i * self.cols + j] = v;
        }
    }
}

impl LinearOperator for DenseMatrix {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn apply_transpose(&self, y: &[f64], x: &mut [f64]) {
        x.iter_mut().for_each(|v| *v = 0.0);
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                for (xj, a) in x.iter_mut().zip(row) {
                    *xj += yi * a;
                }
            }
        }
    }
}

/// Result of a power iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    pub norm: f64,
    pub iterations: usize,
    /// `||A^T A v - s^2 v|| / s^2` at exit.
    pub relative_residual: f64,
    pub converged: bool,
}

fn norm2(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// Spectral norm by power iteration on `A^T A`, stopping once the
/// eigen-residual falls below `tol` relative to the Rayleigh quotient.
pub fn operator_norm<A: LinearOperator + ?Sized>(op: &A, tol: f64, max_iter: usize) -> NormEstimate {
    let n = op.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let s = norm2(&v);
    v.iter_mut().for_each(|x| *x /= s);
    let mut av = vec![0.0; op.rows()];
    let mut w = vec![0.0; n];
    let mut est = NormEstimate {
        norm: 0.0,
        iterations: 0,
        relative_residual: f64::INFINITY,
        converged: false,
    };
    for it in 1..=max_iter {
        op.apply(&v, &mut av);
        op.apply_transpose(&av, &mut w);
        let theta: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        est.iterations = it;
        if theta <= 0.0 {
            // A v = 0 for a generic start vector: A is zero
            est.norm = 0.0;
            est.relative_residual = 0.0;
            est.converged = true;
            return est;
        }
        let res = libm::sqrt(v.iter().zip(&w).map(|(a, b)| (b - theta * a) * (b - theta * a)).sum());
        est.norm = libm::sqrt(theta);
        est.relative_residual = res / theta;
        if est.relative_residual <= tol {
            est.converged = true;
            return est;
        }
        let s = norm2(&w);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / s;
        }
    }
    est
}

/// The operator `A` of an `height x width` element, restricted to the kept
/// 8x8 coefficients of the element (64 columns) with pixel-domain output.
#[derive(Clone, Debug)]
pub struct RefinementOperator {
    parent: TlTransform,
    child: TlTransform,
    children: [Element; 4],
    height: usize,
    width: usize,
}

impl RefinementOperator {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height < 2 * BLOCK || width < 2 * BLOCK {
            return Err(Error::TooSmall {
                height,
                width,
                min: 2 * BLOCK,
            });
        }
        let children = refine_element(&Element::root(height, width))?;
        Ok(Self {
            parent: TlTransform::new(height, width)?,
            child: TlTransform::new(height / 2, width / 2)?,
            children,
            height,
            width,
        })
    }

    /// Child-wise part of `x` that the children's kept blocks cannot represent.
    pub fn child_highpass(&self, x: &Plane) -> Plane {
        let mut out = Plane::zeros(self.height, self.width);
        for c in &self.children {
            let sub = x.sub(c.row, c.col, c.height, c.width);
            let mut hp = self.child.approximate(&sub);
            for (h, s) in hp.data_mut().iter_mut().zip(sub.data()) {
                *h = s - *h;
            }
            out.write_block(c.row, c.col, &hp);
        }
        out
    }

    /// `A` applied to a pixel image on the element.
    pub fn apply_pixels(&self, x: &Plane) -> Plane {
        self.child_highpass(&self.parent.approximate(x))
    }

    /// Dense `64 x 64` Gram matrix `A^T A`.
    pub fn gram(&self) -> DenseMatrix {
        let mut g = DenseMatrix::zeros(64, 64);
        let mut e = vec![0.0; 64];
        let mut y = vec![0.0; self.rows()];
        let mut col = vec![0.0; 64];
        for j in 0..64 {
            e[j] = 1.0;
            self.apply(&e, &mut y);
            self.apply_transpose(&y, &mut col);
            g.set_column(j, &col);
            e[j] = 0.0;
        }
        // symmetrize rounding noise
        for i in 0..64 {
            for j in 0..i {
                let m = 0.5 * (g.get(i, j) + g.get(j, i));
                g.set(i, j, m);
                g.set(j, i, m);
            }
        }
        g
    }
}

fn to_block(x: &[f64]) -> Block8 {
    let mut b = [[0.0; BLOCK]; BLOCK];
    for (k, row) in b.iter_mut().enumerate() {
        row.copy_from_slice(&x[k * BLOCK..(k + 1) * BLOCK]);
    }
    b
}

impl LinearOperator for RefinementOperator {
    fn rows(&self) -> usize {
        self.height * self.width
    }

    fn cols(&self) -> usize {
        BLOCK * BLOCK
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let pixels = self.parent.inverse(&to_block(x));
        y.copy_from_slice(self.child_highpass(&pixels).data());
    }

    fn apply_transpose(&self, y: &[f64], x: &mut [f64]) {
        // the child-wise high-pass is an orthogonal projection, hence self-adjoint
        let y = Plane::new(self.height, self.width, y.to_vec()).expect("sized by rows()");
        let c = self.parent.forward(&self.child_highpass(&y));
        for (k, row) in c.iter().enumerate() {
            x[k * BLOCK..(k + 1) * BLOCK].copy_from_slice(row);
        }
    }
}

/// `||A||` for an `height x width` element: power iteration on the 64x64 Gram matrix.
pub fn refinement_operator_norm(height: usize, width: usize) -> Result<NormEstimate> {
    let op = RefinementOperator::new(height, width)?;
    let gram = op.gram();
    // children of 8x8 reproduce any input exactly: G is rounding noise
    if gram.data().iter().all(|v| v.abs() < 1e-24) {
        return Ok(NormEstimate {
            norm: 0.0,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        });
    }
    let sym = SymmetricRoot(gram);
    Ok(operator_norm(&sym, 1e-12, 1_000_000))
}

// Identity forward map with G as the "transpose": power iteration then
// iterates G itself and reports sqrt(lambda_max(G)) = ||A||.
struct SymmetricRoot(DenseMatrix);

impl LinearOperator for SymmetricRoot {
    fn rows(&self) -> usize {
        self.0.rows
    }

    fn cols(&self) -> usize {
        self.0.cols
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }

    fn apply_transpose(&self, y: &[f64], x: &mut [f64]) {
        self.0.apply(y, x);
    }
}

/// Literal coefficient-domain matrix of `A` (`h w` rows: the four children's
/// coefficient matrices stacked in order; `h w` columns: coefficients of `R`).
pub fn build_a_matrix(height: usize, width: usize) -> Result<DenseMatrix> {
    if height < 2 * BLOCK || width < 2 * BLOCK {
        return Err(Error::TooSmall {
            height,
            width,
            min: 2 * BLOCK,
        });
    }
    let n = height * width;
    let children = refine_element(&Element::root(height, width))?;
    let quarter = n / 4;
    let mut m = DenseMatrix::zeros(n, n);
    let mut col = vec![0.0; n];
    for k in 0..height {
        for l in 0..width {
            let mut e = Plane::zeros(height, width);
            e.set(k, l, 1.0);
            let kept = tl_restrict(&CoeffMatrix::new(e))?;
            let pixels = idct2(&tl_embed(&kept, height, width)?);
            col.iter_mut().for_each(|v| *v = 0.0);
            for (i, c) in children.iter().enumerate() {
                let coeffs = dct2(&pixels.sub(c.row, c.col, c.height, c.width));
                let mut high = coeffs.into_plane();
                for r in 0..BLOCK {
                    for s in 0..BLOCK {
                        high.set(r, s, 0.0);
                    }
                }
                col[i * quarter..(i + 1) * quarter].copy_from_slice(high.data());
            }
            m.set_column(k * width + l, &col);
        }
    }
    Ok(m)
}

/// The 32x32 image consisting of the single DCT coefficient `(5, 5)` with amplitude 15.
pub fn counterexample_element() -> Plane {
    let mut c = Plane::zeros(32, 32);
    c.set(5, 5, 15.0);
    idct2(&CoeffMatrix::new(c))
}
