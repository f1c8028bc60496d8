//! Arithmetic in the matrix algebra `M_k(C)`.
//!
//! Elements are stored row-major as `k * k` complex entries. The sampled
//! function types keep their values in one flat buffer of such blocks, so
//! the hot loops elsewhere in the crate work on raw slices through the
//! `block_*` kernels below rather than on [`AlgebraElement`] values.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// A `k x k` complex matrix, the desk-scale stand-in for a separable
/// C*-algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    dim: usize,
    entries: Vec<C64>,
}

impl AlgebraElement {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            out.entries[i * dim + i] = ONE;
        }
        out
    }

    pub fn scalar(dim: usize, value: C64) -> Self {
        let mut out = Self::identity(dim);
        out.scale_mut(value);
        out
    }

    /// Builds an element from row-major entries.
    pub fn from_entries(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("algebra dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::Shape("rows must form a square matrix".into()));
            }
            entries.extend_from_slice(row);
        }
        Self::from_entries(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        block_adjoint(self.dim, &self.entries, &mut out.entries);
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "algebra dimension mismatch");
        let mut out = Self::zeros(self.dim);
        block_mul_acc(self.dim, &self.entries, &rhs.entries, &mut out.entries);
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "algebra dimension mismatch");
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            dim: self.dim,
            entries,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(-ONE))
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut out = self.clone();
        out.scale_mut(factor);
        out
    }

    fn scale_mut(&mut self, factor: C64) {
        for z in &mut self.entries {
            *z *= factor;
        }
    }

    /// Hermitian part `(a + a*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        self.add(&self.adjoint()).scale(C64::new(0.5, 0.0))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_hermitian_eigenvalue(&self) -> f64 {
        let h = self.hermitian_part();
        let m = DMatrix::from_row_slice(self.dim, self.dim, &h.entries);
        m.symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }
}

/// C*-norm of `a`: its largest singular value.
pub fn cstar_norm(a: &AlgebraElement) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("algebra element has non-finite entries".into()));
    }
    Ok(block_norm(a.dim, &a.entries))
}

/// The approximate unit `u_k` of `M_dim(C)`. The algebra is unital, so the
/// identity is a valid choice for every index.
pub fn approximate_unit(_index: usize, dim: usize) -> AlgebraElement {
    AlgebraElement::identity(dim)
}

/// Largest singular value of a row-major `k x k` block.
pub fn block_norm(k: usize, block: &[C64]) -> f64 {
    match k {
        1 => block[0].norm(),
        2 => {
            // sigma_max^2 = (|M|_F^2 + sqrt(|M|_F^4 - 4 |det M|^2)) / 2
            let f2 = block.iter().map(|z| z.norm_sqr()).sum::<f64>();
            let det = (block[0] * block[3] - block[1] * block[2]).norm();
            let disc = (f2 * f2 - 4.0 * det * det).max(0.0).sqrt();
            (0.5 * (f2 + disc)).sqrt()
        }
        _ => {
            let m = DMatrix::from_row_slice(k, k, block);
            m.singular_values().iter().copied().fold(0.0, f64::max)
        }
    }
}

/// Frobenius norm of a block; cheap upper bound for [`block_norm`].
pub fn block_frobenius(block: &[C64]) -> f64 {
    block.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `out += a * b` for row-major `k x k` blocks.
#[inline]
pub fn block_mul_acc(k: usize, a: &[C64], b: &[C64], out: &mut [C64]) {
    if k == 1 {
        out[0] += a[0] * b[0];
        return;
    }
    for i in 0..k {
        let row = &a[i * k..(i + 1) * k];
        let dst = &mut out[i * k..(i + 1) * k];
        for (l, &ail) in row.iter().enumerate() {
            if ail == ZERO {
                continue;
            }
            let src = &b[l * k..(l + 1) * k];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += ail * s;
            }
        }
    }
}

/// `out += scale * a * b`.
#[inline]
pub fn block_mul_acc_scaled(k: usize, scale: C64, a: &[C64], b: &[C64], out: &mut [C64]) {
    match k {
        1 => out[0] += scale * a[0] * b[0],
        2 => mul_acc_fixed::<2>(scale, a, b, out),
        3 => mul_acc_fixed::<3>(scale, a, b, out),
        4 => mul_acc_fixed::<4>(scale, a, b, out),
        _ => {
            for i in 0..k {
                let dst = &mut out[i * k..(i + 1) * k];
                for l in 0..k {
                    let ail = scale * a[i * k + l];
                    let src = &b[l * k..(l + 1) * k];
                    for (d, &s) in dst.iter_mut().zip(src) {
                        *d += ail * s;
                    }
                }
            }
        }
    }
}

#[inline(always)]
fn mul_acc_fixed<const K: usize>(scale: C64, a: &[C64], b: &[C64], out: &mut [C64]) {
    let (a, b, out) = (&a[..K * K], &b[..K * K], &mut out[..K * K]);
    for i in 0..K {
        for l in 0..K {
            let ail = scale * a[i * K + l];
            for c in 0..K {
                out[i * K + c] += ail * b[l * K + c];
            }
        }
    }
}

/// `out += a^* b`.
#[inline]
pub fn block_adjoint_mul_acc(k: usize, a: &[C64], b: &[C64], out: &mut [C64]) {
    for i in 0..k {
        let dst = &mut out[i * k..(i + 1) * k];
        for l in 0..k {
            let ali = a[l * k + i].conj();
            let src = &b[l * k..(l + 1) * k];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += ali * s;
            }
        }
    }
}

/// `out += scale * a^* b`.
#[inline]
pub fn block_adjoint_mul_acc_scaled(k: usize, scale: C64, a: &[C64], b: &[C64], out: &mut [C64]) {
    match k {
        1 => out[0] += scale * a[0].conj() * b[0],
        2 => adjoint_mul_acc_fixed::<2>(scale, a, b, out),
        3 => adjoint_mul_acc_fixed::<3>(scale, a, b, out),
        4 => adjoint_mul_acc_fixed::<4>(scale, a, b, out),
        _ => {
            for i in 0..k {
                let dst = &mut out[i * k..(i + 1) * k];
                for l in 0..k {
                    let ali = scale * a[l * k + i].conj();
                    let src = &b[l * k..(l + 1) * k];
                    for (d, &s) in dst.iter_mut().zip(src) {
                        *d += ali * s;
                    }
                }
            }
        }
    }
}

#[inline(always)]
fn adjoint_mul_acc_fixed<const K: usize>(scale: C64, a: &[C64], b: &[C64], out: &mut [C64]) {
    let (a, b, out) = (&a[..K * K], &b[..K * K], &mut out[..K * K]);
    for i in 0..K {
        for l in 0..K {
            let ali = scale * a[l * K + i].conj();
            for c in 0..K {
                out[i * K + c] += ali * b[l * K + c];
            }
        }
    }
}

pub fn block_adjoint(k: usize, a: &[C64], out: &mut [C64]) {
    for i in 0..k {
        for j in 0..k {
            out[j * k + i] = a[i * k + j].conj();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_and_zero_norms() {
        assert_eq!(cstar_norm(&AlgebraElement::identity(2)).unwrap(), 1.0);
        assert_eq!(cstar_norm(&AlgebraElement::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn nilpotent_norm_matches_explicit_svd() {
        // [[0,2],[0,0]]: a^* a = diag(0, 4), so the singular values are {2, 0}.
        let a = AlgebraElement::from_rows(&[vec![c(0., 0.), c(2., 0.)], vec![c(0., 0.), c(0., 0.)]])
            .unwrap();
        assert!((cstar_norm(&a).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        let a = AlgebraElement::from_entries(1, vec![c(f64::NAN, 0.0)]).unwrap();
        assert!(matches!(cstar_norm(&a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn approximate_unit_is_exact_unit() {
        let a = AlgebraElement::from_rows(&[vec![c(1., 2.), c(-0.5, 0.)], vec![c(0., 3.), c(4., -1.)]])
            .unwrap();
        for index in [1, 10] {
            let u = approximate_unit(index, 2);
            assert_eq!(u, AlgebraElement::identity(2));
            assert_eq!(cstar_norm(&u.mul(&a).sub(&a)).unwrap(), 0.0);
        }
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(AlgebraElement::from_entries(2, vec![ONE; 3]), Err(Error::Shape(_))));
        assert!(matches!(AlgebraElement::from_entries(0, vec![]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn scaled_kernel_matches_plain_kernel() {
        let a = [c(1., 2.), c(3., -1.), c(0.5, 0.5), c(-2., 0.)];
        let b = [c(0., 1.), c(1., 1.), c(2., -3.), c(0.25, 0.)];
        let mut plain = [ZERO; 4];
        block_mul_acc(2, &a, &b, &mut plain);
        let mut scaled = [ZERO; 4];
        block_mul_acc_scaled(2, c(0., 2.), &a, &b, &mut scaled);
        for (p, s) in plain.iter().zip(&scaled) {
            assert!((p * c(0., 2.) - s).norm() < 1e-14);
        }
    }
}
