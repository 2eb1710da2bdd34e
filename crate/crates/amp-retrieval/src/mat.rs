//! Dense complex matrices and the element-wise operators used throughout the
//! one-bit estimation pipeline.
//!
//! Everything here is a small dense matrix (at most a few thousand entries),
//! stored row-major. Two element-wise products appear besides the ordinary
//! Hadamard product:
//!
//! * [`sign_quantize`] — per-component sign, modelling a pair of one-bit ADCs
//!   on the real and imaginary rails;
//! * [`odot_mix`] — the component-mixing product `Re(a)Re(b) + j Im(a)Im(b)`.
//!
//! Together they satisfy the lossless decomposition
//! `odot_mix(sign_quantize(Z), amplitude(Z)) == Z`, which is the identity the
//! amplitude-retrieval estimator exploits.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) const CZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting NaN/Inf components.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimMismatch {
                op: "ComplexMatrix::new",
                expected: format!("{} entries", rows * cols),
                got: format!("{}", entries.len()),
            });
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, entries })
    }

    /// Internal constructor for values produced by our own arithmetic.
    pub(crate) fn from_parts(rows: usize, cols: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), rows * cols);
        Self { rows, cols, entries }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_parts(rows, cols, vec![CZERO; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::from_parts(rows, cols, entries)
    }

    /// Column vector from a slice.
    pub fn col_from_slice(v: &[Complex64]) -> Self {
        Self::from_parts(v.len(), 1, v.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Matrix product; inner dimensions must agree.
    pub fn matmul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul: inner dimensions must agree");
        let mut out = vec![CZERO; self.rows * rhs.cols];
        for i in 0..self.rows {
            let arow = self.row(i);
            let orow = &mut out[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &aik) in arow.iter().enumerate() {
                let brow = &rhs.entries[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &bkj) in orow.iter_mut().zip(brow) {
                    *o += aik * bkj;
                }
            }
        }
        ComplexMatrix::from_parts(self.rows, rhs.cols, out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add: shape mismatch");
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect();
        ComplexMatrix::from_parts(self.rows, self.cols, entries)
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub: shape mismatch");
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect();
        ComplexMatrix::from_parts(self.rows, self.cols, entries)
    }

    pub fn scale(&self, c: Complex64) -> ComplexMatrix {
        let entries = self.entries.iter().map(|z| z * c).collect();
        ComplexMatrix::from_parts(self.rows, self.cols, entries)
    }

    pub fn scale_re(&self, c: f64) -> ComplexMatrix {
        let entries = self.entries.iter().map(|z| z * c).collect();
        ComplexMatrix::from_parts(self.rows, self.cols, entries)
    }

    /// Column-major vectorization: stacks columns into one long vector.
    pub fn vec_cols(&self) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(self.rows * self.cols);
        for j in 0..self.cols {
            for i in 0..self.rows {
                v.push(self.get(i, j));
            }
        }
        v
    }

    /// Inverse of [`vec_cols`]: reshapes a column-stacked vector into a matrix.
    pub fn from_vec_cols(rows: usize, cols: usize, v: &[Complex64]) -> Self {
        assert_eq!(v.len(), rows * cols, "from_vec_cols: length mismatch");
        Self::from_fn(rows, cols, |i, j| v[j * rows + i])
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Sign of a real scalar with the one-bit ADC convention `sign(0) = +1`.
#[inline]
pub fn sign_unit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// One-bit quantization: per entry, `sign(Re) + j sign(Im)` with `sign(0) = +1`.
pub fn sign_quantize(z: &ComplexMatrix) -> ComplexMatrix {
    let entries = z
        .entries()
        .iter()
        .map(|v| Complex64::new(sign_unit(v.re), sign_unit(v.im)))
        .collect();
    ComplexMatrix::from_parts(z.rows(), z.cols(), entries)
}

/// Component magnitudes: per entry, `|Re| + j |Im|`.
///
/// This is the quantity the estimator retrieves; it is exactly what the
/// one-bit ADCs discard, in the sense that
/// `odot_mix(sign_quantize(Z), amplitude(Z)) == Z`.
pub fn amplitude(z: &ComplexMatrix) -> ComplexMatrix {
    let entries = z
        .entries()
        .iter()
        .map(|v| Complex64::new(v.re.abs(), v.im.abs()))
        .collect();
    ComplexMatrix::from_parts(z.rows(), z.cols(), entries)
}

fn check_same_shape(op: &'static str, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if (a.rows(), a.cols()) != (b.rows(), b.cols()) {
        return Err(Error::DimMismatch {
            op,
            expected: format!("{}x{}", a.rows(), a.cols()),
            got: format!("{}x{}", b.rows(), b.cols()),
        });
    }
    Ok(())
}

/// Component-mixing product: per entry, `Re(a)Re(b) + j Im(a)Im(b)`.
pub fn odot_mix(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_same_shape("odot_mix", a, b)?;
    let entries = a
        .entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| Complex64::new(x.re * y.re, x.im * y.im))
        .collect();
    Ok(ComplexMatrix::from_parts(a.rows(), a.cols(), entries))
}

/// Ordinary element-wise (Hadamard) product.
pub fn hadamard(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_same_shape("hadamard", a, b)?;
    let entries = a.entries().iter().zip(b.entries()).map(|(x, y)| x * y).collect();
    Ok(ComplexMatrix::from_parts(a.rows(), a.cols(), entries))
}

/// Squared Frobenius norm: sum of squared entry magnitudes.
pub fn fro_norm_sq(a: &ComplexMatrix) -> f64 {
    a.entries().iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sign_quantize_component_signs() {
        let z = ComplexMatrix::new(1, 1, vec![c(0.7, -0.2)]).unwrap();
        assert_eq!(sign_quantize(&z).get(0, 0), c(1.0, -1.0));
    }

    #[test]
    fn sign_quantize_zero_component_is_positive() {
        let z = ComplexMatrix::new(1, 1, vec![c(-3.0, 0.0)]).unwrap();
        assert_eq!(sign_quantize(&z).get(0, 0), c(-1.0, 1.0));
    }

    #[test]
    fn sign_quantize_entrywise() {
        let z = ComplexMatrix::new(1, 2, vec![c(1.0, 2.0), c(-0.1, -0.1)]).unwrap();
        let q = sign_quantize(&z);
        assert_eq!(q.get(0, 0), c(1.0, 1.0));
        assert_eq!(q.get(0, 1), c(-1.0, -1.0));
    }

    #[test]
    fn odot_mix_examples() {
        let cases = [
            (c(1.0, 1.0), c(2.0, 3.0), c(2.0, 3.0)),
            (c(-1.0, 1.0), c(2.0, 3.0), c(-2.0, 3.0)),
            (c(1.0, -1.0), c(0.0, 5.0), c(0.0, -5.0)),
        ];
        for (a, b, want) in cases {
            let am = ComplexMatrix::new(1, 1, vec![a]).unwrap();
            let bm = ComplexMatrix::new(1, 1, vec![b]).unwrap();
            assert_eq!(odot_mix(&am, &bm).unwrap().get(0, 0), want);
        }
    }

    #[test]
    fn odot_mix_rejects_shape_mismatch() {
        let a = ComplexMatrix::zeros(2, 2);
        let b = ComplexMatrix::zeros(2, 3);
        assert!(matches!(odot_mix(&a, &b), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn hadamard_conjugate_pair() {
        let a = ComplexMatrix::new(1, 1, vec![c(1.0, 1.0)]).unwrap();
        let b = ComplexMatrix::new(1, 1, vec![c(1.0, -1.0)]).unwrap();
        assert_eq!(hadamard(&a, &b).unwrap().get(0, 0), c(2.0, 0.0));
    }

    #[test]
    fn hadamard_ones_is_identity() {
        let a = ComplexMatrix::from_fn(2, 3, |i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        let ones = ComplexMatrix::from_fn(2, 3, |_, _| c(1.0, 0.0));
        assert_eq!(hadamard(&a, &ones).unwrap(), a);
    }

    #[test]
    fn hadamard_matches_entry_loop_oracle() {
        let a = ComplexMatrix::from_fn(2, 2, |i, j| c(1.0 + i as f64, 2.0 - j as f64));
        let b = ComplexMatrix::from_fn(2, 2, |i, j| c(-0.3 * j as f64, 0.7 + i as f64));
        let h = hadamard(&a, &b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(h.get(i, j), a.get(i, j) * b.get(i, j));
            }
        }
    }

    #[test]
    fn fro_norm_sq_identity_and_zero() {
        assert_eq!(fro_norm_sq(&ComplexMatrix::identity(5)), 5.0);
        assert_eq!(fro_norm_sq(&ComplexMatrix::zeros(3, 4)), 0.0);
    }

    #[test]
    fn fro_norm_sq_matches_entry_loop_oracle() {
        let a = ComplexMatrix::from_fn(3, 2, |i, j| c(0.3 * i as f64 - 1.0, 0.9 * j as f64 + 0.2));
        let mut want = 0.0;
        for i in 0..3 {
            for j in 0..2 {
                want += a.get(i, j).norm_sqr();
            }
        }
        assert!((fro_norm_sq(&a) - want).abs() < 1e-15);
    }

    #[test]
    fn construction_rejects_non_finite() {
        let bad = vec![c(f64::NAN, 0.0)];
        assert!(matches!(ComplexMatrix::new(1, 1, bad), Err(Error::NonFinite)));
    }

    #[test]
    fn vec_cols_roundtrip_is_column_major() {
        let a = ComplexMatrix::from_fn(2, 3, |i, j| c(i as f64, j as f64));
        let v = a.vec_cols();
        // Column-major: (0,0), (1,0), (0,1), (1,1), ...
        assert_eq!(v[0], c(0.0, 0.0));
        assert_eq!(v[1], c(1.0, 0.0));
        assert_eq!(v[2], c(0.0, 1.0));
        let back = ComplexMatrix::from_vec_cols(2, 3, &v);
        assert_eq!(back, a);
    }

    #[test]
    fn matmul_identity() {
        let a = ComplexMatrix::from_fn(3, 3, |i, j| c(i as f64 - j as f64, 1.0));
        let prod = a.matmul(&ComplexMatrix::identity(3));
        assert_eq!(prod, a);
    }

    #[test]
    fn adjoint_swaps_and_conjugates() {
        let a = ComplexMatrix::new(1, 2, vec![c(1.0, 2.0), c(3.0, -4.0)]).unwrap();
        let ah = a.adjoint();
        assert_eq!(ah.get(0, 0), c(1.0, -2.0));
        assert_eq!(ah.get(1, 0), c(3.0, 4.0));
    }
}
