//! Small dense decompositions: Hermitian eigensolver, thin SVD, thin QR, and
//! a Cholesky solve. Everything in the pipeline is at most a few dozen rows or
//! columns on the short side, so classic Jacobi-style methods are accurate,
//! dependency-free, and plenty fast.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mat::{fro_norm_sq, ComplexMatrix, CZERO};

/// Eigendecomposition of a Hermitian matrix: `M = U diag(eigenvalues) U^H`.
#[derive(Debug, Clone)]
pub struct HermEig {
    /// Real eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub eigenvectors: ComplexMatrix,
}

/// Conjugated dot product `sum_i conj(a_i) * b_i`.
#[inline]
pub(crate) fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[inline]
pub(crate) fn norm_sq(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Jacobi rotation parameters annihilating the off-diagonal entry of the
/// Hermitian 2x2 block [[a, z], [conj(z), b]].
///
/// Returns (c, s, omega) for the plane rotation with entries
/// [[c, s*omega], [-s*conj(omega), c]], where omega = z/|z|.
fn jacobi_params(a: f64, b: f64, z: Complex64) -> (f64, f64, Complex64) {
    let zn = z.norm();
    let omega = z / zn;
    let tau = (b - a) / (2.0 * zn);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c, omega)
}

/// Eigendecomposition of a Hermitian matrix via cyclic Jacobi rotations.
///
/// The input must be Hermitian to ~1e-10 (relative to its largest entry);
/// eigenvalues come back in ascending order and the eigenvector columns are
/// orthonormal by construction (a product of exact plane rotations).
pub fn herm_eig(m: &ComplexMatrix) -> Result<HermEig> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::DimMismatch {
            op: "herm_eig",
            expected: "square matrix".into(),
            got: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    let scale = m.max_abs().max(1.0);
    let mut max_dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            max_dev = max_dev.max((m.get(i, j) - m.get(j, i).conj()).norm());
        }
    }
    if max_dev > 1e-10 * scale {
        return Err(Error::NotHermitian { max_dev });
    }

    let mut a: Vec<Complex64> = m.entries().to_vec();
    // Symmetrize exactly so rounding in the input cannot drift through sweeps.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a[i * n + j] + a[j * n + i].conj());
            a[i * n + j] = avg;
            a[j * n + i] = avg.conj();
        }
        a[i * n + i] = Complex64::new(a[i * n + i].re, 0.0);
    }
    let mut v: Vec<Complex64> = ComplexMatrix::identity(n).entries().to_vec();

    let fro = fro_norm_sq(m).sqrt();
    let off_tol = 1e-14 * (fro + f64::MIN_POSITIVE);
    let mut converged = n <= 1;
    for _sweep in 0..60 {
        if converged {
            break;
        }
        let mut off_sq = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off_sq += a[p * n + q].norm_sqr();
            }
        }
        if (2.0 * off_sq).sqrt() <= off_tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let z = a[p * n + q];
                if z.norm() <= off_tol / (n as f64) {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let (c, s, omega) = jacobi_params(app, aqq, z);
                let t = s / c;
                // Rows: [p; q] <- [[c, -s*omega], [s*conj(omega), c]] [p; q]
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = c * apj - s * omega * aqj;
                    a[q * n + j] = s * omega.conj() * apj + c * aqj;
                }
                // Columns: [p q] <- [p q] [[c, s*omega], [-s*conj(omega), c]]
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * omega.conj() * aiq;
                    a[i * n + q] = s * omega * aip + c * aiq;
                }
                // Pin the analytically known entries to kill rounding drift.
                let zn = z.norm();
                a[p * n + p] = Complex64::new(app - t * zn, 0.0);
                a[q * n + q] = Complex64::new(aqq + t * zn, 0.0);
                a[p * n + q] = CZERO;
                a[q * n + p] = CZERO;
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * omega.conj() * viq;
                    v[i * n + q] = s * omega * vip + c * viq;
                }
            }
        }
    }
    if !converged {
        // One final check: the loop above breaks before the sweep cap in
        // practice; Jacobi convergence failing indicates broken input.
        let mut off_sq = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off_sq += a[p * n + q].norm_sqr();
            }
        }
        if (2.0 * off_sq).sqrt() > 1e-10 * (fro + f64::MIN_POSITIVE) {
            return Err(Error::Numerical("Jacobi eigensolver did not converge".into()));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i].re).collect();
    let eigenvectors =
        ComplexMatrix::from_fn(n, n, |i, j| v[i * n + order[j]]);
    Ok(HermEig { eigenvalues, eigenvectors })
}

/// Thin singular value decomposition `A = U diag(sigma) V^H`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    /// Singular values in descending order (length min(rows, cols)).
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

/// One-sided Jacobi SVD: orthogonalizes column pairs of a working copy while
/// accumulating the right factor, which keeps full accuracy even for tiny
/// singular values.
pub(crate) fn svd_thin(a: &ComplexMatrix) -> Svd {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        let t = svd_thin(&a.adjoint());
        return Svd { u: t.v, sigma: t.sigma, v: t.u };
    }

    let mut w: Vec<Vec<Complex64>> = (0..n).map(|j| a.col(j)).collect();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut e = vec![CZERO; n];
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();

    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let app = norm_sq(&w[p]);
                let aqq = norm_sq(&w[q]);
                let apq = dotc(&w[p], &w[q]);
                if apq.norm() <= 1e-14 * (app * aqq).sqrt() + f64::MIN_POSITIVE {
                    continue;
                }
                rotated = true;
                let (c, s, omega) = jacobi_params(app, aqq, apq);
                let so_conj = s * omega.conj();
                let so = s * omega;
                for i in 0..m {
                    let wp = w[p][i];
                    let wq = w[q][i];
                    w[p][i] = c * wp - so_conj * wq;
                    w[q][i] = so * wp + c * wq;
                }
                for i in 0..n {
                    let vp = v[p][i];
                    let vq = v[q][i];
                    v[p][i] = c * vp - so_conj * vq;
                    v[q][i] = so * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = w.iter().map(|col| norm_sq(col).sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let u = ComplexMatrix::from_fn(m, n, |i, j| {
        let col = order[j];
        if norms[col] > 0.0 {
            w[col][i] / norms[col]
        } else {
            CZERO
        }
    });
    let v = ComplexMatrix::from_fn(n, n, |i, j| v[order[j]][i]);
    Svd { u, sigma, v }
}

/// Moore-Penrose pseudo-inverse with singular values below `1e-10 * sigma_max`
/// treated as zero.
pub fn pinv(a: &ComplexMatrix) -> ComplexMatrix {
    let Svd { u, sigma, v } = svd_thin(a);
    let thr = 1e-10 * sigma.first().copied().unwrap_or(0.0);
    let (m, n) = (a.rows(), a.cols());
    let mut out = vec![CZERO; n * m];
    for (k, &s) in sigma.iter().enumerate() {
        if s <= thr || s == 0.0 {
            continue;
        }
        let inv = 1.0 / s;
        for r in 0..n {
            let vr = v.get(r, k) * inv;
            for c in 0..m {
                out[r * m + c] += vr * u.get(c, k).conj();
            }
        }
    }
    ComplexMatrix::from_parts(n, m, out)
}

/// Thin QR via modified Gram-Schmidt with one reorthogonalization pass.
///
/// Returns the orthonormal columns and the n×n upper-triangular factor
/// (row-major). Rank-deficient columns produce a zero diagonal entry in `r`
/// and a zero column in `q`.
pub(crate) fn qr_thin(cols: &[Vec<Complex64>]) -> (Vec<Vec<Complex64>>, Vec<Complex64>) {
    let n = cols.len();
    let mut q_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut r = vec![CZERO; n * n];
    for j in 0..n {
        let mut v = cols[j].clone();
        for _pass in 0..2 {
            for (i, qi) in q_cols.iter().enumerate() {
                let c = dotc(qi, &v);
                r[i * n + j] += c;
                for (ve, qe) in v.iter_mut().zip(qi) {
                    *ve -= c * qe;
                }
            }
        }
        let nv = norm_sq(&v).sqrt();
        r[j * n + j] = Complex64::new(nv, 0.0);
        if nv > 0.0 {
            for ve in v.iter_mut() {
                *ve /= nv;
            }
        } else {
            v.iter_mut().for_each(|ve| *ve = CZERO);
        }
        q_cols.push(v);
    }
    (q_cols, r)
}

/// Solves `A X = B` for Hermitian positive-definite `A` via Cholesky.
pub(crate) fn cholesky_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "cholesky_solve: A must be square");
    assert_eq!(n, b.rows(), "cholesky_solve: B row count must match A");
    let mut l = vec![CZERO; n * n];
    for j in 0..n {
        let mut d = a.get(j, j).re;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if d <= 0.0 {
            return Err(Error::Numerical("Cholesky pivot not positive".into()));
        }
        let dj = d.sqrt();
        l[j * n + j] = Complex64::new(dj, 0.0);
        for i in (j + 1)..n {
            let mut acc = a.get(i, j);
            for k in 0..j {
                acc -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = acc / dj;
        }
    }
    // Forward solve L Y = B, then back solve L^H X = Y, column by column.
    let m = b.cols();
    let mut x = ComplexMatrix::zeros(n, m);
    for c in 0..m {
        let mut y = vec![CZERO; n];
        for i in 0..n {
            let mut acc = b.get(i, c);
            for k in 0..i {
                acc -= l[i * n + k] * y[k];
            }
            y[i] = acc / l[i * n + i].re;
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for k in (i + 1)..n {
                acc -= l[k * n + i].conj() * y[k];
            }
            y[i] = acc / l[i * n + i].re;
        }
        for i in 0..n {
            x.set(i, c, y[i]);
        }
    }
    Ok(x)
}
