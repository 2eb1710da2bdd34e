//! Norm-constrained H-update: minimize `‖Y⊚Γ − HS‖_F² + λ‖H − H̃‖_F²` over
//! the sphere `‖H‖_F² = R`.
//!
//! Collecting terms gives the stationarity condition `H(SS^H + ρ̃I) = Λ` with
//! `Λ = (Y⊚Γ)S^H + λH̃` and a scalar multiplier `ρ̃` fixed by the norm
//! constraint. Diagonalizing `SS^H = U diag(ς) U^H` and writing `C = ΛU`
//! turns the constraint into the secular equation
//!
//! ```text
//!   f(ρ̃) = Σ_i ‖c_i‖² / (ρ̃ + ς_i)² = R,
//! ```
//!
//! which is strictly decreasing on `(−ς_min, ∞)` and is solved by a
//! safeguarded Newton–bisection iteration on an analytically guaranteed
//! bracket. Structured training blocks avoid the eigendecomposition entirely:
//! semi-unitary `S` (`S^H S = I`) collapses the secular equation to a quartic
//! with a unique positive root, and unitary `S` yields the closed form
//! `ρ̃ = sqrt(trace(ΛΛ^H)/R) − 1`.


use crate::error::{Error, Result};
use crate::linalg::{herm_eig, HermEig};
use crate::mat::{fro_norm_sq, odot_mix, ComplexMatrix};

use super::ArConfig;

/// Which solver the H-update used, as detected from the training structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispatchKind {
    /// Full eigendecomposition of `SS^H` plus the general secular equation.
    General,
    /// `S^H S = I` with `S` tall: quartic closed form.
    SemiUnitary,
    /// `S` square unitary: fully closed form.
    Unitary,
}

impl std::fmt::Display for DispatchKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DispatchKind::General => write!(f, "general"),
            DispatchKind::SemiUnitary => write!(f, "semi_unitary"),
            DispatchKind::Unitary => write!(f, "unitary"),
        }
    }
}

/// Classifies a training block by its Gram matrix: `S^H S = I` to 1e-8 makes
/// it semi-unitary (unitary when square); anything else is general.
pub fn detect_structure(s: &ComplexMatrix) -> DispatchKind {
    let n = s.cols();
    let gram = s.adjoint().matmul(s);
    let dev = gram.sub(&ComplexMatrix::identity(n)).max_abs();
    if dev <= 1e-8 {
        if s.rows() == n {
            DispatchKind::Unitary
        } else {
            DispatchKind::SemiUnitary
        }
    } else {
        DispatchKind::General
    }
}

/// Detected structure with any factorization worth caching across iterations.
pub(crate) enum CachedStructure {
    Unitary,
    SemiUnitary,
    General(Box<HermEig>),
}

impl CachedStructure {
    pub(crate) fn kind(&self) -> DispatchKind {
        match self {
            CachedStructure::Unitary => DispatchKind::Unitary,
            CachedStructure::SemiUnitary => DispatchKind::SemiUnitary,
            CachedStructure::General(_) => DispatchKind::General,
        }
    }
}

pub(crate) fn cache_structure(s: &ComplexMatrix) -> Result<CachedStructure> {
    Ok(match detect_structure(s) {
        DispatchKind::Unitary => CachedStructure::Unitary,
        DispatchKind::SemiUnitary => CachedStructure::SemiUnitary,
        DispatchKind::General => {
            let ssh = s.matmul(&s.adjoint());
            CachedStructure::General(Box::new(herm_eig(&ssh)?))
        }
    })
}

/// Secular function value and derivative at `rho`.
fn secular_f(rho: f64, weights: &[f64], evals: &[f64]) -> (f64, f64) {
    let mut f = 0.0;
    let mut df = 0.0;
    for (&w, &e) in weights.iter().zip(evals) {
        let d = rho + e;
        let d2 = d * d;
        f += w / d2;
        df -= 2.0 * w / (d2 * d);
    }
    (f, df)
}

/// Solves `Σ w_i/(ρ̃+ς_i)² = R` on `(−ς_min, ∞)` by safeguarded
/// Newton–bisection. `weights` are the squared column norms of `ΛU` and
/// `evals` the matching eigenvalues of `SS^H` (any order).
fn secular_root(weights: &[f64], evals: &[f64], r_norm: f64, tol: f64) -> Result<f64> {
    let t1: f64 = weights.iter().sum();
    if t1 <= 0.0 {
        return Err(Error::Degenerate("secular equation with zero driving matrix"));
    }
    // SS^H is positive semidefinite; clip the tiny negative eigenvalues that
    // finite-precision diagonalization can produce.
    let evals: Vec<f64> = evals.iter().map(|&e| e.max(0.0)).collect();
    let e_min = evals.iter().cloned().fold(f64::INFINITY, f64::min);
    let e_max = evals.iter().cloned().fold(0.0, f64::max);
    let pivot = (t1 / r_norm).sqrt();
    // f(ρ) ≤ t1/(ρ+ς_min)² and f(ρ) ≥ t1/(ρ+ς_max)², so f crosses R inside
    // [pivot − ς_max, pivot − ς_min]; the left end may need lifting above the
    // pole at −ς_min.
    let hi = pivot - e_min;
    let mut delta = 1e-12 * e_max.max(1.0);
    let mut lo = (pivot - e_max).max(-e_min + delta);
    // Hard case: all weight sits away from the smallest eigenvalue and the
    // root would fall below the pole, where no positive-definite shift
    // exists. Shrink the lift a few times before giving up.
    let mut attempts = 0;
    while secular_f(lo, &weights, &evals).0 < r_norm {
        attempts += 1;
        if attempts > 3 || lo > -e_min + f64::MIN_POSITIVE {
            delta *= 1e-3;
            let lifted = -e_min + delta;
            if lifted < lo {
                lo = lifted;
                continue;
            }
        }
        if attempts > 6 {
            return Err(Error::Numerical(
                "norm constraint unreachable: secular function stays below target on the bracket"
                    .into(),
            ));
        }
        delta *= 1e-3;
        lo = -e_min + delta;
    }
    let mut a = lo;
    let mut b = hi.max(lo);
    let mut x = 0.5 * (a + b);
    for _ in 0..500 {
        let (f, df) = secular_f(x, &weights, &evals);
        let g = f - r_norm;
        if g.abs() <= tol * r_norm {
            return Ok(x);
        }
        if g > 0.0 {
            a = x;
        } else {
            b = x;
        }
        let newton = x - g / df;
        x = if newton.is_finite() && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (b - a).abs() <= f64::EPSILON * b.abs().max(1.0) {
            break;
        }
    }
    let (f, _) = secular_f(x, &weights, &evals);
    if (f - r_norm).abs() <= 1e-6 * r_norm {
        Ok(x)
    } else {
        Err(Error::Numerical(
            "secular root refinement stalled before reaching tolerance".into(),
        ))
    }
}

fn column_norms_sq(c: &ComplexMatrix) -> Vec<f64> {
    let mut w = vec![0.0; c.cols()];
    for i in 0..c.rows() {
        for (j, wj) in w.iter_mut().enumerate() {
            *wj += c.get(i, j).norm_sqr();
        }
    }
    w
}

/// Solves the norm-constraint secular equation for the multiplier `ρ̃` given
/// the driving matrix `Λ` and training block `S`: finds `ρ̃` with
/// `Σ_i ‖c_i‖²/(ρ̃+ς_i)² = R` to within `tol·R`, where `C = ΛU` and
/// `U diag(ς) U^H = SS^H`.
pub fn secular_solve(
    lambda_mat: &ComplexMatrix,
    s: &ComplexMatrix,
    r_norm: f64,
    tol: f64,
) -> Result<f64> {
    if r_norm <= 0.0 || tol <= 0.0 {
        return Err(Error::InvalidArgument(
            "secular_solve requires positive norm budget and tolerance".into(),
        ));
    }
    if lambda_mat.cols() != s.rows() {
        return Err(Error::DimMismatch {
            op: "secular_solve",
            expected: format!("lambda columns = training rows = {}", s.rows()),
            got: format!("{}", lambda_mat.cols()),
        });
    }
    let eig = herm_eig(&s.matmul(&s.adjoint()))?;
    let c = lambda_mat.matmul(&eig.eigenvectors);
    secular_root(&column_norms_sq(&c), &eig.eigenvalues, r_norm, tol)
}

pub(crate) fn secular_solve_cached(
    lambda_mat: &ComplexMatrix,
    eig: &HermEig,
    r_norm: f64,
    tol: f64,
) -> Result<f64> {
    let c = lambda_mat.matmul(&eig.eigenvectors);
    secular_root(&column_norms_sq(&c), &eig.eigenvalues, r_norm, tol)
}

/// Multiplier for semi-unitary training (`S^H S = I`, S tall): the unique
/// positive root of
/// `Rρ̃⁴ + 2Rρ̃³ + (R−t₁)ρ̃² + 2(t₂−t₁)ρ̃ + (t₂−t₁) = 0`
/// with `t₁ = trace(ΛΛ^H)` and `t₂ = trace(ΛSS^HΛ^H)`.
///
/// The quartic is the secular equation multiplied through by
/// `ρ̃²(1+ρ̃)²`: the eigenvalues of `SS^H` are exactly N ones and M_t−N
/// zeros, carrying weights t₂ and t₁−t₂.
pub fn special_case_semi_unitary(
    lambda_mat: &ComplexMatrix,
    s: &ComplexMatrix,
    r_norm: f64,
) -> Result<f64> {
    if r_norm <= 0.0 {
        return Err(Error::InvalidArgument("norm budget must be positive".into()));
    }
    let n = s.cols();
    let gram_dev = s
        .adjoint()
        .matmul(s)
        .sub(&ComplexMatrix::identity(n))
        .max_abs();
    if gram_dev > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "training block is not semi-unitary: max |S^H S - I| = {gram_dev:.3e}"
        )));
    }
    let t1 = fro_norm_sq(lambda_mat);
    if t1 <= 0.0 {
        return Err(Error::Degenerate("zero driving matrix in semi-unitary update"));
    }
    let t2 = fro_norm_sq(&lambda_mat.matmul(s));
    let r = r_norm;
    let strictly_tall = s.rows() > n;

    if t1 - t2 <= 1e-12 * t1 {
        // Λ has (numerically) all its mass inside the training subspace; the
        // quartic collapses to R(1+ρ̃)² = t₁.
        let rho = (t1 / r).sqrt() - 1.0;
        if strictly_tall && rho <= 0.0 {
            return Err(Error::Numerical(
                "norm constraint unreachable: driving matrix confined to the training subspace"
                    .into(),
            ));
        }
        return Ok(rho);
    }

    let q = |x: f64| -> f64 {
        ((r * x + 2.0 * r) * x + (r - t1)) * x * x + 2.0 * (t2 - t1) * x + (t2 - t1)
    };
    let dq = |x: f64| -> f64 {
        ((4.0 * r * x + 6.0 * r) * x + 2.0 * (r - t1)) * x + 2.0 * (t2 - t1)
    };
    // f(ρ) ≥ (t₁−t₂)/ρ² forces the root above sqrt((t₁−t₂)/R); f(ρ) < t₁/ρ²
    // keeps it below sqrt(t₁/R). q is negative at the low end and positive at
    // the high end.
    let mut a = ((t1 - t2) / r).sqrt();
    let mut b = (t1 / r).sqrt();
    let mut guard = 0;
    while q(a) > 0.0 && guard < 60 {
        a *= 0.5;
        guard += 1;
    }
    guard = 0;
    while q(b) < 0.0 && guard < 60 {
        b *= 2.0;
        guard += 1;
    }
    if q(a) > 0.0 || q(b) < 0.0 {
        return Err(Error::Numerical("quartic bracket lost its sign change".into()));
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let qx = q(x);
        if qx > 0.0 {
            b = x;
        } else {
            a = x;
        }
        let d = dq(x);
        let newton = x - qx / d;
        x = if newton.is_finite() && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (b - a).abs() <= f64::EPSILON * b.abs().max(1.0) {
            break;
        }
    }
    Ok(x)
}

/// Multiplier for unitary training: `ρ̃ = sqrt(trace(ΛΛ^H)/R) − 1`, so that
/// `H = Λ/(1+ρ̃)` lands exactly on the norm sphere.
pub fn special_case_unitary(lambda_mat: &ComplexMatrix, r_norm: f64) -> Result<f64> {
    if r_norm <= 0.0 {
        return Err(Error::InvalidArgument("norm budget must be positive".into()));
    }
    let t1 = fro_norm_sq(lambda_mat);
    if t1 <= 0.0 {
        return Err(Error::Degenerate("zero driving matrix in unitary update"));
    }
    Ok((t1 / r_norm).sqrt() - 1.0)
}

/// Builds `Λ = (Y⊚Γ)S^H + λH̃` from the current blocks.
pub(crate) fn driving_matrix(
    y: &ComplexMatrix,
    gamma: &ComplexMatrix,
    s: &ComplexMatrix,
    h_tilde: &ComplexMatrix,
    lambda: f64,
) -> Result<ComplexMatrix> {
    let yg = odot_mix(y, gamma)?;
    Ok(yg.matmul(&s.adjoint()).add(&h_tilde.scale_re(lambda)))
}

/// Minimizes `‖Y⊚Γ − HS‖_F² + λ‖H − H̃‖_F²` over `‖H‖_F² = R`.
///
/// Detects the training structure and dispatches to the matching multiplier
/// solver, then reconstructs `H = Λ(SS^H + ρ̃I)^{-1}` (through the
/// structure-specific inverse-free form where available).
pub fn update_h(
    y: &ComplexMatrix,
    gamma: &ComplexMatrix,
    s: &ComplexMatrix,
    h_tilde: &ComplexMatrix,
    cfg: &ArConfig,
) -> Result<ComplexMatrix> {
    let structure = cache_structure(s)?;
    let (h, _, _) = update_h_cached(y, gamma, s, h_tilde, cfg, &structure)?;
    Ok(h)
}

pub(crate) fn update_h_cached(
    y: &ComplexMatrix,
    gamma: &ComplexMatrix,
    s: &ComplexMatrix,
    h_tilde: &ComplexMatrix,
    cfg: &ArConfig,
    structure: &CachedStructure,
) -> Result<(ComplexMatrix, f64, DispatchKind)> {
    let lambda_mat = driving_matrix(y, gamma, s, h_tilde, cfg.lambda)?;
    if lambda_mat.max_abs() == 0.0 {
        return Err(Error::Degenerate("H-update driving matrix is identically zero"));
    }
    let r = cfg.r_norm;
    match structure {
        CachedStructure::Unitary => {
            let rho = special_case_unitary(&lambda_mat, r)?;
            let h = lambda_mat.scale_re(1.0 / (1.0 + rho));
            Ok((h, rho, DispatchKind::Unitary))
        }
        CachedStructure::SemiUnitary => {
            let rho = special_case_semi_unitary(&lambda_mat, s, r)?;
            let h = apply_semi_unitary_inverse(&lambda_mat, s, rho);
            Ok((h, rho, DispatchKind::SemiUnitary))
        }
        CachedStructure::General(eig) => {
            let rho = secular_solve_cached(&lambda_mat, eig, r, cfg.secular_tol)?;
            let u = &eig.eigenvectors;
            let c = lambda_mat.matmul(u);
            let scaled = ComplexMatrix::from_fn(c.rows(), c.cols(), |i, j| {
                c.get(i, j) / (rho + eig.eigenvalues[j].max(0.0))
            });
            Ok((scaled.matmul(&u.adjoint()), rho, DispatchKind::General))
        }
    }
}

/// Inverse-free form of `Λ(SS^H + ρ̃I)^{-1}` for semi-unitary `S`:
/// `H = Λ/ρ̃ − (ΛS)S^H / (ρ̃(1+ρ̃))`, by the matrix inversion lemma.
pub(crate) fn apply_semi_unitary_inverse(
    lambda_mat: &ComplexMatrix,
    s: &ComplexMatrix,
    rho: f64,
) -> ComplexMatrix {
    let ls_sh = lambda_mat.matmul(s).matmul(&s.adjoint());
    lambda_mat
        .scale_re(1.0 / rho)
        .sub(&ls_sh.scale_re(1.0 / (rho * (1.0 + rho))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use crate::channel::{gen_training, TrainingKind};
    use crate::linalg::pinv;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn randn_mat(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
    }

    fn secular_residual(lambda_mat: &ComplexMatrix, s: &ComplexMatrix, rho: f64, r: f64) -> f64 {
        let eig = herm_eig(&s.matmul(&s.adjoint())).unwrap();
        let c = lambda_mat.matmul(&eig.eigenvectors);
        let w = column_norms_sq(&c);
        let (f, _) = secular_f(rho, &w, &eig.eigenvalues);
        (f - r).abs()
    }

    #[test]
    fn secular_scalar_case_matches_analytic_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let lambda_mat = randn_mat(3, 1, &mut rng);
        let s = randn_mat(1, 4, &mut rng);
        let r = 2.5;
        let rho = secular_solve(&lambda_mat, &s, r, 1e-13).unwrap();
        let sigma = fro_norm_sq(&s);
        let want = (fro_norm_sq(&lambda_mat) / r).sqrt() - sigma;
        assert!((rho - want).abs() < 1e-9 * want.abs().max(1.0), "{rho} vs {want}");
    }

    #[test]
    fn secular_identity_instance_has_zero_root() {
        let i4 = ComplexMatrix::identity(4);
        let rho = secular_solve(&i4, &i4, 4.0, 1e-13).unwrap();
        assert!(rho.abs() < 1e-10, "rho = {rho}");
    }

    #[test]
    fn secular_random_instances_hit_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let lambda_mat = randn_mat(4, 4, &mut rng);
            let s = randn_mat(4, 6, &mut rng);
            let r = 3.0;
            let rho = secular_solve(&lambda_mat, &s, r, 1e-12).unwrap();
            assert!(secular_residual(&lambda_mat, &s, rho, r) <= 1e-8 * r);
        }
    }

    #[test]
    fn unitary_closed_form_examples() {
        let i4 = ComplexMatrix::identity(4);
        assert!(special_case_unitary(&i4, 4.0).unwrap().abs() < 1e-14);
        let two_i = i4.scale_re(2.0);
        let rho = special_case_unitary(&two_i, 4.0).unwrap();
        assert!((rho - 1.0).abs() < 1e-14);
        // H = Λ/(1+ρ̃) = I, and it sits exactly on the sphere.
        let h = two_i.scale_re(1.0 / (1.0 + rho));
        assert!((fro_norm_sq(&h) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn unitary_rejects_zero_driving_matrix() {
        let z = ComplexMatrix::zeros(3, 3);
        assert!(special_case_unitary(&z, 3.0).is_err());
    }

    #[test]
    fn unitary_agrees_with_secular_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let s = gen_training(5, 5, TrainingKind::Unitary, &mut rng).unwrap();
            let lambda_mat = randn_mat(3, 5, &mut rng);
            let direct = special_case_unitary(&lambda_mat, 2.0).unwrap();
            let general = secular_solve(&lambda_mat, &s, 2.0, 1e-13).unwrap();
            assert!(
                (direct - general).abs() <= 1e-8 * direct.abs().max(1.0),
                "{direct} vs {general}"
            );
        }
    }

    #[test]
    fn semi_unitary_agrees_with_secular_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let s = gen_training(8, 5, TrainingKind::SemiUnitary, &mut rng).unwrap();
            let lambda_mat = randn_mat(4, 8, &mut rng);
            let quartic = special_case_semi_unitary(&lambda_mat, &s, 3.0).unwrap();
            let general = secular_solve(&lambda_mat, &s, 3.0, 1e-13).unwrap();
            assert!(
                (quartic - general).abs() <= 1e-6 * quartic.abs().max(1.0),
                "{quartic} vs {general}"
            );
        }
    }

    #[test]
    fn semi_unitary_subspace_confined_driving_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = gen_training(8, 4, TrainingKind::SemiUnitary, &mut rng).unwrap();
        // Λ = X S^H stays inside the training subspace, so t₂ = t₁ and the
        // quartic collapses to R(1+ρ̃)² = t₁.
        let x = randn_mat(3, 4, &mut rng);
        let lambda_mat = x.matmul(&s.adjoint());
        let t1 = fro_norm_sq(&lambda_mat);
        let r = t1 / 9.0; // keeps the collapsed root at exactly 2
        let rho = special_case_semi_unitary(&lambda_mat, &s, r).unwrap();
        assert!((rho - 2.0).abs() < 1e-10, "rho = {rho}");
    }

    #[test]
    fn semi_unitary_rejects_general_training() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = randn_mat(6, 3, &mut rng);
        let lambda_mat = randn_mat(2, 6, &mut rng);
        assert!(special_case_semi_unitary(&lambda_mat, &s, 1.0).is_err());
    }

    #[test]
    fn inverse_free_form_matches_direct_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = gen_training(6, 3, TrainingKind::SemiUnitary, &mut rng).unwrap();
        let lambda_mat = randn_mat(4, 6, &mut rng);
        let rho = special_case_semi_unitary(&lambda_mat, &s, 2.0).unwrap();
        let fast = apply_semi_unitary_inverse(&lambda_mat, &s, rho);
        // Direct: H = Λ (SS^H + ρ̃ I)^{-1} via pseudo-inverse of the shifted
        // Gram (it is Hermitian positive definite, so the pinv is the
        // inverse).
        let shifted = s
            .matmul(&s.adjoint())
            .add(&ComplexMatrix::identity(6).scale_re(rho));
        let direct = lambda_mat.matmul(&pinv(&shifted));
        assert!(fast.sub(&direct).max_abs() < 1e-10 * direct.max_abs().max(1.0));
    }

    #[test]
    fn update_h_lands_on_norm_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cfg = ArConfig { r_norm: 5.0, ..ArConfig::default() };
        for kind in [TrainingKind::Gaussian, TrainingKind::SemiUnitary, TrainingKind::Unitary] {
            let n = if kind == TrainingKind::Unitary { 4 } else { 3 };
            let s = gen_training(4, n, kind, &mut rng).unwrap();
            let y = crate::mat::sign_quantize(&randn_mat(3, n, &mut rng));
            let gamma = crate::mat::amplitude(&randn_mat(3, n, &mut rng));
            let h_tilde = randn_mat(3, 4, &mut rng);
            let h = update_h(&y, &gamma, &s, &h_tilde, &cfg).unwrap();
            let rel = (fro_norm_sq(&h) - cfg.r_norm).abs() / cfg.r_norm;
            assert!(rel < 1e-6, "norm error {rel} for {kind:?}");
        }
    }

    #[test]
    fn update_h_rejects_zero_driving_matrix() {
        let cfg = ArConfig::default();
        let y = ComplexMatrix::from_fn(2, 2, |_, _| Complex64::new(1.0, 1.0));
        let gamma = ComplexMatrix::zeros(2, 2);
        let s = ComplexMatrix::identity(2);
        let h_tilde = ComplexMatrix::zeros(2, 2);
        assert!(matches!(
            update_h(&y, &gamma, &s, &h_tilde, &cfg),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn detect_structure_covers_all_kinds() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = gen_training(4, 4, TrainingKind::Unitary, &mut rng).unwrap();
        let semi = gen_training(6, 3, TrainingKind::SemiUnitary, &mut rng).unwrap();
        let g = randn_mat(4, 6, &mut rng);
        assert_eq!(detect_structure(&u), DispatchKind::Unitary);
        assert_eq!(detect_structure(&semi), DispatchKind::SemiUnitary);
        assert_eq!(detect_structure(&g), DispatchKind::General);
    }
}
