//! Angle and gain refinement: concentrated maximum-likelihood fitting of the
//! path directions to the current channel iterate.
//!
//! With the path dictionary `A(η)` whose k-th column is
//! `conj(a_t(φ_k)) ⊗ a_r(θ_k)` (so that `vec(A_r diag(β) A_t^H) = A(η)β`),
//! the gains minimize `‖h − A(η)β‖²` in closed form, leaving the
//! concentrated cost `f(η) = ‖(I − A A†) h‖²` over the angles alone. Its
//! gradient follows from the envelope theorem:
//! `∂f/∂η_k = −2 Re[(A†h)_k · (h^H P_A^⊥ d_k)]` with `d_k` the derivative of
//! the k-th dictionary column. Refinement runs a few Armijo-backtracked
//! gradient steps, then re-fits the gains at the final angles.
//!
//! All inner products of Kronecker-structured columns factor into short
//! per-array dot products, so cost and gradient are assembled from K×K
//! tables of array-domain correlations instead of M_r·M_t-length vectors.
//! The normal equations are solved by Cholesky; if the dictionary is
//! numerically rank deficient the evaluation falls back to an explicit
//! pseudo-inverse and flags the event.

use num_complex::Complex64;

use crate::channel::{steering_derivative_unchecked, steering_vector_unchecked, ArrayGeometry};
use crate::linalg::{cholesky_solve, dotc, pinv};
use crate::mat::{fro_norm_sq, ComplexMatrix, CZERO};

use super::{ArConfig, ArState};

/// Smallest Armijo trial step before the line search reports failure.
const STEP_UNDERFLOW: f64 = 1e-18;

/// Path dictionary `A(η)`: the k-th column is `conj(a_t(φ_k)) ⊗ a_r(θ_k)`,
/// shaped `M_t·M_r × K` with the receive index running fastest, matching
/// column-stacked channel vectorization: `vec(A_r diag(β) A_t^H) = A(η)β`.
pub fn khatri_rao_dict(eta: &[f64], rx: ArrayGeometry, tx: ArrayGeometry) -> ComplexMatrix {
    assert!(eta.len() % 2 == 0, "eta must stack [theta; phi]");
    let k = eta.len() / 2;
    let (m_r, m_t) = (rx.num_elements, tx.num_elements);
    let mut out = ComplexMatrix::zeros(m_r * m_t, k);
    for p in 0..k {
        let ar = steering_vector_unchecked(m_r, eta[p]);
        let at = steering_vector_unchecked(m_t, eta[k + p]);
        for (i, &ti) in at.iter().enumerate() {
            let tc = ti.conj();
            for (m, &rm) in ar.iter().enumerate() {
                out.set(i * m_r + m, p, tc * rm);
            }
        }
    }
    out
}

pub(crate) struct MlEval {
    pub cost: f64,
    pub beta: Vec<Complex64>,
    pub grad: Option<Vec<f64>>,
    pub rank_deficient: bool,
}

/// Evaluates the concentrated ML cost (and optionally its gradient) at `eta`
/// for the channel iterate `h`, exploiting the Kronecker structure of the
/// dictionary columns.
pub(crate) fn ml_eval(eta: &[f64], h: &ComplexMatrix, want_grad: bool) -> MlEval {
    let k = eta.len() / 2;
    let (m_r, m_t) = (h.rows(), h.cols());
    let a_r: Vec<Vec<Complex64>> =
        (0..k).map(|p| steering_vector_unchecked(m_r, eta[p])).collect();
    let a_t: Vec<Vec<Complex64>> =
        (0..k).map(|p| steering_vector_unchecked(m_t, eta[k + p])).collect();

    // H a_t(φ_p) for every path: the only M_r·M_t-sized work in the fast path.
    let w_t: Vec<Vec<Complex64>> = a_t
        .iter()
        .map(|at| {
            (0..m_r)
                .map(|i| h.row(i).iter().zip(at).map(|(hij, tj)| hij * tj).sum())
                .collect()
        })
        .collect();

    // rhs_p = A[:,p]^H vec(H) = a_r(θ_p)^H H a_t(φ_p).
    let rhs: Vec<Complex64> = (0..k).map(|p| dotc(&a_r[p], &w_t[p])).collect();

    // Array-domain correlation tables; the dictionary Gram factors as
    // G[p,l] = conj(<a_t_p, a_t_l>) · <a_r_p, a_r_l>.
    let tt: Vec<Vec<Complex64>> =
        (0..k).map(|p| (0..k).map(|l| dotc(&a_t[p], &a_t[l])).collect()).collect();
    let rr: Vec<Vec<Complex64>> =
        (0..k).map(|p| (0..k).map(|l| dotc(&a_r[p], &a_r[l])).collect()).collect();
    let gram = ComplexMatrix::from_fn(k, k, |p, l| tt[p][l].conj() * rr[p][l]);
    let rhs_mat = ComplexMatrix::col_from_slice(&rhs);

    let h_norm_sq = fro_norm_sq(h);
    let mut rank_deficient = false;
    let beta: Vec<Complex64> = match cholesky_solve(&gram, &rhs_mat) {
        Ok(b) => {
            let b: Vec<Complex64> = (0..k).map(|p| b.get(p, 0)).collect();
            // Guard against an ill-conditioned Gram slipping through
            // Cholesky: verify the normal equations actually hold.
            let scale = gram.max_abs() * b.iter().map(|z| z.norm()).fold(0.0, f64::max)
                + rhs.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let mut worst = 0.0f64;
            for p in 0..k {
                let mut acc = CZERO;
                for l in 0..k {
                    acc += gram.get(p, l) * b[l];
                }
                worst = worst.max((acc - rhs[p]).norm());
            }
            if worst > 1e-8 * scale.max(f64::MIN_POSITIVE) {
                rank_deficient = true;
                Vec::new()
            } else {
                b
            }
        }
        Err(_) => {
            rank_deficient = true;
            Vec::new()
        }
    };

    if rank_deficient {
        return ml_eval_fallback(eta, h, want_grad);
    }

    // f = ‖h‖² − Re(rhs^H β), the concentrated quadratic at its minimizer.
    let cost = (h_norm_sq - dotc(&rhs, &beta).re).max(0.0);

    let grad = want_grad.then(|| {
        let da_r: Vec<Vec<Complex64>> =
            (0..k).map(|p| steering_derivative_unchecked(m_r, eta[p])).collect();
        let da_t: Vec<Vec<Complex64>> =
            (0..k).map(|p| steering_derivative_unchecked(m_t, eta[k + p])).collect();
        let v_t: Vec<Vec<Complex64>> = da_t
            .iter()
            .map(|dt| {
                (0..m_r)
                    .map(|i| h.row(i).iter().zip(dt).map(|(hij, tj)| hij * tj).sum())
                    .collect()
            })
            .collect();
        let mut g = vec![0.0; 2 * k];
        for p in 0..k {
            // d_p^H (h − Aβ) assembled from factored inner products.
            let mut resid_theta = dotc(&da_r[p], &w_t[p]);
            let mut resid_phi = dotc(&a_r[p], &v_t[p]);
            for l in 0..k {
                let drr = dotc(&da_r[p], &a_r[l]);
                let dtt = dotc(&da_t[p], &a_t[l]);
                resid_theta -= beta[l] * tt[p][l].conj() * drr;
                resid_phi -= beta[l] * dtt.conj() * rr[p][l];
            }
            g[p] = -2.0 * (beta[p] * resid_theta.conj()).re;
            g[k + p] = -2.0 * (beta[p] * resid_phi.conj()).re;
        }
        g
    });

    MlEval { cost, beta, grad, rank_deficient: false }
}

/// Rank-deficient path: materialize the dictionary, fit through a thresholded
/// pseudo-inverse, and form residual inner products explicitly.
fn ml_eval_fallback(eta: &[f64], h: &ComplexMatrix, want_grad: bool) -> MlEval {
    let k = eta.len() / 2;
    let (m_r, m_t) = (h.rows(), h.cols());
    let rx = ArrayGeometry { num_elements: m_r };
    let tx = ArrayGeometry { num_elements: m_t };
    let a = khatri_rao_dict(eta, rx, tx);
    let h_vec = h.vec_cols();
    let h_col = ComplexMatrix::col_from_slice(&h_vec);
    let beta_mat = pinv(&a).matmul(&h_col);
    let beta: Vec<Complex64> = (0..k).map(|p| beta_mat.get(p, 0)).collect();
    let fitted = a.matmul(&beta_mat);
    let resid: Vec<Complex64> = h_vec
        .iter()
        .zip(fitted.entries())
        .map(|(hv, fv)| hv - fv)
        .collect();
    let cost: f64 = resid.iter().map(|z| z.norm_sqr()).sum();
    let grad = want_grad.then(|| {
        let mut g = vec![0.0; 2 * k];
        for p in 0..k {
            let ar = steering_vector_unchecked(m_r, eta[p]);
            let at = steering_vector_unchecked(m_t, eta[k + p]);
            let dar = steering_derivative_unchecked(m_r, eta[p]);
            let dat = steering_derivative_unchecked(m_t, eta[k + p]);
            let mut d_theta = vec![CZERO; m_r * m_t];
            let mut d_phi = vec![CZERO; m_r * m_t];
            for i in 0..m_t {
                for m in 0..m_r {
                    d_theta[i * m_r + m] = at[i].conj() * dar[m];
                    d_phi[i * m_r + m] = dat[i].conj() * ar[m];
                }
            }
            g[p] = -2.0 * (beta[p] * dotc(&resid, &d_theta)).re;
            g[k + p] = -2.0 * (beta[p] * dotc(&resid, &d_phi)).re;
        }
        g
    });
    MlEval { cost, beta, grad, rank_deficient: true }
}

/// Concentrated ML cost `‖(I − A(η)A(η)†) h‖²` of the stacked angle vector
/// `eta = [θ; φ]` against the vectorized channel `h_vec` (columns stacked).
///
/// A rank-deficient dictionary is handled through a thresholded
/// pseudo-inverse; the cost is still returned.
pub fn ml_cost(eta: &[f64], h_vec: &[Complex64], rx: ArrayGeometry, tx: ArrayGeometry) -> f64 {
    let h = unvec(h_vec, rx, tx);
    ml_eval(eta, &h, false).cost
}

/// Gradient of [`ml_cost`] with respect to `eta`; entry k differentiates
/// θ_k, entry K+k differentiates φ_k.
pub fn ml_gradient(
    eta: &[f64],
    h_vec: &[Complex64],
    rx: ArrayGeometry,
    tx: ArrayGeometry,
) -> Vec<f64> {
    let h = unvec(h_vec, rx, tx);
    ml_eval(eta, &h, true).grad.expect("gradient requested")
}

fn unvec(h_vec: &[Complex64], rx: ArrayGeometry, tx: ArrayGeometry) -> ComplexMatrix {
    let (m_r, m_t) = (rx.num_elements, tx.num_elements);
    assert_eq!(
        h_vec.len(),
        m_r * m_t,
        "vectorized channel length must equal M_r * M_t"
    );
    ComplexMatrix::from_vec_cols(m_r, m_t, h_vec)
}

pub(crate) struct RefineOutcome {
    pub eta: Vec<f64>,
    pub beta: Vec<Complex64>,
    pub rank_deficient: bool,
    pub accepted_steps: usize,
    pub last_step: f64,
}

/// Runs `cfg.grad_iters` Armijo-backtracked gradient steps on the
/// concentrated ML cost starting from `eta0`, then refits the gains.
///
/// `warm` carries the initial trial step across calls: it is overwritten
/// with `min(cfg.armijo_init_step, 4·last_accepted)` after every accepted
/// step, so consecutive refinements skip most of the backtracking.
pub(crate) fn refine_impl(
    eta0: &[f64],
    h: &ComplexMatrix,
    cfg: &ArConfig,
    warm: &mut f64,
) -> RefineOutcome {
    let mut eta = eta0.to_vec();
    let mut accepted_steps = 0usize;
    let mut last_step = 0.0f64;
    let mut rank_deficient = false;

    let mut current = ml_eval(&eta, h, true);
    rank_deficient |= current.rank_deficient;
    for _ in 0..cfg.grad_iters {
        let Some(g) = current.grad.as_ref() else { break };
        let gn2: f64 = g.iter().map(|x| x * x).sum();
        if gn2 == 0.0 || !gn2.is_finite() {
            break;
        }
        let mut mu = *warm;
        let mut accepted = None;
        while mu >= STEP_UNDERFLOW {
            let trial: Vec<f64> = eta.iter().zip(g).map(|(e, gi)| e - mu * gi).collect();
            let eval = ml_eval(&trial, h, false);
            if eval.cost <= current.cost - cfg.armijo_slope * mu * gn2 {
                accepted = Some((trial, mu));
                break;
            }
            mu *= cfg.armijo_shrink;
        }
        let Some((trial, mu)) = accepted else {
            // Step underflow: keep the latest successful iterate.
            break;
        };
        eta = trial;
        last_step = mu;
        accepted_steps += 1;
        *warm = cfg.armijo_init_step.min(4.0 * mu);
        current = ml_eval(&eta, h, true);
        rank_deficient |= current.rank_deficient;
    }

    let fin = ml_eval(&eta, h, false);
    RefineOutcome {
        eta,
        beta: fin.beta,
        rank_deficient: rank_deficient || fin.rank_deficient,
        accepted_steps,
        last_step,
    }
}

/// Refines the angle vector of `state` by gradient descent on the
/// concentrated ML cost and returns the refined `(eta, beta)` pair; the final
/// cost never exceeds the cost at the input angles.
pub fn refine_angles(state: &ArState, cfg: &ArConfig) -> (Vec<f64>, Vec<Complex64>) {
    let mut warm = cfg.armijo_init_step;
    let out = refine_impl(&state.eta, &state.h, cfg, &mut warm);
    (out.eta, out.beta)
}
