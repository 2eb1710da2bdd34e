//! Fast self-check suite for the `check` subcommand.
//!
//! Each check exercises one mathematical contract of the pipeline on a
//! small fixed-seed instance — closed-form optimality of the amplitude
//! update, the norm constraint and optimality of the channel update,
//! secular-root agreement across the structured solvers, analytic gradients
//! against finite differences, objective monotonicity, and dictionary
//! bookkeeping. The whole suite runs in seconds and prints one line per
//! check, so it doubles as a smoke test on new machines.

use std::f64::consts::PI;

use amp_retrieval::biht::{biht_estimate, build_dictionary};
use amp_retrieval::channel::{
    gen_training, observe, steering_vector, synth_channel, ArrayGeometry, ChannelParams,
    TrainingKind,
};
use amp_retrieval::estimator::{
    ml_cost, ml_gradient, run_ar, secular_solve, special_case_semi_unitary, special_case_unitary,
    update_gamma, update_h, ArConfig,
};
use amp_retrieval::mat::{amplitude, fro_norm_sq, odot_mix, sign_quantize};
use amp_retrieval::{ComplexMatrix, Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::metrics::nmse;

/// Runs every check, printing one status line each; fails if any check does.
pub fn run_checks() -> Result<()> {
    let checks: &[(&str, fn() -> Result<()>)] = &[
        ("lossless sign/amplitude split", check_lossless_split),
        ("steering vector modulus", check_steering_modulus),
        ("training orthogonality", check_training_orthogonality),
        ("amplitude update optimality", check_gamma_optimality),
        ("channel update on norm sphere", check_h_update),
        ("secular root consistency", check_secular_agreement),
        ("ml gradient finite differences", check_gradient_fd),
        ("objective trace monotonicity", check_monotone_trace),
        ("nmse reference values", check_nmse_values),
        ("dictionary atom structure", check_dictionary_atoms),
        ("on-grid sparse recovery", check_biht_on_grid),
    ];
    let mut failures = 0usize;
    for (name, f) in checks {
        match f() {
            Ok(()) => println!("check {name}: ok"),
            Err(e) => {
                failures += 1;
                println!("check {name}: FAILED ({e})");
            }
        }
    }
    if failures == 0 {
        println!("all {} checks passed", checks.len());
        Ok(())
    } else {
        Err(Error::Numerical(format!(
            "{failures} of {} checks failed",
            checks.len()
        )))
    }
}

fn fail(msg: String) -> Error {
    Error::Numerical(msg)
}

fn rand_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// `‖Y⊚Γ − HS‖_F²`, the data-fit half of the objective.
fn fit_objective(y: &ComplexMatrix, gamma: &ComplexMatrix, hs: &ComplexMatrix) -> Result<f64> {
    Ok(fro_norm_sq(&odot_mix(y, gamma)?.sub(hs)))
}

fn check_lossless_split() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..20 {
        let z = rand_matrix(5, 7, &mut rng);
        let rebuilt = odot_mix(&sign_quantize(&z), &amplitude(&z))?;
        if rebuilt.sub(&z).max_abs() != 0.0 {
            return Err(fail("sign/amplitude split failed to reproduce a matrix".into()));
        }
    }
    Ok(())
}

fn check_steering_modulus() -> Result<()> {
    let geom = ArrayGeometry { num_elements: 16 };
    for i in 0..50 {
        let angle = PI * (i as f64 + 0.5) / 50.0;
        let a = steering_vector(geom, angle)?;
        if (a[0] - Complex64::new(1.0, 0.0)).norm() > 1e-15 {
            return Err(fail(format!("steering vector at {angle} has non-unit first entry")));
        }
        for (m, entry) in a.iter().enumerate() {
            if (entry.norm() - 1.0).abs() > 1e-14 {
                return Err(fail(format!("steering entry {m} at {angle} is off the unit circle")));
            }
        }
    }
    Ok(())
}

fn check_training_orthogonality() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for (m_t, n, kind) in [
        (8usize, 5usize, TrainingKind::SemiUnitary),
        (6, 6, TrainingKind::Unitary),
    ] {
        let s = gen_training(m_t, n, kind, &mut rng)?;
        let gram = s.adjoint().matmul(&s);
        let dev = gram.sub(&ComplexMatrix::identity(n)).max_abs();
        if dev > 1e-10 {
            return Err(fail(format!("training gram deviates from identity by {dev:.3e}")));
        }
    }
    Ok(())
}

fn check_gamma_optimality() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let h = rand_matrix(4, 6, &mut rng);
    let s = rand_matrix(6, 5, &mut rng);
    let hs = h.matmul(&s);
    let y = sign_quantize(&rand_matrix(4, 5, &mut rng));
    let gamma = update_gamma(&y, &hs);
    let base = fit_objective(&y, &gamma, &hs)?;

    // The fit is separable per entry and per real component, so scanning one
    // component at a time over the feasible half-line covers the whole
    // constraint set.
    for (i, j) in [(0usize, 0usize), (1, 3), (3, 4), (2, 2)] {
        for t in 0..=100 {
            let cand = 3.0 * t as f64 / 100.0;
            let cur = gamma.get(i, j);
            for adjusted in [Complex64::new(cand, cur.im), Complex64::new(cur.re, cand)] {
                let mut g2 = gamma.clone();
                g2.set(i, j, adjusted);
                if fit_objective(&y, &g2, &hs)? < base - 1e-12 {
                    return Err(fail(format!(
                        "amplitude entry ({i},{j}) admits a better value than the closed form"
                    )));
                }
            }
        }
    }
    Ok(())
}

fn check_h_update() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let (m_r, m_t, n) = (4usize, 5usize, 6usize);
    let cfg = ArConfig { lambda: 0.7, r_norm: 2.5, ..ArConfig::default() };
    let s = rand_matrix(m_t, n, &mut rng);
    let y = sign_quantize(&rand_matrix(m_r, n, &mut rng));
    let gamma = update_gamma(&y, &rand_matrix(m_r, m_t, &mut rng).matmul(&s));
    let h_tilde = rand_matrix(m_r, m_t, &mut rng);

    let h_star = update_h(&y, &gamma, &s, &h_tilde, &cfg)?;
    let norm_dev = (fro_norm_sq(&h_star) - cfg.r_norm).abs();
    if norm_dev > 1e-8 * cfg.r_norm {
        return Err(fail(format!("updated channel misses the norm sphere by {norm_dev:.3e}")));
    }

    let objective = |h: &ComplexMatrix| -> Result<f64> {
        Ok(fit_objective(&y, &gamma, &h.matmul(&s))? + cfg.lambda * fro_norm_sq(&h.sub(&h_tilde)))
    };
    let best = objective(&h_star)?;
    for _ in 0..300 {
        let mut cand = rand_matrix(m_r, m_t, &mut rng);
        cand = cand.scale_re((cfg.r_norm / fro_norm_sq(&cand)).sqrt());
        if objective(&cand)? < best - 1e-9 {
            return Err(fail("a random sphere point beat the channel update".into()));
        }
    }
    Ok(())
}

fn check_secular_agreement() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let r_norm = 3.0;

    // Unitary training: closed form vs. the general root finder.
    let s_u = gen_training(6, 6, TrainingKind::Unitary, &mut rng)?;
    let lambda_u = rand_matrix(4, 6, &mut rng);
    let rho_closed = special_case_unitary(&lambda_u, r_norm)?;
    let rho_general = secular_solve(&lambda_u, &s_u, r_norm, 1e-12)?;
    if (rho_closed - rho_general).abs() > 1e-8 * (1.0 + rho_closed.abs()) {
        return Err(fail(format!(
            "unitary closed form {rho_closed} disagrees with general root {rho_general}"
        )));
    }

    // Semi-unitary training: quartic vs. the general root finder.
    let s_semi = gen_training(8, 5, TrainingKind::SemiUnitary, &mut rng)?;
    let lambda_semi = rand_matrix(4, 8, &mut rng);
    let rho_quartic = special_case_semi_unitary(&lambda_semi, &s_semi, r_norm)?;
    let rho_general = secular_solve(&lambda_semi, &s_semi, r_norm, 1e-12)?;
    if (rho_quartic - rho_general).abs() > 1e-6 * (1.0 + rho_quartic.abs()) {
        return Err(fail(format!(
            "semi-unitary quartic root {rho_quartic} disagrees with general root {rho_general}"
        )));
    }
    Ok(())
}

fn check_gradient_fd() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let rx = ArrayGeometry { num_elements: 6 };
    let tx = ArrayGeometry { num_elements: 6 };
    for _ in 0..3 {
        let eta = vec![
            rng.random_range(0.5..1.4),
            rng.random_range(1.7..2.6),
            rng.random_range(0.5..1.4),
            rng.random_range(1.7..2.6),
        ];
        let h_vec = rand_matrix(6, 6, &mut rng).vec_cols();
        let grad = ml_gradient(&eta, &h_vec, rx, tx);
        for d in 0..eta.len() {
            let e = 1e-6;
            let mut hi = eta.clone();
            hi[d] += e;
            let mut lo = eta.clone();
            lo[d] -= e;
            let fd = (ml_cost(&hi, &h_vec, rx, tx) - ml_cost(&lo, &h_vec, rx, tx)) / (2.0 * e);
            if (fd - grad[d]).abs() > 1e-4 * (1.0 + grad[d].abs()) {
                return Err(fail(format!(
                    "gradient entry {d}: analytic {} vs finite difference {fd}",
                    grad[d]
                )));
            }
        }
    }
    Ok(())
}

fn check_monotone_trace() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let rx = ArrayGeometry { num_elements: 4 };
    let tx = ArrayGeometry { num_elements: 8 };
    let params = ChannelParams {
        doa: vec![0.9, 2.0],
        dod: vec![1.3, 2.4],
        gains: vec![Complex64::new(0.8, -0.4), Complex64::new(-0.3, 0.9)],
    };
    let h = synth_channel(&params, rx, tx);
    let s = gen_training(8, 8, TrainingKind::Gaussian, &mut rng)?;
    let obs = observe(&h, &s, 10.0, &mut rng);
    let cfg = ArConfig {
        k_paths: 2,
        r_norm: fro_norm_sq(&h),
        max_outer_iters: 60,
        ..ArConfig::default()
    };
    let (_, _, state) = run_ar(&obs, &cfg)?;
    for w in state.objective_trace.windows(2) {
        if w[1] > w[0] + 1e-9 * w[0].max(1.0) {
            return Err(fail(format!("objective rose from {} to {}", w[0], w[1])));
        }
    }
    Ok(())
}

fn check_nmse_values() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let h = rand_matrix(4, 4, &mut rng);
    if nmse(&h, &h)? > 1e-15 {
        return Err(fail("nmse of a matrix against itself is not zero".into()));
    }
    if nmse(&h.scale_re(3.0), &h)? > 1e-15 {
        return Err(fail("nmse is not scale-invariant".into()));
    }
    let mut a = ComplexMatrix::zeros(2, 2);
    a.set(0, 0, Complex64::new(1.0, 0.0));
    let mut b = ComplexMatrix::zeros(2, 2);
    b.set(1, 1, Complex64::new(1.0, 0.0));
    if (nmse(&a, &b)? - 2.0).abs() > 1e-12 {
        return Err(fail("nmse of orthogonal matrices is not 2".into()));
    }
    Ok(())
}

fn check_dictionary_atoms() -> Result<()> {
    let rx = ArrayGeometry { num_elements: 4 };
    let tx = ArrayGeometry { num_elements: 3 };
    let dict = build_dictionary(rx, tx, 16);
    let scale = 1.0 / ((4.0 * 3.0) as f64).sqrt();
    for (ti, pj) in [(0usize, 0usize), (5, 9), (15, 3)] {
        let c = dict.column_index(ti, pj);
        let (theta, phi) = dict.column_angles(c);
        let ar = steering_vector(rx, theta)?;
        let at = steering_vector(tx, phi)?;
        let mut norm_sq = 0.0;
        for t in 0..3 {
            for r in 0..4 {
                let expected = ar[r] * at[t].conj() * scale;
                let got = dict.dict.get(t * 4 + r, c);
                if (expected - got).norm() > 1e-12 {
                    return Err(fail(format!("dictionary column {c} row {} is wrong", t * 4 + r)));
                }
                norm_sq += got.norm_sqr();
            }
        }
        if (norm_sq - 1.0).abs() > 1e-12 {
            return Err(fail(format!("dictionary column {c} is not unit-norm")));
        }
    }
    Ok(())
}

fn check_biht_on_grid() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let rx = ArrayGeometry { num_elements: 8 };
    let tx = ArrayGeometry { num_elements: 8 };
    let dict = build_dictionary(rx, tx, 32);
    let truth = dict.column_index(10, 20);
    let (theta, phi) = dict.column_angles(truth);
    let params = ChannelParams { doa: vec![theta], dod: vec![phi], gains: vec![Complex64::new(1.0, 0.0)] };
    let h = synth_channel(&params, rx, tx);
    let s = gen_training(8, 8, TrainingKind::Unitary, &mut rng)?;
    let obs = observe(&h, &s, f64::INFINITY, &mut rng);
    let est = biht_estimate(&obs, &dict, 1, 100, None, fro_norm_sq(&h));
    if est.support != vec![truth] {
        return Err(fail(format!(
            "support {:?} does not match the planted grid cell {truth}",
            est.support
        )));
    }
    // One-bit data leaves a small phase ambiguity; the estimate should still
    // land near the planted channel.
    let err = nmse(&est.h, &h)?;
    if err > 0.5 {
        return Err(fail(format!("on-grid estimate is far from the truth (nmse {err:.3})")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_check_suite_passes() {
        run_checks().expect("every self-check passes");
    }
}
