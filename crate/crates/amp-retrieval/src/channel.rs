//! Geometric multipath channel simulator with one-bit observations.
//!
//! The channel between a transmit and a receive uniform linear array is a sum
//! of K specular paths: `H = A_r(theta) diag(beta) A_t^H(phi)`, where each
//! column of `A_r`/`A_t` is a steering vector and `beta` holds the complex
//! path gains. A training block `S` is sent, circular Gaussian noise is added,
//! and the receiver records only the signs of the real and imaginary parts:
//! `Y = sign_quantize(H S + N)`.
//!
//! SNR is defined per received sample: `sigma^2 = mean(|HS|^2) / 10^(snr/10)`,
//! split evenly across the two real components. A zero channel has no signal
//! power to scale against, so it falls back to a unit noise floor, which keeps
//! the observation well defined (pure quantized noise).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::mat::{fro_norm_sq, sign_quantize, ComplexMatrix};

/// Uniform linear array with half-wavelength element spacing.
///
/// Element `m` (0-indexed) at angle `theta` contributes the phase
/// `exp(j*pi*m*cos(theta))`; over `theta` in `[0, pi]` the map is injective,
/// so no two distinct angles alias to the same steering vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayGeometry {
    pub num_elements: usize,
}

/// Specular multipath parameters: directions of arrival and departure plus a
/// complex gain per path.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    /// Directions of arrival (radians, one per path).
    pub doa: Vec<f64>,
    /// Directions of departure (radians, one per path).
    pub dod: Vec<f64>,
    /// Complex path gains.
    pub gains: Vec<Complex64>,
}

impl ChannelParams {
    /// Number of paths.
    pub fn num_paths(&self) -> usize {
        self.doa.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.doa.is_empty() {
            return Err(Error::InvalidArgument("at least one path required".into()));
        }
        if self.doa.len() != self.dod.len() || self.doa.len() != self.gains.len() {
            return Err(Error::DimMismatch {
                op: "ChannelParams",
                expected: "doa, dod, gains of equal length".into(),
                got: format!("{}, {}, {}", self.doa.len(), self.dod.len(), self.gains.len()),
            });
        }
        for &a in self.doa.iter().chain(self.dod.iter()) {
            if !(0.0..=PI).contains(&a) {
                return Err(Error::InvalidArgument(format!(
                    "angle {a} outside [0, pi]"
                )));
            }
        }
        Ok(())
    }
}

/// One-bit training observation: the quantized measurements together with the
/// training block and the noise bookkeeping needed to reproduce them.
#[derive(Debug, Clone)]
pub struct QuantizedObservation {
    /// M_r x N quantized measurements; every entry is one of ±1±j.
    pub y: ComplexMatrix,
    /// M_t x N training block as transmitted.
    pub s: ComplexMatrix,
    pub snr_db: f64,
    /// Seed of the dedicated noise stream used for this observation.
    pub noise_seed: u64,
}

/// Steering vector of a half-wavelength ULA: entry m is
/// `exp(j*pi*m*cos(angle))` for m = 0..M-1.
pub fn steering_vector(geom: ArrayGeometry, angle: f64) -> Result<Vec<Complex64>> {
    if !(0.0..=PI).contains(&angle) {
        return Err(Error::InvalidArgument(format!(
            "steering angle {angle} outside [0, pi]"
        )));
    }
    Ok(steering_vector_unchecked(geom.num_elements, angle))
}

/// Same phase model without the domain check, for use inside iterative angle
/// refinement where intermediate iterates may briefly leave [0, pi].
pub(crate) fn steering_vector_unchecked(m: usize, angle: f64) -> Vec<Complex64> {
    let step = PI * angle.cos();
    (0..m)
        .map(|i| Complex64::from_polar(1.0, step * i as f64))
        .collect()
}

/// Derivative of the steering vector with respect to the angle: entry m is
/// `j*pi*m*(-sin(angle)) * exp(j*pi*m*cos(angle))`.
pub(crate) fn steering_derivative_unchecked(m: usize, angle: f64) -> Vec<Complex64> {
    let step = PI * angle.cos();
    let slope = -PI * angle.sin();
    (0..m)
        .map(|i| {
            let phase = Complex64::from_polar(1.0, step * i as f64);
            Complex64::new(0.0, slope * i as f64) * phase
        })
        .collect()
}

/// Builds the channel matrix `H = A_r(theta) diag(beta) A_t^H(phi)` as a sum
/// of rank-one path contributions.
pub fn synth_channel(
    params: &ChannelParams,
    rx: ArrayGeometry,
    tx: ArrayGeometry,
) -> ComplexMatrix {
    params
        .validate()
        .expect("synth_channel requires valid channel parameters");
    let mut h = ComplexMatrix::zeros(rx.num_elements, tx.num_elements);
    for k in 0..params.num_paths() {
        let ar = steering_vector_unchecked(rx.num_elements, params.doa[k]);
        let at = steering_vector_unchecked(tx.num_elements, params.dod[k]);
        let beta = params.gains[k];
        for (i, &ai) in ar.iter().enumerate() {
            let scaled = beta * ai;
            for (j, &tj) in at.iter().enumerate() {
                h.set(i, j, h.get(i, j) + scaled * tj.conj());
            }
        }
    }
    h
}

/// Draws `k` angles i.i.d. uniform on [0, pi], rejecting whole draws until
/// every pair is separated by at least `min_sep`.
pub fn gen_angles(k: usize, rng: &mut impl Rng, min_sep: f64) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k as f64 * min_sep >= PI {
        return Err(Error::InfeasibleSeparation(format!(
            "{k} angles with pairwise separation {min_sep} cannot fit in [0, pi]"
        )));
    }
    const MAX_ATTEMPTS: usize = 100_000;
    for _ in 0..MAX_ATTEMPTS {
        let angles: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..=PI)).collect();
        let ok = (0..k).all(|i| (0..i).all(|j| (angles[i] - angles[j]).abs() >= min_sep));
        if ok {
            return Ok(angles);
        }
    }
    Err(Error::InfeasibleSeparation(format!(
        "no admissible draw of {k} angles with separation {min_sep} after {MAX_ATTEMPTS} attempts"
    )))
}

/// Flavor of training block produced by [`gen_training`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainingKind {
    /// Orthonormal columns: `S^H S = I_n` (requires n <= m_t).
    SemiUnitary,
    /// Square unitary: `S S^H = S^H S = I` (requires n = m_t).
    Unitary,
    /// I.i.d. circular complex normal entries with unit variance.
    Gaussian,
}

/// Generates an `m_t x n` training block of the requested kind.
pub fn gen_training(
    m_t: usize,
    n: usize,
    kind: TrainingKind,
    rng: &mut impl Rng,
) -> Result<ComplexMatrix> {
    if m_t == 0 || n == 0 {
        return Err(Error::InvalidArgument("training dimensions must be positive".into()));
    }
    match kind {
        TrainingKind::SemiUnitary if n > m_t => Err(Error::DimMismatch {
            op: "gen_training(semi_unitary)",
            expected: format!("n <= m_t = {m_t}"),
            got: format!("n = {n}"),
        }),
        TrainingKind::Unitary if n != m_t => Err(Error::DimMismatch {
            op: "gen_training(unitary)",
            expected: format!("n = m_t = {m_t}"),
            got: format!("n = {n}"),
        }),
        TrainingKind::SemiUnitary | TrainingKind::Unitary => {
            let g = gaussian_matrix(m_t, n, rng);
            let cols: Vec<Vec<Complex64>> = (0..n).map(|j| g.col(j)).collect();
            let (q_cols, _) = crate::linalg::qr_thin(&cols);
            Ok(ComplexMatrix::from_fn(m_t, n, |i, j| q_cols[j][i]))
        }
        TrainingKind::Gaussian => Ok(gaussian_matrix(m_t, n, rng)),
    }
}

/// I.i.d. circular complex normal entries, unit variance per complex entry,
/// drawn row-major with the real part before the imaginary part.
fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let scale = 0.5_f64.sqrt();
    let mut entries = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        entries.push(Complex64::new(re * scale, im * scale));
    }
    ComplexMatrix::from_parts(rows, cols, entries)
}

/// Transmits `s` through `h`, adds circular Gaussian noise at the requested
/// SNR, and quantizes each real component to its sign.
///
/// A single `u64` is drawn from `rng` to seed a dedicated noise stream; the
/// seed is recorded in the returned observation so the exact noise
/// realization can be reproduced. Pass `snr_db = f64::INFINITY` for the
/// noiseless case (the seed is still drawn, keeping the caller's RNG stream
/// aligned across SNR settings).
pub fn observe(
    h: &ComplexMatrix,
    s: &ComplexMatrix,
    snr_db: f64,
    rng: &mut impl Rng,
) -> QuantizedObservation {
    assert_eq!(
        h.cols(),
        s.rows(),
        "observe: channel columns must match training rows"
    );
    let mut z = h.matmul(s);
    let noise_seed = rng.next_u64();
    if snr_db.is_finite() {
        let n_entries = (z.rows() * z.cols()) as f64;
        let power = fro_norm_sq(&z) / n_entries;
        // A zero channel carries no signal power to scale against; fall back
        // to a unit noise floor so the observation stays well defined.
        let sigma2 = if power > 0.0 {
            power / 10f64.powf(snr_db / 10.0)
        } else {
            1.0
        };
        let comp = (sigma2 / 2.0).sqrt();
        let mut noise_rng = ChaCha8Rng::seed_from_u64(noise_seed);
        for e in z.entries_mut() {
            let re: f64 = StandardNormal.sample(&mut noise_rng);
            let im: f64 = StandardNormal.sample(&mut noise_rng);
            *e += Complex64::new(re * comp, im * comp);
        }
    }
    QuantizedObservation {
        y: sign_quantize(&z),
        s: s.clone(),
        snr_db,
        noise_seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: Complex64, b: Complex64, tol: f64) {
        assert!((a - b).norm() < tol, "{a} vs {b}");
    }

    #[test]
    fn steering_broadside_is_all_ones() {
        let v = steering_vector(ArrayGeometry { num_elements: 4 }, PI / 2.0).unwrap();
        for e in v {
            assert_close(e, Complex64::new(1.0, 0.0), 1e-12);
        }
    }

    #[test]
    fn steering_endfire_alternates_sign() {
        let v = steering_vector(ArrayGeometry { num_elements: 4 }, 0.0).unwrap();
        let want = [1.0, -1.0, 1.0, -1.0];
        for (e, w) in v.iter().zip(want) {
            assert_close(*e, Complex64::new(w, 0.0), 1e-12);
        }
    }

    #[test]
    fn steering_sixty_degrees_quarter_turn() {
        let v = steering_vector(ArrayGeometry { num_elements: 2 }, PI / 3.0).unwrap();
        assert_close(v[0], Complex64::new(1.0, 0.0), 1e-12);
        assert_close(v[1], Complex64::new(0.0, 1.0), 1e-12);
    }

    #[test]
    fn steering_rejects_out_of_range() {
        let g = ArrayGeometry { num_elements: 3 };
        assert!(steering_vector(g, -0.1).is_err());
        assert!(steering_vector(g, PI + 0.1).is_err());
    }

    #[test]
    fn steering_entries_unit_modulus_first_entry_one() {
        for &angle in &[0.3, 1.1, 2.9] {
            let v = steering_vector(ArrayGeometry { num_elements: 8 }, angle).unwrap();
            assert_close(v[0], Complex64::new(1.0, 0.0), 1e-12);
            for e in v {
                assert!((e.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn synth_scalar_single_path() {
        let p = ChannelParams {
            doa: vec![1.0],
            dod: vec![2.0],
            gains: vec![Complex64::new(1.0, 0.0)],
        };
        let one = ArrayGeometry { num_elements: 1 };
        let h = synth_channel(&p, one, one);
        assert_close(h.get(0, 0), Complex64::new(1.0, 0.0), 1e-12);
    }

    #[test]
    fn synth_broadside_path_fills_constant() {
        let p = ChannelParams {
            doa: vec![PI / 2.0],
            dod: vec![PI / 2.0],
            gains: vec![Complex64::new(2.0, 0.0)],
        };
        let two = ArrayGeometry { num_elements: 2 };
        let h = synth_channel(&p, two, two);
        for i in 0..2 {
            for j in 0..2 {
                assert_close(h.get(i, j), Complex64::new(2.0, 0.0), 1e-12);
            }
        }
    }

    #[test]
    fn synth_matches_rank_one_sum_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rx = ArrayGeometry { num_elements: 4 };
        let tx = ArrayGeometry { num_elements: 3 };
        let p = ChannelParams {
            doa: vec![rng.random_range(0.0..=PI), rng.random_range(0.0..=PI)],
            dod: vec![rng.random_range(0.0..=PI), rng.random_range(0.0..=PI)],
            gains: vec![Complex64::new(0.3, -1.1), Complex64::new(-0.7, 0.2)],
        };
        let h = synth_channel(&p, rx, tx);
        for i in 0..4 {
            for j in 0..3 {
                let mut want = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    let ai = Complex64::from_polar(1.0, PI * i as f64 * p.doa[k].cos());
                    let tj = Complex64::from_polar(1.0, PI * j as f64 * p.dod[k].cos());
                    want += p.gains[k] * ai * tj.conj();
                }
                assert_close(h.get(i, j), want, 1e-12);
            }
        }
    }

    #[test]
    fn gen_angles_single_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = gen_angles(1, &mut rng, PI / 16.0).unwrap();
        assert_eq!(a.len(), 1);
        assert!((0.0..=PI).contains(&a[0]));
    }

    #[test]
    fn gen_angles_respects_separation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let a = gen_angles(2, &mut rng, PI / 16.0).unwrap();
            assert!((a[0] - a[1]).abs() >= PI / 16.0);
        }
    }

    #[test]
    fn gen_angles_statistical_sweep_keeps_separation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut min_sep = f64::INFINITY;
        for _ in 0..1000 {
            let a = gen_angles(5, &mut rng, PI / 16.0).unwrap();
            for i in 0..5 {
                for j in 0..i {
                    min_sep = min_sep.min((a[i] - a[j]).abs());
                }
            }
        }
        assert!(min_sep >= PI / 16.0, "empirical min separation {min_sep}");
    }

    #[test]
    fn gen_angles_rejects_infeasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(matches!(
            gen_angles(16, &mut rng, PI / 16.0),
            Err(Error::InfeasibleSeparation(_))
        ));
    }

    #[test]
    fn training_unitary_both_grams_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = gen_training(4, 4, TrainingKind::Unitary, &mut rng).unwrap();
        let g1 = s.adjoint().matmul(&s);
        let g2 = s.matmul(&s.adjoint());
        let i4 = ComplexMatrix::identity(4);
        assert!(g1.sub(&i4).max_abs() < 1e-10);
        assert!(g2.sub(&i4).max_abs() < 1e-10);
    }

    #[test]
    fn training_semi_unitary_outer_gram_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = gen_training(64, 32, TrainingKind::SemiUnitary, &mut rng).unwrap();
        assert!(s.adjoint().matmul(&s).sub(&ComplexMatrix::identity(32)).max_abs() < 1e-10);
        // S S^H is a rank-32 projector on C^64: eigenvalues are 32 zeros and
        // 32 ones.
        let eig = crate::linalg::herm_eig(&s.matmul(&s.adjoint())).unwrap();
        for (i, v) in eig.eigenvalues.iter().enumerate() {
            let want = if i < 32 { 0.0 } else { 1.0 };
            assert!((v - want).abs() < 1e-8, "eigenvalue {i} = {v}, want {want}");
        }
    }

    #[test]
    fn training_gaussian_unit_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = gen_training(64, 32, TrainingKind::Gaussian, &mut rng).unwrap();
        let var = fro_norm_sq(&s) / (64.0 * 32.0);
        assert!((var - 1.0).abs() < 0.1, "sample variance {var}");
    }

    #[test]
    fn training_rejects_bad_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert!(gen_training(4, 8, TrainingKind::SemiUnitary, &mut rng).is_err());
        assert!(gen_training(4, 3, TrainingKind::Unitary, &mut rng).is_err());
    }

    #[test]
    fn observe_noiseless_quantizes_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let h = gaussian_matrix(3, 4, &mut rng);
        let s = gaussian_matrix(4, 6, &mut rng);
        let obs = observe(&h, &s, f64::INFINITY, &mut rng);
        let want = sign_quantize(&h.matmul(&s));
        assert_eq!(obs.y.entries(), want.entries());
    }

    #[test]
    fn observe_entries_are_quadrant_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = gaussian_matrix(4, 4, &mut rng);
        let s = gaussian_matrix(4, 8, &mut rng);
        let obs = observe(&h, &s, 5.0, &mut rng);
        for e in obs.y.entries() {
            assert!(e.re.abs() == 1.0 && e.im.abs() == 1.0);
        }
    }

    #[test]
    fn observe_zero_channel_hits_all_quadrants_evenly() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = ComplexMatrix::zeros(20, 5);
        let s = gaussian_matrix(5, 500, &mut rng);
        let obs = observe(&h, &s, 10.0, &mut rng);
        let mut counts = [0usize; 4];
        for e in obs.y.entries() {
            let idx = (if e.re > 0.0 { 0 } else { 1 }) + 2 * (if e.im > 0.0 { 0 } else { 1 });
            counts[idx] += 1;
        }
        let total: usize = counts.iter().sum();
        assert_eq!(total, 10_000);
        for c in counts {
            let frac = c as f64 / total as f64;
            assert!((frac - 0.25).abs() < 0.02, "quadrant fraction {frac}");
        }
    }

    #[test]
    fn observe_reproducible_from_recorded_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = gaussian_matrix(3, 3, &mut rng);
        let s = gaussian_matrix(3, 5, &mut rng);
        let obs1 = observe(&h, &s, 0.0, &mut rng.clone());
        let obs2 = observe(&h, &s, 0.0, &mut rng.clone());
        assert_eq!(obs1.noise_seed, obs2.noise_seed);
        assert_eq!(obs1.y.entries(), obs2.y.entries());
    }

    #[test]
    fn observe_noiseless_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let h = gaussian_matrix(3, 4, &mut rng);
        let s = gaussian_matrix(4, 6, &mut rng);
        let y1 = observe(&h, &s, f64::INFINITY, &mut rng.clone()).y;
        let y2 = observe(&h.scale_re(3.7), &s, f64::INFINITY, &mut rng.clone()).y;
        assert_eq!(y1.entries(), y2.entries());
    }
}
