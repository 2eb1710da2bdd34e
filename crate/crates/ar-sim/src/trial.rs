//! Single Monte Carlo trial: deterministic data generation and estimator
//! execution.
//!
//! Reproducibility contract: every trial derives its own RNG seed from
//! `(base_seed, snr index, n index, trial index)` with a splitmix64 hash, so
//! results are a pure function of the configuration regardless of execution
//! order or thread count. The trial stream is consumed in a fixed order
//! (DOAs, DODs, gains, training block, then one draw for the noise stream);
//! estimators themselves never touch the trial RNG.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use amp_retrieval::biht::{biht_estimate, build_dictionary, AngularDictionary};
use amp_retrieval::channel::{
    gen_angles, gen_training, observe, synth_channel, ArrayGeometry, ChannelParams,
    QuantizedObservation,
};
use amp_retrieval::estimator::run_ar;
use amp_retrieval::mat::fro_norm_sq;
use amp_retrieval::{ComplexMatrix, Error, Result};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{EstimatorKind, ExperimentConfig, RMode};
use crate::metrics::nmse;

/// Outcome of one estimator on one trial.
#[derive(Clone, Debug)]
pub struct TrialResult {
    pub estimator: EstimatorKind,
    pub snr_db: f64,
    pub n_train: usize,
    pub trial_idx: usize,
    pub nmse: f64,
    /// Outer iterations (AR) or gradient iterations (BIHT) actually run.
    pub iterations: usize,
    pub wall_time_ms: f64,
    pub seed: u64,
}

/// Ground truth and observation for one trial.
pub struct TrialData {
    pub params: ChannelParams,
    pub h_true: ComplexMatrix,
    pub obs: QuantizedObservation,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-independent per-trial seed: a splitmix64 chain over the base seed
/// and the three grid indices.
pub fn derive_trial_seed(base_seed: u64, snr_idx: usize, n_idx: usize, trial_idx: usize) -> u64 {
    let mut s = splitmix64(base_seed ^ 0x5eed_0000_0000_0001);
    s = splitmix64(s ^ snr_idx as u64);
    s = splitmix64(s ^ n_idx as u64);
    s = splitmix64(s ^ trial_idx as u64);
    s
}

/// Positions of `(snr_db, n_train)` in the config grids; trials must run on
/// grid cells so that seeds derive from indices, not float values.
pub fn grid_indices(cfg: &ExperimentConfig, snr_db: f64, n_train: usize) -> Result<(usize, usize)> {
    let snr_idx = cfg
        .snr_grid_db
        .iter()
        .position(|&s| s == snr_db)
        .ok_or_else(|| Error::InvalidArgument(format!("snr {snr_db} dB is not on snr_grid_db")))?;
    let n_idx = cfg
        .effective_n_grid()
        .iter()
        .position(|&n| n == n_train)
        .ok_or_else(|| Error::InvalidArgument(format!("n_train {n_train} is not on the n grid")))?;
    Ok((snr_idx, n_idx))
}

/// Draws the ground-truth channel, training block, and quantized observation
/// for one trial seed.
pub fn build_trial_data(
    cfg: &ExperimentConfig,
    snr_db: f64,
    n_train: usize,
    seed: u64,
) -> Result<TrialData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let doa = gen_angles(cfg.k_paths, &mut rng, cfg.min_angle_sep)?;
    let dod = gen_angles(cfg.k_paths, &mut rng, cfg.min_angle_sep)?;
    let gains: Vec<Complex64> = (0..cfg.k_paths)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect();
    let params = ChannelParams { doa, dod, gains };
    let rx = ArrayGeometry { num_elements: cfg.m_r };
    let tx = ArrayGeometry { num_elements: cfg.m_t };
    let h_true = synth_channel(&params, rx, tx);
    let s = gen_training(cfg.m_t, n_train, cfg.training.into(), &mut rng)?;
    let obs = observe(&h_true, &s, snr_db, &mut rng);
    Ok(TrialData { params, h_true, obs })
}

/// Norm budget handed to the estimators for this trial.
pub fn r_budget(cfg: &ExperimentConfig, h_true: &ComplexMatrix) -> f64 {
    match cfg.ar.r_mode {
        RMode::Oracle => fro_norm_sq(h_true),
        RMode::Expected => (cfg.k_paths * cfg.m_r * cfg.m_t) as f64,
    }
}

/// Process-wide dictionary cache: each (M_r, M_t, grid) triple is built once
/// and shared read-only across trials and threads.
fn shared_dictionary(m_r: usize, m_t: usize, grid_points: usize) -> Arc<AngularDictionary> {
    static DICTS: OnceLock<Mutex<HashMap<(usize, usize, usize), Arc<AngularDictionary>>>> =
        OnceLock::new();
    let cache = DICTS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("dictionary cache poisoned");
    map.entry((m_r, m_t, grid_points))
        .or_insert_with(|| {
            Arc::new(build_dictionary(
                ArrayGeometry { num_elements: m_r },
                ArrayGeometry { num_elements: m_t },
                grid_points,
            ))
        })
        .clone()
}

/// Runs every enabled estimator on the trial identified by
/// `(snr_db, n_train, trial_idx)` and returns one result per estimator, in
/// config order. Fully deterministic up to wall-clock timings.
pub fn run_trial(
    cfg: &ExperimentConfig,
    snr_db: f64,
    n_train: usize,
    trial_idx: usize,
) -> Result<Vec<TrialResult>> {
    let (snr_idx, n_idx) = grid_indices(cfg, snr_db, n_train)?;
    let seed = derive_trial_seed(cfg.base_seed, snr_idx, n_idx, trial_idx);
    let data = build_trial_data(cfg, snr_db, n_train, seed)?;
    let r_norm = r_budget(cfg, &data.h_true);

    let mut out = Vec::with_capacity(cfg.estimators.len());
    for &est in &cfg.estimators {
        let started = Instant::now();
        let (err, iterations) = match est {
            EstimatorKind::Ar => {
                let arc = cfg.ar.to_ar_config(cfg.k_paths, r_norm, seed);
                let (_, h_hat, state) = run_ar(&data.obs, &arc)?;
                (nmse(&h_hat, &data.h_true)?, state.objective_trace.len().saturating_sub(1))
            }
            EstimatorKind::Biht => {
                let dict = shared_dictionary(cfg.m_r, cfg.m_t, cfg.biht.grid_points);
                let est_out =
                    biht_estimate(&data.obs, &dict, cfg.k_paths, cfg.biht.iters, None, r_norm);
                (nmse(&est_out.h, &data.h_true)?, est_out.iterations)
            }
        };
        out.push(TrialResult {
            estimator: est,
            snr_db,
            n_train,
            trial_idx,
            nmse: err,
            iterations,
            wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
            seed,
        });
    }
    Ok(out)
}
