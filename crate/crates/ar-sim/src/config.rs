//! Experiment configuration: presets, file loading, and validation.
//!
//! Configs round-trip through TOML with the exact field names of
//! [`ExperimentConfig`]; command-line flags override file values after
//! loading. Two presets reproduce the standard study setups:
//!
//! * `downlink-fdd` — wide transmit array (4×64), semi-unitary training
//!   block of 32 symbols, 5 paths, both estimators;
//! * `uplink-tdd` — 64-antenna receiver, 16 single-antenna users sending
//!   mutually orthogonal (unitary) training, amplitude retrieval only.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use amp_retrieval::channel::TrainingKind;
use amp_retrieval::estimator::ArConfig;
use amp_retrieval::{Error, Result};
use serde::{Deserialize, Serialize};

/// Named experiment family; `custom` leaves every field caller-controlled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    DownlinkFdd,
    UplinkTdd,
    Custom,
}

/// Estimators the harness can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Ar,
    Biht,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorKind::Ar => write!(f, "ar"),
            EstimatorKind::Biht => write!(f, "biht"),
        }
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ar" => Ok(EstimatorKind::Ar),
            "biht" => Ok(EstimatorKind::Biht),
            other => Err(Error::InvalidArgument(format!("unknown estimator '{other}'"))),
        }
    }
}

/// Training block family, mirroring the channel module's kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingConfig {
    SemiUnitary,
    Unitary,
    Gaussian,
}

impl From<TrainingConfig> for TrainingKind {
    fn from(t: TrainingConfig) -> TrainingKind {
        match t {
            TrainingConfig::SemiUnitary => TrainingKind::SemiUnitary,
            TrainingConfig::Unitary => TrainingKind::Unitary,
            TrainingConfig::Gaussian => TrainingKind::Gaussian,
        }
    }
}

/// How the norm budget R handed to the estimator is chosen per trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RMode {
    /// R = ‖H_true‖_F² of the drawn channel (genie-aided, the common
    /// benchmark convention; NMSE is scale-invariant anyway).
    Oracle,
    /// R = K·M_r·M_t, the expectation of ‖H‖_F² under unit-variance path
    /// gains.
    Expected,
}

/// Estimator knobs mirroring [`ArConfig`], minus the per-trial quantities
/// (K, R, seed) that the harness fills in itself.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArSection {
    pub lambda: f64,
    pub max_outer_iters: usize,
    pub outer_tol: f64,
    pub grad_iters: usize,
    pub armijo_init_step: f64,
    pub armijo_shrink: f64,
    pub armijo_slope: f64,
    pub init_grid_points: usize,
    pub secular_tol: f64,
    pub r_mode: RMode,
}

impl Default for ArSection {
    fn default() -> Self {
        let d = ArConfig::default();
        ArSection {
            lambda: d.lambda,
            max_outer_iters: d.max_outer_iters,
            outer_tol: d.outer_tol,
            grad_iters: d.grad_iters,
            armijo_init_step: d.armijo_init_step,
            armijo_shrink: d.armijo_shrink,
            armijo_slope: d.armijo_slope,
            init_grid_points: d.init_grid_points,
            secular_tol: d.secular_tol,
            r_mode: RMode::Oracle,
        }
    }
}

impl ArSection {
    /// Completes the section into a runnable [`ArConfig`] for one trial.
    pub fn to_ar_config(&self, k_paths: usize, r_norm: f64, rng_seed: u64) -> ArConfig {
        ArConfig {
            k_paths,
            lambda: self.lambda,
            r_norm,
            max_outer_iters: self.max_outer_iters,
            outer_tol: self.outer_tol,
            grad_iters: self.grad_iters,
            armijo_init_step: self.armijo_init_step,
            armijo_shrink: self.armijo_shrink,
            armijo_slope: self.armijo_slope,
            init_grid_points: self.init_grid_points,
            secular_tol: self.secular_tol,
            rng_seed,
        }
    }
}

/// Baseline knobs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BihtSection {
    /// Angular grid density per dimension.
    pub grid_points: usize,
    /// Fixed iteration budget.
    pub iters: usize,
}

impl Default for BihtSection {
    fn default() -> Self {
        BihtSection { grid_points: 128, iters: 300 }
    }
}

/// Complete description of one Monte Carlo experiment. The emitted CSVs are
/// a pure function of this struct.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub m_r: usize,
    pub m_t: usize,
    /// Training length used when `n_grid` is empty.
    pub n_train: usize,
    pub k_paths: usize,
    pub snr_grid_db: Vec<f64>,
    /// Training-length sweep values; empty means "just `n_train`".
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub min_angle_sep: f64,
    pub training: TrainingConfig,
    pub estimators: Vec<EstimatorKind>,
    pub base_seed: u64,
    pub output_path: String,
    pub ar: ArSection,
    pub biht: BihtSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: Scenario::Custom,
            m_r: 4,
            m_t: 8,
            n_train: 8,
            k_paths: 2,
            snr_grid_db: vec![10.0],
            n_grid: Vec::new(),
            trials: 50,
            min_angle_sep: PI / 16.0,
            training: TrainingConfig::Gaussian,
            estimators: vec![EstimatorKind::Ar],
            base_seed: 1,
            output_path: "sweep.csv".into(),
            ar: ArSection::default(),
            biht: BihtSection::default(),
        }
    }
}

impl ExperimentConfig {
    /// The standard downlink study: 4×64 arrays, N=32 semi-unitary training,
    /// K=5 paths separated by at least π/16, both estimators.
    pub fn downlink_fdd() -> Self {
        ExperimentConfig {
            scenario: Scenario::DownlinkFdd,
            m_r: 4,
            m_t: 64,
            n_train: 32,
            k_paths: 5,
            snr_grid_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            n_grid: Vec::new(),
            trials: 50,
            min_angle_sep: PI / 16.0,
            training: TrainingConfig::SemiUnitary,
            estimators: vec![EstimatorKind::Ar, EstimatorKind::Biht],
            base_seed: 1,
            output_path: "downlink_fdd.csv".into(),
            ar: ArSection::default(),
            biht: BihtSection::default(),
        }
    }

    /// The standard uplink study: 64-antenna receiver, 16 single-antenna
    /// users with mutually orthogonal training (N = K, unitary S).
    ///
    /// With 16 users the downlink's π/16 floor is infeasible (16·π/16 = π),
    /// so the separation floor is π/64.
    pub fn uplink_tdd() -> Self {
        ExperimentConfig {
            scenario: Scenario::UplinkTdd,
            m_r: 64,
            m_t: 16,
            n_train: 16,
            k_paths: 16,
            snr_grid_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            n_grid: Vec::new(),
            trials: 50,
            min_angle_sep: PI / 64.0,
            training: TrainingConfig::Unitary,
            estimators: vec![EstimatorKind::Ar],
            base_seed: 1,
            output_path: "uplink_tdd.csv".into(),
            ar: ArSection::default(),
            biht: BihtSection::default(),
        }
    }

    /// Looks up a preset by CLI name (hyphens and underscores both accepted).
    pub fn preset(name: &str) -> Result<Self> {
        match name.replace('-', "_").as_str() {
            "downlink_fdd" => Ok(Self::downlink_fdd()),
            "uplink_tdd" => Ok(Self::uplink_tdd()),
            other => Err(Error::InvalidArgument(format!(
                "unknown preset '{other}' (available: downlink-fdd, uplink-tdd)"
            ))),
        }
    }

    /// Parses a TOML config whose keys mirror this struct's field names.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidArgument(format!("config parse error: {e}")))
    }

    /// Loads and parses a TOML config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Training lengths actually swept.
    pub fn effective_n_grid(&self) -> Vec<usize> {
        if self.n_grid.is_empty() {
            vec![self.n_train]
        } else {
            self.n_grid.clone()
        }
    }

    /// Checks grid/shape/feasibility invariants before a run.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.m_r == 0 || self.m_t == 0 {
            return Err(Error::InvalidArgument("array sizes must be positive".into()));
        }
        if self.k_paths == 0 {
            return Err(Error::InvalidArgument("k_paths must be at least 1".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::InvalidArgument("snr_grid_db must be nonempty".into()));
        }
        if !self.snr_grid_db.iter().all(|s| s.is_finite() || *s == f64::INFINITY) {
            return Err(Error::InvalidArgument("snr_grid_db entries must be finite or +inf".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidArgument("at least one estimator must be enabled".into()));
        }
        if self.min_angle_sep < 0.0 || self.k_paths as f64 * self.min_angle_sep >= PI {
            return Err(Error::InvalidArgument(format!(
                "k_paths={} angles with pairwise separation {} cannot fit in [0, pi]",
                self.k_paths, self.min_angle_sep
            )));
        }
        for &n in &self.effective_n_grid() {
            if n == 0 {
                return Err(Error::InvalidArgument("training lengths must be positive".into()));
            }
            match self.training {
                TrainingConfig::Unitary if n != self.m_t => {
                    return Err(Error::InvalidArgument(format!(
                        "unitary training requires n_train = m_t = {}, got {n}",
                        self.m_t
                    )));
                }
                TrainingConfig::SemiUnitary if n > self.m_t => {
                    return Err(Error::InvalidArgument(format!(
                        "semi-unitary training requires n_train <= m_t = {}, got {n}",
                        self.m_t
                    )));
                }
                _ => {}
            }
        }
        if self.estimators.contains(&EstimatorKind::Biht) && self.biht.grid_points < 2 {
            return Err(Error::InvalidArgument("biht.grid_points must be at least 2".into()));
        }
        if self.ar.lambda <= 0.0 || self.ar.outer_tol <= 0.0 || self.ar.secular_tol <= 0.0 {
            return Err(Error::InvalidArgument(
                "ar.lambda, ar.outer_tol, ar.secular_tol must be positive".into(),
            ));
        }
        if self.output_path.is_empty() {
            return Err(Error::InvalidArgument("output_path must be nonempty".into()));
        }
        Ok(())
    }
}
