use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterKind {
    SparseUkf,
    ProgressiveEkf,
    Enkf,
    DenseUkf,
}

impl FilterKind {
    pub fn name(self) -> &'static str {
        match self {
            FilterKind::SparseUkf => "sparse-ukf",
            FilterKind::ProgressiveEkf => "progressive-ekf",
            FilterKind::Enkf => "enkf",
            FilterKind::DenseUkf => "dense-ukf",
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sparse-ukf" => Ok(FilterKind::SparseUkf),
            "progressive-ekf" => Ok(FilterKind::ProgressiveEkf),
            "enkf" => Ok(FilterKind::Enkf),
            "dense-ukf" => Ok(FilterKind::DenseUkf),
            other => Err(HarnessError::Config(format!("unknown filter '{other}'"))),
        }
    }
}

/// Every parameter of a twin experiment. Field names double as config-file
/// keys and CLI flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// State dimension.
    pub n: usize,
    pub forcing: f64,
    pub dt: f64,
    /// Model steps (assimilation cycles) per replicate.
    pub n_steps: usize,
    /// Independent replicates.
    pub n_runs: usize,
    /// Observe entries 0, stride, 2·stride, ...
    pub obs_stride: usize,
    /// Assimilate every `obs_interval` model steps.
    pub obs_interval: usize,
    /// Observation noise variance, `R = r·I`.
    pub r: f64,
    /// Initial error variance, `P(0) = p0·I`.
    pub p0: f64,
    /// Initial truth drawn uniformly from `[-init_range, init_range]ⁿ`.
    pub init_range: f64,
    pub filter: FilterKind,
    /// Nonzeros per covariance column (odd).
    pub nsp: usize,
    /// Progressive EKF inner sub-steps.
    pub n_p: usize,
    /// Progressive EKF finite-difference step.
    pub delta: f64,
    pub n_ens: usize,
    /// EnKF localization radius.
    pub rho: f64,
    /// EnKF multiplicative inflation on deviations.
    pub inflation: f64,
    /// Model-error variance, `Q = q·I` on the pattern.
    pub q: f64,
    pub kappa: f64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 40,
            forcing: 8.0,
            dt: 0.025,
            n_steps: 2000,
            n_runs: 100,
            obs_stride: 2,
            obs_interval: 1,
            r: 1.0,
            p0: 0.2,
            init_range: 1.0,
            filter: FilterKind::SparseUkf,
            nsp: 7,
            n_p: 1,
            delta: 1e-4,
            n_ens: 10,
            rho: 4.0,
            inflation: 1.08f64.sqrt(),
            q: 0.0,
            kappa: 0.0,
            seed: 20_240_611,
        }
    }
}

impl ExperimentConfig {
    /// 1000 replicates of 4000 steps.
    pub fn paper_scale(mut self) -> Self {
        self.n_runs = 1000;
        self.n_steps = 4000;
        self
    }

    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    /// Number of observed entries.
    pub fn m(&self) -> usize {
        self.n.div_ceil(self.obs_stride.max(1))
    }

    /// Short parameter label used in reports.
    pub fn param_label(&self) -> String {
        match self.filter {
            FilterKind::SparseUkf => format!("nsp={}", self.nsp),
            FilterKind::ProgressiveEkf => format!("nsp={} n_p={}", self.nsp, self.n_p),
            FilterKind::Enkf => format!("n_ens={}", self.n_ens),
            FilterKind::DenseUkf => "full".to_string(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if self.n < 4 {
            return fail(format!("n must be at least 4, got {}", self.n));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return fail(format!("dt must be positive, got {}", self.dt));
        }
        if !self.forcing.is_finite() {
            return fail(format!("forcing must be finite, got {}", self.forcing));
        }
        if self.n_steps == 0 || self.n_runs == 0 {
            return fail("n_steps and n_runs must be positive".into());
        }
        if self.obs_stride == 0 || self.obs_stride > self.n {
            return fail(format!("obs_stride must be in 1..=n, got {}", self.obs_stride));
        }
        if self.obs_interval == 0 {
            return fail("obs_interval must be positive".into());
        }
        if !(self.r >= 0.0) || !(self.p0 > 0.0) || !(self.init_range >= 0.0) || !(self.q >= 0.0) {
            return fail("r, q, init_range must be non-negative and p0 positive".into());
        }
        match self.filter {
            FilterKind::SparseUkf | FilterKind::ProgressiveEkf => {
                if self.nsp % 2 == 0 || self.nsp > self.n {
                    return fail(format!("nsp must be odd and at most n, got {}", self.nsp));
                }
            }
            _ => {}
        }
        if self.filter == FilterKind::ProgressiveEkf && (self.n_p == 0 || !(self.delta > 0.0)) {
            return fail("n_p must be >= 1 and delta > 0".into());
        }
        if self.filter == FilterKind::Enkf && (self.n_ens < 2 || !(self.rho > 0.0) || !(self.inflation > 0.0)) {
            return fail("n_ens must be >= 2, rho and inflation positive".into());
        }
        if matches!(self.filter, FilterKind::SparseUkf | FilterKind::DenseUkf) && !(self.n as f64 + self.kappa > 0.0) {
            return fail(format!("n + kappa must be positive, kappa = {}", self.kappa));
        }
        Ok(())
    }

    /// Entry evaluations per assimilation cycle implied by the filter setup.
    pub fn expected_evaluations(&self) -> u64 {
        let n = self.n as u64;
        let nsp = self.nsp.min(self.n) as u64;
        match self.filter {
            FilterKind::SparseUkf => n + 2 * n * nsp,
            FilterKind::ProgressiveEkf => self.n_p as u64 * (n + n * nsp),
            FilterKind::Enkf => self.n_ens as u64 * n,
            FilterKind::DenseUkf => n + 2 * n * n,
        }
    }
}
