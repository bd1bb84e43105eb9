use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::config::{ExperimentConfig, FilterKind};
use super::stats::{rmse, summarize, Summary};
use super::HarnessError;
use crate::filters::{
    dense_ukf_cycle, enkf_cycle, ensemble_mean, progressive_ekf_cycle, sparse_ukf_cycle, CycleDiagnostics,
    EnkfParams, FilterError, FilterState, ProgressiveParams, UkfParams,
};
use crate::models::{rk4_step, Lorenz96, Lorenz96Config, ObservationOperator};
use crate::sparse::{SparseSymMatrix, SparsityPattern};

/// Environment variable overriding the replicate worker count.
pub const WORKERS_ENV: &str = "SPARSEKF_WORKERS";

/// Independent random streams of one replicate.
#[derive(Clone, Copy, Debug)]
enum Stream {
    Truth = 0,
    Observations = 1,
    Initial = 2,
    Filter = 3,
}

/// Seed of replicate `index` under `master`.
pub fn replicate_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64);
    rng.next_u64()
}

fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

fn gaussian(rng: &mut impl Rng, sd: f64) -> f64 {
    let e: f64 = rng.sample(StandardNormal);
    sd * e
}

fn model_config(config: &ExperimentConfig) -> Lorenz96Config {
    Lorenz96Config {
        n: config.n,
        forcing: config.forcing,
        dt: config.dt,
    }
}

/// `n_steps + 1` states from a uniform initial condition.
pub fn generate_truth(config: &ExperimentConfig, seed: u64) -> Result<Vec<Vec<f64>>, HarnessError> {
    config.validate()?;
    let mut rng = stream(seed, Stream::Truth);
    let a = config.init_range;
    let mut x: Vec<f64> = (0..config.n).map(|_| rng.random_range(-a..=a)).collect();
    let mut trajectory = Vec::with_capacity(config.n_steps + 1);
    trajectory.push(x.clone());
    for _ in 0..config.n_steps {
        x = rk4_step(&x, config.dt, config.forcing)?;
        trajectory.push(x.clone());
    }
    Ok(trajectory)
}

pub fn observation_operator(config: &ExperimentConfig) -> Result<ObservationOperator, HarnessError> {
    Ok(ObservationOperator::strided(config.n, config.obs_stride, config.r)?)
}

/// Noisy observations of the truth; entry `k` is `None` at steps without an
/// observation (always at `k = 0`).
pub fn synthesize_observations(
    truth: &[Vec<f64>],
    config: &ExperimentConfig,
    seed: u64,
) -> Result<Vec<Option<Vec<f64>>>, HarnessError> {
    let obs = observation_operator(config)?;
    let mut rng = stream(seed, Stream::Observations);
    let sd = config.r.sqrt();
    truth
        .iter()
        .enumerate()
        .map(|(k, x)| {
            if k == 0 || k % config.obs_interval != 0 {
                return Ok(None);
            }
            let mut y = obs.observe(x)?;
            for v in &mut y {
                *v += gaussian(&mut rng, sd);
            }
            Ok(Some(y))
        })
        .collect()
}

/// Outcome of one replicate.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateResult {
    pub replicate: usize,
    /// `None` when the filter failed.
    pub rmse: Option<f64>,
    pub eval_per_cycle: f64,
    /// Cycles in which the positivity shift was applied.
    pub gamma_activations: usize,
    /// Cycles in which the square root needed jitter.
    pub jitter_activations: usize,
    pub failure: Option<String>,
}

/// Analysis trajectory and per-cycle diagnostics of a filter run.
#[derive(Clone, Debug)]
pub struct FilterRun {
    pub analysis: Vec<Vec<f64>>,
    pub diagnostics: Vec<CycleDiagnostics>,
}

/// Runs the configured filter over a fixed truth/observation record.
pub fn run_filter(
    config: &ExperimentConfig,
    truth0: &[f64],
    observations: &[Option<Vec<f64>>],
    seed: u64,
) -> Result<FilterRun, FilterError> {
    let model = Lorenz96::new(model_config(config))?;
    let obs = ObservationOperator::strided(config.n, config.obs_stride, config.r)?;
    let mut init_rng = stream(seed, Stream::Initial);
    let sd0 = config.p0.sqrt();
    let xa0: Vec<f64> = truth0.iter().map(|t| t + gaussian(&mut init_rng, sd0)).collect();

    let cycles = observations.len().saturating_sub(1);
    let mut analysis = Vec::with_capacity(cycles + 1);
    let mut diagnostics = Vec::with_capacity(cycles);
    analysis.push(xa0.clone());

    match config.filter {
        FilterKind::SparseUkf | FilterKind::ProgressiveEkf => {
            let pattern = Arc::new(SparsityPattern::with_nsp(config.n, config.nsp)?);
            let mut state = FilterState::new(xa0, SparseSymMatrix::scaled_identity(pattern.clone(), config.p0));
            let ukf = UkfParams {
                kappa: config.kappa,
                q: config.q,
                pattern: pattern.clone(),
            };
            let pekf = ProgressiveParams {
                delta: config.delta,
                n_p: config.n_p,
                q: config.q,
                pattern,
            };
            for y in &observations[1..] {
                state = if config.filter == FilterKind::SparseUkf {
                    sparse_ukf_cycle(&state, y.as_deref(), &model, &obs, &ukf)?
                } else {
                    progressive_ekf_cycle(&state, y.as_deref(), &model, &obs, &pekf)?
                };
                analysis.push(state.xa.clone());
                diagnostics.push(state.diagnostics.clone());
            }
        }
        FilterKind::DenseUkf => {
            let mut state = FilterState::new(xa0, DMatrix::identity(config.n, config.n) * config.p0);
            for y in &observations[1..] {
                state = dense_ukf_cycle(&state, y.as_deref(), &model, &obs, config.kappa, config.q)?;
                analysis.push(state.xa.clone());
                diagnostics.push(state.diagnostics.clone());
            }
        }
        FilterKind::Enkf => {
            let params = EnkfParams {
                n_ens: config.n_ens,
                radius: config.rho,
                inflation: config.inflation,
            };
            let mut members: Vec<Vec<f64>> = (0..config.n_ens)
                .map(|_| xa0.iter().map(|m| m + gaussian(&mut init_rng, sd0)).collect())
                .collect();
            let mut rng = stream(seed, Stream::Filter);
            for y in &observations[1..] {
                let (next, diag) = enkf_cycle(&members, y.as_deref(), &model, &obs, &params, &mut rng)?;
                members = next;
                analysis.push(ensemble_mean(&members));
                diagnostics.push(diag);
            }
        }
    }
    Ok(FilterRun { analysis, diagnostics })
}

/// Truth, observations, filter, and RMSE for replicate `index`.
pub fn run_replicate(config: &ExperimentConfig, index: usize) -> Result<ReplicateResult, HarnessError> {
    let seed = replicate_seed(config.seed, index);
    let truth = generate_truth(config, seed)?;
    let observations = synthesize_observations(&truth, config, seed)?;
    match run_filter(config, &truth[0], &observations, seed) {
        Ok(run) => {
            let cycles = run.diagnostics.len().max(1) as f64;
            let evals: u64 = run.diagnostics.iter().map(|d| d.evaluations).sum();
            Ok(ReplicateResult {
                replicate: index,
                rmse: Some(rmse(&run.analysis, &truth)?),
                eval_per_cycle: evals as f64 / cycles,
                gamma_activations: run.diagnostics.iter().filter(|d| d.gamma > 0.0).count(),
                jitter_activations: run.diagnostics.iter().filter(|d| d.chol_jitter > 0.0).count(),
                failure: None,
            })
        }
        Err(e) => Ok(ReplicateResult {
            replicate: index,
            rmse: None,
            eval_per_cycle: 0.0,
            gamma_activations: 0,
            jitter_activations: 0,
            failure: Some(e.to_string()),
        }),
    }
}

/// Aggregate of one experiment.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub filter: FilterKind,
    pub param: String,
    pub replicates: Vec<ReplicateResult>,
    /// Statistics over successful replicates; `None` if all failed.
    pub stats: Option<Summary>,
    pub n_failed: usize,
    pub mean_eval_per_cycle: f64,
    /// Fraction of cycles (over successful replicates) with a positivity shift.
    pub gamma_rate: f64,
    pub jitter_rate: f64,
}

impl RunSummary {
    pub fn from_replicates(config: &ExperimentConfig, replicates: Vec<ReplicateResult>) -> Result<Self, HarnessError> {
        let ok: Vec<&ReplicateResult> = replicates.iter().filter(|r| r.rmse.is_some()).collect();
        let rmses: Vec<f64> = ok.iter().filter_map(|r| r.rmse).collect();
        let stats = if rmses.is_empty() { None } else { Some(summarize(&rmses)?) };
        let n_ok = ok.len().max(1) as f64;
        let cycles = n_ok * config.n_steps as f64;
        Ok(Self {
            filter: config.filter,
            param: config.param_label(),
            n_failed: replicates.len() - ok.len(),
            mean_eval_per_cycle: ok.iter().map(|r| r.eval_per_cycle).sum::<f64>() / n_ok,
            gamma_rate: ok.iter().map(|r| r.gamma_activations as f64).sum::<f64>() / cycles,
            jitter_rate: ok.iter().map(|r| r.jitter_activations as f64).sum::<f64>() / cycles,
            stats,
            replicates,
        })
    }
}

/// Worker count from [`WORKERS_ENV`], else the available parallelism.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs every replicate on a bounded worker pool. Results are collected in
/// replicate order, so the summary does not depend on scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary, HarnessError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let replicates = pool.install(|| {
        (0..config.n_runs)
            .into_par_iter()
            .map(|i| run_replicate(config, i))
            .collect::<Result<Vec<_>, _>>()
    })?;
    RunSummary::from_replicates(config, replicates)
}

/// Configurations behind the two results tables: table 1 compares the EnKF
/// with the sparse UKF, table 2 with the progressive EKF.
pub fn table_configs(base: &ExperimentConfig, table: u8) -> Result<Vec<ExperimentConfig>, HarnessError> {
    let with = |filter: FilterKind, nsp: usize, n_p: usize| ExperimentConfig {
        filter,
        nsp,
        n_p,
        ..base.clone()
    };
    let enkf = with(FilterKind::Enkf, base.nsp, 1);
    match table {
        1 => Ok(vec![
            enkf,
            with(FilterKind::SparseUkf, 7, 1),
            with(FilterKind::SparseUkf, 11, 1),
        ]),
        2 => Ok(vec![
            enkf,
            with(FilterKind::ProgressiveEkf, 7, 1),
            with(FilterKind::ProgressiveEkf, 11, 1),
            with(FilterKind::ProgressiveEkf, 11, 2),
            with(FilterKind::ProgressiveEkf, 17, 2),
        ]),
        other => Err(HarnessError::Config(format!("unknown table {other}; expected 1 or 2"))),
    }
}
