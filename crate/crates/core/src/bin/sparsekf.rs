use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sparsekf::harness::{
    self, generate_truth, replicate_seed, run_experiment, run_filter, synthesize_observations, table_configs,
    ExperimentConfig, FilterKind, HarnessError,
};

#[derive(Parser)]
#[command(name = "sparsekf", version, about = "Sparse Kalman filter twin experiments on Lorenz-96")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a truth trajectory as CSV.
    Truth {
        #[command(flatten)]
        common: Common,
        /// Replicate whose seed stream is used.
        #[arg(long, default_value_t = 0)]
        replicate: usize,
    },
    /// Run one filter on one replicate and print per-cycle diagnostics.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        replicate: usize,
    },
    /// Run a full experiment and print the summary row.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Also write per-replicate rows to this file.
        #[arg(long)]
        replicates: Option<PathBuf>,
    },
    /// Reproduce the rows of results table 1 (EnKF vs sparse UKF) or 2
    /// (EnKF vs progressive EKF).
    Table {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        table: u8,
        #[arg(long)]
        replicates: Option<PathBuf>,
    },
}

/// Config file plus one override flag per config key.
#[derive(Args)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// 1000 replicates of 4000 steps (before other overrides).
    #[arg(long)]
    paper_scale: bool,
    /// Write output here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,

    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    forcing: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "n_steps")]
    n_steps: Option<usize>,
    #[arg(long = "n_runs")]
    n_runs: Option<usize>,
    #[arg(long = "obs_stride")]
    obs_stride: Option<usize>,
    #[arg(long = "obs_interval")]
    obs_interval: Option<usize>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long = "init_range")]
    init_range: Option<f64>,
    #[arg(long)]
    filter: Option<FilterKind>,
    #[arg(long)]
    nsp: Option<usize>,
    #[arg(long = "n_p")]
    n_p: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "n_ens")]
    n_ens: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    inflation: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_toml_str(&std::fs::read_to_string(path)?)?,
            None => ExperimentConfig::default(),
        };
        if self.paper_scale {
            c = c.paper_scale();
        }
        macro_rules! apply {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { c.$field = v; } )* };
        }
        apply!(
            n, forcing, dt, n_steps, n_runs, obs_stride, obs_interval, r, p0, init_range, filter, nsp, n_p, delta,
            n_ens, rho, inflation, q, kappa, seed
        );
        c.validate()?;
        Ok(c)
    }

    fn writer(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.output {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Truth { common, replicate } => {
            let config = common.resolve()?;
            let truth = generate_truth(&config, replicate_seed(config.seed, replicate))?;
            let mut out = common.writer()?;
            harness::write_trajectory_csv(&mut out, &truth)?;
            out.flush()?;
        }
        Command::Run { common, replicate } => {
            let config = common.resolve()?;
            let seed = replicate_seed(config.seed, replicate);
            let truth = generate_truth(&config, seed)?;
            let observations = synthesize_observations(&truth, &config, seed)?;
            let result = run_filter(&config, &truth[0], &observations, seed)?;
            let mut out = common.writer()?;
            harness::write_cycles_csv(&mut out, &result.analysis, &truth, &result.diagnostics)?;
            out.flush()?;
            eprintln!(
                "{} {} replicate {}: rmse {}",
                config.filter,
                config.param_label(),
                replicate,
                harness::sig6(harness::rmse(&result.analysis, &truth)?)
            );
        }
        Command::Bench { common, replicates } => {
            let config = common.resolve()?;
            let summary = run_experiment(&config)?;
            emit(&common, replicates, &[summary])?;
        }
        Command::Table {
            common,
            table,
            replicates,
        } => {
            let base = common.resolve()?;
            let runs = table_configs(&base, table)?
                .iter()
                .map(|c| {
                    eprintln!("running {} {}", c.filter, c.param_label());
                    run_experiment(c)
                })
                .collect::<Result<Vec<_>, _>>()?;
            emit(&common, replicates, &runs)?;
        }
    }
    Ok(())
}

fn emit(common: &Common, replicates: Option<PathBuf>, runs: &[harness::RunSummary]) -> Result<(), HarnessError> {
    if let Some(path) = replicates {
        let mut f = BufWriter::new(File::create(path)?);
        harness::write_replicates_csv(&mut f, runs)?;
        f.flush()?;
    }
    let mut out = common.writer()?;
    harness::write_summary_csv(&mut out, runs)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
