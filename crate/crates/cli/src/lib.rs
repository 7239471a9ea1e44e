//! Command-line driver: `train`, `eval`, `verify` and `bench`.
//!
//! Every invocation is first resolved into a [`RunConfig`], which is plain
//! serializable data, and then executed.

use clap::{Args, Parser, Subcommand, ValueEnum};
use pauc::bench::{run_bench, write_bench_csv, BenchOptions, DEFAULT_BATCH_SIZES};
use pauc::data::{generate_synthetic, load_csv, BatchSpec, LabelColumn, SampleSet};
use pauc::loss::{default_omega, HyperParams, Task, DEFAULT_KAPPA, DEFAULT_MULTIPLIER_BOUND};
use pauc::metrics::{empirical_opauc, empirical_tpauc, pauc_report, split_by_label, RocRegion};
use pauc::model::{ModelKind, ModelParams, DEFAULT_HIDDEN};
use pauc::optim::{check_rate_conditions, train, write_trace_csv, LearnParams, RateConstants, TrainOptions};
use pauc::oracle::{run_suite, SuiteOptions};
use pauc::PaucError;
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VALIDATION: i32 = 1;
    pub const SUITE_FAILURE: i32 = 2;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] PaucError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
    #[error("cannot serialize output: {0}")]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Train,
    Eval,
    Verify,
    Bench,
}

/// Objective family. `auc` trains the one-way objective over the whole
/// false-positive range (`β = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TaskArg {
    Auc,
    Opauc,
    Tpauc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Linear,
    Mlp1,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Linear => ModelKind::Linear,
            ModelArg::Mlp1 => ModelKind::Mlp1,
        }
    }
}

/// `npos:nneg:dim:separation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_pos: usize,
    pub n_neg: usize,
    pub dim: usize,
    pub separation: f64,
}

impl FromStr for SyntheticSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || format!("expected npos:nneg:dim:separation, got `{s}`");
        if parts.len() != 4 {
            return Err(bad());
        }
        let spec = SyntheticSpec {
            n_pos: parts[0].trim().parse().map_err(|_| bad())?,
            n_neg: parts[1].trim().parse().map_err(|_| bad())?,
            dim: parts[2].trim().parse().map_err(|_| bad())?,
            separation: parts[3].trim().parse().map_err(|_| bad())?,
        };
        if spec.dim == 0 || !spec.separation.is_finite() || spec.separation < 0.0 {
            return Err(format!("dim must be >= 1 and separation a finite value >= 0 in `{s}`"));
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    Csv { path: PathBuf, label_column: String },
    Synthetic(SyntheticSpec),
}

impl DataSource {
    pub fn load(&self, seed: u64) -> CliResult<SampleSet<f64>> {
        Ok(match self {
            DataSource::Csv { path, label_column } => {
                load_csv(path, &LabelColumn::from_str(label_column).expect("infallible"))?
            }
            DataSource::Synthetic(s) => generate_synthetic(s.n_pos, s.n_neg, s.dim, s.separation, seed)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnSettings {
    pub k: f64,
    pub m: f64,
    pub c1: f64,
    pub c2: f64,
    pub nu: f64,
    pub lambda: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub stratified: bool,
    pub warmup_epochs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub trace: PathBuf,
    pub checkpoint: PathBuf,
    pub metrics: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub bench: PathBuf,
}

/// Fully resolved invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub task: TaskArg,
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub omega: f64,
    pub multiplier_bound: f64,
    pub learn: LearnSettings,
    pub model: ModelArg,
    pub hidden: usize,
    pub data: Option<DataSource>,
    pub heldout: Option<DataSource>,
    /// Checkpoint read by `eval`.
    pub checkpoint_in: Option<PathBuf>,
    pub seed: u64,
    pub outputs: Outputs,
    pub only: Vec<String>,
    pub tol_scale: f64,
    pub bench_sizes: Vec<usize>,
    pub rate_constants: Option<RateConstants>,
}

impl RunConfig {
    pub fn to_json(&self) -> CliResult<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> CliResult<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn core_task(&self) -> Task {
        match self.task {
            TaskArg::Auc | TaskArg::Opauc => Task::Opauc,
            TaskArg::Tpauc => Task::Tpauc,
        }
    }

    /// Region actually used: `auc` forces `α = β = 1`.
    pub fn region(&self) -> (f64, f64) {
        match self.task {
            TaskArg::Auc => (1.0, 1.0),
            TaskArg::Opauc => (1.0, self.beta),
            TaskArg::Tpauc => (self.alpha, self.beta),
        }
    }

    pub fn hyper_params(&self, prior_p: f64) -> CliResult<HyperParams<f64>> {
        let (alpha, beta) = self.region();
        let mut hp = HyperParams::new(self.core_task(), alpha, beta, self.kappa, self.omega, prior_p)?;
        hp.multiplier_bound = self.multiplier_bound;
        hp.validate()?;
        Ok(hp)
    }
}

fn parse_unit(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} outside (0, 1]"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be a finite value > 0"))
    }
}

fn parse_nonneg(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be a finite value >= 0"))
    }
}

fn parse_at_least_one(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v >= 1.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be >= 1"))
    }
}

fn parse_constants(s: &str) -> Result<RateConstants, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| parse_positive(x.trim()))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [lipschitz, mu, tau, batch] => Ok(RateConstants { lipschitz, mu, tau, batch }),
        _ => Err("expected four comma-separated values L,MU,TAU,B".into()),
    }
}

#[derive(Debug, Parser)]
#[command(name = "pauc", version, about = "Partial-AUC training, evaluation, verification and benchmarking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum CliCommand {
    /// Train a scoring model with the stochastic minimax solver.
    Train(TrainArgs),
    /// Score a dataset with a checkpoint and print AUC, OPAUC and TPAUC as JSON.
    Eval(EvalArgs),
    /// Run the oracle property suite and write a JSON report.
    Verify(VerifyArgs),
    /// Time the instance-wise loss against the pairwise risk.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RegionArgs {
    /// Objective: auc (whole ROC curve), opauc (FPR <= beta) or tpauc (FPR <= beta, TPR >= alpha)
    #[arg(long, value_enum, default_value = "opauc")]
    pub task: TaskArg,
    /// TPR bound of the two-way region, range (0, 1]
    #[arg(long, default_value_t = 1.0, value_parser = parse_unit)]
    pub alpha: f64,
    /// FPR bound of the region, range (0, 1]
    #[arg(long, default_value_t = 0.3, value_parser = parse_unit)]
    pub beta: f64,
}

#[derive(Debug, Clone, Args)]
pub struct LossArgs {
    /// Softplus sharpness, range (0, inf); must satisfy kappa <= 2 + 2*omega
    #[arg(long, default_value_t = DEFAULT_KAPPA, value_parser = parse_positive)]
    pub kappa: f64,
    /// Quadratic penalty weight on gamma, range [0, inf); default max(0, kappa/2 - 1)
    #[arg(long, value_parser = parse_nonneg)]
    pub omega: Option<f64>,
    /// Upper bound of the multiplier boxes, range (0, inf)
    #[arg(long, default_value_t = DEFAULT_MULTIPLIER_BOUND, value_parser = parse_positive)]
    pub multiplier_bound: f64,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV file with one row per instance and a binary label column
    #[arg(long, conflicts_with = "synthetic")]
    pub csv: Option<PathBuf>,
    /// Label column of the CSV: a header name or a 0-based index
    #[arg(long, default_value = "label")]
    pub label_column: String,
    /// Synthetic Gaussian data npos:nneg:dim:separation, counts >= 1, dim >= 1, separation >= 0
    #[arg(long)]
    pub synthetic: Option<SyntheticSpec>,
    /// Random seed for data generation, shuffling and initialization, range [0, 2^64)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub region: RegionArgs,
    #[command(flatten)]
    pub loss: LossArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Held-out CSV evaluated after every epoch
    #[arg(long, conflicts_with = "heldout_synthetic")]
    pub heldout_csv: Option<PathBuf>,
    /// Held-out synthetic data npos:nneg:dim:separation; defaults to the
    /// training spec drawn with seed + 1 when training on synthetic data
    #[arg(long)]
    pub heldout_synthetic: Option<SyntheticSpec>,
    /// Scoring model
    #[arg(long, value_enum, default_value = "linear")]
    pub model: ModelArg,
    /// Hidden units of mlp1, range [1, inf)
    #[arg(long, default_value_t = DEFAULT_HIDDEN as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub hidden: u64,
    /// Passes over the training set, range [0, inf)
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    /// Mini-batch size, range [2, inf)
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u64).range(2..))]
    pub batch_size: u64,
    /// Draw every mini-batch without class stratification
    #[arg(long)]
    pub no_stratify: bool,
    /// Epochs of cross-entropy SGD before the minimax phase, range [0, inf)
    #[arg(long, default_value_t = 0)]
    pub warmup_epochs: usize,
    /// Learning-rate scale k in eta_t = k / (m + t)^(1/3), range (0, inf); needs k^3 <= m
    #[arg(long, default_value_t = 2.0, value_parser = parse_positive)]
    pub k: f64,
    /// Learning-rate offset m, range [1, inf)
    #[arg(long, default_value_t = 100.0, value_parser = parse_at_least_one)]
    pub m: f64,
    /// Momentum constant for the descent estimate, rho_t = c1 * eta_t^2, range [0, inf)
    #[arg(long, default_value_t = 0.5, value_parser = parse_nonneg)]
    pub c1: f64,
    /// Momentum constant for the ascent estimate, xi_t = c2 * eta_t^2, range [0, inf)
    #[arg(long, default_value_t = 0.5, value_parser = parse_nonneg)]
    pub c2: f64,
    /// Descent step size, range (0, inf)
    #[arg(long, default_value_t = 0.05, value_parser = parse_positive)]
    pub nu: f64,
    /// Ascent step size, range (0, inf)
    #[arg(long, default_value_t = 0.05, value_parser = parse_positive)]
    pub lambda: f64,
    /// Report violated step-size conditions of the convergence guarantee for
    /// the constants L,MU,TAU,B (all > 0); never blocks the run
    #[arg(long, value_name = "L,MU,TAU,B", value_parser = parse_constants)]
    pub check_thm3: Option<RateConstants>,
    /// Trace CSV written once per epoch
    #[arg(long, default_value = "trace.csv")]
    pub trace: PathBuf,
    /// Final model checkpoint (JSON)
    #[arg(long, default_value = "model.json")]
    pub checkpoint: PathBuf,
    /// Also write the final metrics JSON here
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Write the resolved configuration as JSON
    #[arg(long)]
    pub save_config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub region: RegionArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Checkpoint to evaluate; without one a freshly initialized linear
    /// model (seeded by --seed) is scored
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Also write the metrics JSON here
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Write the resolved configuration as JSON
    #[arg(long)]
    pub save_config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Run only this check (repeatable); see the report for names
    #[arg(long)]
    pub only: Vec<String>,
    /// Multiplier applied to every tolerance, range (0, inf)
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true, value_parser = parse_positive)]
    pub tol: f64,
    /// Seed of the randomized checks, range [0, 2^64)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report path
    #[arg(long, default_value = "verify_report.json")]
    pub report: PathBuf,
    /// Write the resolved configuration as JSON
    #[arg(long)]
    pub save_config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub region: RegionArgs,
    #[command(flatten)]
    pub loss: LossArgs,
    /// Comma-separated batch sizes, each >= 1
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..))]
    pub batch_sizes: Vec<u64>,
    /// Seed for the benchmark scores, range [0, 2^64)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV of mean milliseconds per call
    #[arg(long, default_value = "bench.csv")]
    pub out: PathBuf,
    /// Write the resolved configuration as JSON
    #[arg(long)]
    pub save_config: Option<PathBuf>,
}

fn data_source(d: &DataArgs) -> Option<DataSource> {
    match (&d.csv, d.synthetic) {
        (Some(path), _) => Some(DataSource::Csv { path: path.clone(), label_column: d.label_column.clone() }),
        (None, Some(spec)) => Some(DataSource::Synthetic(spec)),
        (None, None) => None,
    }
}

fn base_config(command: CommandKind) -> RunConfig {
    RunConfig {
        command,
        task: TaskArg::Opauc,
        alpha: 1.0,
        beta: 0.3,
        kappa: DEFAULT_KAPPA,
        omega: default_omega(DEFAULT_KAPPA),
        multiplier_bound: DEFAULT_MULTIPLIER_BOUND,
        learn: LearnSettings {
            k: 2.0,
            m: 100.0,
            c1: 0.5,
            c2: 0.5,
            nu: 0.05,
            lambda: 0.05,
            epochs: 200,
            batch_size: 128,
            stratified: true,
            warmup_epochs: 0,
        },
        model: ModelArg::Linear,
        hidden: DEFAULT_HIDDEN,
        data: None,
        heldout: None,
        checkpoint_in: None,
        seed: 0,
        outputs: Outputs {
            trace: "trace.csv".into(),
            checkpoint: "model.json".into(),
            metrics: None,
            report: None,
            bench: "bench.csv".into(),
        },
        only: Vec::new(),
        tol_scale: 1.0,
        bench_sizes: DEFAULT_BATCH_SIZES.to_vec(),
        rate_constants: None,
    }
}

fn apply_region(cfg: &mut RunConfig, r: &RegionArgs) {
    cfg.task = r.task;
    cfg.alpha = r.alpha;
    cfg.beta = r.beta;
}

fn apply_loss(cfg: &mut RunConfig, l: &LossArgs) {
    cfg.kappa = l.kappa;
    cfg.omega = l.omega.unwrap_or_else(|| default_omega(l.kappa));
    cfg.multiplier_bound = l.multiplier_bound;
}

impl CliCommand {
    /// Resolves parsed flags into a config plus an optional path to save it.
    pub fn resolve(&self) -> (RunConfig, Option<PathBuf>) {
        match self {
            CliCommand::Train(a) => {
                let mut c = base_config(CommandKind::Train);
                apply_region(&mut c, &a.region);
                apply_loss(&mut c, &a.loss);
                c.data = data_source(&a.data);
                c.seed = a.data.seed;
                c.heldout = match (&a.heldout_csv, a.heldout_synthetic, &c.data) {
                    (Some(p), _, _) => {
                        Some(DataSource::Csv { path: p.clone(), label_column: a.data.label_column.clone() })
                    }
                    (None, Some(s), _) => Some(DataSource::Synthetic(s)),
                    (None, None, Some(DataSource::Synthetic(s))) => Some(DataSource::Synthetic(*s)),
                    _ => None,
                };
                c.model = a.model;
                c.hidden = a.hidden as usize;
                c.learn = LearnSettings {
                    k: a.k,
                    m: a.m,
                    c1: a.c1,
                    c2: a.c2,
                    nu: a.nu,
                    lambda: a.lambda,
                    epochs: a.epochs,
                    batch_size: a.batch_size as usize,
                    stratified: !a.no_stratify,
                    warmup_epochs: a.warmup_epochs,
                };
                c.rate_constants = a.check_thm3;
                c.outputs.trace = a.trace.clone();
                c.outputs.checkpoint = a.checkpoint.clone();
                c.outputs.metrics = a.metrics.clone();
                (c, a.save_config.clone())
            }
            CliCommand::Eval(a) => {
                let mut c = base_config(CommandKind::Eval);
                apply_region(&mut c, &a.region);
                c.data = data_source(&a.data);
                c.seed = a.data.seed;
                c.checkpoint_in = a.checkpoint.clone();
                c.outputs.metrics = a.metrics.clone();
                (c, a.save_config.clone())
            }
            CliCommand::Verify(a) => {
                let mut c = base_config(CommandKind::Verify);
                c.only = a.only.clone();
                c.tol_scale = a.tol;
                c.seed = a.seed;
                c.outputs.report = Some(a.report.clone());
                (c, a.save_config.clone())
            }
            CliCommand::Bench(a) => {
                let mut c = base_config(CommandKind::Bench);
                apply_region(&mut c, &a.region);
                apply_loss(&mut c, &a.loss);
                if !a.batch_sizes.is_empty() {
                    c.bench_sizes = a.batch_sizes.iter().map(|&b| b as usize).collect();
                }
                c.seed = a.seed;
                c.outputs.bench = a.out.clone();
                (c, a.save_config.clone())
            }
        }
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Output { path: path.to_path_buf(), source })
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Output { path: path.to_path_buf(), source })
}

fn require_data(cfg: &RunConfig) -> CliResult<&DataSource> {
    cfg.data
        .as_ref()
        .ok_or_else(|| CliError::Usage("no data: pass --csv PATH or --synthetic npos:nneg:dim:separation".into()))
}

/// Rejects regions whose top or bottom sets would be empty on this data.
fn check_region(set: &SampleSet<f64>, alpha: f64, beta: f64, task: Task) -> CliResult<()> {
    let region = match task {
        Task::Opauc => RocRegion::one_way(beta),
        Task::Tpauc => RocRegion::two_way(alpha, beta),
    };
    region.top_count(set.n_neg())?;
    region.bottom_count(set.n_pos())?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub opauc: f64,
    pub tpauc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub task: TaskArg,
    pub alpha: f64,
    pub beta: f64,
    pub steps: usize,
    pub train: SplitMetrics,
    pub test: Option<SplitMetrics>,
}

fn split_metrics(set: &SampleSet<f64>, model: &ModelParams<f64>, alpha: f64, beta: f64, task: Task) -> CliResult<SplitMetrics> {
    let scores = model.forward(set.features())?;
    let (pos, neg) = split_by_label(&scores, set.labels());
    Ok(SplitMetrics {
        opauc: empirical_opauc(&pos, &neg, beta)?,
        tpauc: match task {
            Task::Tpauc => Some(empirical_tpauc(&pos, &neg, alpha, beta)?),
            Task::Opauc => None,
        },
    })
}

pub fn cmd_train(cfg: &RunConfig) -> CliResult<i32> {
    let set = require_data(cfg)?.load(cfg.seed)?;
    let heldout = match &cfg.heldout {
        Some(src) => Some(src.load(cfg.seed.wrapping_add(1))?),
        None => None,
    };
    let hp = cfg.hyper_params(set.prior_p())?;
    let (alpha, beta) = cfg.region();
    check_region(&set, alpha, beta, hp.task)?;
    if let Some(h) = &heldout {
        if h.dim() != set.dim() {
            return Err(CliError::Usage(format!(
                "held-out dimension {} differs from training dimension {}",
                h.dim(),
                set.dim()
            )));
        }
        check_region(h, alpha, beta, hp.task)?;
    }
    let l = &cfg.learn;
    let batch = BatchSpec::new(l.batch_size, cfg.seed).stratified(l.stratified);
    let lp = LearnParams {
        k: l.k,
        m: l.m,
        c1: l.c1,
        c2: l.c2,
        nu: l.nu,
        lambda: l.lambda,
        total_steps: l.epochs * batch.batches_per_epoch(set.len()),
    };
    lp.validate()?;
    if let Some(consts) = &cfg.rate_constants {
        let violated = check_rate_conditions(&lp, consts);
        if violated.is_empty() {
            eprintln!("all step-size conditions of the convergence guarantee hold");
        }
        for v in violated {
            eprintln!("warning: step-size condition violated: {v}");
        }
    }
    let model = ModelParams::init(cfg.model.into(), set.dim(), cfg.hidden, cfg.seed)?;
    let opts = TrainOptions { batch, warmup_epochs: l.warmup_epochs, heldout: heldout.as_ref() };
    let out = train(&set, &model, &hp, &lp, &opts)?;

    write_trace_csv(create(&cfg.outputs.trace)?, &out.trace)?;
    out.model.save(&cfg.outputs.checkpoint)?;

    let summary = TrainSummary {
        task: cfg.task,
        alpha,
        beta,
        steps: out.state.t,
        train: split_metrics(&set, &out.model, alpha, beta, hp.task)?,
        test: heldout.as_ref().map(|h| split_metrics(h, &out.model, alpha, beta, hp.task)).transpose()?,
    };
    let json = serde_json::to_string_pretty(&summary)?;
    println!("{json}");
    if let Some(p) = &cfg.outputs.metrics {
        write_text(p, &json)?;
    }
    Ok(exit::SUCCESS)
}

pub fn cmd_eval(cfg: &RunConfig) -> CliResult<i32> {
    let set = require_data(cfg)?.load(cfg.seed)?;
    let model = match &cfg.checkpoint_in {
        Some(p) => ModelParams::<f64>::load(p)?,
        None => ModelParams::init(ModelKind::Linear, set.dim(), 0, cfg.seed)?,
    };
    if model.layout.dim != set.dim() {
        return Err(CliError::Usage(format!(
            "checkpoint expects {} features, data has {}",
            model.layout.dim,
            set.dim()
        )));
    }
    let (alpha, beta) = cfg.region();
    let scores = model.forward(set.features())?;
    let (pos, neg) = split_by_label(&scores, set.labels());
    let report = pauc_report(&pos, &neg, alpha, beta)?;
    let json = serde_json::to_string_pretty(&report)?;
    println!("{json}");
    if let Some(p) = &cfg.outputs.metrics {
        write_text(p, &json)?;
    }
    Ok(exit::SUCCESS)
}

pub fn cmd_verify(cfg: &RunConfig) -> CliResult<i32> {
    let opts = SuiteOptions { seed: cfg.seed, only: cfg.only.clone(), tol_scale: cfg.tol_scale };
    let report = run_suite(&opts)?;
    let json = serde_json::to_string_pretty(&report)?;
    if let Some(p) = &cfg.outputs.report {
        write_text(p, &json)?;
    }
    println!("{json}");
    for e in report.entries.iter().filter(|e| !e.pass) {
        eprintln!("check {} failed: max error {:e} > {:e}", e.name, e.max_error, e.tolerance);
    }
    Ok(if report.all_pass { exit::SUCCESS } else { exit::SUITE_FAILURE })
}

pub fn cmd_bench(cfg: &RunConfig) -> CliResult<i32> {
    let hp = cfg.hyper_params(0.5)?;
    let opts = BenchOptions { batch_sizes: cfg.bench_sizes.clone(), seed: cfg.seed, ..BenchOptions::default() };
    let rows = run_bench(&hp, &opts)?;
    write_bench_csv(create(&cfg.outputs.bench)?, &rows)?;
    write_bench_csv(std::io::stdout().lock(), &rows)?;
    Ok(exit::SUCCESS)
}

pub fn execute(cfg: &RunConfig) -> CliResult<i32> {
    match cfg.command {
        CommandKind::Train => cmd_train(cfg),
        CommandKind::Eval => cmd_eval(cfg),
        CommandKind::Verify => cmd_verify(cfg),
        CommandKind::Bench => cmd_bench(cfg),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::VALIDATION } else { exit::SUCCESS };
            let _ = e.print();
            return code;
        }
    };
    let (cfg, save) = cli.command.resolve();
    let result = save
        .map(|p| cfg.to_json().and_then(|j| write_text(&p, &j)))
        .transpose()
        .and_then(|_| execute(&cfg));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit::VALIDATION
        }
    }
}
