//! Command-line interface: `simulate` writes a synthetic instance to disk,
//! `fit` estimates a differential network from observation files, and
//! `bench` sweeps benchmark cells from a TOML config into CSV reports.
//!
//! Exit codes: 0 on success, 1 on runtime or numeric failures (singular
//! inputs, failed hyperparameter selection, unwritable outputs), 2 on usage
//! and validation errors (bad flags, malformed files, out-of-range
//! parameters).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Deserialize;

use crate::datagen::{generate, mvn_sample, ModelDetails, ModelKind};
use crate::error::{Error, Result};
use crate::estimator::{
    diffee_fit, diffee_path, select_v, v_grid, DiffEstimate, HyperParams,
};
use crate::eval::{f1_score, lambda_grid, run_cell, timing_probe, CellReport, CellSpec, Method};
use crate::io::{read_sample_matrix, read_sym_matrix, write_sample_matrix, write_sym_matrix};
use crate::linalg::{sample_covariance, TvPolicy};
use crate::matrix::{Condition, MatrixRole};
use crate::seed::child_seed;

#[derive(Parser)]
#[command(
    name = "diffee",
    version,
    about = "Closed-form estimation of sparse differential networks",
    long_about = "Estimates the difference between two Gaussian graphical models directly: \
threshold each sample covariance, invert, subtract, soft-threshold. Matrix files are \
headerless comma-separated text, one row per line, at full round-trip precision."
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic precision-matrix pair and sample both conditions
    Simulate(SimulateArgs),
    /// Fit the sparse differential estimate from two observation files
    Fit(FitArgs),
    /// Run a benchmark sweep from a TOML config into CSV reports
    Bench(BenchArgs),
}

#[derive(Args)]
#[command(after_help = "\
Writes x_c.csv, x_d.csv, omega_c.csv, omega_d.csv, delta_star.csv and
manifest.json into the output directory. Outputs are byte-identical for a
fixed seed.")]
struct SimulateArgs {
    /// Synthetic design: 1 (hub-structured pair) or 2 (dense pair)
    #[arg(long)]
    model: u8,
    /// Number of variables
    #[arg(long)]
    p: usize,
    /// Edge density (model 1) or shared-component weight (model 2)
    #[arg(long)]
    s: f64,
    /// Number of samples for condition 'c'
    #[arg(long)]
    nc: usize,
    /// Number of samples for condition 'd'
    #[arg(long)]
    nd: usize,
    /// Master seed; all randomness is derived from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory, created if missing
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(group(
    ArgGroup::new("sparsity").required(true).args(["lambda", "lambda_grid"])
))]
#[command(after_help = "\
Writes delta_hat.csv (or delta_hat_01.csv ... for a grid) plus report.json
with the v used, per-lambda support sizes, fit timing, and, when --truth is
given, per-lambda F1/precision/recall.")]
struct FitArgs {
    /// Observations for condition 'c': headerless CSV, one sample per row
    #[arg(long)]
    xc: PathBuf,
    /// Observations for condition 'd'
    #[arg(long)]
    xd: PathBuf,
    /// True differential matrix; adds recovery metrics to the report
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Covariance threshold: a number, or "auto" to scan 0.001..=1.000
    #[arg(long, default_value = "auto")]
    v: String,
    /// Single sparsity level
    #[arg(long)]
    lambda: Option<f64>,
    /// Sparsity grid; "paper" selects the 30-point benchmark grid
    #[arg(long)]
    lambda_grid: Option<String>,
    /// Diagonal policy for the covariance threshold: "off-diagonal" or "all"
    #[arg(long, default_value = "off-diagonal")]
    tv_policy: String,
    /// Output directory, created if missing
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(after_help = "\
Config keys (TOML):
  model   = 1 | 2                  required
  p       = [100, 200]             required
  s       = [0.2]                  default [0.2]
  n       = [[50, 50], ...]        default nc = nd = p/2 for each p
  seeds   = [0, 1, ...]            default 0..=9
  methods = [\"diffee\", \"naive\"]   default [\"diffee\"]
  v_grid  = \"paper\" | [0.01, ...]  default \"paper\" (0.001..=1.000 by 0.001)
  out     = \"results\"              required unless --out is given

Output files:
  runs.csv       one row per (cell, seed, lambda):
                 model,p,s,nc,nd,method,seed,lambda,v,f1,precision,recall,support,fit_seconds
  aggregate.csv  one row per cell:
                 model,p,s,nc,nd,method,best_f1_mean
  timing.csv     one row per cell:
                 model,p,s,nc,nd,method,total_seconds

fit_seconds and timing.csv hold wall-clock measurements and vary from run to
run; runs.csv minus its last column and all of aggregate.csv are byte-for-byte
reproducible for a fixed config.")]
struct BenchArgs {
    /// TOML experiment config
    #[arg(long)]
    config: PathBuf,
    /// Cells to run in parallel; keep at 1 when timings matter
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output directory; overrides the config's `out`
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses arguments, runs the requested command, and maps errors to the
/// documented exit codes.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("diffee: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidInput(_)
        | Error::DimensionMismatch(_)
        | Error::MalformedMatrix { .. }
        | Error::Read { .. } => 2,
        Error::NotInvertible { .. } | Error::SelectionFailed { .. } | Error::Write { .. } => 1,
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Fit(args) => fit(args),
        Command::Bench(args) => bench(args),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Write {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_model(model: u8) -> Result<ModelKind> {
    match model {
        1 => Ok(ModelKind::Model1),
        2 => Ok(ModelKind::Model2),
        other => Err(Error::InvalidInput(format!(
            "--model must be 1 or 2, got {other}"
        ))),
    }
}

fn parse_policy(policy: &str) -> Result<TvPolicy> {
    match policy {
        "off-diagonal" => Ok(TvPolicy::OffDiagonalOnly),
        "all" => Ok(TvPolicy::AllEntries),
        other => Err(Error::InvalidInput(format!(
            "--tv-policy must be \"off-diagonal\" or \"all\", got {other:?}"
        ))),
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let model = parse_model(args.model)?;
    if args.nc == 0 || args.nd == 0 {
        return Err(Error::InvalidInput(format!(
            "sample sizes must be positive, got nc={}, nd={}",
            args.nc, args.nd
        )));
    }
    let truth = generate(model, args.p, args.s, args.seed)?;
    let xc = mvn_sample(
        &truth.omega_c,
        args.nc,
        child_seed(args.seed, "sample/c"),
        Condition::C,
    )?;
    let xd = mvn_sample(
        &truth.omega_d,
        args.nd,
        child_seed(args.seed, "sample/d"),
        Condition::D,
    )?;
    ensure_dir(&args.out)?;
    write_sample_matrix(&args.out.join("x_c.csv"), &xc)?;
    write_sample_matrix(&args.out.join("x_d.csv"), &xd)?;
    write_sym_matrix(&args.out.join("omega_c.csv"), &truth.omega_c)?;
    write_sym_matrix(&args.out.join("omega_d.csv"), &truth.omega_d)?;
    write_sym_matrix(&args.out.join("delta_star.csv"), &truth.delta_star)?;

    let mut manifest = serde_json::json!({
        "model": args.model,
        "p": args.p,
        "s": args.s,
        "n_c": args.nc,
        "n_d": args.nd,
        "seed": args.seed,
        "differential_entries": truth.k,
        "differential_edges": truth.delta_star.offdiag_support_size() / 2,
    });
    match truth.details {
        ModelDetails::Model1 { pd_boost, hubs } => {
            manifest["pd_boost"] = serde_json::json!(pd_boost);
            manifest["hubs"] = serde_json::json!(hubs);
            manifest["hub_edge_selection"] =
                serde_json::json!("top 20% by magnitude, pooled across both hubs");
            manifest["graph"] =
                serde_json::json!("preferential attachment with exact edge count");
        }
        ModelDetails::Model2 { delta_c, delta_d } => {
            manifest["delta_c"] = serde_json::json!(delta_c);
            manifest["delta_d"] = serde_json::json!(delta_d);
        }
    }
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_text(&args.out.join("manifest.json"), &(text + "\n"))?;
    println!(
        "simulated model {} instance: p={}, s={}, nc={}, nd={}, seed={} -> {}",
        args.model,
        args.p,
        args.s,
        args.nc,
        args.nd,
        args.seed,
        args.out.display()
    );
    Ok(())
}

fn fit(args: FitArgs) -> Result<()> {
    let policy = parse_policy(&args.tv_policy)?;
    let xc = read_sample_matrix(&args.xc, Condition::C)?;
    let xd = read_sample_matrix(&args.xd, Condition::D)?;
    let truth = args
        .truth
        .as_deref()
        .map(|path| read_sym_matrix(path, MatrixRole::Differential))
        .transpose()?;
    if let Some(ref t) = truth {
        if t.dim() != xc.dim() {
            return Err(Error::DimensionMismatch(format!(
                "truth matrix is {0}x{0} but the data has p={1} variables",
                t.dim(),
                xc.dim()
            )));
        }
    }

    let (v, v_mode) = match args.v.as_str() {
        "auto" => {
            let sigma_c = sample_covariance(&xc)?;
            let sigma_d = sample_covariance(&xd)?;
            (select_v(&sigma_c, &sigma_d, &v_grid(), policy)?, "auto")
        }
        text => {
            let value: f64 = text.parse().map_err(|_| {
                Error::InvalidInput(format!(
                    "--v must be \"auto\" or a non-negative number, got {text:?}"
                ))
            })?;
            (value, "fixed")
        }
    };

    let grid = match (&args.lambda, &args.lambda_grid) {
        (Some(_), None) => None,
        (None, Some(name)) if name == "paper" => {
            Some(lambda_grid(xc.dim(), xc.n_samples(), xd.n_samples())?)
        }
        (None, Some(other)) => {
            return Err(Error::InvalidInput(format!(
                "--lambda-grid only supports \"paper\", got {other:?}"
            )));
        }
        // clap's arg group guarantees exactly one of the two is present.
        _ => unreachable!("clap enforces the sparsity group"),
    };

    ensure_dir(&args.out)?;
    let mut entries = Vec::new();
    let fit_seconds_total;
    match grid {
        None => {
            let lambda = args.lambda.expect("clap enforces the sparsity group");
            let h = HyperParams::single(v, lambda)?.with_policy(policy);
            let (est, secs) = timing_probe(|| diffee_fit(&xc, &xd, &h));
            let est = est?;
            fit_seconds_total = secs;
            let file = "delta_hat.csv".to_string();
            write_sym_matrix(&args.out.join(&file), &est.delta)?;
            entries.push(report_entry(&est, file, truth.as_ref())?);
        }
        Some(grid) => {
            let h = HyperParams::grid(v, grid)?.with_policy(policy);
            let (ests, secs) = timing_probe(|| diffee_path(&xc, &xd, &h));
            let ests = ests?;
            fit_seconds_total = secs;
            for (idx, est) in ests.iter().enumerate() {
                let file = format!("delta_hat_{:02}.csv", idx + 1);
                write_sym_matrix(&args.out.join(&file), &est.delta)?;
                entries.push(report_entry(est, file, truth.as_ref())?);
            }
        }
    }

    let report = serde_json::json!({
        "p": xc.dim(),
        "n_c": xc.n_samples(),
        "n_d": xd.n_samples(),
        "v": v,
        "v_mode": v_mode,
        "tv_policy": policy.to_string(),
        "fit_seconds_total": fit_seconds_total,
        "lambdas": entries,
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    write_text(&args.out.join("report.json"), &(text + "\n"))?;
    println!(
        "fitted {} estimate(s) with v={v} -> {}",
        entries_len(&report),
        args.out.display()
    );
    Ok(())
}

fn entries_len(report: &serde_json::Value) -> usize {
    report["lambdas"].as_array().map_or(0, Vec::len)
}

fn report_entry(
    est: &DiffEstimate,
    file: String,
    truth: Option<&crate::matrix::SymMatrix>,
) -> Result<serde_json::Value> {
    let mut entry = serde_json::json!({
        "lambda": est.lambda,
        "support_size": est.support_size,
        "file": file,
    });
    if let Some(truth) = truth {
        let stats = f1_score(&est.delta, truth)?;
        entry["f1"] = serde_json::json!(stats.f1);
        entry["precision"] = serde_json::json!(stats.precision);
        entry["recall"] = serde_json::json!(stats.recall);
    }
    Ok(entry)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    model: u8,
    p: Vec<usize>,
    #[serde(default = "default_s_list")]
    s: Vec<f64>,
    n: Option<Vec<[usize; 2]>>,
    #[serde(default = "default_seeds")]
    seeds: Vec<u64>,
    #[serde(default = "default_methods")]
    methods: Vec<String>,
    v_grid: Option<VGridSpec>,
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum VGridSpec {
    Named(String),
    Explicit(Vec<f64>),
}

fn default_s_list() -> Vec<f64> {
    vec![0.2]
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

fn default_methods() -> Vec<String> {
    vec!["diffee".to_string()]
}

/// A fully resolved benchmark sweep.
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub p_list: Vec<usize>,
    pub s_list: Vec<f64>,
    /// Explicit (n_c, n_d) pairs; `None` means n_c = n_d = p/2 per p.
    pub n_pairs: Option<Vec<(usize, usize)>>,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub v_grid: Vec<f64>,
    pub out: PathBuf,
}

impl ExperimentConfig {
    /// Parses and validates a TOML config; `out_override` takes precedence
    /// over the config's own `out`.
    pub fn load(path: &Path, out_override: Option<PathBuf>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let raw: ConfigFile = toml::from_str(&text).map_err(|err| {
            Error::InvalidInput(format!("config {}: {err}", path.display()))
        })?;
        let model = parse_model(raw.model)?;
        if raw.p.is_empty() {
            return Err(Error::InvalidInput("config: p list must be non-empty".into()));
        }
        if raw.s.is_empty() {
            return Err(Error::InvalidInput("config: s list must be non-empty".into()));
        }
        if raw.seeds.is_empty() {
            return Err(Error::InvalidInput(
                "config: seeds list must be non-empty".into(),
            ));
        }
        let methods: Vec<Method> = raw
            .methods
            .iter()
            .map(|m| m.parse())
            .collect::<Result<_>>()?;
        if methods.is_empty() {
            return Err(Error::InvalidInput(
                "config: methods list must be non-empty".into(),
            ));
        }
        let v_grid_values = match raw.v_grid {
            None => v_grid(),
            Some(VGridSpec::Named(name)) if name == "paper" => v_grid(),
            Some(VGridSpec::Named(other)) => {
                return Err(Error::InvalidInput(format!(
                    "config: v_grid only supports \"paper\" or an explicit list, got {other:?}"
                )));
            }
            Some(VGridSpec::Explicit(values)) => values,
        };
        let out = out_override.or(raw.out).ok_or_else(|| {
            Error::InvalidInput(
                "config: no output directory; set `out` in the config or pass --out".into(),
            )
        })?;
        Ok(Self {
            model,
            p_list: raw.p,
            s_list: raw.s,
            n_pairs: raw.n.map(|pairs| pairs.iter().map(|&[a, b]| (a, b)).collect()),
            seeds: raw.seeds,
            methods,
            v_grid: v_grid_values,
            out,
        })
    }

    /// The sweep's cells in deterministic emission order.
    pub fn cells(&self) -> Vec<(CellSpec, Method)> {
        let mut cells = Vec::new();
        for &p in &self.p_list {
            for &s in &self.s_list {
                let pairs: Vec<(usize, usize)> = match &self.n_pairs {
                    Some(pairs) => pairs.clone(),
                    None => vec![(p / 2, p / 2)],
                };
                for (n_c, n_d) in pairs {
                    for &method in &self.methods {
                        cells.push((
                            CellSpec {
                                model: self.model,
                                p,
                                s,
                                n_c,
                                n_d,
                            },
                            method,
                        ));
                    }
                }
            }
        }
        cells
    }
}

fn bench(args: BenchArgs) -> Result<()> {
    if args.jobs == 0 {
        return Err(Error::InvalidInput("--jobs must be at least 1".into()));
    }
    let config = ExperimentConfig::load(&args.config, args.out)?;
    let cells = config.cells();
    let reports: Vec<CellReport> = if args.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.jobs)
            .build()
            .map_err(|err| Error::InvalidInput(format!("cannot build thread pool: {err}")))?;
        pool.install(|| {
            use rayon::prelude::*;
            cells
                .par_iter()
                .map(|&(spec, method)| run_cell(spec, method, &config.seeds, &config.v_grid))
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        cells
            .iter()
            .map(|&(spec, method)| run_cell(spec, method, &config.seeds, &config.v_grid))
            .collect::<Result<Vec<_>>>()?
    };

    ensure_dir(&config.out)?;
    write_text(&config.out.join("runs.csv"), &runs_csv(&reports))?;
    write_text(&config.out.join("aggregate.csv"), &aggregate_csv(&reports))?;
    write_text(&config.out.join("timing.csv"), &timing_csv(&reports))?;
    println!("model,p,s,nc,nd,method,best_f1_mean,total_seconds");
    for report in &reports {
        println!(
            "{},{},{},{},{},{},{:.4},{:.3}",
            report.spec.model,
            report.spec.p,
            report.spec.s,
            report.spec.n_c,
            report.spec.n_d,
            report.method,
            report.mean_best_f1,
            report.total_seconds
        );
    }
    println!(
        "wrote runs.csv, aggregate.csv, timing.csv -> {}",
        config.out.display()
    );
    Ok(())
}

fn runs_csv(reports: &[CellReport]) -> String {
    let mut out =
        String::from("model,p,s,nc,nd,method,seed,lambda,v,f1,precision,recall,support,fit_seconds\n");
    for report in reports {
        for run in &report.runs {
            for entry in &run.per_lambda {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    report.spec.model,
                    report.spec.p,
                    report.spec.s,
                    report.spec.n_c,
                    report.spec.n_d,
                    report.method,
                    run.seed,
                    entry.lambda,
                    run.v,
                    entry.stats.f1,
                    entry.stats.precision,
                    entry.stats.recall,
                    entry.support_size,
                    entry.fit_seconds,
                ));
            }
        }
    }
    out
}

fn aggregate_csv(reports: &[CellReport]) -> String {
    let mut out = String::from("model,p,s,nc,nd,method,best_f1_mean\n");
    for report in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            report.spec.model,
            report.spec.p,
            report.spec.s,
            report.spec.n_c,
            report.spec.n_d,
            report.method,
            report.mean_best_f1,
        ));
    }
    out
}

fn timing_csv(reports: &[CellReport]) -> String {
    let mut out = String::from("model,p,s,nc,nd,method,total_seconds\n");
    for report in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            report.spec.model,
            report.spec.p,
            report.spec.s,
            report.spec.n_c,
            report.spec.n_d,
            report.method,
            report.total_seconds,
        ));
    }
    out
}
