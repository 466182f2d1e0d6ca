//! Command-line driver: single runs, benchmark grids and synthetic streams.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use streamfd::config::{parse_assignment, RunConfig};
use streamfd::data::{generate_synthetic, write_csv};
use streamfd::error::{Error, Result};
use streamfd::models::ModelKind;
use streamfd::pipeline::{run_on_data, run_pipeline, StrategyKind};
use streamfd::report::{write_report, RunReport};

#[derive(Debug, Parser)]
#[command(name = "streamfd", version, about = "Drift-gated incremental learning on binary data streams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one model under one strategy and write its report.
    Run(CommonArgs),
    /// Run a models x strategies grid and write one combined CSV.
    Bench(BenchArgs),
    /// Write a synthetic stream as a dataset CSV.
    Synth(CommonArgs),
}

/// Flags shared by every command. Any config key can also be given as
/// `--section.key=value`, which is rewritten to `--set section.key=value`.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Flat config file with dotted keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub label_col: Option<String>,
    #[arg(long)]
    pub positive_label: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long)]
    pub train_fraction: Option<String>,
    #[arg(long)]
    pub batch_size: Option<String>,
    /// stratified (default) or temporal.
    #[arg(long)]
    pub split_mode: Option<String>,
    /// refit (default) or prequential.
    #[arg(long)]
    pub eval_order: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// json (default) or csv.
    #[arg(long)]
    pub format: Option<String>,
    /// Any config key, as KEY=VALUE. Applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated model names.
    #[arg(long, default_value = "nb,knn,arf,vfdt,ht,hat,awe,bic,dwmc,aeec")]
    pub models: String,
    /// Comma-separated strategy names.
    #[arg(long, default_value = "none,ddm,eddm,adwin")]
    pub strategies: String,
}

impl CommonArgs {
    /// Defaults, then the config file, then flags, then `--set` pairs.
    pub fn to_config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let path_text = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let flags = [
            ("data", path_text(&self.data)),
            ("label_col", self.label_col.clone()),
            ("positive_label", self.positive_label.clone()),
            ("model", self.model.clone()),
            ("strategy", self.strategy.clone()),
            ("train_fraction", self.train_fraction.clone()),
            ("batch_size", self.batch_size.clone()),
            ("split_mode", self.split_mode.clone()),
            ("eval_order", self.eval_order.clone()),
            ("seed", self.seed.clone()),
            ("out", path_text(&self.out)),
            ("format", self.format.clone()),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        for pair in &self.set {
            let (k, v) = parse_assignment(pair)?;
            cfg.set(&k, &v)?;
        }
        Ok(cfg)
    }
}

/// Rewrites `--a.b=v` and `--a.b v` into `--set a.b=v`.
pub fn expand_dotted_flags(args: Vec<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        let dotted = arg
            .strip_prefix("--")
            .filter(|rest| rest.split('=').next().is_some_and(|name| name.contains('.')))
            .map(str::to_string);
        match dotted {
            Some(rest) if rest.contains('=') => {
                out.push("--set".into());
                out.push(rest);
            }
            Some(rest) => {
                let value = iter.next().unwrap_or_default();
                out.push("--set".into());
                out.push(format!("{rest}={value}"));
            }
            None => out.push(arg),
        }
    }
    out
}

pub fn summary_line(report: &RunReport) -> String {
    format!(
        "{} {} {:.6} {} {:.3}",
        report.config.model, report.config.strategy, report.mean_auc, report.retrains, report.wall_ms
    )
}

pub fn cmd_run(cfg: &RunConfig) -> Result<RunReport> {
    let report = run_pipeline(&cfg.run_spec()?)?;
    if let Some(out) = &cfg.out {
        write_report(&report, out, cfg.format)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub model: ModelKind,
    pub strategy: StrategyKind,
    /// `ok`, or the error that stopped the cell.
    pub status: String,
    pub report: Option<RunReport>,
}

pub const BENCH_HEADER: [&str; 8] = [
    "model",
    "strategy",
    "status",
    "mean_sensitivity",
    "mean_specificity",
    "mean_auc",
    "retrains",
    "wall_ms",
];

fn parse_names<T: std::str::FromStr<Err = String>>(key: &str, list: &str) -> Result<Vec<T>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|m| Error::config(key, m)))
        .collect()
}

/// Runs every (model, strategy) cell on data loaded once. Cells run in
/// parallel; rows come back in grid order. Failed cells are kept as rows.
pub fn cmd_bench(cfg: &RunConfig, models: &[ModelKind], strategies: &[StrategyKind]) -> Result<Vec<BenchRow>> {
    let base = cfg.run_spec()?;
    let (data, n_features) = base.source.load().map_err(|e| e.in_stage("load"))?;
    let dataset = base.source.id();
    let cells: Vec<(ModelKind, StrategyKind)> = models
        .iter()
        .flat_map(|&m| strategies.iter().map(move |&s| (m, s)))
        .collect();
    Ok(cells
        .par_iter()
        .map(|&(model, strategy)| {
            let mut spec = base.clone();
            spec.model = model;
            spec.strategy.kind = strategy;
            match run_on_data(&spec, &dataset, &data, n_features) {
                Ok(report) => BenchRow {
                    model,
                    strategy,
                    status: "ok".into(),
                    report: Some(report),
                },
                Err(e) => BenchRow {
                    model,
                    strategy,
                    status: format!("failed: {e}"),
                    report: None,
                },
            }
        })
        .collect())
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], sink: W) -> Result<()> {
    let to_err = |e: csv::Error| Error::Serialize(e.to_string());
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(BENCH_HEADER).map_err(to_err)?;
    for row in rows {
        let mut record = vec![row.model.to_string(), row.strategy.to_string(), row.status.clone()];
        match &row.report {
            Some(r) => record.extend([
                format!("{:.6}", r.mean_sensitivity),
                format!("{:.6}", r.mean_specificity),
                format!("{:.6}", r.mean_auc),
                r.retrains.to_string(),
                format!("{:.3}", r.wall_ms),
            ]),
            None => record.extend(std::iter::repeat_n(String::new(), 5)),
        }
        w.write_record(&record).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::Serialize(e.to_string()))
}

pub fn cmd_synth(cfg: &RunConfig) -> Result<PathBuf> {
    let out = cfg
        .out
        .clone()
        .ok_or_else(|| Error::config("out", "synth needs an output path"))?;
    let spec = cfg.synthetic_spec();
    let data = generate_synthetic(&spec)?;
    write_csv(&out, &data)?;
    Ok(out)
}

fn create(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let io = |e: std::io::Error| Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    };
    match command {
        Command::Run(args) => {
            let report = cmd_run(&args.to_config()?)?;
            writeln!(stdout, "{}", summary_line(&report)).map_err(io)?;
        }
        Command::Bench(args) => {
            let cfg = args.common.to_config()?;
            let models = parse_names::<ModelKind>("models", &args.models)?;
            let strategies = parse_names::<StrategyKind>("strategies", &args.strategies)?;
            let rows = cmd_bench(&cfg, &models, &strategies)?;
            match &cfg.out {
                Some(path) => write_bench_csv(&rows, create(path)?)?,
                None => write_bench_csv(&rows, &mut *stdout)?,
            }
            let failed = rows.iter().filter(|r| r.report.is_none()).count();
            if failed > 0 {
                let _ = writeln!(stderr, "{failed} of {} cells failed", rows.len());
            }
        }
        Command::Synth(args) => {
            let out = cmd_synth(&args.to_config()?)?;
            writeln!(stdout, "wrote {}", out.display()).map_err(io)?;
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the exit
/// status: 0 success, 1 config error, 2 data error, 3 runtime error.
pub fn run_cli(args: Vec<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(expand_dotted_flags(args)) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
