//! Command-line front end: `simulate`, `seminorm`, `decompose`, `smallball`,
//! `ratefit`, `axioms` and `table`.
//!
//! Every command is a pure function of its configuration file and flags.
//! Failures print `{"error": code, "message": text}` on stderr and exit
//! nonzero.

mod config;
mod svg;

pub use config::{ExperimentConfig, OutputPaths};

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::processes::{
    process_scheme, read_path, read_path_csv, write_path, write_path_csv, Grid, Path, ProcessKind,
    ProcessParams,
};
use crate::schauder::{decompose, write_coeffs_csv, LevelStat};
use crate::seminorms::{
    check_axioms, classify, evaluate, finiteness_condition, parse_extended, rate_gamma,
    render_table_csv, Corpus, Finiteness, SemiNormClass, SemiNormKind, SemiNormSpec, TableFamily,
};
use crate::smalldev::{fit_rate, mc_small_ball, Estimator, RateFit, SmallBallEstimate};
use crate::stats::weighted_line;

#[derive(Debug, Parser)]
#[command(
    name = "fracdev",
    version,
    about = "Small deviations of fractional stable processes"
)]
pub struct Cli {
    /// Worker threads; outputs never depend on it.
    #[arg(long, global = true, env = "FRACDEV_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one path and write it as CSV or binary.
    Simulate(SimulateArgs),
    /// Evaluate a semi-norm on a path file.
    Seminorm(SeminormArgs),
    /// Schauder coefficients of a path file and their level decay.
    Decompose(DecomposeArgs),
    /// Monte-Carlo small-ball probabilities with a rate fit.
    Smallball(SmallballArgs),
    /// Fit rate and constant to small-ball results.
    Ratefit(RatefitArgs),
    /// Check the semi-norm axioms on a seeded corpus.
    Axioms(AxiomsArgs),
    /// Small-deviation rate tables as CSV.
    Table(TableArgs),
}

#[derive(Debug, Args, Default)]
pub struct ProcessFlags {
    /// rlp | lmp | lfsm | balanced
    #[arg(long, value_parser = parse_from_str::<ProcessKind>)]
    pub kind: Option<ProcessKind>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub hurst: Option<f64>,
    /// Scale Gaussian runs to standard Brownian increments.
    #[arg(long)]
    pub normalize: Option<bool>,
}

impl ProcessFlags {
    fn apply(&self, base: ProcessParams) -> Result<ProcessParams> {
        if self.kind.is_none()
            && self.alpha.is_none()
            && self.hurst.is_none()
            && self.normalize.is_none()
        {
            return Ok(base);
        }
        ProcessParams::new(
            self.kind.unwrap_or(base.kind()),
            self.alpha.unwrap_or(base.alpha().get()),
            self.hurst.unwrap_or(base.hurst()),
            self.normalize.unwrap_or(base.normalize_gaussian()),
        )
    }
}

#[derive(Debug, Args, Default)]
pub struct NormFlags {
    /// SUP | LP | HOLDER | CZ | LIPSCHITZ | PVAR | SOBOLEV | BESOV
    #[arg(long, value_parser = parse_norm_kind)]
    pub norm: Option<SemiNormKind>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Exponent p (`inf` allowed where defined).
    #[arg(long, value_parser = parse_ext)]
    pub p: Option<f64>,
    #[arg(long, value_parser = parse_ext)]
    pub q: Option<f64>,
}

impl NormFlags {
    fn apply(&self, base: SemiNormSpec) -> Result<SemiNormSpec> {
        let kind = self.norm.unwrap_or(base.kind());
        if kind != base.kind() {
            return SemiNormSpec::new(kind, self.eta, self.p, self.q);
        }
        let keep = |flag: Option<f64>, has: bool, v: f64| flag.or(has.then_some(v));
        SemiNormSpec::new(
            kind,
            keep(self.eta, uses_eta(kind), base.eta()),
            keep(self.p, uses_p(kind), base.p()),
            keep(self.q, kind == SemiNormKind::Besov, base.q()),
        )
    }

    fn require(&self) -> Result<SemiNormSpec> {
        match self.norm {
            Some(k) => SemiNormSpec::new(k, self.eta, self.p, self.q),
            None => invalid("--norm is required"),
        }
    }
}

fn uses_eta(k: SemiNormKind) -> bool {
    matches!(
        k,
        SemiNormKind::Holder | SemiNormKind::Lipschitz | SemiNormKind::Sobolev | SemiNormKind::Besov
    )
}

fn uses_p(k: SemiNormKind) -> bool {
    matches!(
        k,
        SemiNormKind::Lp | SemiNormKind::Pvar | SemiNormKind::Sobolev | SemiNormKind::Besov
    )
}

fn parse_from_str<T: std::str::FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_norm_kind(s: &str) -> std::result::Result<SemiNormKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown semi-norm '{s}'"))
}

fn parse_ext(s: &str) -> std::result::Result<f64, String> {
    parse_extended(s).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathFormat {
    Csv,
    Binary,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Experiment TOML supplying process, level and seed.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub process: ProcessFlags,
    #[arg(long)]
    pub level: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Path index within the seed's stream family.
    #[arg(long, default_value_t = 0)]
    pub index: u64,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, value_enum, default_value_t = PathFormat::Csv)]
    pub format: PathFormat,
    /// Output file (stdout if absent).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SeminormArgs {
    /// Path file, CSV or binary.
    #[arg(long)]
    pub path: PathBuf,
    #[command(flatten)]
    pub norm: NormFlags,
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub path: PathBuf,
    /// Coefficient CSV `j,n,r_jn`.
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
    /// Scaling report JSON (stdout if absent).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Lowest level in the decay fit.
    #[arg(long, default_value_t = 2)]
    pub min_level: u32,
}

#[derive(Debug, Args)]
pub struct SmallballArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub process: ProcessFlags,
    #[command(flatten)]
    pub norm: NormFlags,
    /// Comma-separated radii.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub n_samples: Option<u64>,
    #[arg(long)]
    pub level: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// auto | grid | bridge
    #[arg(long, value_parser = parse_from_str::<Estimator>)]
    pub estimator: Option<Estimator>,
    /// Results JSON (stdout if neither this nor the config names one).
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// SVG plot of log(-log p) against log(1/eps).
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RatefitArgs {
    /// Results JSON holding an `estimates` array.
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long)]
    pub gamma_fixed: Option<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AxiomsArgs {
    #[command(flatten)]
    pub norm: NormFlags,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub size: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// brownian | gaussian | levy | stable | all
    #[arg(long, default_value = "all")]
    pub family: String,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Estimator actually used.
    pub estimator: Estimator,
    pub finiteness: Finiteness,
    /// True when the constant is not known to be finite: the fitted rate is
    /// then a conjectured one.
    pub conjectural: bool,
    /// Radii without hits (reported by upper bound only).
    pub censored: Vec<f64>,
    /// Plain grid hit counts when the bridge estimator was used.
    pub grid_hits: Option<Vec<u64>>,
    pub fit_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallBallResults {
    pub config: ExperimentConfig,
    pub params: ProcessParams,
    pub seminorm: SemiNormSpec,
    pub class: SemiNormClass,
    pub epsilons: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub stderr: Vec<f64>,
    pub hits: Vec<u64>,
    pub estimates: Vec<SmallBallEstimate>,
    pub gamma_theory: f64,
    pub gamma_hat: Option<f64>,
    #[serde(rename = "K_hat")]
    pub k_hat: Option<f64>,
    pub fit: Option<RateFit>,
    pub diagnostics: Diagnostics,
}

/// Runs a validated small-ball experiment.
pub fn run_smallball(cfg: &ExperimentConfig) -> Result<SmallBallResults> {
    cfg.validate()?;
    let class = classify(&cfg.seminorm);
    let gamma_theory = rate_gamma(cfg.process.hurst(), &class)?;
    let run = mc_small_ball(
        &cfg.process,
        &cfg.seminorm,
        &cfg.epsilons,
        cfg.n_samples,
        &cfg.options(),
    )?;
    let finiteness = finiteness_condition(cfg.process.hurst(), cfg.process.alpha(), &class);
    let (fit, fit_error) = match fit_rate(&run.estimates, None) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let est = &run.estimates;
    Ok(SmallBallResults {
        config: cfg.clone(),
        params: cfg.process,
        seminorm: cfg.seminorm,
        class,
        epsilons: est.iter().map(|e| e.epsilon).collect(),
        p_hat: est.iter().map(|e| e.p_hat).collect(),
        stderr: est.iter().map(|e| e.stderr).collect(),
        hits: est.iter().map(|e| e.hits).collect(),
        estimates: run.estimates.clone(),
        gamma_theory,
        gamma_hat: fit.as_ref().map(|f| f.gamma_hat),
        k_hat: fit.as_ref().map(|f| f.k_hat),
        fit,
        diagnostics: Diagnostics {
            estimator: run.estimator,
            finiteness,
            conjectural: finiteness != Finiteness::ConstantExistsFinite,
            censored: est.iter().filter(|e| e.censored()).map(|e| e.epsilon).collect(),
            grid_hits: run.grid_hits,
            fit_error,
        },
    })
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV mirror of the estimates.
pub fn results_csv(results: &SmallBallResults) -> String {
    let mut s = String::from("epsilon,hits,n_samples,p_hat,stderr,log_p,log_p_stderr,upper_bound\n");
    for e in &results.estimates {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            e.epsilon,
            e.hits,
            e.n_samples,
            e.p_hat,
            e.stderr,
            opt_cell(e.log_p),
            opt_cell(e.log_p_stderr),
            opt_cell(e.upper_bound)
        ));
    }
    s
}

/// SVG of `log(−log p̂)` against `log(1/ε)` with the fitted line.
pub fn results_svg(results: &SmallBallResults) -> String {
    let mut pts: Vec<(f64, f64)> = results
        .estimates
        .iter()
        .filter(|e| e.p_hat > 0.0 && e.p_hat < 1.0)
        .map(|e| (-e.epsilon.ln(), (-e.p_hat.ln()).ln()))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let title = format!(
        "{} {} alpha={} H={}",
        results.params.kind().as_str(),
        results.seminorm.label(),
        results.params.alpha().get(),
        results.params.hurst()
    );
    svg::render(&svg::Chart {
        title: &title,
        x_label: "log(1/eps)",
        y_label: "log(-log p)",
        points: &pts,
        line: results.fit.as_ref().map(|f| (f.k_hat.ln(), f.gamma_hat)),
    })
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn emit(path: Option<&FsPath>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Reads a path file, CSV (`t,value` header) or binary.
pub fn read_path_file(file: &FsPath) -> Result<Path> {
    let bytes = fs::read(file)?;
    if bytes.starts_with(b"t,value") {
        read_path_csv(&bytes[..])
    } else {
        read_path(&bytes[..])
    }
}

fn load_config(file: Option<&PathBuf>) -> Result<ExperimentConfig> {
    match file {
        Some(f) => ExperimentConfig::from_toml(&fs::read_to_string(f)?),
        None => Ok(ExperimentConfig::default()),
    }
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let cfg = load_config(a.config.as_ref())?;
    let params = a.process.apply(cfg.process)?;
    let level = a.level.unwrap_or(cfg.level);
    let seed = a.seed.unwrap_or(cfg.seed);
    let grid = Grid::dyadic(level, a.horizon)?;
    let scheme = process_scheme(&params, grid, cfg.tail_tolerance)?;
    let path = scheme
        .sampler(seed)
        .paths(a.index..a.index + 1)
        .pop()
        .expect("one path requested");
    let mut buf = Vec::new();
    match a.format {
        PathFormat::Csv => write_path_csv(&path, &mut buf)?,
        PathFormat::Binary => write_path(&path, &mut buf)?,
    }
    emit(a.output.as_deref(), &buf)
}

#[derive(Debug, Serialize)]
struct SeminormOutput {
    seminorm: SemiNormSpec,
    label: String,
    interval: (f64, f64),
    value: f64,
    class: SemiNormClass,
    params: Option<ProcessParams>,
    rate_gamma: Option<f64>,
    rate_note: Option<String>,
    finiteness: Option<Finiteness>,
}

fn cmd_seminorm(a: &SeminormArgs) -> Result<()> {
    let spec = a.norm.require()?;
    let path = read_path_file(&a.path)?;
    let (from, to) = (a.from.unwrap_or(0.0), a.to.unwrap_or(path.grid.horizon));
    let value = evaluate(&spec, &path, from, to)?;
    let class = classify(&spec);
    let (rate, note, fin) = match &path.params {
        Some(p) => match rate_gamma(p.hurst(), &class) {
            Ok(g) => (
                Some(g),
                None,
                Some(finiteness_condition(p.hurst(), p.alpha(), &class)),
            ),
            Err(e) => (None, Some(e.to_string()), None),
        },
        None => (None, None, None),
    };
    let out = SeminormOutput {
        seminorm: spec,
        label: spec.label(),
        interval: (from, to),
        value,
        class,
        params: path.params,
        rate_gamma: rate,
        rate_note: note,
        finiteness: fin,
    };
    emit(None, to_json(&out)?.as_bytes())
}

#[derive(Debug, Serialize)]
struct DecomposeReport {
    grid_level: u32,
    left: f64,
    right: f64,
    levels: Vec<LevelStat>,
    /// `log₂` slope of the level medians against `j`.
    slope: Option<f64>,
    intercept: Option<f64>,
}

fn cmd_decompose(a: &DecomposeArgs) -> Result<()> {
    let path = read_path_file(&a.path)?;
    let coeffs = decompose(&path)?;
    if let Some(f) = &a.coeffs {
        let mut buf = Vec::new();
        write_coeffs_csv(&coeffs, &mut buf)?;
        fs::write(f, buf)?;
    }
    let big_j = coeffs.level_count();
    let levels: Vec<LevelStat> = (a.min_level.max(2)..big_j)
        .map(|j| {
            let q = 1usize << (j - 2);
            let mut v: Vec<f64> = coeffs.levels[j as usize][q..3 * q]
                .iter()
                .map(|r| r.abs())
                .collect();
            v.sort_by(f64::total_cmp);
            LevelStat {
                j,
                median_abs: crate::stats::quantile_sorted(&v, 0.5),
                count: v.len(),
            }
        })
        .collect();
    let usable: Vec<&LevelStat> = levels.iter().filter(|l| l.median_abs > 0.0).collect();
    let line = (usable.len() >= 2)
        .then(|| {
            let x: Vec<f64> = usable.iter().map(|l| l.j as f64).collect();
            let y: Vec<f64> = usable.iter().map(|l| l.median_abs.log2()).collect();
            weighted_line(&x, &y, &vec![1.0; x.len()]).ok()
        })
        .flatten();
    let report = DecomposeReport {
        grid_level: big_j,
        left: coeffs.left,
        right: coeffs.right,
        levels,
        slope: line.map(|l| l.slope),
        intercept: line.map(|l| l.intercept),
    };
    emit(a.report.as_deref(), to_json(&report)?.as_bytes())
}

/// Resolves the configuration of `smallball`: file, then flags.
pub fn smallball_config(a: &SmallballArgs) -> Result<ExperimentConfig> {
    let mut cfg = load_config(a.config.as_ref())?;
    cfg.process = a.process.apply(cfg.process)?;
    cfg.seminorm = a.norm.apply(cfg.seminorm)?;
    if let Some(e) = &a.eps {
        cfg.epsilons = e.clone();
    }
    if let Some(n) = a.n_samples {
        cfg.n_samples = n;
    }
    if let Some(l) = a.level {
        cfg.level = l;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(e) = a.estimator {
        cfg.estimator = e;
    }
    for (flag, slot) in [
        (&a.json, &mut cfg.output.json),
        (&a.csv, &mut cfg.output.csv),
        (&a.svg, &mut cfg.output.svg),
    ] {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_smallball(a: &SmallballArgs) -> Result<()> {
    let cfg = smallball_config(a)?;
    let results = run_smallball(&cfg)?;
    emit(cfg.output.json.as_deref(), to_json(&results)?.as_bytes())?;
    if let Some(f) = &cfg.output.csv {
        fs::write(f, results_csv(&results))?;
    }
    if let Some(f) = &cfg.output.svg {
        fs::write(f, results_svg(&results))?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct EstimatesOnly {
    estimates: Vec<SmallBallEstimate>,
}

fn cmd_ratefit(a: &RatefitArgs) -> Result<()> {
    let text = fs::read_to_string(&a.results)?;
    let parsed: EstimatesOnly = serde_json::from_str(&text)?;
    let fit = fit_rate(&parsed.estimates, a.gamma_fixed)?;
    emit(a.output.as_deref(), to_json(&fit)?.as_bytes())
}

fn cmd_axioms(a: &AxiomsArgs) -> Result<()> {
    let spec = a.norm.require()?;
    let report = check_axioms(&spec, &Corpus::new(a.seed, a.size), a.tolerance)?;
    emit(a.output.as_deref(), to_json(&report)?.as_bytes())
}

fn cmd_table(a: &TableArgs) -> Result<()> {
    let families: Vec<TableFamily> = if a.family == "all" {
        TableFamily::ALL.to_vec()
    } else {
        vec![a.family.parse()?]
    };
    emit(a.output.as_deref(), render_table_csv(&families).as_bytes())
}

/// Executes a parsed command line.
pub fn execute(cli: &Cli) -> Result<()> {
    let run = || match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Seminorm(a) => cmd_seminorm(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Smallball(a) => cmd_smallball(a),
        Command::Ratefit(a) => cmd_ratefit(a),
        Command::Axioms(a) => cmd_axioms(a),
        Command::Table(a) => cmd_table(a),
    };
    match cli.threads {
        Some(0) => invalid("--threads must be at least 1"),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

fn report_error(code: &str, message: &str) {
    let body = serde_json::json!({ "error": code, "message": message });
    eprintln!("{body}");
}

/// Parses `args` (program name first) and runs the command, mapping errors
/// to JSON on stderr: exit 2 for usage errors, 1 otherwise.
pub fn main_entry<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    report_error("usage", e.to_string().trim());
                    ExitCode::from(2)
                }
            };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(e.code(), &e.to_string());
            ExitCode::from(1)
        }
    }
}
