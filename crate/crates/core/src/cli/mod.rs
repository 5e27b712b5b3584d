//! Command-line front end. Exit codes: 0 success, 1 runtime failure,
//! 2 usage or input error.

mod config;
mod io;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{parse_config, ConfigError, ParsedConfig};
pub use io::{fmt_num, read_numeric_csv};

use crate::data::DataMatrix;
use crate::error::SdaError;
use crate::estimation::PrecisionSpec;
use crate::filter::{
    run_rsda, run_sda, run_two_sample, run_two_sample_rsda, Flags, SelectionResult, SplitFit, T1Mode, TwoSampleSpec,
};
use crate::linalg::SymMatrix;
use crate::sim::run_experiment;
use crate::SdaOptions;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<SdaError> for CliError {
    fn from(e: SdaError) -> Self {
        match e {
            SdaError::InvalidInput(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(format!("config: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "sda", version, about = "FDR-controlled selection of nonzero means under dependence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a replicated simulation grid and write a metrics table.
    Simulate(SimulateArgs),
    /// Select features with nonzero mean in one sample.
    Analyze(AnalyzeArgs),
    /// Select features whose means differ between two samples.
    TwoSample(TwoSampleArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides the seed in the config file.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct FilterArgs {
    /// Precision matrix: a p×p CSV file, `identity` or `glasso` (default).
    #[arg(long)]
    omega: Option<String>,
    #[arg(long)]
    alpha: f64,
    /// Use the conservative `+1` threshold.
    #[arg(long)]
    plus: bool,
    /// Aggregate this many random splits.
    #[arg(long, value_name = "B")]
    rsda: Option<usize>,
    #[arg(long, default_value = "scaled", value_parser = parse_t1_arg)]
    t1: T1Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    filter: FilterArgs,
}

#[derive(Debug, Args)]
struct TwoSampleArgs {
    #[arg(long = "data-a")]
    data_a: PathBuf,
    #[arg(long = "data-b")]
    data_b: PathBuf,
    #[command(flatten)]
    filter: FilterArgs,
}

fn parse_t1_arg(s: &str) -> Result<T1Mode, String> {
    config::parse_t1(s).ok_or_else(|| format!("expected `scaled` or `raw`, got `{s}`"))
}

/// Entry point for the `sda` binary.
pub fn main() -> i32 {
    run(std::env::args_os())
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Analyze(a) => analyze(&a),
        Command::TwoSample(a) => two_sample(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn sha256_hex(chunks: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for c in chunks {
        h.update((c.len() as u64).to_le_bytes());
        h.update(c);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_outputs(out: &Path, csv_bytes: Vec<u8>, meta: &impl Serialize) -> Result<(), CliError> {
    let write = |path: &Path, bytes: &[u8]| {
        std::fs::write(path, bytes).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
    };
    write(out, &csv_bytes)?;
    let json = serde_json::to_vec_pretty(meta).map_err(|e| CliError::Runtime(e.to_string()))?;
    write(&meta_path(out), &json)
}

fn csv_error(e: impl fmt::Display) -> CliError {
    CliError::Runtime(format!("cannot format output: {e}"))
}

#[derive(Serialize)]
struct SimulateMeta<'a> {
    command: &'static str,
    version: &'static str,
    seed: u64,
    config_sha256: &'a str,
    precision: &'static str,
    reps: usize,
    cells: usize,
    unreliable_rows: usize,
    wall_time_secs: f64,
}

fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let text = std::fs::read(&args.config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.config.display())))?;
    let text_str = String::from_utf8(text.clone())
        .map_err(|_| CliError::Usage(format!("{} is not valid UTF-8", args.config.display())))?;
    let ParsedConfig { seed, mut simulation } = parse_config(&text_str)?;
    simulation.seed =
        args.seed.or(seed).ok_or_else(|| CliError::Usage("no seed: set `seed` in [run] or pass --seed".into()))?;
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        simulation.workers = Some(w);
    }
    let hash = sha256_hex(&[&text]);
    let records = run_experiment(&simulation)?;

    let mut buf = format!(
        "# sda simulate seed={} config_sha256={hash} precision={}\n",
        simulation.seed,
        simulation.precision.label()
    )
    .into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record([
            "procedure",
            "structure",
            "rho",
            "dist",
            "n",
            "p",
            "pi1",
            "mu0",
            "alpha",
            "reps",
            "fdr",
            "fdr_se",
            "ap",
            "ap_se",
            "dropped",
            "unreliable",
        ])
        .map_err(csv_error)?;
        for r in &records {
            let c = &r.cell;
            w.write_record([
                r.procedure.label().to_string(),
                c.structure.label().to_string(),
                fmt_num(c.rho),
                c.dist.label().to_string(),
                c.n.to_string(),
                c.p.to_string(),
                fmt_num(c.pi1),
                fmt_num(c.mu0),
                fmt_num(r.alpha),
                r.reps.to_string(),
                fmt_num(r.fdr),
                fmt_num(r.fdr_se),
                fmt_num(r.ap),
                fmt_num(r.ap_se),
                r.dropped.to_string(),
                u8::from(r.unreliable).to_string(),
            ])
            .map_err(csv_error)?;
        }
        w.flush().map_err(csv_error)?;
    }
    let meta = SimulateMeta {
        command: "simulate",
        version: env!("CARGO_PKG_VERSION"),
        seed: simulation.seed,
        config_sha256: &hash,
        precision: simulation.precision.label(),
        reps: simulation.reps,
        cells: simulation.cells.len(),
        unreliable_rows: records.iter().filter(|r| r.unreliable).count(),
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    write_outputs(&args.out, buf, &meta)
}

fn load_data(path: &Path) -> Result<(DataMatrix, Vec<u8>), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let rows = read_numeric_csv(path)?;
    let data = DataMatrix::from_rows(&rows).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if data.n() < 3 {
        return Err(CliError::Usage(format!("{}: need at least 3 observations, got {}", path.display(), data.n())));
    }
    if data.p() < 2 {
        return Err(CliError::Usage(format!("{}: need at least 2 features, got {}", path.display(), data.p())));
    }
    Ok((data, bytes))
}

/// Precision spec and the bytes identifying it for the config hash.
fn precision_spec(omega: Option<&str>, p: usize) -> Result<(PrecisionSpec, Vec<u8>), CliError> {
    match omega {
        None | Some("glasso") => Ok((PrecisionSpec::glasso(), b"glasso".to_vec())),
        Some("identity") => Ok((PrecisionSpec::IdentityWorking, b"identity".to_vec())),
        Some(file) => {
            let path = Path::new(file);
            let bytes =
                std::fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let rows = read_numeric_csv(path)?;
            if rows.len() != p || rows[0].len() != p {
                return Err(CliError::Usage(format!(
                    "{}: precision must be {p}x{p}, got {}x{}",
                    path.display(),
                    rows.len(),
                    rows[0].len()
                )));
            }
            let omega = SymMatrix::from_row_major(p, rows.concat())
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            Ok((PrecisionSpec::Known(omega), bytes))
        }
    }
}

fn options_for(args: &FilterArgs) -> Result<SdaOptions, CliError> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::Usage(format!("--alpha must lie strictly between 0 and 1, got {}", args.alpha)));
    }
    if args.rsda == Some(0) {
        return Err(CliError::Usage("--rsda must be at least 1".into()));
    }
    Ok(SdaOptions { t1_mode: args.t1, plus: args.plus, ..SdaOptions::default() })
}

/// Input errors in a user-supplied precision surface as usage errors.
fn input_error(e: SdaError) -> CliError {
    match e {
        SdaError::InvalidInput(_) | SdaError::NotPsd { .. } => CliError::Usage(e.to_string()),
        other => other.into(),
    }
}

#[derive(Serialize)]
struct AnalyzeMeta {
    command: &'static str,
    version: &'static str,
    seed: u64,
    config_sha256: String,
    alpha: f64,
    plus: bool,
    t1: T1Mode,
    precision: &'static str,
    /// `null` when no threshold qualifies.
    threshold: Option<f64>,
    fdp_hat_at_threshold: f64,
    n_candidates: usize,
    n_selected: usize,
    screened: usize,
    flags: Flags,
    rsda_b: Option<usize>,
    chosen_run: Option<usize>,
    majority_set: Option<Vec<usize>>,
    wall_time_secs: f64,
}

struct Analysis {
    fit: SplitFit,
    selection: SelectionResult,
    rsda: Option<(usize, usize, Vec<usize>)>,
}

fn finish(
    command: &'static str,
    args: &FilterArgs,
    spec: &PrecisionSpec,
    p: usize,
    hash: String,
    analysis: Analysis,
    started: Instant,
) -> Result<(), CliError> {
    let Analysis { fit, selection, rsda } = analysis;
    let w = fit.ranking.full_w(p);
    let mut selected = vec![false; p];
    for &j in &selection.rejected {
        selected[j] = true;
    }
    let mut buf = format!("# sda {command} seed={} config_sha256={hash}\n", args.seed).into_bytes();
    {
        let mut out = csv::Writer::from_writer(&mut buf);
        out.write_record(["feature_index", "w", "selected"]).map_err(csv_error)?;
        for j in 0..p {
            let wj = w[j].map_or_else(|| "NA".to_string(), fmt_num);
            out.write_record([j.to_string(), wj, u8::from(selected[j]).to_string()]).map_err(csv_error)?;
        }
        out.flush().map_err(csv_error)?;
    }
    let meta = AnalyzeMeta {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed: args.seed,
        config_sha256: hash,
        alpha: args.alpha,
        plus: args.plus,
        t1: args.t1,
        precision: spec.label(),
        threshold: selection.threshold.is_finite().then_some(selection.threshold),
        fdp_hat_at_threshold: selection.fdp_hat_at_l,
        n_candidates: selection.n_candidates,
        n_selected: selection.rejected.len(),
        screened: fit.ranking.subset.len(),
        flags: selection.flags,
        rsda_b: rsda.as_ref().map(|r| r.0),
        chosen_run: rsda.as_ref().map(|r| r.1),
        majority_set: rsda.map(|r| r.2),
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    write_outputs(&args.out, buf, &meta)
}

fn filter_fingerprint(args: &FilterArgs) -> Vec<u8> {
    format!("alpha={} plus={} rsda={:?} t1={:?}", args.alpha, args.plus, args.rsda, args.t1).into_bytes()
}

fn analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let f = &args.filter;
    let options = options_for(f)?;
    let (data, data_bytes) = load_data(&args.data)?;
    let (spec, spec_bytes) = precision_spec(f.omega.as_deref(), data.p())?;
    let hash = sha256_hex(&[b"analyze", &filter_fingerprint(f), &spec_bytes, &data_bytes]);
    let mut rng = ChaCha8Rng::seed_from_u64(f.seed);
    // validate a user-supplied precision before any work
    crate::SdaFilter::new(&spec, options.clone()).map_err(input_error)?;
    let analysis = match f.rsda {
        Some(b) => {
            let agg = run_rsda(&data, &spec, f.alpha, b, &options, &mut rng)?;
            Analysis {
                fit: agg.final_fit,
                selection: agg.final_selection,
                rsda: Some((b, agg.chosen_run, agg.majority_set)),
            }
        }
        None => {
            let out = run_sda(&data, &spec, f.alpha, &options, &mut rng)?;
            Analysis { fit: out.fit, selection: out.selection, rsda: None }
        }
    };
    finish("analyze", f, &spec, data.p(), hash, analysis, started)
}

fn two_sample(args: &TwoSampleArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let f = &args.filter;
    let options = options_for(f)?;
    let (d_a, bytes_a) = load_data(&args.data_a)?;
    let (d_b, bytes_b) = load_data(&args.data_b)?;
    if d_a.p() != d_b.p() {
        return Err(CliError::Usage(format!("groups have {} and {} features", d_a.p(), d_b.p())));
    }
    let (spec, spec_bytes) = precision_spec(f.omega.as_deref(), d_a.p())?;
    crate::SdaFilter::new(&spec, options.clone()).map_err(input_error)?;
    // order-independent so that swapping the groups gives the same hash
    let (lo, hi) = if bytes_a <= bytes_b { (&bytes_a, &bytes_b) } else { (&bytes_b, &bytes_a) };
    let hash = sha256_hex(&[b"two-sample", &filter_fingerprint(f), &spec_bytes, lo, hi]);
    let groups = TwoSampleSpec::shared(spec.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(f.seed);
    let analysis = match f.rsda {
        Some(b) => {
            let agg = run_two_sample_rsda(&d_a, &d_b, &groups, f.alpha, b, &options, &mut rng)?;
            Analysis {
                fit: agg.final_fit,
                selection: agg.final_selection,
                rsda: Some((b, agg.chosen_run, agg.majority_set)),
            }
        }
        None => {
            let out = run_two_sample(&d_a, &d_b, &groups, f.alpha, &options, &mut rng)?;
            Analysis { fit: out.fit, selection: out.selection, rsda: None }
        }
    };
    finish("two-sample", f, &spec, d_a.p(), hash, analysis, started)
}
