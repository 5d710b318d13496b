//! Command-line front end.
//!
//! Four subcommands: `fisher-curves`, `simulate`, `oracle-verify` and
//! `breakeven`. Settings come from flags, then an optional JSON file given
//! by `--config`, then built-in defaults. Exit status is 0 on success, 1 on
//! a usage or runtime error and 2 when the oracle verification fails.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::amplitude_model::{breakeven_qubits, Method, NoiseModel, SystemSize};
use crate::error::Error;
use crate::estimator::{run_experiment, ExperimentConfig, DEFAULT_TARGETS};
use crate::fisher::{curve, CurveKind};
use crate::oracle::{run_verification, VerificationConfig, MAX_DATA_QUBITS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;

/// Size of the perturbation applied to `r` by `oracle-verify --inject-fault`.
pub const FAULT_DELTA: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("verification failed: {0} of {1} cases out of tolerance")]
    VerificationFailed(usize, usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerificationFailed(..) => EXIT_VERIFY_FAILED,
            _ => EXIT_USAGE,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "qae-lab", version, about = "Amplitude estimation under depolarizing noise")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fisher information against the number of queries.
    FisherCurves(CurvesArgs),
    /// Monte-Carlo RMSE of the maximum-likelihood estimate.
    Simulate(SimulateArgs),
    /// Compare the density-matrix oracle with every closed form.
    OracleVerify(VerifyArgs),
    /// Register width at which readout error halves the Fisher information.
    Breakeven(BreakevenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    G,
    Q,
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodChoice::G => vec![Method::GBased],
            MethodChoice::Q => vec![Method::QBased],
            MethodChoice::Both => Method::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON file with default values for any of the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CurvesArgs {
    #[arg(long)]
    pub r: Option<f64>,
    /// Register widths `log2 d`, or `inf`.
    #[arg(long, value_delimiter = ',', value_parser = parse_size)]
    pub n_qubits: Option<Vec<SystemSize>>,
    /// Angles of the fixed-angle classical curves; fractions like `1/6` allowed.
    #[arg(long, value_delimiter = ',', value_parser = parse_number)]
    pub thetas: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub methods: Option<MethodChoice>,
    #[arg(long)]
    pub nq_min: Option<f64>,
    #[arg(long)]
    pub nq_max: Option<f64>,
    #[arg(long)]
    pub nq_step: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub r: Option<f64>,
    /// Register width `log2 d`, or `inf`.
    #[arg(long, value_parser = parse_size)]
    pub n_qubits: Option<SystemSize>,
    /// Target amplitudes; fractions like `1/6` allowed.
    #[arg(long, value_delimiter = ',', value_parser = parse_number)]
    pub targets: Option<Vec<f64>>,
    #[arg(long)]
    pub base: Option<f64>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub methods: Option<MethodChoice>,
    /// Record the wall time in the output metadata (makes the file
    /// run-dependent).
    #[arg(long)]
    pub wall_time: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct VerifyArgs {
    /// Largest number of data qubits (at most 8).
    #[arg(long)]
    pub n_qubits: Option<u32>,
    /// Depolarizing parameters to test.
    #[arg(long, value_delimiter = ',', value_parser = parse_number)]
    pub r: Option<Vec<f64>>,
    /// Largest number of amplification steps.
    #[arg(long)]
    pub max_m: Option<u32>,
    /// Random (θ, W) draws per cell.
    #[arg(long)]
    pub seeds: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub methods: Option<MethodChoice>,
    /// Perturb r inside the oracle only; the suite must then fail.
    #[arg(long)]
    pub inject_fault: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BreakevenArgs {
    /// Per-qubit readout error probability.
    #[arg(value_parser = parse_number)]
    pub eps: f64,
}

/// A value given either once or as a list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

/// `log2 d` as a number or the string `"inf"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SizeValue {
    Width(u32),
    Text(String),
}

impl SizeValue {
    fn resolve(&self) -> CliResult<SystemSize> {
        match self {
            SizeValue::Width(k) => Ok(SystemSize::from_log2_dim(*k)?),
            SizeValue::Text(s) => parse_size(s).map_err(CliError::Usage),
        }
    }
}

/// Contents of a `--config` file. Every field is optional; unknown keys
/// are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub r: Option<OneOrMany<f64>>,
    pub n_qubits: Option<OneOrMany<SizeValue>>,
    pub thetas: Option<Vec<f64>>,
    pub targets: Option<Vec<f64>>,
    pub base: Option<f64>,
    pub rounds: Option<usize>,
    pub shots: Option<u64>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub methods: Option<MethodChoice>,
    pub nq_min: Option<f64>,
    pub nq_max: Option<f64>,
    pub nq_step: Option<f64>,
    pub max_m: Option<u32>,
    pub seeds: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    fn single_r(&self) -> CliResult<Option<f64>> {
        match &self.r {
            None => Ok(None),
            Some(OneOrMany::One(r)) => Ok(Some(*r)),
            Some(OneOrMany::Many(v)) if v.len() == 1 => Ok(Some(v[0])),
            Some(_) => Err(CliError::Usage("config: expected a single value for r".into())),
        }
    }

    fn sizes(&self) -> CliResult<Option<Vec<SystemSize>>> {
        self.n_qubits
            .clone()
            .map(|v| v.into_vec().iter().map(SizeValue::resolve).collect())
            .transpose()
    }
}

/// Accepts a decimal number or a fraction `p/q`.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("invalid number '{s}'"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("invalid number '{s}'"))?;
            p / q
        }
        None => s.parse().map_err(|_| format!("invalid number '{s}'"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("'{s}' is not a finite number"))
    }
}

/// `inf` or a register width `log2 d`.
pub fn parse_size(s: &str) -> Result<SystemSize, String> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinite") {
        return Ok(SystemSize::Infinite);
    }
    let k: u32 = s.parse().map_err(|_| format!("expected an integer or 'inf', got '{s}'"))?;
    SystemSize::from_log2_dim(k).map_err(|e| e.to_string())
}

/// Parse `args` and run the selected command. Returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::FisherCurves(args) => cmd_fisher_curves(&args, stdout),
        Command::Simulate(args) => cmd_simulate(&args, stdout, stderr),
        Command::OracleVerify(args) => cmd_oracle_verify(&args, stdout, stderr),
        Command::Breakeven(args) => cmd_breakeven(args.eps, stdout),
    }
}

fn load_config(output: &OutputArgs) -> CliResult<RunConfig> {
    match &output.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    }
}

/// A finished table ready for serialization.
struct Table {
    metadata: BTreeMap<String, Value>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

fn format_number(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e15) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn format_cell(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format_number(n.as_f64().unwrap_or(f64::NAN)),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

impl Table {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = String::new();
                for (key, value) in &self.metadata {
                    let _ = writeln!(out, "# {key}: {value}");
                }
                let _ = writeln!(out, "{}", self.columns.join(","));
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(format_cell).collect();
                    let _ = writeln!(out, "{}", cells.join(","));
                }
                out
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj = self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.clone())).collect();
                        Value::Object(obj)
                    })
                    .collect();
                let doc = json!({ "metadata": self.metadata, "rows": rows });
                let mut text = serde_json::to_string_pretty(&doc).expect("table serializes");
                text.push('\n');
                text
            }
        }
    }
}

fn emit(table: &Table, output: &OutputArgs, config: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let format = output.format.or(config.format).unwrap_or(Format::Csv);
    let text = table.render(format);
    match output.out.as_ref().or(config.out.as_ref()) {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source }),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn size_label(size: SystemSize) -> String {
    match size {
        SystemSize::Finite { log2_dim } => log2_dim.to_string(),
        SystemSize::Infinite => "inf".into(),
    }
}

fn noise(r: f64) -> CliResult<NoiseModel> {
    NoiseModel::depolarizing(r).map_err(|e| CliError::Usage(e.to_string()))
}

pub const DEFAULT_CURVE_THETAS: [f64; 3] = [1.0 / 6.0, 1.0 / 20.0, 1.0 / 50.0];
pub const DEFAULT_CURVE_SIZES: [SystemSize; 4] = [
    SystemSize::Finite { log2_dim: 1 },
    SystemSize::Finite { log2_dim: 10 },
    SystemSize::Finite { log2_dim: 100 },
    SystemSize::Infinite,
];

/// Fixed-angle classical curves for the selected methods, both envelopes
/// and the quantum Fisher information for every register size, then the
/// size-independent noiseless and single-query references.
pub fn cmd_fisher_curves(args: &CurvesArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let config = load_config(&args.output)?;
    let r = args.r.or(config.single_r()?).unwrap_or(0.99);
    let noise = noise(r)?;
    let sizes = match &args.n_qubits {
        Some(s) => s.clone(),
        None => config.sizes()?.unwrap_or_else(|| DEFAULT_CURVE_SIZES.to_vec()),
    };
    let thetas = args.thetas.clone().or(config.thetas.clone()).unwrap_or_else(|| DEFAULT_CURVE_THETAS.to_vec());
    let methods = args.methods.or(config.methods).unwrap_or(MethodChoice::G).methods();
    let nq_min = args.nq_min.or(config.nq_min).unwrap_or(1.0);
    let nq_max = args.nq_max.or(config.nq_max).unwrap_or(1000.0);
    let nq_step = args.nq_step.or(config.nq_step).unwrap_or(1.0);
    if !(nq_min >= 0.0 && nq_max >= nq_min && nq_step > 0.0 && nq_max.is_finite()) {
        return Err(CliError::Usage(format!("invalid n_q grid: min {nq_min}, max {nq_max}, step {nq_step}")));
    }
    let count = ((nq_max - nq_min) / nq_step + 1e-9).floor() as usize + 1;
    if count > 10_000_000 {
        return Err(CliError::Usage(format!("n_q grid of {count} points is too large")));
    }
    let grid: Vec<f64> = (0..count).map(|i| nq_min + i as f64 * nq_step).collect();
    if sizes.is_empty() || thetas.is_empty() {
        return Err(CliError::Usage("need at least one size and one angle".into()));
    }

    let mut series: Vec<(CurveKind, Method, SystemSize, String)> = Vec::new();
    for &size in &sizes {
        let tag = size_label(size);
        for &method in &methods {
            for &theta in &thetas {
                let kind = CurveKind::Classical { theta };
                series.push((kind, method, size, format!("{}@n={tag}", kind.label(method))));
            }
        }
        for method in Method::ALL {
            let kind = CurveKind::ClassicalEnvelope;
            series.push((kind, method, size, format!("{}@n={tag}", kind.label(method))));
        }
        series.push((CurveKind::Quantum, Method::GBased, size, format!("quantum@n={tag}")));
    }
    for kind in [CurveKind::Noiseless, CurveKind::NoAmplification] {
        series.push((kind, Method::GBased, SystemSize::Infinite, kind.label(Method::GBased)));
    }

    let mut rows = Vec::new();
    for (kind, method, size, label) in series {
        let c = curve(kind, method, &noise, size, &grid).map_err(|e| CliError::Usage(e.to_string()))?;
        for (n_q, value) in c.points {
            rows.push(vec![json!(n_q), json!(value), json!(label)]);
        }
    }
    let mut metadata = BTreeMap::new();
    metadata.insert("command".into(), json!("fisher-curves"));
    metadata.insert("r".into(), json!(r));
    metadata.insert("n_qubits".into(), json!(sizes.iter().map(|&s| size_label(s)).collect::<Vec<_>>()));
    metadata.insert("thetas".into(), json!(thetas));
    metadata.insert("methods".into(), json!(methods.iter().map(|m| m.label()).collect::<Vec<_>>()));
    metadata.insert("nq_grid".into(), json!({ "min": nq_min, "max": nq_max, "step": nq_step }));
    let table = Table { metadata, columns: vec!["n_q", "value", "series_label"], rows };
    emit(&table, &args.output, &config, stdout)
}

/// Merge flags, config file and defaults into an experiment.
pub fn experiment_config(args: &SimulateArgs, config: &RunConfig) -> CliResult<ExperimentConfig> {
    let defaults = ExperimentConfig::default();
    let r = args.r.or(config.single_r()?).unwrap_or(defaults.noise.r());
    let size = match args.n_qubits {
        Some(s) => s,
        None => match config.sizes()? {
            Some(v) if v.len() == 1 => v[0],
            Some(_) => return Err(CliError::Usage("config: simulate takes a single n_qubits".into())),
            None => defaults.size,
        },
    };
    let experiment = ExperimentConfig {
        targets: args.targets.clone().or(config.targets.clone()).unwrap_or_else(|| DEFAULT_TARGETS.to_vec()),
        noise: noise(r)?,
        size,
        base: args.base.or(config.base).unwrap_or(defaults.base),
        rounds: args.rounds.or(config.rounds).unwrap_or(defaults.rounds),
        shots: args.shots.or(config.shots).unwrap_or(defaults.shots),
        repetitions: args.reps.or(config.reps).unwrap_or(defaults.repetitions),
        master_seed: args.seed.or(config.seed).unwrap_or(defaults.master_seed),
        methods: args.methods.or(config.methods).unwrap_or(MethodChoice::Both).methods(),
    };
    experiment.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(experiment)
}

pub fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let config = load_config(&args.output)?;
    let experiment = experiment_config(args, &config)?;
    let start = Instant::now();
    let table = run_experiment(&experiment)?;
    let elapsed = start.elapsed().as_secs_f64();
    let _ = writeln!(stderr, "simulate: {} rows in {elapsed:.2} s", table.rows.len());

    let rows = table
        .rows
        .iter()
        .map(|row| {
            vec![
                json!(row.method.label()),
                json!(row.a),
                json!(row.k),
                json!(row.n_q_tot),
                json!(row.rmse),
                json!(row.crb_classical),
                json!(row.crb_quantum),
                json!(row.crb_noiseless),
                json!(row.crb_no_amplification),
            ]
        })
        .collect();
    let mut metadata = BTreeMap::new();
    metadata.insert("command".into(), json!("simulate"));
    metadata.insert("r".into(), json!(experiment.noise.r()));
    metadata.insert("n_qubits".into(), json!(size_label(experiment.size)));
    metadata.insert("targets".into(), json!(experiment.targets));
    metadata.insert("base".into(), json!(experiment.base));
    metadata.insert("rounds".into(), json!(experiment.rounds));
    metadata.insert("shots".into(), json!(experiment.shots));
    metadata.insert("reps".into(), json!(experiment.repetitions));
    metadata.insert("seed".into(), json!(experiment.master_seed));
    metadata.insert("methods".into(), json!(experiment.methods.iter().map(|m| m.label()).collect::<Vec<_>>()));
    if args.wall_time {
        metadata.insert("wall_time_s".into(), json!(elapsed));
    }
    let table = Table {
        metadata,
        columns: vec![
            "method",
            "a",
            "k",
            "n_q_tot",
            "rmse",
            "crb_classical",
            "crb_quantum",
            "crb_noiseless",
            "crb_no_amplification",
        ],
        rows,
    };
    emit(&table, &args.output, &config, stdout)
}

pub fn verification_config(args: &VerifyArgs, config: &RunConfig) -> CliResult<VerificationConfig> {
    let defaults = VerificationConfig::default();
    let max_n = match args.n_qubits {
        Some(n) => n,
        None => match &config.n_qubits {
            Some(OneOrMany::One(SizeValue::Width(n))) => *n,
            Some(_) => return Err(CliError::Usage("config: oracle-verify takes a single integer n_qubits".into())),
            None => defaults.max_n,
        },
    };
    if max_n == 0 || max_n > MAX_DATA_QUBITS {
        return Err(CliError::Usage(format!("oracle-verify supports 1..={MAX_DATA_QUBITS} data qubits, got {max_n}")));
    }
    let r_values = match &args.r {
        Some(v) => v.clone(),
        None => config.r.clone().map(OneOrMany::into_vec).unwrap_or(defaults.r_values),
    };
    for &r in &r_values {
        noise(r)?;
    }
    Ok(VerificationConfig {
        max_n,
        max_m: args.max_m.or(config.max_m).unwrap_or(defaults.max_m),
        r_values,
        seeds: args.seeds.or(config.seeds).unwrap_or(defaults.seeds),
        methods: args.methods.or(config.methods).unwrap_or(MethodChoice::Both).methods(),
        master_seed: args.seed.or(config.seed).unwrap_or(defaults.master_seed),
        fault: args.inject_fault.then_some(FAULT_DELTA),
    })
}

fn opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, |x| json!(x))
}

pub fn cmd_oracle_verify(args: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let config = load_config(&args.output)?;
    let verification = verification_config(args, &config)?;
    let report = run_verification(&verification)?;
    let rows = report
        .cases
        .iter()
        .map(|c| {
            vec![
                json!(c.method.label()),
                json!(c.n),
                json!(c.m),
                json!(c.r),
                json!(c.seed),
                json!(c.theta),
                json!(c.prob_dev),
                json!(c.qfi_rel_dev),
                json!(c.bound_ratio),
                json!(c.bound_rel_dev),
                opt(c.classical_rel_dev),
                opt(c.rotation_dev),
                json!(c.passed()),
            ]
        })
        .collect();
    let failures = report.failures();
    let total = report.cases.len();
    let mut metadata = BTreeMap::new();
    metadata.insert("command".into(), json!("oracle-verify"));
    metadata.insert("max_n".into(), json!(verification.max_n));
    metadata.insert("max_m".into(), json!(verification.max_m));
    metadata.insert("r_values".into(), json!(verification.r_values));
    metadata.insert("seeds".into(), json!(verification.seeds));
    metadata.insert("seed".into(), json!(verification.master_seed));
    metadata.insert("fault_injected".into(), json!(verification.fault.is_some()));
    metadata.insert("cases".into(), json!(total));
    metadata.insert("failures".into(), json!(failures));
    metadata.insert("max_prob_dev".into(), json!(report.max_prob_dev()));
    metadata.insert("max_qfi_rel_dev".into(), json!(report.max_qfi_rel_dev()));
    let table = Table {
        metadata,
        columns: vec![
            "method",
            "n",
            "m",
            "r",
            "seed",
            "theta",
            "prob_dev",
            "qfi_rel_dev",
            "bound_ratio",
            "bound_rel_dev",
            "classical_rel_dev",
            "rotation_dev",
            "passed",
        ],
        rows,
    };
    emit(&table, &args.output, &config, stdout)?;
    let _ = writeln!(stderr, "oracle-verify: {} of {total} cases passed", total - failures);
    if failures > 0 {
        return Err(CliError::VerificationFailed(failures, total));
    }
    Ok(())
}

pub fn cmd_breakeven(eps: f64, stdout: &mut dyn Write) -> CliResult<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(CliError::Usage(format!("readout error must lie in (0, 1), got {eps}")));
    }
    let n = breakeven_qubits(eps).map_err(|e| CliError::Usage(e.to_string()))?;
    writeln!(stdout, "{n}").map_err(|source| CliError::Io { path: "<stdout>".into(), source })
}
