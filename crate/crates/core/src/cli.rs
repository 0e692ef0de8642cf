//! The `rf-spectral` command line: operator application, matrix builds,
//! `(L, N)` error sweeps, Fisher runs and quadrature comparisons. Every
//! command writes plain CSV/JSON files plus a `manifest.json`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::closedform::{ClosedFormFunction, OperatorKind};
use crate::error::Error;
use crate::evolve::{
    fit_exponential, rk4_evolve, EvolutionConfig, FisherProblem, RunLimits, RunSummary,
};
use crate::operators::{l_range, sweep_errors, AuxDecomposition, SpectralOperator};
use crate::opmatrix::{MatrixBuilder, OperatorMatrix, DEFAULT_L_LIM};
use crate::oracle::{quad_operator, QuadratureConfig};

/// Exit code for bad flags or flag combinations.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for numerical or I/O failures.
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "rf-spectral",
    version,
    about = "Fractional operators on the real line by a Higgins-basis pseudospectral method"
)]
pub struct Cli {
    /// Worker threads for matrix builds and sweeps.
    #[arg(long, global = true, env = "RF_SPECTRAL_JOBS")]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply an operator to a test function and compare with its closed form.
    Apply(ApplyArgs),
    /// Build an operator matrix and save it.
    Matrix(MatrixArgs),
    /// Error grid over map scales L and sizes N.
    Sweep(SweepArgs),
    /// Evolve the fractional Fisher equation and fit the front speed.
    Evolve(EvolveArgs),
    /// Spectral values next to adaptive quadrature and closed forms.
    Oracle(OracleArgs),
}

#[derive(Debug, Args, Clone)]
pub struct OpArgs {
    /// Operator: dr, dl, dxr, dxl, rf or fl.
    #[arg(long)]
    pub op: String,
    #[arg(long)]
    pub alpha: f64,
    /// Skewness, used by rf only.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub gamma: f64,
}

impl OpArgs {
    fn kind(&self) -> Result<OperatorKind, CliError> {
        if self.op != "rf" && self.gamma != 0.0 {
            return Err(CliError::Usage(format!(
                "--gamma only applies to --op rf, not {}",
                self.op
            )));
        }
        let kind = OperatorKind::from_code(&self.op, self.gamma).map_err(usage)?;
        kind.validate(self.alpha).map_err(usage)?;
        Ok(kind)
    }
}

#[derive(Debug, Args, Clone)]
pub struct GridArgs {
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long = "L")]
    pub l_scale: f64,
    /// Truncation of the aliasing sum.
    #[arg(long, default_value_t = DEFAULT_L_LIM)]
    pub llim: usize,
    /// Load this matrix instead of building one.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    #[command(flatten)]
    pub op: OpArgs,
    /// Test function: erf, arctan or log1psq.
    #[arg(long)]
    pub func: String,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Output directory.
    #[arg(long, default_value = "rf-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    #[command(flatten)]
    pub op: OpArgs,
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long = "L", default_value_t = 1.0)]
    pub l_scale: f64,
    #[arg(long, default_value_t = DEFAULT_L_LIM)]
    pub llim: usize,
    /// Keep the base fractional Laplacian matrix (L = 1) instead of scaling it.
    #[arg(long)]
    pub base: bool,
    /// Matrix file to write.
    #[arg(long)]
    pub save: PathBuf,
    #[arg(long, default_value = "rf-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub op: OpArgs,
    #[arg(long)]
    pub func: String,
    /// Comma-separated sizes, e.g. 8,16,32.
    #[arg(long = "N-list", value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    /// Inclusive range start:stop:step, e.g. 0.5:5:0.5.
    #[arg(long = "L-range")]
    pub l_range: String,
    #[arg(long, default_value_t = DEFAULT_L_LIM)]
    pub llim: usize,
    #[arg(long, default_value = "rf-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long, default_value_t = 1.37)]
    pub alpha: f64,
    #[arg(long, default_value_t = -0.63, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long = "N", default_value_t = 2048)]
    pub n: usize,
    #[arg(long = "L", default_value_t = 300.0)]
    pub l_scale: f64,
    #[arg(long, default_value_t = DEFAULT_L_LIM)]
    pub llim: usize,
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
    #[arg(long = "t-end", default_value_t = 12.0)]
    pub t_end: f64,
    /// Fit window t0:t1.
    #[arg(long, default_value = "8:11.5")]
    pub window: String,
    /// Steps between snapshots.
    #[arg(long, default_value_t = 10)]
    pub stride: usize,
    /// Skip the per-snapshot CSV files.
    #[arg(long)]
    pub no_snapshots: bool,
    /// Use N = 16384, L = 2100, t up to 22 and window 15:21.
    #[arg(long)]
    pub full: bool,
    /// Wall-time budget in seconds.
    #[arg(long)]
    pub budget: Option<f64>,
    /// Prebuilt matrix (base or scaled to the run).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long, default_value = "rf-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub op: OpArgs,
    #[arg(long)]
    pub func: String,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Number of interior nodes to compare.
    #[arg(long, default_value_t = 5)]
    pub nodes: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value = "rf-out")]
    pub out: PathBuf,
}

/// Failure of a command, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_FAILURE,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numeric(Error::Io(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Numeric(Error::Format(e.to_string()))
    }
}

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

/// Record of one command run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub outputs: Vec<PathBuf>,
    pub wall_time: f64,
}

struct Recorder {
    command: &'static str,
    out: PathBuf,
    parameters: BTreeMap<String, serde_json::Value>,
    outputs: Vec<PathBuf>,
    start: Instant,
}

impl Recorder {
    fn new(command: &'static str, out: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(out)?;
        Ok(Recorder {
            command,
            out: out.to_path_buf(),
            parameters: BTreeMap::new(),
            outputs: Vec::new(),
            start: Instant::now(),
        })
    }

    fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.parameters.insert(key.to_string(), v);
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(name);
        self.outputs.push(p.clone());
        p
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        Ok(BufWriter::new(File::create(self.path(name))?))
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        std::io::Write::write_all(&mut w, b"\n")?;
        Ok(())
    }

    fn finish(mut self) -> Result<RunManifest, CliError> {
        let path = self.out.join("manifest.json");
        let manifest = RunManifest {
            command: self.command.to_string(),
            parameters: std::mem::take(&mut self.parameters),
            outputs: std::mem::take(&mut self.outputs),
            wall_time: self.start.elapsed().as_secs_f64(),
        };
        let mut w = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut w, &manifest)?;
        std::io::Write::write_all(&mut w, b"\n")?;
        Ok(manifest)
    }
}

fn parse_func(s: &str) -> Result<ClosedFormFunction, CliError> {
    s.parse().map_err(usage)
}

/// Splits off an arctan multiple when the function has distinct finite limits.
fn default_decomposition(f: ClosedFormFunction) -> Option<AuxDecomposition> {
    match f {
        ClosedFormFunction::Erf => Some(AuxDecomposition::erf_arctan()),
        other => other
            .limits()
            .filter(|(lo, hi)| lo != hi)
            .map(|(lo, hi)| AuxDecomposition::arctan_for_limits(lo, hi)),
    }
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b] => match (a.trim().parse(), b.trim().parse()) {
            (Ok(a), Ok(b)) if a < b => Ok((a, b)),
            _ => Err(CliError::Usage(format!(
                "bad {what} {s:?}, expected t0:t1 with t0 < t1"
            ))),
        },
        _ => Err(CliError::Usage(format!("bad {what} {s:?}, expected t0:t1"))),
    }
}

fn parse_l_range(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("bad --L-range {s:?}, expected start:stop:step")))?;
    match parts.as_slice() {
        [a, b, c] => l_range(*a, *b, *c).map_err(usage),
        _ => Err(CliError::Usage(format!(
            "bad --L-range {s:?}, expected start:stop:step"
        ))),
    }
}

fn check_grid(n: usize, l: f64) -> Result<(), CliError> {
    if n < 2 || !(l > 0.0 && l.is_finite()) {
        return Err(CliError::Usage(format!(
            "need N >= 2 and L > 0, got N = {n}, L = {l}"
        )));
    }
    Ok(())
}

/// Loads or builds the scaled operator for `kind` on `(N, L)`.
fn operator(kind: OperatorKind, alpha: f64, g: &GridArgs) -> Result<SpectralOperator, CliError> {
    check_grid(g.n, g.l_scale)?;
    let m = match &g.matrix {
        None => return Ok(SpectralOperator::new(kind, alpha, g.n, g.l_scale, g.llim)?),
        Some(p) => OperatorMatrix::load(p)?,
    };
    SpectralOperator::from_matrix(fit_matrix(m, kind, alpha, g.n, g.l_scale)?).map_err(Into::into)
}

fn fit_matrix(
    m: OperatorMatrix,
    kind: OperatorKind,
    alpha: f64,
    n: usize,
    l: f64,
) -> Result<OperatorMatrix, CliError> {
    if m.alpha != alpha || m.n != n {
        return Err(CliError::Usage(format!(
            "matrix file has alpha = {}, N = {} but the flags ask for alpha = {alpha}, N = {n}",
            m.alpha, m.n
        )));
    }
    if !m.scaled {
        return Ok(m.scale_to_operator(kind, l)?);
    }
    if m.kind != kind || m.l_scale != l {
        return Err(CliError::Usage(format!(
            "matrix file holds {} on L = {}, not {kind} on L = {l}",
            m.kind, m.l_scale
        )));
    }
    Ok(m)
}

#[derive(Serialize)]
struct ApplySummary {
    op: &'static str,
    alpha: f64,
    gamma: f64,
    func: &'static str,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "L")]
    l_scale: f64,
    llim: usize,
    aux: Option<String>,
    linf_error: Option<f64>,
    max_imag: f64,
}

fn cmd_apply(a: &ApplyArgs) -> Result<RunManifest, CliError> {
    let kind = a.op.kind()?;
    let func = parse_func(&a.func)?;
    let mut rec = Recorder::new("apply", &a.out)?;
    let op = operator(kind, a.op.alpha, &a.grid)?;
    let decomp = default_decomposition(func);
    let report = op.apply_with_aux(&func, decomp.as_ref())?;
    report.write_csv(rec.create("apply.csv")?)?;
    let summary = ApplySummary {
        op: kind.code(),
        alpha: a.op.alpha,
        gamma: kind.gamma(),
        func: func.code(),
        n: a.grid.n,
        l_scale: a.grid.l_scale,
        llim: op.matrix.l_lim,
        aux: decomp.map(|d| d.description),
        linf_error: report.linf_error,
        max_imag: report.max_imag(),
    };
    rec.json("apply.json", &summary)?;
    rec.param("summary", &summary);
    println!(
        "{} {} alpha={} N={} L={}: linf_error = {:.4e}",
        kind,
        func,
        a.op.alpha,
        a.grid.n,
        a.grid.l_scale,
        report.linf_error.unwrap_or(f64::NAN)
    );
    rec.finish()
}

fn cmd_matrix(a: &MatrixArgs) -> Result<RunManifest, CliError> {
    let kind = a.op.kind()?;
    check_grid(a.n, a.l_scale)?;
    let mut rec = Recorder::new("matrix", &a.out)?;
    let base = MatrixBuilder::new(a.op.alpha, a.n).l_lim(a.llim).build()?;
    let m = if a.base {
        base
    } else {
        base.scale_to_operator(kind, a.l_scale)?
    };
    m.save(&a.save)?;
    rec.outputs.push(a.save.clone());
    for (k, v) in [
        ("op", serde_json::json!(m.kind.code())),
        ("alpha", serde_json::json!(m.alpha)),
        ("gamma", serde_json::json!(m.gamma())),
        ("N", serde_json::json!(m.n)),
        ("L", serde_json::json!(m.l_scale)),
        ("llim", serde_json::json!(m.l_lim)),
        ("scaled", serde_json::json!(m.scaled)),
        ("bytes", serde_json::json!(m.serialized_len())),
    ] {
        rec.param(k, v);
    }
    println!("saved {} ({} bytes)", a.save.display(), m.serialized_len());
    rec.finish()
}

fn cmd_sweep(a: &SweepArgs) -> Result<RunManifest, CliError> {
    let kind = a.op.kind()?;
    let func = parse_func(&a.func)?;
    let ls = parse_l_range(&a.l_range)?;
    if a.n_list.iter().any(|n| *n < 2) {
        return Err(CliError::Usage(
            "every N in --N-list must be at least 2".into(),
        ));
    }
    let mut rec = Recorder::new("sweep", &a.out)?;
    let decomp = default_decomposition(func);
    let grid = sweep_errors(
        &func,
        decomp.as_ref(),
        kind,
        a.op.alpha,
        &a.n_list,
        &ls,
        a.llim,
    )?;
    grid.write_csv(rec.create("sweep.csv")?)?;
    rec.param("op", kind.code());
    rec.param("alpha", a.op.alpha);
    rec.param("gamma", kind.gamma());
    rec.param("func", func.code());
    rec.param("N_list", &a.n_list);
    rec.param("L_list", &ls);
    rec.param("llim", a.llim);
    for n in &a.n_list {
        if let Some((l, e)) = grid.best_for_n(*n) {
            println!("N = {n:6}: best L = {l:<6} error = {e:.4e}");
        }
    }
    rec.finish()
}

fn cmd_evolve(a: &EvolveArgs) -> Result<RunManifest, CliError> {
    let (cfg, window) = if a.full {
        (
            EvolutionConfig {
                l_lim: a.llim,
                dt: a.dt,
                snapshot_stride: a.stride,
                ..EvolutionConfig::full()
            },
            (15.0, 21.0),
        )
    } else {
        let cfg = EvolutionConfig {
            alpha: a.alpha,
            gamma: a.gamma,
            n: a.n,
            l_scale: a.l_scale,
            l_lim: a.llim,
            dt: a.dt,
            t_end: a.t_end,
            snapshot_stride: a.stride,
        };
        (cfg, parse_pair(&a.window, "--window")?)
    };
    cfg.validate().map_err(usage)?;
    let deadline = match a.budget {
        Some(b) if b > 0.0 && b.is_finite() => Some(Instant::now() + Duration::from_secs_f64(b)),
        Some(b) => {
            return Err(CliError::Usage(format!(
                "--budget must be positive, got {b}"
            )))
        }
        None => None,
    };
    let mut rec = Recorder::new("evolve", &a.out)?;
    let problem = match &a.matrix {
        None => FisherProblem::new(cfg)?,
        Some(p) => {
            let m = fit_matrix(
                OperatorMatrix::load(p)?,
                cfg.kind(),
                cfg.alpha,
                cfg.n,
                cfg.l_scale,
            )?;
            FisherProblem::from_matrix(cfg, m)?
        }
    };
    let xs = problem.x_nodes().to_vec();
    let mut snapshot_files = Vec::new();
    let run = rk4_evolve(
        &problem,
        problem.initial_state(),
        RunLimits {
            deadline,
            level: None,
        },
        |snap| {
            if !a.no_snapshots {
                let p = a.out.join(format!("snapshot_{:06}.csv", snap.step));
                snap.write_csv(&xs, BufWriter::new(File::create(&p)?))?;
                snapshot_files.push(p);
            }
            Ok(())
        },
    )?;
    rec.outputs.extend(snapshot_files);
    run.trace.write_csv(rec.create("front.csv")?)?;
    let fit = fit_exponential(&run.trace, window)?;
    let summary = RunSummary::new(&cfg, window, &fit, run.trace);
    rec.json("summary.json", &summary)?;
    rec.param("config", cfg);
    rec.param("window", window);
    println!(
        "slope = {:.6} (1/alpha = {:.6}), 1 - rho = {:.3e}, {} samples",
        fit.slope,
        1.0 / cfg.alpha,
        1.0 - fit.pearson_rho,
        fit.samples
    );
    rec.finish()
}

fn cmd_oracle(a: &OracleArgs) -> Result<RunManifest, CliError> {
    let kind = a.op.kind()?;
    let func = parse_func(&a.func)?;
    if a.nodes == 0 || a.nodes >= a.grid.n {
        return Err(CliError::Usage(format!(
            "--nodes must lie in 1..{}",
            a.grid.n
        )));
    }
    if !(a.tol > 0.0) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    let mut rec = Recorder::new("oracle", &a.out)?;
    let op = operator(kind, a.op.alpha, &a.grid)?;
    let report = op.apply_with_aux(&func, default_decomposition(func).as_ref())?;
    let cfg = QuadratureConfig {
        abs_tol: a.tol,
        rel_tol: a.tol,
        ..QuadratureConfig::default()
    };
    let mut w = rec.create("oracle.csv")?;
    std::io::Write::write_all(
        &mut w,
        b"x,spectral,quadrature,closed_form,spectral_minus_quadrature\n",
    )?;
    let mut worst: f64 = 0.0;
    for i in 1..=a.nodes {
        let j = i * a.grid.n / (a.nodes + 1);
        let x = report.grid.x_nodes[j];
        let s = report.approx[j].re;
        let q = quad_operator(kind, a.op.alpha, &func, x, &cfg)?;
        let c = report.exact.as_ref().map(|e| e[j]);
        worst = worst.max((s - q).abs());
        let c_txt = c.map(|v| format!("{v:.16e}")).unwrap_or_default();
        std::io::Write::write_all(
            &mut w,
            format!("{x:.16e},{s:.16e},{q:.16e},{c_txt},{:.16e}\n", s - q).as_bytes(),
        )?;
    }
    rec.param("op", kind.code());
    rec.param("alpha", a.op.alpha);
    rec.param("gamma", kind.gamma());
    rec.param("func", func.code());
    rec.param("N", a.grid.n);
    rec.param("L", a.grid.l_scale);
    rec.param("max_abs_diff", worst);
    println!("max |spectral - quadrature| = {worst:.3e}");
    rec.finish()
}

/// Runs a parsed command.
pub fn run(cli: &Cli) -> Result<RunManifest, CliError> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }
        // Ignored if a pool already exists, as in repeated in-process calls.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global();
    }
    match &cli.command {
        Command::Apply(a) => cmd_apply(a),
        Command::Matrix(a) => cmd_matrix(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Evolve(a) => cmd_evolve(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run(&cli) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("rf-spectral: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("rf-spectral").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn skewness_violation_is_usage() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let cli = parse(&[
            "apply", "--op", "rf", "--alpha", "0.5", "--gamma", "0.9", "--func", "erf", "--N",
            "16", "--L", "1", "--out", out,
        ]);
        let e = run(&cli).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_USAGE);
    }

    #[test]
    fn parse_errors_exit_two() {
        assert_eq!(
            main_with(["rf-spectral", "apply", "--op", "rf"]),
            EXIT_USAGE
        );
        assert_eq!(main_with(["rf-spectral", "frobnicate"]), EXIT_USAGE);
    }

    #[test]
    fn gamma_on_weyl_is_usage() {
        let a = OpArgs {
            op: "dr".into(),
            alpha: 0.5,
            gamma: 0.1,
        };
        assert!(matches!(a.kind(), Err(CliError::Usage(_))));
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_l_range("0.5:5:0.5").unwrap().len(), 10);
        assert!(parse_l_range("1:2").is_err());
        assert_eq!(parse_pair("8:11.5", "w").unwrap(), (8.0, 11.5));
        assert!(parse_pair("3:1", "w").is_err());
    }

    #[test]
    fn apply_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let cli = parse(&[
            "apply", "--op", "fl", "--alpha", "0.62", "--func", "erf", "--N", "32", "--L", "1.1",
            "--llim", "30", "--out", out,
        ]);
        let m = run(&cli).unwrap();
        assert!(m.outputs.iter().all(|p| p.exists()));
        assert!(dir.path().join("manifest.json").exists());
        let s: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("apply.json")).unwrap())
                .unwrap();
        assert!(s["linf_error"].as_f64().unwrap() < 1e-3);
    }

    #[test]
    fn matrix_mismatch_is_usage() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("m.rfm");
        let out = dir.path().to_str().unwrap();
        run(&parse(&[
            "matrix",
            "--op",
            "fl",
            "--alpha",
            "0.62",
            "--N",
            "16",
            "--llim",
            "5",
            "--base",
            "--save",
            f.to_str().unwrap(),
            "--out",
            out,
        ]))
        .unwrap();
        let cli = parse(&[
            "apply",
            "--op",
            "fl",
            "--alpha",
            "0.7",
            "--func",
            "erf",
            "--N",
            "16",
            "--L",
            "1",
            "--matrix",
            f.to_str().unwrap(),
            "--out",
            out,
        ]);
        assert_eq!(run(&cli).unwrap_err().exit_code(), EXIT_USAGE);
    }
}
