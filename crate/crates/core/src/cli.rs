//! `dirac` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 no such state,
//! 4 numerical failure, 5 sweep aborted, 6 a check failed, 7 precondition
//! failed.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::harness::{self, CheckKind, GridScale, HarnessConfig, SweepRecord, Verdict, VerdictStatus};
use crate::oracle::{self, CoulombLevel};
use crate::potentials::{FamilySnapshot, PotentialFamily};
use crate::solver::{self, BoundState, ChannelSpec, Parity, SolveConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NO_STATE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;
pub const EXIT_SWEEP_ABORTED: i32 = 5;
pub const EXIT_CHECK_FAILED: i32 = 6;
pub const EXIT_PRECONDITION: i32 = 7;

/// Exit code for a library error.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Domain(_) | Error::Config(_) | Error::UnsupportedRegime(_) => EXIT_CONFIG,
        Error::NoBoundState(_) | Error::NoSuchState { .. } => EXIT_NO_STATE,
        Error::Integrator { .. } | Error::LevelCrossing { .. } | Error::Contract(_) => EXIT_NUMERICAL,
        Error::Precondition(_) => EXIT_PRECONDITION,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dirac",
    version,
    about = "Radial Dirac bound states and eigenvalue monotonicity checks",
    args_override_self = true
)]
pub struct Cli {
    /// Flat key=value file of defaults; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one state and print its energy and diagnostics.
    #[command(allow_negative_numbers = true)]
    Solve(SolveArgs),
    /// Sweep the active parameter and tabulate E, dE/da and residuals.
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Sweep and judge the monotonicity and identity checks.
    #[command(allow_negative_numbers = true)]
    Verify(VerifyArgs),
    /// Order the eigenvalues of two pointwise-ordered potentials.
    #[command(allow_negative_numbers = true)]
    Compare(CompareArgs),
    /// Closed-form Coulomb levels and their derivative in alpha.
    #[command(allow_negative_numbers = true)]
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    Even,
    Odd,
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    /// pure-coulomb, cutoff-coulomb, coupling or tilted-exp
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Shape of the coupling family: exp, inverse or yukawa
    #[arg(long)]
    pub shape: Option<String>,
    /// Parameter to treat as a
    #[arg(long)]
    pub active: Option<String>,
}

impl FamilyArgs {
    pub fn build(&self) -> Result<PotentialFamily, Error> {
        let numbers: Vec<(&str, String)> = [("alpha", self.alpha), ("a", self.a), ("b", self.b), ("c", self.c)]
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k, v.to_string())))
            .collect();
        let mut pairs: Vec<(&str, &str)> = numbers.iter().map(|(k, v)| (*k, v.as_str())).collect();
        if let Some(shape) = &self.shape {
            pairs.push(("shape", shape));
        }
        if let Some(active) = &self.active {
            pairs.push(("active", active));
        }
        PotentialFamily::from_pairs(&self.family, pairs)
    }
}

#[derive(Debug, Clone, Args)]
pub struct ChannelArgs {
    #[arg(long, default_value_t = 3)]
    pub d: u32,
    #[arg(long)]
    pub tau: Option<i8>,
    #[arg(long)]
    pub j: Option<f64>,
    /// Parity sector, d = 1 only
    #[arg(long, value_enum)]
    pub parity: Option<ParityArg>,
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
    /// Number of nodes of the upper component
    #[arg(long, default_value_t = 0)]
    pub nr: usize,
}

impl ChannelArgs {
    pub fn build(&self) -> Result<ChannelSpec, Error> {
        let parity = self.parity.map(|p| match p {
            ParityArg::Even => Parity::Even,
            ParityArg::Odd => Parity::Odd,
        });
        ChannelSpec::new(self.d, self.tau, self.j, parity, self.mass)
    }
}

#[derive(Debug, Clone, Args)]
pub struct NumericArgs {
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub n_grid: Option<usize>,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub e_tol: Option<f64>,
    #[arg(long)]
    pub ode_rel_tol: Option<f64>,
    #[arg(long)]
    pub ode_abs_tol: Option<f64>,
    #[arg(long)]
    pub scan_points: Option<usize>,
    #[arg(long)]
    pub r_match: Option<f64>,
    #[arg(long)]
    pub r_match_scale: Option<f64>,
}

impl NumericArgs {
    pub fn build(&self) -> Result<SolveConfig, Error> {
        let mut c = SolveConfig::default();
        c.r_max = self.r_max.or(c.r_max);
        c.r0 = self.r0.or(c.r0);
        c.r_match = self.r_match.or(c.r_match);
        if let Some(v) = self.n_grid {
            c.n_grid = v;
        }
        if let Some(v) = self.e_tol {
            c.e_tol = v;
        }
        if let Some(v) = self.ode_rel_tol {
            c.ode_rel_tol = v;
        }
        if let Some(v) = self.ode_abs_tol {
            c.ode_abs_tol = v;
        }
        if let Some(v) = self.scan_points {
            c.scan_points = v;
        }
        if let Some(v) = self.r_match_scale {
            c.r_match_scale = v;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write the table or state here instead of stdout
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub numeric: NumericArgs,
    /// Dump the wavefunction (csv: r,psi1,psi2) or the whole state (json)
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    /// Number of parameter values, endpoints included
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = ScaleArg::Linear)]
    pub scale: ScaleArg,
}

impl GridArgs {
    pub fn build(&self) -> Result<Vec<f64>, Error> {
        let scale = match self.scale {
            ScaleArg::Linear => GridScale::Linear,
            ScaleArg::Log => GridScale::Log,
        };
        harness::parameter_grid(self.from, self.to, self.steps, scale)
    }
}

#[derive(Debug, Clone, Args)]
pub struct ToleranceArgs {
    /// Finite-difference step in the active parameter
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub hf_rel_tol: Option<f64>,
    #[arg(long)]
    pub hf_abs_tol: Option<f64>,
    #[arg(long)]
    pub orth_tol: Option<f64>,
    #[arg(long)]
    pub w_tol: Option<f64>,
    #[arg(long)]
    pub sign_tol: Option<f64>,
    /// Sets the hf, orth and w tolerances at once; specific flags win
    #[arg(long)]
    pub tol: Option<f64>,
}

impl ToleranceArgs {
    pub fn build(&self, solve: SolveConfig) -> Result<HarnessConfig, Error> {
        let mut c = HarnessConfig {
            solve,
            step: self.step,
            ..HarnessConfig::default()
        };
        if let Some(t) = self.tol {
            c.hf_rel_tol = t;
            c.hf_abs_tol = t;
            c.orth_tol = t;
            c.w_tol = t;
        }
        c.hf_rel_tol = self.hf_rel_tol.unwrap_or(c.hf_rel_tol);
        c.hf_abs_tol = self.hf_abs_tol.unwrap_or(c.hf_abs_tol);
        c.orth_tol = self.orth_tol.unwrap_or(c.orth_tol);
        c.w_tol = self.w_tol.unwrap_or(c.w_tol);
        c.sign_tol = self.sign_tol.unwrap_or(c.sign_tol);
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[command(flatten)]
    pub tolerance: ToleranceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Comma-separated subset of hf, orth, w, monotone
    #[arg(long, value_delimiter = ',', default_value = "hf,orth,w,monotone")]
    pub checks: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Lower potential, e.g. "cutoff-coulomb alpha=1 a=0.5"
    #[arg(long)]
    pub v1: String,
    /// Upper potential
    #[arg(long)]
    pub v2: String,
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[command(flatten)]
    pub tolerance: ToleranceArgs,
    /// Write the comparison as JSON
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Principal quantum numbers, comma-separated
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<u32>,
    /// Total angular momenta, comma-separated
    #[arg(long, value_delimiter = ',', required = true)]
    pub j: Vec<f64>,
    /// Coupling strengths, comma-separated
    #[arg(long, value_delimiter = ',', required = true)]
    pub alpha: Vec<f64>,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

/// Sweep output in JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub family: FamilySnapshot,
    pub channel: ChannelSpec,
    pub n_r: usize,
    pub records: Vec<SweepRecord>,
    /// Set when the sweep stopped early; `records` holds the finished points.
    pub aborted: Option<String>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(SweepRecord::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        if let Some(reason) = &self.aborted {
            let _ = writeln!(out, "# ABORTED: {}", reason.replace('\n', " "));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub sweep: SweepTable,
    pub verdict: Verdict,
}

/// Failure carrying an exit code and a message for stderr.
#[derive(Debug)]
pub struct Exit {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        Exit {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

impl Exit {
    fn config(message: impl Into<String>) -> Self {
        Exit {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Exit {
    Exit {
        code: EXIT_CONFIG,
        message: format!("cannot write {}: {e}", path.display()),
    }
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Exit> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_error(p, e)),
        None => out.write_all(text.as_bytes()).map_err(|e| Exit {
            code: EXIT_CONFIG,
            message: format!("cannot write output: {e}"),
        }),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    s
}

fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Reads `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>, Error> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("config line {}: expected key=value, got '{line}'", i + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        let value = v.trim().trim_matches('"').to_string();
        if key.is_empty() {
            return Err(Error::config(format!("config line {}: empty key", i + 1)));
        }
        entries.push((key, value));
    }
    Ok(entries)
}

/// Splices config-file entries in front of the subcommand's own flags so
/// that flags given on the command line override them.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, Exit> {
    let strings: Vec<Option<&str>> = args.iter().map(|a| a.to_str()).collect();
    let mut config_path: Option<String> = None;
    for (i, a) in strings.iter().enumerate() {
        match a {
            Some("--config") => config_path = strings.get(i + 1).copied().flatten().map(str::to_string),
            Some(s) if s.starts_with("--config=") => config_path = Some(s["--config=".len()..].to_string()),
            _ => {}
        }
    }
    let Some(path) = config_path else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| Exit::config(format!("cannot read config file {path}: {e}")))?;
    let entries = parse_config_file(&text)?;

    let command = Cli::command();
    let names: Vec<String> = command.get_subcommands().map(|c| c.get_name().to_string()).collect();
    let Some(pos) = strings
        .iter()
        .position(|a| a.is_some_and(|s| names.iter().any(|n| n == s)))
    else {
        return Ok(args);
    };
    let sub_name = strings[pos].unwrap();
    let sub = command.find_subcommand(sub_name).expect("listed above");
    let accepted: HashSet<String> = sub
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect();
    let known: HashSet<String> = command
        .get_subcommands()
        .flat_map(|c| {
            c.get_arguments()
                .filter_map(|a| a.get_long().map(str::to_string))
                .collect::<Vec<_>>()
        })
        .collect();

    let mut injected = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            return Err(Exit::config("config files cannot include other config files"));
        }
        if accepted.contains(&key) {
            injected.push(OsString::from(format!("--{key}")));
            injected.push(OsString::from(value));
        } else if !known.contains(&key) {
            return Err(Exit::config(format!("unknown config key '{key}' in {path}")));
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Results go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let result = expand_config(args).and_then(|args| match Cli::try_parse_from(args) {
        Ok(cli) => dispatch(cli.command, out),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            Err(Exit {
                code,
                message: e.render().to_string(),
            })
        }
    });
    match result {
        Ok(code) => code,
        Err(exit) => {
            // --help and --version land here with code 0
            let sink: &mut dyn Write = if exit.code == EXIT_OK { out } else { err };
            let _ = write!(sink, "{}", exit.message);
            if !exit.message.ends_with('\n') {
                let _ = writeln!(sink);
            }
            exit.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Exit> {
    match command {
        Command::Solve(a) => cmd_solve(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Compare(a) => cmd_compare(&a, out),
        Command::Oracle(a) => cmd_oracle(&a, out),
    }
}

fn state_summary(state: &BoundState) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "family = {}", state.family.description);
    let _ = writeln!(s, "channel = {}", state.channel);
    let _ = writeln!(s, "E = {}", f17(state.energy));
    let _ = writeln!(s, "nodes = {}", state.nodes);
    let _ = writeln!(s, "psi2_nodes = {}", state.psi2_nodes);
    let _ = writeln!(s, "norm_residual = {}", f17(state.norm_residual));
    let _ = writeln!(s, "match_residual = {}", f17(state.match_residual));
    let _ = writeln!(s, "antisymmetry_residual = {}", f17(state.antisymmetry_residual()));
    let _ = writeln!(s, "r_match = {}", f17(state.r_match));
    s
}

pub fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<i32, Exit> {
    let family = args.family.build()?;
    let channel = args.channel.build()?;
    let config = args.numeric.build()?;
    let state = solver::solve(&channel, &family, args.channel.nr, &config)?;
    emit(None, &state_summary(&state), out)?;
    if let Some(path) = &args.output.output {
        let text = match args.output.format {
            Format::Csv => state.wavefunction_csv(),
            Format::Json => json(&state),
        };
        emit(Some(path), &text, out)?;
    }
    Ok(EXIT_OK)
}

struct SweepRun {
    table: SweepTable,
    family: PotentialFamily,
    harness: HarnessConfig,
}

fn run_sweep(args: &SweepArgs) -> Result<SweepRun, Exit> {
    let family = args.family.build()?;
    let channel = args.channel.build()?;
    let grid = args.grid.build()?;
    let harness = args.tolerance.build(args.numeric.build()?)?;
    for &a in &grid {
        family.with_active_value(a)?;
    }
    let (records, aborted) = match harness::sweep(&family, &channel, args.channel.nr, &grid, &harness) {
        Ok(records) => (records, None),
        Err(failure) => (failure.completed.clone(), Some(failure.to_string())),
    };
    Ok(SweepRun {
        table: SweepTable {
            family: family.snapshot(),
            channel,
            n_r: args.channel.nr,
            records,
            aborted,
        },
        family,
        harness,
    })
}

fn sweep_text(table: &SweepTable, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => json(table),
    }
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<i32, Exit> {
    let run = run_sweep(args)?;
    emit(
        args.output.output.as_deref(),
        &sweep_text(&run.table, args.output.format),
        out,
    )?;
    match &run.table.aborted {
        Some(reason) => Err(Exit {
            code: EXIT_SWEEP_ABORTED,
            message: reason.clone(),
        }),
        None => Ok(EXIT_OK),
    }
}

fn verdict_report(verdict: &Verdict) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "hypothesis: dV/da is {}", verdict.hypothesis);
    for c in &verdict.checks {
        let _ = writeln!(
            s,
            "check {:<8} {:<14} worst = {}  tol = {}  ({})",
            c.check.id(),
            c.status.to_string(),
            f17(c.worst),
            f17(c.tolerance),
            c.detail
        );
    }
    let _ = writeln!(
        s,
        "dE_hf range: [{}, {}]",
        f17(verdict.min_de_hf),
        f17(verdict.max_de_hf)
    );
    let _ = writeln!(s, "strictly monotone E: {}", verdict.strictly_monotone);
    let note = match verdict.status {
        VerdictStatus::NotApplicable => " (hypothesis fails: dV/da changes sign, no claim is made)",
        _ => "",
    };
    let _ = writeln!(s, "status: {}{note}", verdict.status);
    s
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32, Exit> {
    let checks = args
        .checks
        .iter()
        .map(|c| c.parse::<CheckKind>())
        .collect::<Result<Vec<_>, Error>>()?;
    if checks.is_empty() {
        return Err(Exit::config("--checks selects nothing"));
    }
    let run = run_sweep(&args.sweep)?;
    if let Some(reason) = &run.table.aborted {
        if let Some(path) = &args.sweep.output.output {
            emit(Some(path), &sweep_text(&run.table, args.sweep.output.format), out)?;
        }
        return Err(Exit {
            code: EXIT_SWEEP_ABORTED,
            message: reason.clone(),
        });
    }
    let sign = harness::family_sign(&run.family)?;
    let verdict = harness::verdict_for(&run.table.records, sign, &run.harness, &checks);
    emit(None, &verdict_report(&verdict), out)?;
    let code = if verdict.status == VerdictStatus::Fail {
        EXIT_CHECK_FAILED
    } else {
        EXIT_OK
    };
    if let Some(path) = &args.sweep.output.output {
        let report = VerifyReport {
            sweep: run.table,
            verdict,
        };
        emit(Some(path), &json(&report), out)?;
    }
    Ok(code)
}

pub fn cmd_compare(args: &CompareArgs, out: &mut dyn Write) -> Result<i32, Exit> {
    let v1: PotentialFamily = args.v1.parse()?;
    let v2: PotentialFamily = args.v2.parse()?;
    let channel = args.channel.build()?;
    let harness = args.tolerance.build(args.numeric.build()?)?;
    let cmp = harness::compare_potentials(&v1, &v2, &channel, args.channel.nr, &harness)?;
    let mut s = String::new();
    let _ = writeln!(s, "V1 = {v1}");
    let _ = writeln!(s, "V2 = {v2}");
    let _ = writeln!(s, "E1 = {}", f17(cmp.e1));
    let _ = writeln!(s, "E2 = {}", f17(cmp.e2));
    let _ = writeln!(s, "E1 <= E2: {}", cmp.ordered);
    let path: Vec<String> = cmp.path.iter().map(|r| f17(r.energy)).collect();
    let _ = writeln!(s, "path E(t): {}", path.join(" "));
    s.push_str(&verdict_report(&cmp.verdict));
    emit(None, &s, out)?;
    if let Some(p) = &args.output {
        emit(Some(p), &json(&cmp), out)?;
    }
    Ok(if cmp.verdict.status == VerdictStatus::Fail {
        EXIT_CHECK_FAILED
    } else {
        EXIT_OK
    })
}

pub fn cmd_oracle(args: &OracleArgs, out: &mut dyn Write) -> Result<i32, Exit> {
    let mut levels = Vec::new();
    for &n in &args.n {
        for &j in &args.j {
            for &alpha in &args.alpha {
                levels.push(CoulombLevel::new(n, j, alpha)?);
            }
        }
    }
    let mut s = String::from("n,j,alpha,E,dE_dalpha\n");
    for l in &levels {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            l.n(),
            l.j(),
            f17(l.alpha()),
            f17(oracle::coulomb_energy(l)),
            f17(oracle::coulomb_energy_derivative(l))
        );
    }
    emit(args.output.as_deref(), &s, out)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["dirac"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn exit_codes_for_errors() {
        assert_eq!(exit_code(&Error::config("x")), 2);
        assert_eq!(
            exit_code(&Error::NoSuchState {
                requested: 0,
                found: vec![]
            }),
            3
        );
        assert_eq!(
            exit_code(&Error::Integrator {
                r: 1.0,
                reason: "x".into()
            }),
            4
        );
        assert_eq!(exit_code(&Error::Precondition("x".into())), 7);
    }

    #[test]
    fn config_file_parsing() {
        let entries = parse_config_file("# comment\nfamily = cutoff-coulomb\n\n--e_tol=1e-9\n").unwrap();
        assert_eq!(
            entries,
            vec![
                ("family".into(), "cutoff-coulomb".into()),
                ("e-tol".into(), "1e-9".into())
            ]
        );
        assert!(parse_config_file("no equals sign").is_err());
    }

    #[test]
    fn oracle_rows() {
        let (code, out, _) = run_capture(&["oracle", "--n", "1,2", "--j", "0.5", "--alpha", "0.5"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "n,j,alpha,E,dE_dalpha");
        assert!(lines[1].starts_with("1,0.5,5.0000000000000000e-1,8.6602540378443"));
        assert!(lines[2].starts_with("2,0.5,5.0000000000000000e-1,9.659258262890"));
        let (code, _, err) = run_capture(&["oracle", "--n", "1", "--j", "0.5", "--alpha", "1.1"]);
        assert_eq!(code, 2, "{err}");
    }

    #[test]
    fn flag_combinations() {
        let (code, _, _) = run_capture(&[
            "solve",
            "--family",
            "cutoff-coulomb",
            "--d",
            "1",
            "--tau",
            "-1",
            "--parity",
            "even",
        ]);
        assert_eq!(code, 2);
        let (code, _, _) = run_capture(&["solve", "--family", "nope", "--tau", "-1", "--j", "0.5"]);
        assert_eq!(code, 2);
        let (code, _, _) = run_capture(&[
            "sweep",
            "--family",
            "cutoff-coulomb",
            "--tau",
            "-1",
            "--j",
            "0.5",
            "--from",
            "0.1",
            "--to",
            "1",
            "--steps",
            "1",
        ]);
        assert_eq!(code, 2);
        let (code, _, _) = run_capture(&[
            "verify",
            "--family",
            "cutoff-coulomb",
            "--tau",
            "-1",
            "--j",
            "0.5",
            "--from",
            "0.1",
            "--to",
            "1",
            "--checks",
            "hf,bogus",
        ]);
        assert_eq!(code, 2);
    }
}
