//! Command-line front end.
//!
//! Data (CSV or JSON) goes to stdout or `--output`; progress and reports go
//! to stderr. Exit codes: 0 success, 1 solver or I/O failure, 2 usage error.
//!
//! A config file given by `--config` holds `key = value` lines naming the
//! long flags of the chosen subcommand (`eps_list` and `eps-list` are both
//! accepted); flags on the command line take precedence.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{ArgAction, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::analytic::{sigma_bracket, BetaParams};
use crate::asymptotics::{beta_sweep, large_beta_report, log_space, small_beta_report, SweepRow, SweepTable};
use crate::emit::{Format, Table};
use crate::error::Error;
use crate::gp_validation::{gamma_rows_table, gamma_table, FebConfig, MassConstraints};
use crate::profile_solver::{self, diagnostics, write_profile, GridSpec, SolverConfig};
use crate::tf_geometry::{concavity_report, reports_table, symmetry_breaking_report_at, TFModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bec-interface", version, about = "Surface tension of segregated two-component condensates")]
#[command(args_override_self = true)]
pub struct RunConfig {
    /// `key = value` file with default flag values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Write data here instead of stdout.
    #[arg(long, short, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single surface-tension solve with diagnostics.
    Sigma {
        #[arg(long)]
        beta: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// β sweep with asymptotic rate reports.
    Sweep {
        /// `a:b:n-log` for n log-spaced points, or a comma-separated list.
        #[arg(long)]
        betas: String,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Thomas-Fermi cloud and symmetry-breaking comparison.
    Tf {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
    },
    /// Table of constrained ε-minima against the limit energy.
    Gamma {
        #[arg(long)]
        beta: f64,
        /// Decreasing comma-separated ε values.
        #[arg(long)]
        eps_list: String,
        #[arg(long, default_value_t = 0.5)]
        alpha1: f64,
        #[arg(long, default_value_t = 10.0)]
        points_per_eps: f64,
        /// Start each row from zero multipliers and solve rows in parallel.
        #[arg(long)]
        cold: bool,
    },
    /// Solve and dump the optimal profile.
    Profile {
        #[arg(long)]
        beta: f64,
        #[arg(long, value_name = "PATH")]
        dump: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Closed-form bracket of σ̄_β, no solve.
    Bounds {
        #[arg(long)]
        beta: f64,
    },
}

#[derive(Debug, Clone, clap::Args)]
pub struct SolverArgs {
    /// Maximal grid spacing (default: β-adapted).
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 200_000)]
    pub max_iter: usize,
    /// Alternating refinement after the main descent.
    #[arg(long)]
    pub refine: bool,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            grid: self.spacing.map_or(GridSpec::Auto, GridSpec::Spacing),
            grad_tol: self.grad_tol,
            max_iter: self.max_iter,
            refine: self.refine,
            ..SolverConfig::default()
        }
    }
}

/// Exit code of a failed run.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) => Failure::Usage(e.to_string()),
            _ => Failure::Run(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(format!("i/o error: {e}"))
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stderr = io::stderr();
    let mut err = stderr.lock();
    run_with(argv, &mut io::stdout().lock(), &mut err)
}

pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let args = match with_config_file(args) {
        Ok(a) => a,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return 2;
        }
    };
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    2
                }
            };
        }
    };
    if let Err(msg) = configure_threads() {
        let _ = writeln!(stderr, "error: {msg}");
        return 2;
    }
    match dispatch(&cfg, stdout, stderr) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Run(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("BEC_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("BEC_THREADS must be a positive integer, got {raw:?}"))?;
    // a pool built earlier in the same process keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Inserts `--key value` pairs from the config file right after the
/// subcommand name, so that later command-line flags override them.
fn with_config_file(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_owned());
        } else if a == "--config" {
            path = strs.get(i + 1).cloned();
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config file {path}: {e}"))?;
    let entries = parse_config(&text)?;
    let cmd = RunConfig::command();
    let sub_names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_owned()).collect();
    let Some(pos) = strs.iter().skip(1).position(|a| sub_names.contains(a)).map(|p| p + 1) else {
        return Ok(args);
    };
    let sub = cmd.find_subcommand(&strs[pos]).expect("subcommand exists");
    let mut injected = Vec::new();
    for (key, value) in entries {
        let long = key.replace('_', "-");
        if long == "config" {
            continue;
        }
        let arg = sub
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(long.as_str()))
            .ok_or_else(|| format!("config key {key:?} is not a flag of `{}`", strs[pos]))?;
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value.as_str() {
                "true" => injected.push(OsString::from(format!("--{long}"))),
                "false" => {}
                _ => return Err(format!("config key {key:?} expects true or false, got {value:?}")),
            }
        } else {
            injected.push(OsString::from(format!("--{long}")));
            injected.push(OsString::from(value));
        }
    }
    let mut out = args;
    out.splice(pos + 1..pos + 1, injected);
    Ok(out)
}

/// `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut entries = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {} is not `key = value`: {line:?}", n + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(format!("config line {} has an empty key or value", n + 1));
        }
        entries.push((k.to_owned(), v.to_owned()));
    }
    Ok(entries)
}

/// `a:b:n-log` or a comma-separated list.
pub fn parse_beta_list(spec: &str) -> Result<Vec<f64>, String> {
    if let Some(body) = spec.strip_suffix("-log") {
        let parts: Vec<&str> = body.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected a:b:n-log, got {spec:?}"));
        }
        let a = parse_f64(parts[0])?;
        let b = parse_f64(parts[1])?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("point count {:?} is not an integer", parts[2]))?;
        return log_space(a, b, n).map_err(|e| e.to_string());
    }
    parse_list(spec)
}

pub fn parse_list(spec: &str) -> Result<Vec<f64>, String> {
    let xs = spec.split(',').map(parse_f64).collect::<Result<Vec<_>, _>>()?;
    if xs.is_empty() {
        return Err("empty list".into());
    }
    Ok(xs)
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse().map_err(|_| format!("{s:?} is not a number"))
}

fn emit(table: &Table, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), Failure> {
    let format = cfg.format.into();
    match &cfg.output {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::Run(format!("cannot write {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            table.write(format, &mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = BufWriter::new(stdout);
            table.write(format, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn dispatch(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    match &cfg.command {
        Command::Bounds { beta } => {
            let b = BetaParams::new(*beta)?;
            let br = sigma_bracket(b);
            writeln!(stderr, "beta = {beta}: {:.12} <= sigma <= {:.12}", br.lower, br.upper)?;
            let mut t = Table::new("beta,lower,upper");
            t.push(vec![(*beta).into(), br.lower.into(), br.upper.into()]);
            emit(&t, cfg, stdout)
        }
        Command::Sigma { beta, solver } => {
            let b = BetaParams::new(*beta)?;
            let r = profile_solver::minimize(&solver.config(), b)?;
            report_solve(&r, stderr)?;
            emit(&SweepTable::from_rows(vec![SweepRow::from_result(&r)?]).to_table(), cfg, stdout)
        }
        Command::Profile { beta, dump, solver } => {
            let b = BetaParams::new(*beta)?;
            let r = profile_solver::minimize(&solver.config(), b)?;
            report_solve(&r, stderr)?;
            let file = File::create(dump).map_err(|e| Failure::Run(format!("cannot write {}: {e}", dump.display())))?;
            let mut w = BufWriter::new(file);
            write_profile(&mut w, &r.grid, &r.profile, None)?;
            w.flush()?;
            writeln!(stderr, "profile written to {}", dump.display())?;
            emit(&SweepTable::from_rows(vec![SweepRow::from_result(&r)?]).to_table(), cfg, stdout)
        }
        Command::Sweep { betas, solver } => {
            let list = parse_beta_list(betas).map_err(Failure::Usage)?;
            for b in &list {
                BetaParams::new(*b)?;
            }
            writeln!(stderr, "solving {} values of beta", list.len())?;
            match beta_sweep(&list, &solver.config()) {
                Ok(table) => {
                    report_sweep(&table, stderr)?;
                    emit(&table.to_table(), cfg, stdout)
                }
                Err(Error::Sweep { partial, failed }) => {
                    emit(&partial.to_table(), cfg, stdout)?;
                    Err(Failure::Run(format!("sweep failed for beta = {failed:?}")))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Tf { dim, alpha } => {
            let model = TFModel::harmonic(*dim)?;
            let rep = symmetry_breaking_report_at(*alpha, &model)?;
            let conc = concavity_report(&model, 128)?;
            writeln!(
                stderr,
                "n = {dim}: lambda = {:.8}, R_alpha = {:.6}, radial = {:.8}, candidate = {:.8}, ratio = {:.6}, broken = {}",
                model.lambda(),
                rep.r_alpha,
                rep.radial_min,
                rep.candidate,
                rep.ratio,
                rep.broken
            )?;
            if let Some(d) = rep.discriminant {
                writeln!(stderr, "discriminant = {d:.6}")?;
            }
            if rep.derived_from_citation {
                writeln!(stderr, "the n = 2 competitor follows the half-plane cut of the cited construction")?;
            }
            writeln!(
                stderr,
                "concavity on 128 points: max second difference {:.6e}, pass = {}",
                conc.max_second_difference, conc.pass
            )?;
            emit(&reports_table(&[(model, rep)]), cfg, stdout)
        }
        Command::Gamma {
            beta,
            eps_list,
            alpha1,
            points_per_eps,
            cold,
        } => {
            let eps = parse_list(eps_list).map_err(Failure::Usage)?;
            let constraints = MassConstraints::split(*alpha1)?;
            let fc = FebConfig {
                points_per_eps: *points_per_eps,
                warm_start: !cold,
                ..FebConfig::default()
            };
            let rows = gamma_table(&eps, *beta, constraints, &fc)?;
            for r in &rows {
                writeln!(
                    stderr,
                    "eps = {}: eps*F = {:.10}, limit = {:.10}, relative gap = {:.4e}",
                    r.eps,
                    r.scaled_energy,
                    r.limit_energy,
                    r.relative_gap()
                )?;
            }
            emit(&gamma_rows_table(&rows), cfg, stdout)
        }
    }
}

fn report_solve(r: &profile_solver::SurfaceTensionResult, stderr: &mut dyn Write) -> Result<(), Failure> {
    let d = diagnostics(&r.profile, &r.grid)?;
    let br = sigma_bracket(BetaParams::new(r.beta)?);
    writeln!(
        stderr,
        "beta = {}: sigma = {:.12} in [{:.6}, {:.6}], inf v = {:.8} at t = {:.4}, {} iterations, {} nodes",
        r.beta,
        r.sigma,
        br.lower,
        br.upper,
        r.inf_v,
        r.argmin_v,
        r.iterations,
        r.grid.len()
    )?;
    writeln!(
        stderr,
        "EL residuals {:.3e} / {:.3e}, equipartition {:.3e}, phi monotone = {}, symmetry errors {:.2e} / {:.2e}",
        r.el_residual_v, r.el_residual_phi, r.equipartition_l2, d.phi_monotone, d.v_symmetric_error, d.phi_antisymmetric_error
    )?;
    Ok(())
}

fn report_sweep(table: &SweepTable, stderr: &mut dyn Write) -> Result<(), Failure> {
    let outside: Vec<f64> = table.rows().iter().filter(|r| !r.within_bracket()).map(|r| r.beta).collect();
    if outside.is_empty() {
        writeln!(stderr, "all rows lie within their analytic brackets")?;
    } else {
        writeln!(stderr, "rows outside their brackets: {outside:?}")?;
    }
    if let Ok(rep) = large_beta_report(table) {
        writeln!(
            stderr,
            "large beta: gap slope {:.4} +- {:.4}, dip slope {:.4} +- {:.4}, pass = {}",
            rep.gap_slope.slope, rep.gap_slope.stderr, rep.dip_slope.slope, rep.dip_slope.stderr, rep.pass
        )?;
    }
    if let Ok(rep) = small_beta_report(table) {
        writeln!(
            stderr,
            "small beta: max sigma/sqrt(beta) = {:.6}, slope {:.4}, pass = {}",
            rep.ratio_max, rep.measured_slope.slope, rep.pass
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("bec-interface").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn beta_list_syntax() {
        let xs = parse_beta_list("1e2:1e5:4-log").unwrap();
        assert_eq!(xs.len(), 4);
        assert!((xs[1] - 1e3).abs() < 1e-9);
        assert_eq!(parse_beta_list("0.5, 2").unwrap(), vec![0.5, 2.0]);
        assert!(parse_beta_list("1:2-log").is_err());
        assert!(parse_beta_list("a,b").is_err());
    }

    #[test]
    fn config_lines() {
        let e = parse_config("# comment\nbeta = 2\n\n format=json # trailing\n").unwrap();
        assert_eq!(e, vec![("beta".into(), "2".into()), ("format".into(), "json".into())]);
        assert!(parse_config("beta 2").is_err());
        assert!(parse_config("beta =").is_err());
    }

    #[test]
    fn bounds_and_usage_errors() {
        let (code, out, _) = run_capture(&["bounds", "--beta", "1"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 2);
        let (code, _, err) = run_capture(&["sigma", "--beta", "0"]);
        assert_eq!(code, 2);
        assert!(err.contains("beta must be positive"));
        let (code, _, err) = run_capture(&["bounds", "--beta", "1", "--bogus"]);
        assert_eq!(code, 2);
        assert!(err.to_lowercase().contains("usage"));
        let (code, _, _) = run_capture(&["tf", "--dim", "4"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn config_file_and_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "beta = 4\nformat = json\n").unwrap();
        let p = path.to_str().unwrap();
        let (code, out, _) = run_capture(&["bounds", "--config", p]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v[0]["beta"].as_f64(), Some(4.0));
        let (code, out, _) = run_capture(&["--config", p, "bounds", "--beta", "9"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v[0]["beta"].as_f64(), Some(9.0));
        std::fs::write(&path, "dim = 3\n").unwrap();
        let (code, _, err) = run_capture(&["bounds", "--beta", "1", "--config", p]);
        assert_eq!(code, 2);
        assert!(err.contains("dim"));
    }

    #[test]
    fn tf_report_row() {
        let (code, out, _) = run_capture(&["tf", "--dim", "3"]);
        assert_eq!(code, 0);
        let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
        let disc: f64 = row[7].parse().unwrap();
        assert!((disc - 1.86).abs() < 0.02);
        assert_eq!(row[8], "true");
    }

    #[test]
    fn unwritable_output() {
        let (code, _, _) = run_capture(&["bounds", "--beta", "1", "--output", "/nonexistent/dir/x.csv"]);
        assert_eq!(code, 1);
    }
}
