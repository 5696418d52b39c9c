//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 domain error,
//! 4 verification failure.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::coherent::{bg_state, kp_state_closed_with, BgLabel, IndexConvention, KpLabel};
use crate::intelligent::{is_state_fock, variance_report, IsLabel, VarianceReport, IS_TAIL_WARN};
use crate::model::{ladder_matrices, wavefunction, FockVector, LadderMatrices, ModelParams, TAIL_WARN_THRESHOLD};
use crate::verify::{Status, SuiteConfig, Verifier, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Environment variable capping the sweep thread count.
pub const THREADS_ENV: &str = "CALOGERO_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(#[from] crate::Error),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Domain(_) => EXIT_DOMAIN,
            CliError::Verification(_) => EXIT_VERIFY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Bg,
    Kp,
    Intelligent,
}

/// Coherent and intelligent states of the two-body Calogero model.
#[derive(Debug, Parser)]
#[command(name = "calogero", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Coupling constant (>= 0).
    #[arg(long, global = true, default_value_t = 1.0, allow_hyphen_values = true)]
    pub eta: f64,
    /// Phase parameter.
    #[arg(long, global = true, default_value_t = 0.0, allow_hyphen_values = true)]
    pub beta: f64,
    /// Fock-space truncation N (>= 4).
    #[arg(long, global = true, default_value_t = 200)]
    pub trunc: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy levels e_n = 2n + e0 for n < N.
    Spectrum,
    /// Fock coefficients and moments of one state.
    State(StateArgs),
    /// Variances over a lambda x z grid of intelligent states.
    Sweep(SweepArgs),
    /// Run the verification suite.
    Verify,
    /// Samples of an eigenfunction on (0, x_max].
    Wavefunction(WavefunctionArgs),
}

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    #[arg(long, value_enum, default_value_t = Kind::Bg)]
    pub kind: Kind,
    /// Label as "re,im".
    #[arg(long, default_value = "0,0", value_parser = parse_complex, allow_hyphen_values = true)]
    pub z: Complex64,
    /// Squeezing parameter as "re,im" (intelligent kind).
    #[arg(long, default_value = "1,0", value_parser = parse_complex, allow_hyphen_values = true)]
    pub lambda: Complex64,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// "start:stop:count" over Re(lambda), optionally ",start:stop:count" over Im(lambda).
    #[arg(long, default_value = "0.5:2:4", value_parser = parse_grid, allow_hyphen_values = true)]
    pub lambda_grid: ComplexGrid,
    /// Same syntax over the eigenvalue z.
    #[arg(long, default_value = "0:1:3", value_parser = parse_grid, allow_hyphen_values = true)]
    pub z_grid: ComplexGrid,
}

#[derive(Debug, Clone, Args)]
pub struct WavefunctionArgs {
    #[arg(long, default_value_t = 0)]
    pub n: usize,
    #[arg(long, default_value_t = 12.0, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 2000)]
    pub points: usize,
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

/// Cartesian grid over the real and imaginary axes, real-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexGrid {
    pub re: Axis,
    pub im: Axis,
}

impl ComplexGrid {
    pub fn points(&self) -> Vec<Complex64> {
        let ims = self.im.values();
        self.re
            .values()
            .into_iter()
            .flat_map(|re| ims.iter().map(move |&im| Complex64::new(re, im)))
            .collect()
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not finite: {s:?}"))
    }
}

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    match s.split(',').collect::<Vec<_>>().as_slice() {
        [re, im] => Ok(Complex64::new(parse_f64(re)?, parse_f64(im)?)),
        _ => Err(format!("expected \"re,im\", got {s:?}")),
    }
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    match s.split(':').collect::<Vec<_>>().as_slice() {
        [a, b, n] => {
            let count: usize = n.trim().parse().map_err(|_| format!("bad count in {s:?}"))?;
            if count == 0 {
                return Err(format!("empty grid {s:?}"));
            }
            Ok(Axis {
                start: parse_f64(a)?,
                stop: parse_f64(b)?,
                count,
            })
        }
        _ => Err(format!("expected \"start:stop:count\", got {s:?}")),
    }
}

pub fn parse_grid(s: &str) -> Result<ComplexGrid, String> {
    let zero = Axis {
        start: 0.0,
        stop: 0.0,
        count: 1,
    };
    match s.split(',').collect::<Vec<_>>().as_slice() {
        [re] => Ok(ComplexGrid {
            re: parse_axis(re)?,
            im: zero,
        }),
        [re, im] => Ok(ComplexGrid {
            re: parse_axis(re)?,
            im: parse_axis(im)?,
        }),
        _ => Err(format!("expected \"a:b:n[,c:d:m]\", got {s:?}")),
    }
}

/// Validated settings shared by every subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: ModelParams,
    pub truncation: usize,
    pub format: Format,
}

impl RunConfig {
    pub fn from_args(args: &GlobalArgs) -> Result<Self, CliError> {
        let params = ModelParams::new(args.eta, args.beta).map_err(|e| CliError::Config(e.to_string()))?;
        if args.trunc < 4 {
            return Err(CliError::Config(format!("--trunc {} < 4", args.trunc)));
        }
        Ok(RunConfig {
            params,
            truncation: args.trunc,
            format: args.format,
        })
    }
}

/// Fixed 17-significant-digit rendering for CSV cells; `-0` prints as `0`.
fn num(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

fn pretty(v: &impl Serialize) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Rendered output and the exit code it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Outcome {
            body,
            exit_code: EXIT_OK,
        }
    }
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let rows: Vec<(usize, f64)> = (0..cfg.truncation).map(|n| (n, cfg.params.energy(n))).collect();
    let body = match cfg.format {
        Format::Csv => {
            let mut s = String::from("n,energy\n");
            for (n, e) in &rows {
                let _ = writeln!(s, "{n},{}", num(*e));
            }
            s
        }
        Format::Json => pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "params": cfg.params,
            "rows": rows.iter().map(|(n, e)| json!({"n": n, "energy": e})).collect::<Vec<_>>(),
        }))?,
    };
    Ok(Outcome::ok(body))
}

fn build_state(cfg: &RunConfig, args: &StateArgs) -> Result<(FockVector, Value, f64), CliError> {
    let p = &cfg.params;
    let n = cfg.truncation;
    Ok(match args.kind {
        Kind::Bg => {
            let label = BgLabel::new(args.z, p.beta())?;
            (bg_state(&label, p, n)?, json!(label), TAIL_WARN_THRESHOLD)
        }
        Kind::Kp => {
            let label = KpLabel::from_z(args.z)?;
            let state = kp_state_closed_with(&label, p, n, IndexConvention::LadderConsistent)?;
            (state, json!(label), TAIL_WARN_THRESHOLD)
        }
        Kind::Intelligent => {
            let label = IsLabel::new(args.z, args.lambda, p.beta())?;
            (is_state_fock(&label, p, n)?, json!(label), IS_TAIL_WARN)
        }
    })
}

pub fn cmd_state(cfg: &RunConfig, args: &StateArgs) -> Result<Outcome, CliError> {
    let (state, label, tail_limit) = build_state(cfg, args)?;
    let m = ladder_matrices(state.params(), cfg.truncation)?;
    let report = variance_report(&state, &m)?;
    // exact zeros are structural (e.g. the vacuum), not data
    let rows: Vec<(usize, Complex64)> = state
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
        .map(|(n, c)| (n, *c))
        .collect();
    let body = match cfg.format {
        Format::Csv => {
            let mut s = String::from("n,re,im,abs2\n");
            for (n, c) in &rows {
                let _ = writeln!(s, "{n},{},{},{}", num(c.re), num(c.im), num(c.norm_sqr()));
            }
            s
        }
        Format::Json => {
            let tail = state.tail_mass();
            pretty(&json!({
                "schema_version": SCHEMA_VERSION,
                "params": state.params(),
                "truncation": cfg.truncation,
                "kind": args.kind,
                "label": label,
                "coefficients": rows
                    .iter()
                    .map(|(n, c)| json!({"n": n, "re": c.re, "im": c.im, "abs2": c.norm_sqr()}))
                    .collect::<Vec<_>>(),
                "variance_report": report,
                "diagnostics": {
                    "norm_sqr": state.norm_sqr(),
                    "tail_mass": tail,
                    "tail_limit": tail_limit,
                    "tail_exceeds_limit": tail > tail_limit,
                },
            }))?
        }
    };
    Ok(Outcome::ok(body))
}

/// One sweep grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: Complex64,
    pub z: Complex64,
    pub report: Option<VarianceReport>,
    pub error: Option<String>,
}

fn sweep_point(cfg: &RunConfig, m: &LadderMatrices, lambda: Complex64, z: Complex64) -> SweepRow {
    let result = IsLabel::new(z, lambda, cfg.params.beta())
        .and_then(|label| is_state_fock(&label, &cfg.params, cfg.truncation))
        .and_then(|state| variance_report(&state, m));
    match result {
        Ok(r) => SweepRow {
            lambda,
            z,
            report: Some(r),
            error: None,
        },
        Err(e) => SweepRow {
            lambda,
            z,
            report: None,
            error: Some(e.to_string()),
        },
    }
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(CliError::Config(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        },
    }
}

/// Rows in lambda-major order; independent of the thread count.
pub fn sweep_rows(cfg: &RunConfig, args: &SweepArgs) -> Result<Vec<SweepRow>, CliError> {
    let lambdas = args.lambda_grid.points();
    let zs = args.z_grid.points();
    let grid: Vec<(Complex64, Complex64)> = lambdas.iter().flat_map(|&l| zs.iter().map(move |&z| (l, z))).collect();
    let m = ladder_matrices(&cfg.params, cfg.truncation)?;
    let compute = || {
        grid.par_iter()
            .map(|&(l, z)| sweep_point(cfg, &m, l, z))
            .collect::<Vec<_>>()
    };
    match thread_cap()? {
        None => Ok(compute()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(e.to_string()))?;
            Ok(pool.install(compute))
        }
    }
}

pub fn cmd_sweep(cfg: &RunConfig, args: &SweepArgs) -> Result<Outcome, CliError> {
    let rows = sweep_rows(cfg, args)?;
    let succeeded = rows.iter().filter(|r| r.error.is_none()).count();
    let body = match cfg.format {
        Format::Csv => {
            let mut s =
                String::from("re_lambda,im_lambda,re_z,im_z,var_a,var_b,covariance,saturation_residual,error\n");
            for r in &rows {
                let head = [r.lambda.re, r.lambda.im, r.z.re, r.z.im].map(num).join(",");
                match (&r.report, &r.error) {
                    (Some(v), _) => {
                        let tail = [v.var_a, v.var_b, v.covariance, v.saturation_residual]
                            .map(num)
                            .join(",");
                        let _ = writeln!(s, "{head},{tail},");
                    }
                    (None, e) => {
                        let msg = e.as_deref().unwrap_or_default().replace(['"', ','], ";");
                        let _ = writeln!(s, "{head},,,,,\"{msg}\"");
                    }
                }
            }
            s
        }
        Format::Json => pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "params": cfg.params,
            "truncation": cfg.truncation,
            "lambda_grid": args.lambda_grid,
            "z_grid": args.z_grid,
            "rows": rows.iter().map(|r| json!({
                "lambda": r.lambda,
                "z": r.z,
                "var_a": r.report.map(|v| v.var_a),
                "var_b": r.report.map(|v| v.var_b),
                "covariance": r.report.map(|v| v.covariance),
                "saturation_residual": r.report.map(|v| v.saturation_residual),
                "error": r.error,
            })).collect::<Vec<_>>(),
        }))?,
    };
    Ok(Outcome {
        body,
        exit_code: if succeeded > 0 { EXIT_OK } else { EXIT_DOMAIN },
    })
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let suite = SuiteConfig::new(cfg.params, cfg.truncation)?;
    let report = Verifier::new(suite).run()?;
    let body = match cfg.format {
        Format::Json => pretty(&report)?,
        Format::Csv => {
            let status = |s: Status| match s {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Info => "info",
            };
            let mut s = String::from("name,status,value,tolerance\n");
            for c in &report.checks {
                let tol = c.tolerance.map(num).unwrap_or_default();
                let _ = writeln!(s, "{},{},{},{tol}", c.name, status(c.status), num(c.value));
            }
            for d in &report.discrepancies {
                let _ = writeln!(s, "{},{},,", d.id, if d.adopted_passes { "pass" } else { "fail" });
            }
            s
        }
    };
    let exit_code = if report.all_passed() {
        EXIT_OK
    } else {
        log::error!("failed checks: {}", report.failures().join(", "));
        EXIT_VERIFY
    };
    Ok(Outcome { body, exit_code })
}

/// `(x, psi_n(x), int_0^x psi_n^2)` on `x_i = i x_max / points`, `i = 1..=points`.
pub fn wavefunction_samples(cfg: &RunConfig, args: &WavefunctionArgs) -> Result<Vec<[f64; 3]>, CliError> {
    if !(args.x_max > 0.0 && args.x_max.is_finite()) || args.points == 0 {
        return Err(CliError::Config(format!(
            "grid must lie in (0, x_max]: x_max = {}, points = {}",
            args.x_max, args.points
        )));
    }
    let h = args.x_max / args.points as f64;
    // psi_n(x) ~ x^{e0 - 1/2} vanishes at the origin since e0 >= 3/2
    let (mut prev_x, mut prev_sq, mut acc) = (0.0, 0.0, 0.0);
    let mut out = Vec::with_capacity(args.points);
    for i in 1..=args.points {
        let x = if i == args.points { args.x_max } else { h * i as f64 };
        let psi = wavefunction(args.n, x, &cfg.params)?;
        acc += 0.5 * (x - prev_x) * (prev_sq + psi * psi);
        prev_x = x;
        prev_sq = psi * psi;
        out.push([x, psi, acc]);
    }
    Ok(out)
}

pub fn cmd_wavefunction(cfg: &RunConfig, args: &WavefunctionArgs) -> Result<Outcome, CliError> {
    let rows = wavefunction_samples(cfg, args)?;
    let body = match cfg.format {
        Format::Csv => {
            let mut s = String::from("x,psi,norm\n");
            for [x, psi, norm] in &rows {
                let _ = writeln!(s, "{},{},{}", num(*x), num(*psi), num(*norm));
            }
            s
        }
        Format::Json => pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "params": cfg.params,
            "n": args.n,
            "rows": rows.iter().map(|[x, psi, norm]| json!({"x": x, "psi": psi, "norm": norm})).collect::<Vec<_>>(),
        }))?,
    };
    Ok(Outcome::ok(body))
}

/// Dispatches a parsed command line and renders its output.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = RunConfig::from_args(&cli.global)?;
    match &cli.command {
        Command::Spectrum => cmd_spectrum(&cfg),
        Command::State(a) => cmd_state(&cfg, a),
        Command::Sweep(a) => cmd_sweep(&cfg, a),
        Command::Verify => cmd_verify(&cfg),
        Command::Wavefunction(a) => cmd_wavefunction(&cfg, a),
    }
}

/// Runs the command, writes the output and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = execute(cli).and_then(|outcome| {
        match &cli.global.out {
            Some(path) => std::fs::write(path, &outcome.body)?,
            None => std::io::stdout().lock().write_all(outcome.body.as_bytes())?,
        }
        Ok(outcome.exit_code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("calogero: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(format: Format) -> RunConfig {
        RunConfig {
            params: ModelParams::new(1.0, 0.0).unwrap(),
            truncation: 200,
            format,
        }
    }

    #[test]
    fn parses_complex_and_grids() {
        assert_eq!(parse_complex("-0.5,2").unwrap(), Complex64::new(-0.5, 2.0));
        assert!(parse_complex("1").is_err());
        assert!(parse_complex("1,nan").is_err());
        let g = parse_grid("0:1:3,-1:1:2").unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], Complex64::new(0.0, -1.0));
        assert_eq!(pts[1], Complex64::new(0.0, 1.0));
        assert_eq!(pts[5], Complex64::new(1.0, 1.0));
        assert_eq!(parse_grid("2:3:1").unwrap().points(), vec![Complex64::new(2.0, 0.0)]);
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn spectrum_csv() {
        let out = cmd_spectrum(&cfg(Format::Csv)).unwrap();
        let lines: Vec<&str> = out.body.lines().collect();
        assert_eq!(lines[0], "n,energy");
        assert_eq!(lines.len(), 201);
        let e0: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(e0, 2.5);
    }

    #[test]
    fn small_truncation_is_config_error() {
        let args = GlobalArgs {
            eta: 1.0,
            beta: 0.0,
            trunc: 3,
            format: Format::Json,
            out: None,
        };
        assert_eq!(RunConfig::from_args(&args).unwrap_err().exit_code(), EXIT_CONFIG);
    }

    #[test]
    fn intelligent_at_unit_lambda_matches_bg() {
        let c = cfg(Format::Json);
        let z = Complex64::new(0.4, 0.3);
        let bg = build_state(
            &c,
            &StateArgs {
                kind: Kind::Bg,
                z,
                lambda: Complex64::new(1.0, 0.0),
            },
        )
        .unwrap()
        .0;
        let is = build_state(
            &c,
            &StateArgs {
                kind: Kind::Intelligent,
                z,
                lambda: Complex64::new(1.0, 0.0),
            },
        )
        .unwrap()
        .0;
        for (a, b) in bg.coeffs().iter().zip(is.coeffs()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn sweep_marks_bad_rows() {
        let c = cfg(Format::Csv);
        let args = SweepArgs {
            lambda_grid: parse_grid("-1:1:2").unwrap(),
            z_grid: parse_grid("0:1:2").unwrap(),
        };
        let rows = sweep_rows(&c, &args).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[0].error.is_some() && rows[1].error.is_some());
        assert!(rows[2].error.is_none() && rows[3].error.is_none());
        assert_eq!(cmd_sweep(&c, &args).unwrap().exit_code, EXIT_OK);
    }

    #[test]
    fn wavefunction_norm_accumulates_to_one() {
        let c = cfg(Format::Csv);
        for n in [0, 3, 7] {
            let rows = wavefunction_samples(
                &c,
                &WavefunctionArgs {
                    n,
                    x_max: 12.0,
                    points: 2000,
                },
            )
            .unwrap();
            assert!((rows.last().unwrap()[2] - 1.0).abs() < 1e-6);
        }
        let bad = WavefunctionArgs {
            n: 0,
            x_max: 0.0,
            points: 10,
        };
        assert_eq!(wavefunction_samples(&c, &bad).unwrap_err().exit_code(), EXIT_CONFIG);
    }
}
