//! Command-line entry point and the tab-separated run report.
//!
//! Exit codes: 0 when every configured test passes, 1 when one fails,
//! 2 on input errors (unreadable or invalid scenario, bad flags).

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::harness::{asymmetry_sweep, chi_square_test, correlation, peak_metric, run_trials, HarnessError, Setup, SweepParameter};
use crate::pipeline::MeasurementRecord;
use crate::scenario::{parse_scenario, ScenarioFile};

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "COLLAPSE_SIM_SEED";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
const DEFAULT_TRIALS: u64 = 1000;

#[derive(Debug, Parser)]
#[command(name = "collapse-sim", version, about = "Seeded collapse simulations from scenario files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario, or replay a stored measurement record.
    Run(RunArgs),
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    #[arg(long, value_name = "PATH", required_unless_present = "replay")]
    scenario: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    trials: Option<u64>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// `PARAM=v1,v2,...` with PARAM one of mass_ratio, energy_ratio, repetitions.
    #[arg(long, value_name = "PARAM=VALUES")]
    sweep: Option<String>,
    /// Also write the report to this file.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Re-run the trial stored in a record file and compare.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["scenario", "sweep", "record"])]
    replay: Option<PathBuf>,
    /// Store the full record of one trial for later replay.
    #[arg(long, value_name = "PATH")]
    record: Option<PathBuf>,
    #[arg(long, value_name = "N", default_value_t = 0, requires = "record")]
    record_trial: u64,
}

/// One stored trial: enough to reproduce it from nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayFile {
    pub version: String,
    /// Canonical scenario text.
    pub scenario: String,
    pub seed: u64,
    pub trial: u64,
    pub records: Vec<MeasurementRecord>,
}

/// `printf("%.12g")`.
pub fn format_g(x: f64) -> String {
    const P: i32 = 12;
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= P {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        trim(&format!("{:.*}", (P - 1 - exp) as usize, x))
    }
}

enum Failure {
    Input(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

/// Runs the CLI on `args` (including the program name). `env_seed` is the
/// value of [`SEED_ENV`], if set. Returns the exit code.
pub fn cli_run<I, T>(args: I, env_seed: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let Command::Run(args) = cli.command;
    let result = match &args.replay {
        Some(path) => replay(path),
        None => run(&args, env_seed),
    };
    match result {
        Ok((report, pass)) => {
            if let Some(out) = &args.out {
                if let Err(e) = std::fs::write(out, &report) {
                    let _ = writeln!(stderr, "error: cannot write {}: {e}", out.display());
                    return 2;
                }
            }
            let _ = stdout.write_all(report.as_bytes());
            if pass {
                0
            } else {
                1
            }
        }
        Err(Failure::Input(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
    }
}

fn read_scenario(path: &Path) -> Result<ScenarioFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn resolve_seed(flag: Option<u64>, env: Option<&str>, file: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(v) = env {
        return v
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("{SEED_ENV} = `{v}` is not an unsigned integer")));
    }
    Ok(file.unwrap_or(0))
}

fn parse_sweep(spec: &str) -> Result<(SweepParameter, Vec<f64>), Failure> {
    let (name, values) = spec
        .split_once('=')
        .ok_or_else(|| Failure::Input(format!("--sweep `{spec}` is not PARAM=v1,v2,...")))?;
    let param: SweepParameter = name.trim().parse()?;
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Failure::Input(format!("--sweep value `{v}` is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((param, values))
}

fn header(out: &mut String, file: &ScenarioFile, seed: u64, trials: u64) {
    let _ = writeln!(out, "version\t{VERSION}");
    let _ = writeln!(out, "scenario\t{}", file.kind);
    let _ = writeln!(out, "seed\t{seed}");
    let _ = writeln!(out, "trials\t{trials}");
    for line in file.render().lines().filter(|l| !l.is_empty()) {
        let _ = writeln!(out, "echo\t{line}");
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run(args: &RunArgs, env_seed: Option<&str>) -> Result<(String, bool), Failure> {
    let file = read_scenario(args.scenario.as_deref().expect("clap requires it"))?;
    let seed = resolve_seed(args.seed, env_seed, file.harness.seed)?;
    let trials = args.trials.or(file.harness.trials).unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(Failure::Input("--trials must be positive".into()));
    }
    let mut out = String::new();
    header(&mut out, &file, seed, trials);
    let mut pass = true;

    if let Some(spec) = &args.sweep {
        let (param, values) = parse_sweep(spec)?;
        let family = file.sweep_family(param)?;
        let report = asymmetry_sweep(&family, &values, trials, seed, file.constants())?;
        let _ = writeln!(out, "sweep\tvalue\tpeak\tstd_error");
        for i in 0..values.len() {
            let _ = writeln!(
                out,
                "{param}\t{}\t{}\t{}",
                format_g(values[i]),
                format_g(report.metrics[i]),
                format_g(report.std_errors[i])
            );
        }
        let _ = writeln!(out, "test\tvalue\tthreshold\tverdict");
        // Only the repetition family is expected to be monotone; the
        // asymmetry families are reported.
        let status = if param == SweepParameter::RepetitionCount {
            pass &= report.nondecreasing;
            verdict(report.nondecreasing)
        } else {
            "INFO"
        };
        let _ = writeln!(out, "nondecreasing\t{}\t-\t{status}", report.nondecreasing);
        return Ok((out, pass));
    }

    let exp = file.experiment()?;
    let hist = run_trials(&exp, trials, seed)?;
    let expected = exp.expected()?;
    let _ = writeln!(out, "label\tcount\tfrequency\texpected");
    let freqs = hist.frequencies();
    for (i, (label, count)) in hist.bins.iter().enumerate() {
        let e = expected.as_ref().map_or("-".to_string(), |p| format_g(p[i]));
        let _ = writeln!(out, "{label}\t{count}\t{}\t{e}", format_g(freqs[i]));
    }
    let _ = writeln!(out, "test\tvalue\tthreshold\tverdict");
    if let Some(p) = &expected {
        let alpha = file.alpha();
        match chi_square_test(&hist, p, alpha) {
            Ok(c) => {
                pass &= c.pass;
                let _ = writeln!(
                    out,
                    "chi_square(df={},alpha={})\t{}\t{}\t{}",
                    c.df,
                    format_g(alpha),
                    format_g(c.statistic),
                    format_g(c.critical),
                    verdict(c.pass)
                );
            }
            Err(
                e @ (HarnessError::InsufficientCounts { .. }
                | HarnessError::UnsupportedDf(_)
                | HarnessError::UnsupportedAlpha(_)),
            ) => {
                let _ = writeln!(out, "chi_square\t-\t-\tSKIP {e}");
            }
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(peak) = peak_metric(&hist) {
        let _ = writeln!(out, "peak\t{}\t-\tINFO", format_g(peak));
    }
    if let Setup::Epr { .. } = &exp.setup {
        if let Some(r) = halves_correlation(&hist) {
            let _ = writeln!(out, "correlation\t{}\t-\tINFO", format_g(r));
        }
    }

    if let Some(path) = &args.record {
        let mut engine = exp.engine()?;
        let outcome = exp.run_trial(&mut engine, seed, args.record_trial, true)?;
        let rec = ReplayFile {
            version: VERSION.into(),
            scenario: file.render(),
            seed,
            trial: args.record_trial,
            records: outcome.records,
        };
        let json = serde_json::to_string_pretty(&rec)?;
        std::fs::write(path, json + "\n")
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok((out, pass))
}

/// Correlation of the `±1` readings of an `up/down × up/down` histogram.
fn halves_correlation(hist: &crate::harness::OutcomeHistogram) -> Option<f64> {
    let sign = |l: &str| match l {
        "up" => Some(1.0),
        "down" => Some(-1.0),
        _ => None,
    };
    let mut pairs = Vec::new();
    for (label, count) in &hist.bins {
        let (a, b) = label.split_once('/')?;
        let pair = (sign(a)?, sign(b)?);
        pairs.extend(std::iter::repeat_n(pair, *count as usize));
    }
    correlation(&pairs).ok()
}

fn replay(path: &Path) -> Result<(String, bool), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let stored: ReplayFile =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let file = parse_scenario(&stored.scenario)?;
    let exp = file.experiment()?;
    let mut engine = exp.engine()?;
    let fresh = exp.run_trial(&mut engine, stored.seed, stored.trial, true)?;
    let same = fresh.records == stored.records;

    let mut out = String::new();
    let _ = writeln!(out, "version\t{VERSION}");
    let _ = writeln!(out, "replay\t{}", path.display());
    let _ = writeln!(out, "scenario\t{}", file.kind);
    let _ = writeln!(out, "seed\t{}", stored.seed);
    let _ = writeln!(out, "trial\t{}", stored.trial);
    let _ = writeln!(out, "record\tbin\tlabel\tvalue\tdraws");
    for (i, r) in fresh.records.iter().enumerate() {
        let draws: Vec<String> = r.draws.iter().map(|d| format!("{}={}", d.decision, format_g(d.value))).collect();
        let _ = writeln!(
            out,
            "{i}\t{}\t{}\t{}\t{}",
            r.detector_bin,
            r.detector_label,
            format_g(r.value),
            draws.join(" ")
        );
    }
    let _ = writeln!(out, "test\tvalue\tthreshold\tverdict");
    let _ = writeln!(out, "replay_identical\t{same}\t-\t{}", verdict(same));
    Ok((out, same))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printf_g() {
        let cases = [
            (0.5, "0.5"),
            (1.0, "1"),
            (100000.0, "100000"),
            (1.0 / 3.0, "0.333333333333"),
            (2.0 / 3.0, "0.666666666667"),
            (1e-5, "1e-05"),
            (123456789012345.0, "1.23456789012e+14"),
            (-0.000123, "-0.000123"),
            (999999999999.5, "1e+12"),
            (0.0, "0"),
        ];
        for (x, s) in cases {
            assert_eq!(format_g(x), s, "{x}");
        }
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(1), Some("2"), Some(3)).ok(), Some(1));
        assert_eq!(resolve_seed(None, Some("2"), Some(3)).ok(), Some(2));
        assert_eq!(resolve_seed(None, None, Some(3)).ok(), Some(3));
        assert_eq!(resolve_seed(None, None, None).ok(), Some(0));
        assert!(resolve_seed(None, Some("x"), None).is_err());
    }

    #[test]
    fn sweep_spec() {
        let (p, v) = parse_sweep("repetitions=1,2,4").ok().unwrap();
        assert_eq!(p, SweepParameter::RepetitionCount);
        assert_eq!(v, vec![1.0, 2.0, 4.0]);
        assert!(parse_sweep("repetitions").is_err());
        assert!(parse_sweep("spin=1,2").is_err());
        assert!(parse_sweep("mass_ratio=1,x").is_err());
    }

    #[test]
    fn bad_flags_exit_two() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(cli_run(["collapse-sim", "run"], None, &mut o, &mut e), 2);
        assert_eq!(cli_run(["collapse-sim", "run", "--scenario", "/nonexistent.scn"], None, &mut o, &mut e), 2);
        assert!(String::from_utf8(e).unwrap().contains("error: cannot read"));
    }
}
