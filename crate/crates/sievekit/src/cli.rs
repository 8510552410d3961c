//! Command-line interface: argument grammar, worker-pool setup, and the
//! dispatch from subcommands to library calls and [`Report`] envelopes.
//!
//! Environment knobs:
//! * `SIEVEKIT_WORKERS` — overrides `--workers` (must be a positive integer).
//! * `SIEVEKIT_ZERO_RUNTIME` — set to a non-empty value other than `0` to
//!   zero the `runtime_seconds` field before emission, making full reports
//!   byte-comparable across runs.
//!
//! Exit status: `0` for a clean report, `1` when the report carries a
//! counterexample, a violated ledger row, or a non-positive bound (and for
//! runtime failures such as I/O errors), `2` for usage and domain errors.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::kuhn::{scan_parameters, theorem_pipeline, GridSpec};
use crate::linear_sieve::{lower_bound_s, SieveParams};
use crate::report::{self, OutputFormat, Report, BOUND_POSITIVE_KEY};
use crate::verifier::{
    scan_epsilon_case1, verify_4p, verify_interval, verify_mertens_with, MertensOptions,
    DEFAULT_CHECKPOINT_BATCH, DEFAULT_SEGMENT_WIDTH,
};
use crate::{Error, Result};

/// Numeric toolkit for almost-prime gaps: sieve bounds, band scans, and
/// interval verifications.
#[derive(Debug, Parser)]
#[command(name = "sievekit", version, about)]
pub struct Cli {
    /// Output rendering: json, csv, or text.
    #[arg(long, global = true, default_value = "json")]
    pub format: String,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads (defaults to the number of CPUs). Results are
    /// independent of this setting.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluates the full lower-bound pipeline at N and checks every
    /// intermediate constant against its reference value.
    Theorem {
        /// Threshold argument; accepts plain or scientific notation
        /// ("1.98e28+1").
        #[arg(long = "N", value_parser = parse_big_n)]
        n: u128,
        /// Sifting parameter s.
        #[arg(long, default_value_t = 3.3)]
        s: f64,
        /// Geometry split alpha.
        #[arg(long, default_value_t = 0.07)]
        alpha: f64,
    },
    /// Scans the bounded range of the epsilon inequality over composite and
    /// prime endpoints and reports both maxima.
    ScanEpsilon,
    /// Checks the Mertens product band at every prime up to the limit.
    VerifyMertens {
        /// Largest prime to check.
        #[arg(long)]
        limit: u64,
        /// Checkpoint file to resume from and append to.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Primes per work segment.
        #[arg(long = "segment-width", default_value_t = DEFAULT_SEGMENT_WIDTH)]
        segment_width: u64,
    },
    /// Finds, for every n in the range, the least integer strictly between
    /// n^2 and (n+1)^2 with at most k prime factors.
    VerifyInterval {
        #[arg(long = "n-min")]
        n_min: u64,
        #[arg(long = "n-max")]
        n_max: u64,
        /// Maximum number of prime factors, with multiplicity.
        #[arg(long)]
        k: u32,
    },
    /// Finds, for every n in the range, the least prime p with
    /// n^2 < 4p < (n+1)^2.
    #[command(name = "verify-4p")]
    Verify4p {
        #[arg(long = "n-min")]
        n_min: u64,
        #[arg(long = "n-max")]
        n_max: u64,
    },
    /// Evaluates the lower bound over an (s, alpha) grid and reports the
    /// best point and the whole surface.
    ScanParams {
        #[arg(long = "N", value_parser = parse_big_n)]
        n: u128,
        #[arg(long = "s-min", default_value_t = 3.0)]
        s_min: f64,
        #[arg(long = "s-max", default_value_t = 4.0)]
        s_max: f64,
        #[arg(long = "s-step", default_value_t = 0.05)]
        s_step: f64,
        #[arg(long = "alpha-min", default_value_t = 0.01)]
        alpha_min: f64,
        #[arg(long = "alpha-max", default_value_t = 0.17)]
        alpha_max: f64,
        #[arg(long = "alpha-step", default_value_t = 0.01)]
        alpha_step: f64,
    },
    /// Evaluates the sieve lower bound S alone at one (N, s, alpha) point.
    LowerBound {
        #[arg(long = "N", value_parser = parse_big_n)]
        n: u128,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        alpha: f64,
    },
}

/// Parses a possibly-huge integer given either plainly ("123") or as
/// scientific notation with an optional exact offset ("1.98e28+1").
/// The value must be a nonnegative integer that fits in 128 bits.
pub fn parse_big_n(text: &str) -> std::result::Result<u128, String> {
    let s = text.trim();
    let grammar = || format!("expected an integer like 123 or 1.98e28+1, got {s:?}");
    if s.is_empty() {
        return Err(grammar());
    }
    if s.bytes().all(|b| b.is_ascii_digit()) {
        return s.parse::<u128>().map_err(|_| format!("value out of range: {s}"));
    }
    let e_pos = s.find(['e', 'E']).ok_or_else(grammar)?;
    let mantissa_part = &s[..e_pos];
    let rest = &s[e_pos + 1..];
    let (exp_part, offset) = match rest.find(['+', '-']) {
        Some(i) => (&rest[..i], Some((&rest[i..i + 1], &rest[i + 1..]))),
        None => (rest, None),
    };
    let all_digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    let (int_digits, frac_digits) = match mantissa_part.split_once('.') {
        Some((a, b)) => {
            if !all_digits(b) {
                return Err(grammar());
            }
            (a, b)
        }
        None => (mantissa_part, ""),
    };
    if !all_digits(int_digits) || !all_digits(exp_part) {
        return Err(grammar());
    }
    let mantissa: u128 = format!("{int_digits}{frac_digits}")
        .parse()
        .map_err(|_| format!("value out of range: {s}"))?;
    let exp: u32 = exp_part
        .parse()
        .map_err(|_| format!("value out of range: {s}"))?;
    let frac_len = frac_digits.len() as u32;
    if exp < frac_len {
        return Err(format!(
            "{s:?} is not an integer: the exponent does not clear the fractional digits"
        ));
    }
    let out_of_range = || format!("value out of range: {s}");
    let base = 10u128
        .checked_pow(exp - frac_len)
        .and_then(|scale| mantissa.checked_mul(scale))
        .ok_or_else(out_of_range)?;
    match offset {
        None => Ok(base),
        Some((sign, digits)) => {
            if !all_digits(digits) {
                return Err(grammar());
            }
            let delta: u128 = digits.parse().map_err(|_| out_of_range())?;
            if sign == "+" {
                base.checked_add(delta).ok_or_else(out_of_range)
            } else {
                base.checked_sub(delta)
                    .ok_or_else(|| format!("negative value: {s}"))
            }
        }
    }
}

/// Worker-count resolution: the environment variable wins over the flag;
/// both must be at least 1; `None` leaves the pool at its default size.
fn resolve_workers(flag: Option<usize>, env_value: Option<&str>) -> Result<Option<usize>> {
    let validated = |n: usize, source: &str| {
        if n == 0 {
            Err(Error::Usage(format!("{source} must be at least 1")))
        } else {
            Ok(Some(n))
        }
    };
    if let Some(raw) = env_value {
        let n: usize = raw.trim().parse().map_err(|_| {
            Error::Usage(format!(
                "SIEVEKIT_WORKERS must be a positive integer, got {raw:?}"
            ))
        })?;
        return validated(n, "SIEVEKIT_WORKERS");
    }
    match flag {
        Some(n) => validated(n, "--workers"),
        None => Ok(None),
    }
}

/// Exit status for a run that failed before producing a report: bad
/// arguments and unsatisfiable domains are usage errors (2); I/O,
/// serialization, and internal-contract failures are runtime errors (1).
pub fn error_exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_)
        | Error::Domain { .. }
        | Error::Precondition(_)
        | Error::EmptyDomain(_)
        | Error::Undefined(_) => 2,
        _ => 1,
    }
}

/// The reference parameter set with `s` and `alpha` replaced.
fn params_with(s: f64, alpha: f64) -> Result<SieveParams> {
    SieveParams::new(8.0, 4, alpha, s, 1.97e-3, 2, 121.0, 122.0, 0.01, 0.07)
}

fn build_report(command: &Command) -> Result<Report> {
    match command {
        Command::Theorem { n, s, alpha } => {
            let params = params_with(*s, *alpha)?;
            let breakdown = theorem_pipeline(*n, &params)?;
            let mut r = Report::new("theorem");
            r.set_input("N", Report::wide(*n));
            r.set_input("s", (*s).into());
            r.set_input("alpha", (*alpha).into());
            r.fill_breakdown(&breakdown);
            Ok(r)
        }
        Command::ScanEpsilon => {
            let scans = scan_epsilon_case1()?;
            let mut r = Report::new("scan-epsilon");
            r.set_result("composite", Report::scan_value(&scans.composite));
            r.set_result("prime", Report::scan_value(&scans.prime));
            r.add_counterexamples(Some("composite"), &scans.composite.counterexamples);
            r.add_counterexamples(Some("prime"), &scans.prime.counterexamples);
            Ok(r)
        }
        Command::VerifyMertens {
            limit,
            checkpoint,
            segment_width,
        } => {
            let options = MertensOptions {
                segment_width: *segment_width,
                checkpoint: checkpoint.clone(),
                batch: DEFAULT_CHECKPOINT_BATCH,
            };
            let scan = verify_mertens_with(*limit, &options)?;
            let mut r = Report::new("verify-mertens");
            r.set_input("limit", (*limit).into());
            r.set_input("segment_width", (*segment_width).into());
            if let Some(path) = checkpoint {
                r.set_input("checkpoint", path.display().to_string().into());
            }
            r.set_result("scan", Report::scan_value(&scan));
            r.add_counterexamples(None, &scan.counterexamples);
            Ok(r)
        }
        Command::VerifyInterval { n_min, n_max, k } => {
            let scan = verify_interval(*n_min, *n_max, *k)?;
            let mut r = Report::new("verify-interval");
            r.set_input("n_min", (*n_min).into());
            r.set_input("n_max", (*n_max).into());
            r.set_input("k", (*k).into());
            let (witnesses, count, truncated) =
                Report::witness_array(scan.witnesses.iter().map(|w| (w.n, w.witness)));
            r.set_result("scan", Report::scan_value(&scan.report));
            r.set_result("witnesses", witnesses);
            r.set_result("witness_count", (count as u64).into());
            r.set_result("witnesses_truncated", truncated.into());
            r.add_counterexamples(None, &scan.report.counterexamples);
            Ok(r)
        }
        Command::Verify4p { n_min, n_max } => {
            let scan = verify_4p(*n_min, *n_max)?;
            let mut r = Report::new("verify-4p");
            r.set_input("n_min", (*n_min).into());
            r.set_input("n_max", (*n_max).into());
            let (witnesses, count, truncated) =
                Report::witness_array(scan.witnesses.iter().map(|w| (w.n, w.p)));
            r.set_result("scan", Report::scan_value(&scan.report));
            r.set_result("witnesses", witnesses);
            r.set_result("witness_count", (count as u64).into());
            r.set_result("witnesses_truncated", truncated.into());
            r.add_counterexamples(None, &scan.report.counterexamples);
            Ok(r)
        }
        Command::ScanParams {
            n,
            s_min,
            s_max,
            s_step,
            alpha_min,
            alpha_max,
            alpha_step,
        } => {
            let grid = GridSpec {
                s_min: *s_min,
                s_max: *s_max,
                s_step: *s_step,
                alpha_min: *alpha_min,
                alpha_max: *alpha_max,
                alpha_step: *alpha_step,
            };
            let scan = scan_parameters(*n, &grid)?;
            let mut r = Report::new("scan-params");
            r.set_input("N", Report::wide(*n));
            r.set_input("s_min", (*s_min).into());
            r.set_input("s_max", (*s_max).into());
            r.set_input("s_step", (*s_step).into());
            r.set_input("alpha_min", (*alpha_min).into());
            r.set_input("alpha_max", (*alpha_max).into());
            r.set_input("alpha_step", (*alpha_step).into());
            r.set_result(
                "best",
                serde_json::json!({
                    "s": scan.best.s,
                    "alpha": scan.best.alpha,
                    "r4_lower": scan.best.r4_lower,
                }),
            );
            r.set_result(
                "surface",
                serde_json::Value::Array(
                    scan.surface
                        .iter()
                        .map(|p| serde_json::json!([p.s, p.alpha, p.r4_lower]))
                        .collect(),
                ),
            );
            r.set_result("skipped_infeasible", (scan.skipped_infeasible as u64).into());
            r.set_result(BOUND_POSITIVE_KEY, (scan.best.r4_lower > 0.0).into());
            Ok(r)
        }
        Command::LowerBound { n, s, alpha } => {
            let params = params_with(*s, *alpha)?;
            let bound = lower_bound_s(*n, &params)?;
            let mut r = Report::new("lower-bound");
            r.set_input("N", Report::wide(*n));
            r.set_input("s", (*s).into());
            r.set_input("alpha", (*alpha).into());
            r.set_result("value", bound.value.into());
            r.set_result("main_term", bound.main_term.into());
            r.set_result("squarefree_term", bound.squarefree_term.into());
            r.set_result("remainder_kind", bound.remainder_kind.as_str().into());
            r.set_result(BOUND_POSITIVE_KEY, (bound.value > 0.0).into());
            Ok(r)
        }
    }
}

/// Parses the format, sizes the worker pool, runs the command inside it,
/// stamps the runtime, emits to `--out` or stdout, and returns the exit
/// status derived from the report.
pub fn run(cli: Cli) -> Result<i32> {
    let format: OutputFormat = cli.format.parse()?;
    let workers = resolve_workers(
        cli.workers,
        std::env::var("SIEVEKIT_WORKERS").ok().as_deref(),
    )?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Contract(format!("worker pool construction failed: {e}")))?;

    let start = Instant::now();
    let mut report = pool.install(|| build_report(&cli.command))?;
    report.runtime_seconds = start.elapsed().as_secs_f64();
    if std::env::var("SIEVEKIT_ZERO_RUNTIME").is_ok_and(|v| !v.is_empty() && v != "0") {
        report.runtime_seconds = 0.0;
    }

    let rendered = report::emit(&report, format)?;
    match &cli.out {
        Some(path) => std::fs::write(path, rendered)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(rendered.as_bytes())?;
        }
    }
    Ok(report::exit_code(&report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn big_n_grammar_accepts_the_documented_forms() {
        assert_eq!(parse_big_n("123"), Ok(123));
        assert_eq!(parse_big_n("0"), Ok(0));
        assert_eq!(parse_big_n("1e3"), Ok(1_000));
        assert_eq!(parse_big_n("2.5e1"), Ok(25));
        assert_eq!(parse_big_n("1E3"), Ok(1_000));
        assert_eq!(parse_big_n("1e3+1"), Ok(1_001));
        assert_eq!(parse_big_n("1e3-1"), Ok(999));
        assert_eq!(
            parse_big_n("1.98e28+1"),
            Ok(19_800_000_000_000_000_000_000_000_001)
        );
        assert_eq!(parse_big_n(" 42 "), Ok(42));
        assert_eq!(parse_big_n("1.980e3"), Ok(1_980));
    }

    #[test]
    fn big_n_grammar_rejects_malformed_values() {
        for bad in [
            "", "abc", "1.98e1", // not an integer
            "1e40",   // overflows u128 scaling
            "1e-3",   // negative exponent
            "-5",     // negative
            "1e3+1+1", // double offset
            "1e3+x", "1.e3", ".5e3", "e3", "1e", "1e3.5", "0x10",
        ] {
            assert!(parse_big_n(bad).is_err(), "accepted {bad:?}");
        }
        assert!(parse_big_n("1e0-2").unwrap_err().contains("negative"));
        assert!(parse_big_n("340282366920938463463374607431768211456").is_err());
        assert_eq!(
            parse_big_n("340282366920938463463374607431768211455"),
            Ok(u128::MAX)
        );
    }

    #[test]
    fn worker_resolution_prefers_the_environment() {
        assert_eq!(resolve_workers(None, None).unwrap(), None);
        assert_eq!(resolve_workers(Some(4), None).unwrap(), Some(4));
        assert_eq!(resolve_workers(Some(4), Some("2")).unwrap(), Some(2));
        assert_eq!(resolve_workers(None, Some("8")).unwrap(), Some(8));
        assert!(matches!(
            resolve_workers(Some(0), None),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            resolve_workers(None, Some("0")),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            resolve_workers(None, Some("many")),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn duplicate_flags_are_rejected() {
        let err = Cli::try_parse_from([
            "sievekit",
            "verify-mertens",
            "--limit",
            "100",
            "--limit",
            "0",
        ])
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn usage_and_runtime_errors_map_to_distinct_codes() {
        assert_eq!(error_exit_code(&Error::Usage("x".into())), 2);
        assert_eq!(
            error_exit_code(&Error::Domain {
                what: "z",
                value: 1.0,
                range: "[2, 3]"
            }),
            2
        );
        assert_eq!(error_exit_code(&Error::Precondition("x".into())), 2);
        assert_eq!(error_exit_code(&Error::EmptyDomain("x".into())), 2);
        assert_eq!(error_exit_code(&Error::Undefined("x".into())), 2);
        assert_eq!(error_exit_code(&Error::Contract("x".into())), 1);
        assert_eq!(
            error_exit_code(&Error::Checkpoint {
                path: "p".into(),
                detail: "d".into()
            }),
            1
        );
        assert_eq!(
            error_exit_code(&Error::InsufficientTable { needed: 2, have: 1 }),
            1
        );
    }

    #[test]
    fn theorem_run_writes_a_clean_report() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("report.json");
        let cli = Cli::try_parse_from([
            "sievekit",
            "theorem",
            "--N",
            "1.98e28+1",
            "--out",
            out.to_str().unwrap(),
            "--workers",
            "2",
        ])
        .unwrap();
        let code = run(cli).unwrap();
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(&out).unwrap();
        let report: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(report.command, "theorem");
        assert_eq!(report.inputs["N"], serde_json::json!("19800000000000000000000000001"));
        assert!(!report.constants_ledger.is_empty());
        assert!(report.constants_ledger.iter().all(|e| e.ok));
        assert!(report.results["r4_lower"].as_f64().unwrap() > 0.0);
        assert_eq!(report.results[BOUND_POSITIVE_KEY], serde_json::json!(true));
        assert!(text.contains("\"paper_value\""));
    }

    #[test]
    fn lower_bound_run_reports_the_bound() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("lb.json");
        let cli = Cli::try_parse_from([
            "sievekit",
            "--format",
            "text",
            "lower-bound",
            "--N",
            "1e30",
            "--s",
            "3.3",
            "--alpha",
            "0.07",
            "--out",
            out.to_str().unwrap(),
        ])
        .unwrap();
        let code = run(cli).unwrap();
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.contains("command: lower-bound"), "{text}");
        assert!(text.contains("bound_positive = true"), "{text}");
    }

    #[test]
    fn unknown_format_is_a_usage_error() {
        let cli = Cli::try_parse_from([
            "sievekit",
            "--format",
            "yaml",
            "verify-interval",
            "--n-min",
            "1",
            "--n-max",
            "10",
            "--k",
            "3",
        ])
        .unwrap();
        let err = run(cli).unwrap_err();
        assert_eq!(error_exit_code(&err), 2);
    }
}
