//! `mominq`: command-line front end for mominq-core.
//!
//! Every run prints a JSON `RunReport` on stdout and a short summary on
//! stderr. Exit status 0 means success, 1 a failed check or a conjecture
//! violation, 2 an input or usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use mominq_core::io::{load_law, load_pair, parse_law_json, parse_rational_law_json};
use mominq_core::{
    certify, check_inequality_from, check_with_precision, divergence, evaluate_form, fuzz,
    fuzz_with_jobs, kl_bounds, lambda_with, run_suite, CheckId, DiscreteLaw, FormId, Measure,
    OrderParam, Precision, RationalLaw, SamplerConfig,
};
use serde::Serialize;
use serde_json::{json, Value};

const EXIT_OK: u8 = 0;
const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INPUT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(
    name = "mominq",
    version,
    about = "Moment-difference functionals, refinement forms and divergence bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// λ_s of a law.
    Lambda {
        #[arg(long)]
        law: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
        #[arg(long, env = "MOMINQ_PRECISION", default_value = "double")]
        precision: Precision,
    },
    /// Evaluate a named form.
    Form {
        #[arg(long)]
        id: FormId,
        #[arg(long)]
        law: PathBuf,
        #[arg(long, num_args = 1.., required = true, allow_negative_numbers = true)]
        params: Vec<f64>,
        #[arg(long, env = "MOMINQ_PRECISION", default_value = "double")]
        precision: Precision,
    },
    /// Check one inequality. Rational law files also get an exact verdict
    /// when every order involved is an integer.
    Check {
        #[arg(long)]
        id: CheckId,
        #[arg(long)]
        law: PathBuf,
        #[arg(long, num_args = 1.., required = true, allow_negative_numbers = true)]
        params: Vec<f64>,
        /// `double` escalates to double-double near the tolerance; `dd`
        /// evaluates in double-double only.
        #[arg(long, env = "MOMINQ_PRECISION", default_value = "double")]
        precision: Precision,
    },
    /// A divergence between two distributions.
    Div {
        #[arg(long)]
        measure: Measure,
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        param: Option<f64>,
    },
    /// Classical and refined KL bounds.
    Bounds {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
    },
    /// Randomized campaigns over the proved inequalities.
    Suite {
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        id: Option<CheckId>,
    },
    /// Counterexample search for one conjecture.
    Fuzz {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        conjecture: u8,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        rational: bool,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: Option<u64>,
        /// Also write the FuzzReport here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct RunReport {
    command: &'static str,
    inputs: Vec<String>,
    results: Value,
    exit_status: u8,
}

struct Outcome {
    results: Value,
    failed: bool,
    summary: String,
}

impl Outcome {
    fn ok(results: impl Serialize, summary: String) -> anyhow::Result<Self> {
        Self::new(results, false, summary)
    }

    fn new(results: impl Serialize, failed: bool, summary: String) -> anyhow::Result<Self> {
        Ok(Self {
            results: serde_json::to_value(results)?,
            failed,
            summary,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, inputs) = describe(&cli.command);
    let (results, exit_status) = match execute(cli.command) {
        Ok(outcome) => {
            eprintln!("{}", outcome.summary);
            let status = if outcome.failed {
                EXIT_CHECK_FAILED
            } else {
                EXIT_OK
            };
            (outcome.results, status)
        }
        Err(e) => {
            let message = format!("{e:#}");
            eprintln!("error: {message}");
            (json!({ "error": message }), EXIT_INPUT_ERROR)
        }
    };
    let report = RunReport {
        command,
        inputs,
        results,
        exit_status,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    ExitCode::from(exit_status)
}

fn describe(command: &Command) -> (&'static str, Vec<String>) {
    let paths = |ps: &[&PathBuf]| ps.iter().map(|p| p.display().to_string()).collect();
    match command {
        Command::Lambda { law, .. } => ("lambda", paths(&[law])),
        Command::Form { law, .. } => ("form", paths(&[law])),
        Command::Check { law, .. } => ("check", paths(&[law])),
        Command::Div { p, q, .. } => ("div", paths(&[p, q])),
        Command::Bounds { p, q } => ("bounds", paths(&[p, q])),
        Command::Suite { .. } => ("suite", Vec::new()),
        Command::Fuzz { .. } => ("fuzz", Vec::new()),
    }
}

fn execute(command: Command) -> anyhow::Result<Outcome> {
    match command {
        Command::Lambda { law, s, precision } => {
            let (law, _) = read_law(&law)?;
            let value = lambda_with(&law, s, precision)?;
            Outcome::ok(
                json!({
                    "s": s,
                    "lambda": value,
                    "branch": OrderParam::new(s).branch(),
                    "precision": precision,
                }),
                format!("lambda_{s} = {value:e} ({precision:?})"),
            )
        }
        Command::Form {
            id,
            law,
            params,
            precision,
        } => {
            let (law, _) = read_law(&law)?;
            let value = evaluate_form(id, &law, &params, precision)?;
            Outcome::ok(
                json!({
                    "form": id,
                    "params": params,
                    "value": value,
                    "precision": precision,
                }),
                format!("{id}{params:?} = {value:e}"),
            )
        }
        Command::Check {
            id,
            law,
            params,
            precision,
        } => {
            let (law, rational) = read_law(&law)?;
            let report = match precision {
                Precision::Double => check_inequality_from(id, &law, &params, precision)?,
                Precision::DoubleDouble => check_with_precision(id, &law, &params, precision)?,
            };
            let exact = rational.and_then(|r| certify(id, &r, &params).ok());
            let passed = match &exact {
                Some(v) => v.sign != mominq_core::Sign::Negative,
                None => report.passed,
            };
            let verdict = if passed { "passed" } else { "FAILED" };
            let summary = format!(
                "{id}: residual {:e} at scale {:e}, {verdict}",
                report.residual, report.scale
            );
            Outcome::new(
                json!({ "report": report, "exact": exact }),
                !passed,
                summary,
            )
        }
        Command::Div {
            measure,
            p,
            q,
            param,
        } => {
            let pair = load_pair(&p, &q)?;
            let value = divergence(measure, &pair, param)?;
            Outcome::ok(
                json!({ "measure": measure, "param": param, "value": value }),
                format!("{measure} = {value:e}"),
            )
        }
        Command::Bounds { p, q } => {
            let report = kl_bounds(&load_pair(&p, &q)?);
            let summary = format!(
                "f1 {:.6e} <= kl {:.6e} <= f2 {:.6e}: {}",
                report.f1,
                report.kl,
                report.f2,
                if report.ordered {
                    "ordered"
                } else {
                    "NOT ordered"
                }
            );
            let failed = !report.ordered;
            Outcome::new(report, failed, summary)
        }
        Command::Suite { trials, seed, id } => {
            let ids = match id {
                Some(id) => vec![id],
                None => CheckId::PROVED.to_vec(),
            };
            let reports = run_suite(&ids, &SamplerConfig::new(trials, seed))?;
            let failed = reports.iter().any(|r| r.has_violations());
            let summary = reports
                .iter()
                .map(|r| {
                    format!(
                        "{:<12} {} trials, {} skipped, {} violations",
                        r.check_id.name(),
                        r.trials_run,
                        r.skipped,
                        r.violations.len()
                    )
                })
                .collect::<Vec<_>>()
                .join("\n");
            Outcome::new(reports, failed, summary)
        }
        Command::Fuzz {
            conjecture,
            trials,
            seed,
            rational,
            jobs,
            out,
        } => {
            let id = if conjecture == 1 {
                CheckId::Conjecture1
            } else {
                CheckId::Conjecture2
            };
            let config = SamplerConfig {
                rational_mode: rational,
                ..SamplerConfig::new(trials, seed)
            };
            let report = match jobs {
                Some(jobs) => fuzz_with_jobs(id, &config, usize::try_from(jobs)?)?,
                None => fuzz(id, &config)?,
            };
            if let Some(out) = &out {
                fs::write(out, report.to_json())
                    .with_context(|| format!("writing {}", out.display()))?;
            }
            let summary = format!(
                "{id}: {} trials, {} skipped, {} escalations, {} violations",
                report.trials_run,
                report.skipped,
                report.precision_escalations,
                report.violations.len()
            );
            let failed = report.has_violations();
            Outcome::new(report, failed, summary)
        }
    }
}

/// Reads a float law, or a rational law whose float image is used for the
/// numeric evaluation.
fn read_law(path: &Path) -> anyhow::Result<(DiscreteLaw, Option<RationalLaw>)> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        return Ok((load_law(path)?, None));
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(rational) = parse_rational_law_json(&text) {
        return Ok((rational.to_float_law()?, Some(rational)));
    }
    let law = parse_law_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok((law, None))
}
