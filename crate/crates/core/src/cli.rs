//! The `hur` command line.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::atlas::{self, ClassifyOptions};
use crate::certificate::RealizationCertificate;
use crate::football::{self, FootballError, RealizeOptions, StepOverride};
use crate::oracle::{self, OracleOptions, Outcome, SearchBudget};
use crate::partition::{parse_datum, theorem2_applies, validate, BranchDatum, ParseError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hur", version, about = "Realizability of branch data for coverings of the sphere")]
pub struct Cli {
    /// Emit a single JSON document on standard output.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a datum and report Riemann-Hurwitz and eligibility flags.
    Check { datum: String },
    /// Decide realizability by exhaustive permutation search.
    Decide {
        datum: String,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Build a certificate by degree reduction (falls back to `decide`).
    Realize {
        datum: String,
        /// Also print the reduction chain.
        #[arg(long)]
        chain: bool,
        #[command(flatten)]
        steering: SteeringArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Print the reduction chain only.
    Reduce {
        datum: String,
        #[command(flatten)]
        steering: SteeringArgs,
    },
    /// Check a certificate (file or standard input).
    Verify { file: Option<PathBuf> },
    /// Classify every sphere candidate of a degree.
    Atlas {
        degree: u32,
        /// JSONL output; the summary goes next to it as `.summary.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep the complete prefix of an existing output file.
        #[arg(long)]
        resume: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = atlas::DEFAULT_MAX_DEGREE)]
        max_degree: u32,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct BudgetArgs {
    /// Node budget for the search; unlimited when absent.
    #[arg(long, env = "HUR_MAX_NODES")]
    pub max_nodes: Option<u64>,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    pub max_seconds: Option<f64>,
    /// Worker threads for the search.
    #[arg(long = "search-jobs", default_value_t = 1)]
    pub search_jobs: usize,
}

impl BudgetArgs {
    fn options(&self) -> OracleOptions {
        OracleOptions {
            budget: SearchBudget {
                max_nodes: self.max_nodes,
                max_time: self.max_seconds.map(Duration::from_secs_f64),
            },
            jobs: self.search_jobs.max(1),
            ..OracleOptions::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SteeringArgs {
    /// JSON array with one entry (object or null) per reduction step.
    #[arg(long = "override")]
    pub override_file: Option<PathBuf>,
    /// Replay the published chain of worked example N.
    #[arg(long, hide = true)]
    pub paper_chain: Option<u32>,
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn parse(text: &str) -> Result<BranchDatum, Failure> {
    parse_datum(text).map_err(|e| match e {
        ParseError::Datum(inner) => Failure { code: EXIT_NEGATIVE, message: format!("invalid datum: {inner}") },
        other => usage(format!("cannot parse `{text}`: {other}")),
    })
}

fn overrides(args: &SteeringArgs, datum: &BranchDatum) -> Result<Vec<Option<StepOverride>>, Failure> {
    if let Some(n) = args.paper_chain {
        let (example, steps) = football::worked_example(n).ok_or_else(|| usage(format!("no worked example {n}")))?;
        if example.partitions() != datum.partitions() {
            return Err(usage(format!("--paper-chain {n} expects the datum `{example}`")));
        }
        return Ok(steps);
    }
    match &args.override_file {
        None => Ok(Vec::new()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "hur: {}", f.message);
            f.code
        }
    }
}

fn emit(out: &mut dyn Write, value: &serde_json::Value) {
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(value).expect("json value"));
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match &cli.command {
        Command::Check { datum } => {
            let datum = parse(datum)?;
            let report = validate(&datum);
            if cli.json {
                emit(out, &json!({ "datum": datum, "report": report }));
            } else {
                let _ = writeln!(out, "datum: {}", datum.bracketed());
                let _ = writeln!(out, "degree: {}  k: {}  nu: {}", report.degree, report.k, report.nu);
                let _ = writeln!(out, "candidate sphere: {}", report.candidate_sphere);
                match report.genus {
                    Some(g) => {
                        let _ = writeln!(out, "genus-consistent: true (genus {g})");
                    }
                    None => {
                        let _ = writeln!(out, "genus-consistent: false");
                    }
                }
                let _ = writeln!(out, "k >= min length + 2: {}", report.theorem2_eligible);
                if let Some((a, b)) = report.zheng_family {
                    let _ = writeln!(out, "known exceptional family member (d' = {a}, d'' = {b})");
                }
            }
            Ok(if report.candidate_sphere { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Decide { datum, budget } => {
            let datum = parse(datum)?;
            decide(&datum, budget, cli.json, out)
        }
        Command::Realize { datum, chain, steering, budget } => {
            let datum = parse(datum)?;
            if !theorem2_applies(&datum) {
                let _ = writeln!(err, "note: {} does not satisfy k >= min length + 2; deciding by search", datum.bracketed());
                return decide(&datum, budget, cli.json, out);
            }
            let options = RealizeOptions {
                overrides: overrides(steering, &datum)?,
                fallback: budget.options(),
                ..RealizeOptions::default()
            };
            let cert = football::realize_with(&datum, &options).map_err(realize_failure)?;
            if cli.json {
                emit(out, &serde_json::to_value(&cert).expect("certificate json"));
            } else {
                if *chain {
                    if let Some(c) = &cert.chain {
                        let _ = write!(out, "{c}");
                    }
                }
                print_tuple(out, &cert);
                emit(out, &serde_json::to_value(&cert).expect("certificate json"));
            }
            Ok(EXIT_OK)
        }
        Command::Reduce { datum, steering } => {
            let datum = parse(datum)?;
            let steps = overrides(steering, &datum)?;
            let chain = football::reduce_chain(&datum, &steps).map_err(realize_failure)?;
            if cli.json {
                emit(out, &serde_json::to_value(&chain).expect("chain json"));
            } else {
                let _ = write!(out, "{chain}");
            }
            Ok(EXIT_OK)
        }
        Command::Verify { file } => {
            let text = match file {
                Some(path) => std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?,
                None => {
                    let mut s = String::new();
                    std::io::stdin().read_to_string(&mut s).map_err(|e| usage(format!("stdin: {e}")))?;
                    s
                }
            };
            let cert: RealizationCertificate =
                serde_json::from_str(&text).map_err(|e| usage(format!("certificate: {e}")))?;
            let ok = cert.reverify();
            if cli.json {
                emit(out, &json!({ "datum": cert.datum, "verified": ok }));
            } else {
                let _ = writeln!(out, "{}: {}", cert.datum.bracketed(), if ok { "verified" } else { "NOT verified" });
            }
            Ok(if ok { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Atlas { degree, out: path, resume, jobs, max_degree, budget } => {
            let path = path.clone().unwrap_or_else(|| PathBuf::from(format!("atlas-d{degree}.jsonl")));
            let options = ClassifyOptions {
                max_degree: *max_degree,
                oracle: OracleOptions { jobs: 1, ..budget.options() },
                jobs: *jobs,
                ..ClassifyOptions::default()
            };
            let run = atlas::run(*degree, &path, *resume, &options).map_err(|e| usage(e.to_string()))?;
            let unknown: usize = run.summary.iter().map(|r| r.unknown).sum();
            if cli.json {
                emit(
                    out,
                    &json!({
                        "degree": degree,
                        "records": run.records.len(),
                        "resumed_from": run.resumed_from,
                        "jsonl": path,
                        "summary_csv": run.summary_path,
                        "summary": run.summary,
                    }),
                );
            } else {
                let _ = write!(out, "{}", atlas::summary_csv(&run.summary));
                for r in run.records.iter().filter(|r| r.decision == atlas::Verdict::Exceptional) {
                    let _ = writeln!(out, "exceptional: {}", r.datum.bracketed());
                }
                let _ = writeln!(out, "wrote {} and {}", path.display(), run.summary_path.display());
            }
            Ok(if unknown > 0 { EXIT_UNKNOWN } else { EXIT_OK })
        }
    }
}

fn realize_failure(e: FootballError) -> Failure {
    let code = match e {
        FootballError::FallbackExhausted(_) => EXIT_UNKNOWN,
        FootballError::BadOverride(_) => EXIT_USAGE,
        _ => EXIT_NEGATIVE,
    };
    Failure { code, message: e.to_string() }
}

fn print_tuple(out: &mut dyn Write, cert: &RealizationCertificate) {
    for (pi, perm) in cert.datum.partitions().iter().zip(cert.in_datum_order()) {
        let _ = writeln!(out, "[{pi}]  {perm}");
    }
}

fn decide(datum: &BranchDatum, budget: &BudgetArgs, json_mode: bool, out: &mut dyn Write) -> Result<i32, Failure> {
    let decision = oracle::decide_with(datum, &budget.options()).map_err(|e| match e {
        oracle::OracleError::NotGenusConsistent { .. } => Failure { code: EXIT_NEGATIVE, message: e.to_string() },
        oracle::OracleError::DegreeTooLarge(_) => usage(e.to_string()),
    })?;
    let code = match decision.outcome {
        Outcome::Realizable(_) => EXIT_OK,
        Outcome::Exceptional => EXIT_NEGATIVE,
        Outcome::Unknown => EXIT_UNKNOWN,
    };
    if json_mode {
        emit(
            out,
            &json!({
                "datum": datum,
                "decision": decision.outcome.label(),
                "nodes": decision.nodes_explored,
                "ms": decision.wall_time.as_secs_f64() * 1e3,
                "parallel": decision.parallel,
                "certificate": decision.certificate(),
            }),
        );
    } else {
        let _ = writeln!(out, "{}: {}", datum.bracketed(), decision.outcome.label());
        let _ = writeln!(out, "nodes: {}  time: {:.3?}", decision.nodes_explored, decision.wall_time);
        if let Some(cert) = decision.certificate() {
            print_tuple(out, cert);
        }
    }
    Ok(code)
}
