//! Command surface for the `incshap` binary.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use incshap::approx::{estimate_with, ApproxParams, Mode};
use incshap::block_tree::build_tree;
use incshap::exact::ExactEngine;
use incshap::io::load;
use incshap::measures::{enumerate_repairs, measure};
use incshap::oracle::{shapley_bruteforce_perms_with, CoalitionTable, OracleLimits};
use incshap::report::{Method, ShapleyReport, DECIMAL_DIGITS};
use incshap::{classify, combinatorics::to_decimal, Database, Error, FactId, MeasureKind, Result};
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_REFUSAL: i32 = 2;

const SUGGESTION: &str = "retry with `--method approx` for a sampled estimate or `--method oracle` for small databases";

#[derive(Parser, Debug)]
#[command(name = "incshap", version, about = "Shapley values of facts for inconsistency measures under functional dependencies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the tractability class of each relation's FDs.
    Classify {
        #[command(flatten)]
        input: Input,
        /// Also print the block tree of every chain relation.
        #[arg(long)]
        dump_tree: bool,
    },
    /// Print the value of a measure on the whole database.
    Measure {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = parse_measure)]
        measure: MeasureKind,
    },
    /// Print Shapley values as a JSON report.
    Shapley(ShapleyArgs),
    /// Print facts by descending Shapley value.
    Rank {
        #[command(flatten)]
        shapley: ShapleyArgs,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Brute-force Shapley values for small databases.
    Oracle {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = parse_measure)]
        measure: MeasureKind,
        #[command(flatten)]
        target: Target,
        /// Average over all orderings instead of all subsets.
        #[arg(long)]
        perms: bool,
    },
    /// List the subset repairs of the database.
    Repairs {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1000)]
        limit: usize,
    },
}

#[derive(Args, Debug)]
struct Input {
    /// Manifest describing relations, CSV files and the FD file.
    #[arg(long)]
    manifest: PathBuf,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Target {
    /// Fact id such as `Trains:0`.
    #[arg(long)]
    fact: Option<String>,
    #[arg(long)]
    all: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Exact,
    Approx,
    Oracle,
}

#[derive(Args, Debug)]
struct ShapleyArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_parser = parse_measure)]
    measure: MeasureKind,
    #[command(flatten)]
    target: Target,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    method: MethodArg,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, value_parser = parse_mode, default_value = "additive")]
    mode: Mode,
    #[arg(long, env = "INCSHAP_SEED", default_value_t = 0)]
    seed: u64,
    /// Fixed sample count instead of the computed one.
    #[arg(long)]
    samples: Option<u64>,
    /// Declared bound on a single marginal contribution.
    #[arg(long)]
    marginal_cap: Option<u64>,
}

fn parse_measure(s: &str) -> std::result::Result<MeasureKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    suggestion: Option<&'a str>,
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run_command<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let refusal = e.is_refusal();
            let report = ErrorReport { error: e.kind(), message: e.to_string(), suggestion: refusal.then_some(SUGGESTION) };
            let _ = writeln!(err, "{}", serde_json::to_string(&report).expect("error report serializes"));
            if refusal {
                EXIT_REFUSAL
            } else {
                EXIT_INPUT
            }
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Classify { input, dump_tree } => {
            let (_, db, fds) = load(&input.manifest)?;
            let schema = db.schema();
            for (r, class) in classify(schema, &fds).iter().enumerate() {
                let name = &schema.relation(r).name;
                match class.chain() {
                    Some(chain) => {
                        let fds: Vec<String> = chain.iter().map(|fd| fd.display(schema).to_string()).collect();
                        writeln!(out, "{name}\t{class}\t{}", fds.join("; "))?;
                        if dump_tree {
                            let facts: Vec<usize> = db.relation_range(r).collect();
                            out.write_all(build_tree(&db, &facts, chain)?.dump(&db).as_bytes())?;
                        }
                    }
                    None => writeln!(out, "{name}\t{class}")?,
                }
            }
        }
        Command::Measure { input, measure: kind } => {
            let (_, db, fds) = load(&input.manifest)?;
            writeln!(out, "{}", measure(kind, &db, &fds)?)?;
        }
        Command::Shapley(args) => {
            let report = shapley_report(&args)?;
            write_json(out, &report)?;
        }
        Command::Rank { shapley, top } => {
            let report = shapley_report(&shapley)?;
            for (rank, (id, value)) in report.ranked(top).iter().enumerate() {
                writeln!(out, "{}\t{id}\t{}\t{value}", rank + 1, to_decimal(value, DECIMAL_DIGITS))?;
            }
        }
        Command::Oracle { input, measure: kind, target, perms } => {
            let (_, db, fds) = load(&input.manifest)?;
            let facts = targets(&db, &target)?;
            let limits = OracleLimits::default();
            let values = if perms {
                facts
                    .iter()
                    .map(|&i| {
                        let id = db.fact(i).id.clone();
                        shapley_bruteforce_perms_with(&db, &fds, &id, kind, limits).map(|v| (id, v))
                    })
                    .collect::<Result<Vec<_>>>()?
            } else {
                let table = CoalitionTable::build(&db, &fds, kind, limits.max_facts_subsets)?;
                facts.iter().map(|&i| (db.fact(i).id.clone(), table.shapley(i))).collect()
            };
            let total = measure(kind, &db, &fds)?;
            write_json(out, &ShapleyReport::new(kind, Method::Oracle, values, &total, target.all))?;
        }
        Command::Repairs { input, limit } => {
            let (_, db, fds) = load(&input.manifest)?;
            let list = enumerate_repairs(&db, &fds, limit)?;
            for repair in &list.repairs {
                let ids: Vec<String> = repair.iter().map(ToString::to_string).collect();
                writeln!(out, "{}", ids.join(" "))?;
            }
            if list.truncated {
                writeln!(out, "# truncated after {limit} repairs")?;
            }
        }
    }
    Ok(())
}

fn write_json(out: &mut dyn Write, report: &ShapleyReport) -> Result<()> {
    let text = serde_json::to_string_pretty(report).expect("report serializes");
    writeln!(out, "{text}")?;
    Ok(())
}

fn targets(db: &Database, target: &Target) -> Result<Vec<usize>> {
    match &target.fact {
        Some(text) => Ok(vec![db.require(&text.parse::<FactId>()?)?]),
        None => Ok((0..db.len()).collect()),
    }
}

fn shapley_report(args: &ShapleyArgs) -> Result<ShapleyReport> {
    let (_, db, fds) = load(&args.input.manifest)?;
    let kind = args.measure;
    let facts = targets(&db, &args.target)?;
    let complete = args.target.all;
    match args.method {
        MethodArg::Exact => {
            let engine = ExactEngine::new(&db, &fds);
            let values = if complete {
                engine.shapley_all(kind)?
            } else {
                facts.iter().map(|&i| engine.shapley(kind, i)).collect::<Result<_>>()?
            };
            let total = measure(kind, &db, &fds)?;
            Ok(ShapleyReport::new(kind, Method::Exact, ids(&db, &facts, values), &total, complete))
        }
        MethodArg::Oracle => {
            let table = CoalitionTable::build(&db, &fds, kind, OracleLimits::default().max_facts_subsets)?;
            let values = facts.iter().map(|&i| table.shapley(i)).collect();
            let total = measure(kind, &db, &fds)?;
            Ok(ShapleyReport::new(kind, Method::Oracle, ids(&db, &facts, values), &total, complete))
        }
        MethodArg::Approx => {
            let mut params = ApproxParams::new(args.eps, args.delta, args.mode, args.seed)?;
            params.samples = args.samples;
            params.marginal_cap = args.marginal_cap;
            params.validate()?;
            let engine = ExactEngine::new(&db, &fds);
            let estimates = facts
                .iter()
                .map(|&i| {
                    estimate_with(&db, engine.graphs(), engine.classes(), i, kind, &params)
                        .map(|e| (db.fact(i).id.clone(), e))
                })
                .collect::<Result<Vec<_>>>()?;
            let total = measure(kind, &db, &fds)?;
            Ok(ShapleyReport::approx(kind, estimates, &total, &params))
        }
    }
}

fn ids<T>(db: &Database, facts: &[usize], values: Vec<T>) -> Vec<(FactId, T)> {
    facts.iter().map(|&i| db.fact(i).id.clone()).zip(values).collect()
}
