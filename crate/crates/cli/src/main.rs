//! `markov-chaos`: simulate chains, scan for witnesses of chaos, certify the
//! shift-space conditions and reproduce the four-level walk.
//!
//! Exit status: 0 on success, 1 on invalid input or a failed check, 2 on a
//! usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use markov_chaos::chaos::{self, DEFAULT_WINDOW};
use markov_chaos::io::{self, Provenance};
use markov_chaos::random_walk::{self, WalkConfig, DEFAULT_INITIAL};
use markov_chaos::sequence_space::{self, words, DEFAULT_DEPTH, DEFAULT_ENUMERATION_BUDGET};
use markov_chaos::{Chain, ChainSpec, Cylinder, EnumerationBudget};

const BUDGET_VAR: &str = "MARKOV_CHAOS_ENUM_BUDGET";

#[derive(Parser)]
#[command(name = "markov-chaos", version, about = "Markov chains as symbolic dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a chain spec and print its digest.
    Validate {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Simulate a sample path and write it as CSV.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        /// Overrides the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the spec's length.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        length: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan a path for recurrence/divergence witnesses.
    Analyze {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        path: PathBuf,
        #[arg(long, default_value_t = DEFAULT_WINDOW, value_parser = clap::value_parser!(usize))]
        window: usize,
        /// Defaults to half the smallest distance between states.
        #[arg(long)]
        epsilon0: Option<f64>,
        #[arg(long)]
        max_witnesses: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diameter, separation, similarity and Devaney certificates.
    Certify {
        #[arg(long)]
        spec: PathBuf,
        /// Cylinder depth n.
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
        /// Truncation depth K for diameters and periodic points.
        #[arg(long, default_value_t = DEFAULT_DEPTH as u64, value_parser = clap::value_parser!(u64).range(2..=1000))]
        truncation: u64,
        /// Truncation for the exhaustive similarity check (default: depth + 4).
        #[arg(long)]
        coverage_truncation: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report which words of a given length occur in a path.
    Coverage {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        path: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        word_length: u64,
        /// Also write the per-word table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the reflecting four-level walk and export its artifacts.
    ExampleWalk {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Raw steps, including the starting level.
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        length: u64,
        #[arg(long, default_value_t = 60.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
        #[arg(long)]
        no_connectors: bool,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[arg(long, default_value_t = 0.5)]
        epsilon0: f64,
    },
}

/// A failure that maps to exit status 1 or 2.
struct Failure {
    status: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl ToString) -> Self {
        Self { status: 1, message: message.to_string() }
    }

    fn usage(message: impl ToString) -> Self {
        Self { status: 2, message: message.to_string() }
    }
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(err: E) -> Self {
        Failure::invalid(err)
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.status)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Validate { spec } => {
            let chain = load_chain(&spec)?;
            emit_json(
                None,
                &json!({
                    "provenance": provenance(&chain, chain.spec.seed),
                    "valid": true,
                    "states": chain.space.labels(),
                    "order": chain.model.order(),
                    "strictly_positive": chain.model.is_strictly_positive(),
                }),
            )?;
            Ok(true)
        }
        Command::Simulate { spec, seed, length, out } => {
            let chain = load_chain(&spec)?;
            let seed = seed.unwrap_or(chain.spec.seed);
            let length = length.map_or(chain.spec.length, |l| l as usize);
            let initial = chain
                .initial
                .clone()
                .unwrap_or_else(|| markov_chaos::random_initial(&chain.model, seed));
            let realization = markov_chaos::simulate(&chain.model, &initial, length, seed)?;
            let csv = io::write_path_csv(&realization.path, &chain.space, &provenance(&chain, seed));
            emit(out.as_deref(), &csv)?;
            Ok(true)
        }
        Command::Analyze { spec, path, window, epsilon0, max_witnesses, out } => {
            let chain = load_chain(&spec)?;
            let (states, seed) = load_path(&path, &chain)?;
            let epsilon0 = epsilon0.unwrap_or_else(|| chaos::default_epsilon0(&chain.space));
            let report = chaos::find_witnesses(
                &states,
                &chain.space,
                window,
                epsilon0,
                max_witnesses.unwrap_or(usize::MAX),
            )?;
            emit_json(
                out.as_deref(),
                &json!({ "provenance": provenance(&chain, seed), "report": report }),
            )?;
            Ok(true)
        }
        Command::Certify { spec, depth, truncation, coverage_truncation, out } => {
            let chain = load_chain(&spec)?;
            certify(&chain, depth as usize, truncation as usize, coverage_truncation, out.as_deref())
        }
        Command::Coverage { spec, path, word_length, csv, out } => {
            let chain = load_chain(&spec)?;
            let (states, seed) = load_path(&path, &chain)?;
            let report = chaos::arc_coverage(&states, &chain.model, word_length as usize, budget()?)?;
            let prov = provenance(&chain, seed);
            if let Some(csv) = csv {
                write_file(&csv, &io::write_coverage_csv(&report, &chain.space, &prov))?;
            }
            emit_json(out.as_deref(), &json!({ "provenance": prov, "report": report }))?;
            Ok(true)
        }
        Command::ExampleWalk { out_dir, seed, length, horizon, dt, no_connectors, window, epsilon0 } => {
            example_walk(
                &out_dir,
                seed,
                length as usize,
                WalkConfig { horizon, dt, ..WalkConfig::default() },
                !no_connectors,
                window,
                epsilon0,
            )
        }
    }
}

fn budget() -> Result<EnumerationBudget, Failure> {
    match std::env::var(BUDGET_VAR) {
        Err(_) => Ok(EnumerationBudget(DEFAULT_ENUMERATION_BUDGET)),
        Ok(text) => text
            .trim()
            .parse()
            .map(EnumerationBudget)
            .map_err(|_| Failure::usage(format!("{BUDGET_VAR} must be a non-negative integer, got {text:?}"))),
    }
}

fn load_chain(path: &Path) -> Result<Chain, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    let spec = ChainSpec::from_json(&text)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    spec.build().map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

/// Reads a path CSV; the seed comes from its provenance lines when present.
fn load_path(path: &Path, chain: &Chain) -> Result<(Vec<usize>, u64), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    let states = io::read_path_csv(&text, &chain.space)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    let seed = Provenance::from_comments(&text).map_or(chain.spec.seed, |p| p.seed);
    Ok((states, seed))
}

fn provenance(chain: &Chain, seed: u64) -> Provenance {
    Provenance::new(chain.digest.clone(), seed)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, contents: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_file(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, value: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    emit(out, &text)
}

fn certify(
    chain: &Chain,
    depth: usize,
    truncation: usize,
    coverage_truncation: Option<usize>,
    out: Option<&Path>,
) -> Outcome {
    if truncation <= depth {
        return Err(Failure::usage(format!(
            "--truncation ({truncation}) must exceed --depth ({depth})"
        )));
    }
    let budget = budget()?;
    let m = chain.space.size();

    let diameter = sequence_space::check_diameter_condition(&chain.space, depth, truncation)?;
    let separation = (1..=depth)
        .map(|n| sequence_space::check_separation_condition(&chain.space, n, budget))
        .collect::<Result<Vec<_>, _>>()?;

    let cov_k = coverage_truncation.unwrap_or(depth + 4);
    let mut checked = 0usize;
    let mut failures = Vec::new();
    for n in 1..=depth {
        budget.words(m, n)?;
        for prefix in words(m, n) {
            let cyl = Cylinder::new(prefix, m)?;
            let result = sequence_space::similarity_coverage(&cyl, m, cov_k, budget)?;
            checked += 1;
            if !result.pass {
                failures.push(result);
            }
        }
    }

    let devaney = chaos::devaney_certificate(&chain.space, depth, truncation, budget)?;
    let pass = diameter.pass && failures.is_empty() && devaney.pass();
    let epsilon0: Vec<Value> = separation
        .iter()
        .map(|c| json!({ "degree": c.degree, "epsilon0": c.epsilon0, "max_epsilon0": c.max_epsilon0 }))
        .collect();

    emit_json(
        out,
        &json!({
            "provenance": provenance(chain, chain.spec.seed),
            "pass": pass,
            "diameter": diameter,
            "separation": {
                "epsilon0": epsilon0,
                "certificates": separation,
            },
            "similarity": {
                "truncation": cov_k,
                "cylinders_checked": checked,
                "pass": failures.is_empty(),
                "failures": failures,
            },
            "devaney": devaney,
        }),
    )?;
    Ok(pass)
}

fn example_walk(
    out_dir: &Path,
    seed: u64,
    length: usize,
    config: WalkConfig,
    connectors: bool,
    window: usize,
    epsilon0: f64,
) -> Outcome {
    let intervals = config.intervals().map_err(Failure::usage)?;
    let chain = random_walk::build_walk_chain();
    let realization = random_walk::simulate_walk(length.max(intervals + 1), DEFAULT_INITIAL, seed)?;
    let raw = &realization.path[..length];
    let events = random_walk::encode_walk_to_events(raw)?;
    let prov = Provenance::new(chain.raw_model.digest(), seed);

    let trace = random_walk::step_function_export(&realization.path, &config)?;
    let report = chaos::find_witnesses(&events, &chain.event_space, window, epsilon0, usize::MAX)?;

    fs::create_dir_all(out_dir).map_err(|e| Failure::invalid(format!("{}: {e}", out_dir.display())))?;
    write_file(&out_dir.join("walk_raw.csv"), &io::write_path_csv(raw, &chain.raw_space, &prov))?;
    write_file(
        &out_dir.join("walk_events.csv"),
        &io::write_path_csv(&events, &chain.event_space, &prov),
    )?;
    write_file(&out_dir.join("walk_trace.csv"), &trace.to_csv(&prov))?;
    write_file(&out_dir.join("walk_trace.svg"), &trace.to_svg(connectors, &prov))?;

    let summary = json!({
        "provenance": prov,
        "raw_rows": chain.raw_model.rows(),
        "event_rows": chain.event_model.rows(),
        "raw_length": raw.len(),
        "event_length": events.len(),
        "intervals": trace.intervals,
        "witnesses": report,
    });
    emit_json(Some(&out_dir.join("walk_summary.json")), &summary)?;
    println!(
        "{} raw steps, {} events, {} witnesses (w = {window}, epsilon0 = {epsilon0}); wrote {}",
        raw.len(),
        events.len(),
        report.witnesses.len(),
        out_dir.display()
    );
    Ok(true)
}
