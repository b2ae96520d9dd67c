//! `qanova` — compare medians and other quantiles across independent groups
//! with a bootstrap test that tolerates tied values.

mod input;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use qanova::simulation::{DEFAULT_NBOOT, DEFAULT_SEED};
use qanova::{
    hd_estimate, ideal_fourths, qanova_multi, run_grid, Error, GroupedData, Quantile,
};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_COMPUTE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "qanova",
    version,
    about = "Global comparison of group quantiles via a tie-tolerant bootstrap test",
    after_help = "Input files are long-format CSV with a `group,value` header. \
                  All commands are deterministic for a fixed --seed (default 42)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    /// Human-readable report.
    Text,
    /// One JSON record per quantile.
    JsonLines,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether all groups share the target quantiles.
    Test {
        /// Long-format CSV file (`group,value` header).
        #[arg(long)]
        file: PathBuf,
        /// Target quantiles, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.25, 0.5, 0.75])]
        q: Vec<f64>,
        /// Bootstrap replicates per quantile.
        #[arg(long, default_value_t = DEFAULT_NBOOT)]
        nboot: usize,
        /// Master seed for the bootstrap streams.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Level used to flag significant p-values in the report.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Output format.
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        out: OutputFormat,
    },
    /// Run a Monte Carlo grid described by a TOML config file.
    Simulate {
        /// Grid config; see the README for the format.
        #[arg(long)]
        config: PathBuf,
        /// Directory for results.tsv and results.jsonl.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Per-group Harrell-Davis estimate and ideal-fourths quartiles.
    Hd {
        /// Long-format CSV, or a single column of values.
        #[arg(long)]
        file: PathBuf,
        /// Target quantile for the estimate.
        #[arg(long, default_value_t = 0.5)]
        q: f64,
    },
}

enum CliError {
    /// Unreadable or malformed input, bad flags: exit 1.
    Usage(String),
    /// The computation itself failed: exit 2.
    Compute(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Compute(_) => EXIT_COMPUTE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Compute(m) => m,
        }
    }
}

/// Library errors that stem from the shape of the user's input map to the
/// usage exit code; genuine computation failures map to the compute code.
fn classify(err: Error) -> CliError {
    match err {
        Error::DegenerateCloud | Error::NoConvergence { .. } | Error::WeightSum { .. } => {
            CliError::Compute(err.to_string())
        }
        _ => CliError::Usage(err.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Test {
            file,
            q,
            nboot,
            seed,
            alpha,
            out,
        } => cmd_test(&file, &q, nboot, seed, alpha, out),
        Command::Simulate { config, out_dir } => cmd_simulate(&config, &out_dir),
        Command::Hd { file, q } => cmd_hd(&file, q),
    };
    match outcome {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn parse_quantiles(qs: &[f64]) -> Result<Vec<Quantile>, CliError> {
    qs.iter()
        .map(|&v| Quantile::new(v).map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

/// One line of the machine-readable `test` output.
#[derive(Serialize, Deserialize)]
struct TestRecord {
    q: f64,
    labels: Vec<String>,
    estimates: Vec<f64>,
    pairs: Vec<(String, String)>,
    deltas: Vec<f64>,
    p_value: f64,
    nboot: usize,
    seed: u64,
    alpha: f64,
    skipped_directions: usize,
}

fn cmd_test(
    file: &PathBuf,
    qs: &[f64],
    nboot: usize,
    seed: u64,
    alpha: f64,
    out: OutputFormat,
) -> Result<(), CliError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Usage(format!(
            "--alpha must lie strictly between 0 and 1, got {alpha}"
        )));
    }
    let quantiles = parse_quantiles(qs)?;
    let table = input::read_table(file).map_err(CliError::Usage)?;
    if table.groups.len() < 2 {
        return Err(CliError::Usage(format!(
            "need at least 2 groups, found {} in {}",
            table.groups.len(),
            file.display()
        )));
    }
    let data = GroupedData::new(table.groups.clone()).map_err(classify)?;
    let results = qanova_multi(&data, &quantiles, nboot, seed).map_err(classify)?;

    match out {
        OutputFormat::Text => {
            println!("file: {}", file.display());
            let sizes: Vec<String> = table
                .labels
                .iter()
                .zip(&table.groups)
                .map(|(l, g)| format!("{l} (n={})", g.len()))
                .collect();
            println!("groups: {}", sizes.join(", "));
            println!("nboot: {nboot}   seed: {seed}   alpha: {alpha}");
            for res in &results {
                println!();
                println!("q = {}", res.q);
                for (label, est) in table.labels.iter().zip(&res.estimates) {
                    println!("  estimate  {label} = {est:.6}");
                }
                for (&(j, k), delta) in res.pairs.iter().zip(&res.deltas) {
                    println!(
                        "  delta     {} - {} = {delta:.6}",
                        table.labels[j], table.labels[k]
                    );
                }
                let flag = if res.p_value <= alpha {
                    format!("  (significant at alpha={alpha})")
                } else {
                    String::new()
                };
                println!("  p-value = {}{flag}", res.p_value);
                if res.skipped_directions > 0 {
                    println!(
                        "  note: {} projection directions skipped (ties)",
                        res.skipped_directions
                    );
                }
            }
        }
        OutputFormat::JsonLines => {
            for res in &results {
                let record = TestRecord {
                    q: res.q,
                    labels: table.labels.clone(),
                    estimates: res.estimates.clone(),
                    pairs: res
                        .pairs
                        .iter()
                        .map(|&(j, k)| (table.labels[j].clone(), table.labels[k].clone()))
                        .collect(),
                    deltas: res.deltas.clone(),
                    p_value: res.p_value,
                    nboot: res.nboot,
                    seed: res.seed,
                    alpha,
                    skipped_directions: res.skipped_directions,
                };
                println!(
                    "{}",
                    serde_json::to_string(&record).expect("record serializes")
                );
            }
        }
    }
    Ok(())
}

fn cmd_simulate(config: &PathBuf, out_dir: &PathBuf) -> Result<(), CliError> {
    let text = fs::read_to_string(config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", config.display())))?;
    let cells = qanova::parse_grid(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", config.display())))?;

    let total = cells.len();
    let outcomes = run_grid(&cells, |i, outcome| match &outcome.result {
        Ok(r) => println!(
            "[{}/{}] {}: alpha_hat={:.4} ci=[{:.4},{:.4}] bradley={} degenerate={} ({:.1}s)",
            i + 1,
            total,
            outcome.label,
            r.alpha_hat,
            r.ci_low,
            r.ci_high,
            if r.bradley_ok { "ok" } else { "OUT" },
            r.degenerate,
            r.wall_secs,
        ),
        Err(e) => println!("[{}/{}] {}: FAILED: {e}", i + 1, total, outcome.label),
    });

    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", out_dir.display())))?;
    let tsv_path = out_dir.join("results.tsv");
    let jsonl_path = out_dir.join("results.jsonl");
    fs::write(&tsv_path, qanova::simulation::grid_tsv(&outcomes))
        .map_err(|e| CliError::Compute(format!("cannot write {}: {e}", tsv_path.display())))?;
    fs::write(&jsonl_path, qanova::simulation::grid_jsonl(&outcomes))
        .map_err(|e| CliError::Compute(format!("cannot write {}: {e}", jsonl_path.display())))?;
    println!("wrote {} and {}", tsv_path.display(), jsonl_path.display());

    if outcomes.iter().all(|o| o.result.is_err()) {
        return Err(CliError::Compute("every cell failed".into()));
    }
    Ok(())
}

fn cmd_hd(file: &PathBuf, q: f64) -> Result<(), CliError> {
    let q = Quantile::new(q).map_err(|e| CliError::Usage(e.to_string()))?;
    let table = input::read_table(file).map_err(CliError::Usage)?;
    println!("file: {}", file.display());
    println!("q = {}", q.value());
    for (label, group) in table.labels.iter().zip(&table.groups) {
        let est = hd_estimate(group, q).map_err(classify)?;
        match ideal_fourths(group) {
            Ok((q1, q2)) => println!(
                "  {label}: n={} estimate={est:.6} fourths=[{q1:.6}, {q2:.6}]",
                group.len()
            ),
            Err(_) => println!(
                "  {label}: n={} estimate={est:.6} fourths=n/a (need n >= 3)",
                group.len()
            ),
        }
    }
    Ok(())
}
