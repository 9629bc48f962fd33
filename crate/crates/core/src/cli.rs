//! The `entangle` command-line interface.
//!
//! Exit codes: 0 on success, 1 on validation errors (including bad arguments), 2 on I/O errors.
//! Setting `ENTANGLE_VERBOSE` prints a one-line summary of each command to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::annotation::agreement_report;
use crate::error::{Error, Result};
use crate::infer::infer_batch;
use crate::io;
use crate::label::{cooccurrence_counts, LabelSpace};
use crate::likelihood::PairHandling;
use crate::metrics::{evaluate_datasets, ZeroDivision};
use crate::prior::{estimate_prior, mutual_information_matrix, nats_to_bits, sample_prior, IsingPrior, DEFAULT_EPSILON};
use crate::response::{responses_to_records, FillPolicy};
use crate::stats::{dataset_statistics, StatsReport};
use crate::sweep::alpha_sweep;

#[derive(Debug, Parser)]
#[command(name = "entangle", version, about = "Entanglement-aware MAP correction of multi-label predictions")]
struct Cli {
    /// Newline-separated label names (default: the eight Plutchik emotions).
    #[arg(long, global = true, value_name = "FILE")]
    labels: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Fill {
    Error,
    Neutral,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MiUnit {
    Nats,
    Bits,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corpus statistics, co-occurrence counts and pairwise mutual information.
    Stats {
        gold: PathBuf,
        /// Smoothing pseudo-count for the mutual-information tables.
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long, value_enum, default_value = "nats")]
        unit: MiUnit,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Annotator agreement (Fleiss and pairwise Cohen kappa) and majority-vote gold labels.
    Agree {
        annotations: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write majority-vote gold labels here.
        #[arg(long)]
        gold_out: Option<PathBuf>,
    },
    /// Estimate the Ising prior from gold labels.
    EstimatePrior {
        gold: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Turn tagged model answers into prediction records.
    ParseResponses {
        raw: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "error")]
        fill: Fill,
    },
    /// MAP inference for every prediction record.
    Infer {
        preds: PathBuf,
        #[arg(long)]
        prior: PathBuf,
        #[arg(long)]
        alpha: f64,
        /// Keep (p1, p0) pairs unnormalized.
        #[arg(long)]
        preserve_pairs: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare predicted labels (or MAP output) with gold labels.
    Evaluate {
        pred: PathBuf,
        gold: PathBuf,
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
        zero_division: u8,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate MAP inference over a grid of prior weights.
    Sweep {
        preds: PathBuf,
        gold: PathBuf,
        #[arg(long)]
        prior: PathBuf,
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
        zero_division: u8,
        #[arg(long)]
        preserve_pairs: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sample synthetic gold labels from a prior.
    Synth {
        #[arg(long)]
        prior: PathBuf,
        #[arg(short = 'n', long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn verbose() -> bool {
    std::env::var_os("ENTANGLE_VERBOSE").is_some_and(|v| !v.is_empty() && v != "0")
}

fn sink(output: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match output {
        Some(path) => Box::new(io::create(path)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(output: Option<&Path>, value: &T) -> Result<()> {
    let mut w = sink(output)?;
    let text = serde_json::to_string_pretty(value)?;
    writeln!(w, "{text}")
        .and_then(|_| w.flush())
        .map_err(|source| Error::Io {
            path: output.map(Path::to_path_buf).unwrap_or_default(),
            source,
        })
}

fn read_gold(path: &Path, space: &LabelSpace) -> Result<crate::label::LabeledDataset> {
    io::read_labeled(io::open(path)?, space)
}

fn read_prior(path: &Path, space: &LabelSpace) -> Result<IsingPrior> {
    let prior = IsingPrior::from_json(&io::read_to_string(path)?)?;
    space.check_same(prior.space())?;
    Ok(prior)
}

fn policy(z: u8) -> ZeroDivision {
    if z == 0 {
        ZeroDivision::Zero
    } else {
        ZeroDivision::One
    }
}

fn handling(preserve: bool) -> PairHandling {
    if preserve {
        PairHandling::Preserve
    } else {
        PairHandling::Normalize
    }
}

#[derive(Serialize)]
struct StatsOutput {
    labels: Vec<String>,
    #[serde(flatten)]
    stats: StatsReport,
    cooccurrence: Vec<Vec<usize>>,
    mutual_information_unit: &'static str,
    mutual_information: Vec<Vec<f64>>,
}

fn execute(cli: Cli) -> Result<()> {
    let space = match &cli.labels {
        Some(path) => io::read_label_space(path)?,
        None => LabelSpace::plutchik(),
    };
    match cli.command {
        Command::Stats {
            gold,
            epsilon,
            unit,
            output,
        } => {
            let data = read_gold(&gold, &space)?;
            let stats = dataset_statistics(&data)?;
            let mut mi = mutual_information_matrix(&data, epsilon)?;
            if matches!(unit, MiUnit::Bits) {
                mi.iter_mut().flatten().for_each(|x| *x = nats_to_bits(*x));
            }
            if verbose() {
                eprintln!(
                    "stats: n={} multi-label={:.2}% cardinality={:.2}",
                    stats.n,
                    100.0 * stats.multi_label_fraction,
                    stats.mean_cardinality
                );
            }
            write_json(
                output.as_deref(),
                &StatsOutput {
                    labels: space.names().to_vec(),
                    cooccurrence: cooccurrence_counts(&data)?.joint,
                    stats,
                    mutual_information_unit: match unit {
                        MiUnit::Nats => "nats",
                        MiUnit::Bits => "bits",
                    },
                    mutual_information: mi,
                },
            )
        }
        Command::Agree {
            annotations,
            output,
            gold_out,
        } => {
            let set = io::read_annotations(io::open(&annotations)?, &space)?;
            let report = agreement_report(&set)?;
            if let Some(path) = gold_out {
                io::write_labeled(io::create(&path)?, &set.majority_gold()?)?;
            }
            if verbose() {
                eprintln!("agree: fleiss kappa {:.4} ({})", report.fleiss_kappa, report.interpretation);
            }
            write_json(output.as_deref(), &report)
        }
        Command::EstimatePrior {
            gold,
            epsilon,
            output,
        } => {
            let data = read_gold(&gold, &space)?;
            let prior = estimate_prior(&data, epsilon)?.with_source(gold.display().to_string());
            let mut w = sink(output.as_deref())?;
            writeln!(w, "{}", prior.to_json()?)
                .and_then(|_| w.flush())
                .map_err(|source| Error::Io {
                    path: output.unwrap_or_default(),
                    source,
                })
        }
        Command::ParseResponses { raw, output, fill } => {
            let responses = io::read_responses(io::open(&raw)?)?;
            let fill = match fill {
                Fill::Error => FillPolicy::Error,
                Fill::Neutral => FillPolicy::Neutral,
            };
            let records = responses_to_records(&responses, &space, fill)?;
            if verbose() {
                eprintln!("parse-responses: {} responses -> {} records", responses.len(), records.len());
            }
            io::write_predictions(sink(output.as_deref())?, &records)
        }
        Command::Infer {
            preds,
            prior,
            alpha,
            preserve_pairs,
            output,
        } => {
            let records = io::read_predictions(io::open(&preds)?, &space, handling(preserve_pairs))?;
            let prior = read_prior(&prior, &space)?;
            let results = infer_batch(&records, &prior, alpha)?;
            if verbose() {
                let changed = results.iter().filter(|r| r.map_vector != r.baseline_vector).count();
                eprintln!("infer: {} records, {} changed by the prior", results.len(), changed);
            }
            io::write_map_results(sink(output.as_deref())?, &space, &results)
        }
        Command::Evaluate {
            pred,
            gold,
            zero_division,
            output,
        } => {
            let pred = read_gold(&pred, &space)?;
            let gold = read_gold(&gold, &space)?;
            let report = evaluate_datasets(&pred, &gold, policy(zero_division))?;
            match output {
                Some(path) => {
                    print!("{}", report.render_table());
                    write_json(Some(&path), &report)
                }
                None => write_json(None, &report),
            }
        }
        Command::Sweep {
            preds,
            gold,
            prior,
            alphas,
            zero_division,
            preserve_pairs,
            output,
        } => {
            let records = io::read_predictions(io::open(&preds)?, &space, handling(preserve_pairs))?;
            let gold = read_gold(&gold, &space)?;
            let prior = read_prior(&prior, &space)?;
            let report = alpha_sweep(&records, &gold, &prior, alphas.as_deref(), policy(zero_division))?;
            if verbose() {
                for p in &report.points {
                    eprintln!(
                        "alpha {:<5} hamming {:.2} macro-f1 {:.3}",
                        p.alpha,
                        100.0 * p.report.hamming_loss,
                        p.report.macro_f1
                    );
                }
            }
            write_json(output.as_deref(), &report)
        }
        Command::Synth {
            prior,
            count,
            seed,
            output,
        } => {
            let prior = read_prior(&prior, &space)?;
            let data = sample_prior(&prior, count, seed)?;
            io::write_labeled(sink(output.as_deref())?, &data)
        }
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                2
            } else {
                1
            }
        }
    }
}
