use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};
use simspec_core::harness::{self, with_threads};
use simspec_core::matrix::trial_rng;
use simspec_core::rational::{self, Rational, RationalValue};
use simspec_core::smallball::{self, DEFAULT_WINDOW_TRIALS};
use simspec_core::spectrum::{self, char_poly, SimplicityVerdict};
use simspec_core::structure::{self, StructureParams};
use simspec_core::{AtomicDistribution, EnsembleSpec, SymmetricMatrix};

#[derive(Parser)]
#[command(name = "simspec", version, about = "Simple-spectrum experiments for random symmetric matrices")]
struct Cli {
    /// Output format: one JSON record per line, or CSV with a header row.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    out: Format,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ensemble {
    /// Adjacency matrix of G(n, p) with zero diagonal.
    Gnp,
    /// Symmetric ±1 matrix, diagonal included.
    Sign,
}

#[derive(Subcommand)]
enum Command {
    /// Exact simple/non-simple counts over all graphs on n vertices.
    Census {
        #[arg(long)]
        n: usize,
    },
    /// Estimate the probability of a repeated eigenvalue.
    Montecarlo {
        #[arg(long, value_enum)]
        ensemble: Ensemble,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Edge probability for the gnp ensemble.
        #[arg(long, default_value = "1/2")]
        p: String,
    },
    /// Estimate how often some eigenvector is rich.
    Richness {
        #[arg(long)]
        n: usize,
        #[arg(long = "A")]
        a: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Ensemble::Sign)]
        ensemble: Ensemble,
        #[arg(long, default_value = "1/2")]
        p: String,
    },
    /// Exact and numeric simplicity verdicts for one matrix.
    CheckSimple {
        /// JSON matrix file or whitespace-separated integer rows.
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Concentration probability of a weighted sum.
    ConcProb {
        #[arg(long)]
        vector: PathBuf,
        #[arg(long)]
        dist: PathBuf,
        /// Window width; switches to the floating-point windowed estimate.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_WINDOW_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Search for a proper GAP covering all but m coordinates.
    GapCover {
        #[arg(long)]
        vector: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        rmax: usize,
        #[arg(long)]
        volmax: u64,
    },
    /// Run the structure refinement on a rich vector.
    Refine {
        #[arg(long)]
        vector: PathBuf,
        #[arg(long)]
        dist: PathBuf,
        #[arg(long = "A")]
        a: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = StructureParams::DEFAULT_D0)]
        d0: usize,
        #[arg(long, default_value = "10")]
        c0: String,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn parse_rational(text: &str) -> Result<Rational> {
    rational::parse(text).with_context(|| format!("bad rational {text:?}"))
}

fn load_matrix(path: &Path) -> Result<SymmetricMatrix> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        serde_json::from_str(&text).with_context(|| format!("parsing matrix {}", path.display()))
    } else {
        SymmetricMatrix::parse_adjacency_text(&text).with_context(|| format!("parsing matrix {}", path.display()))
    }
}

fn load_vector(path: &Path) -> Result<Vec<Rational>> {
    let text = read(path)?;
    if text.trim_start().starts_with('[') {
        let values: Vec<RationalValue> =
            serde_json::from_str(&text).with_context(|| format!("parsing vector {}", path.display()))?;
        Ok(values.into_iter().map(|v| v.0).collect())
    } else {
        text.split_whitespace().map(parse_rational).collect()
    }
}

fn load_dist(path: &Path) -> Result<AtomicDistribution> {
    serde_json::from_str(&read(path)?).with_context(|| format!("parsing distribution {}", path.display()))
}

fn ensemble(kind: Ensemble, p: &str) -> Result<EnsembleSpec> {
    Ok(match kind {
        Ensemble::Gnp => EnsembleSpec::gnp(parse_rational(p)?)?,
        Ensemble::Sign => EnsembleSpec::sign(),
    })
}

fn record(value: impl Serialize) -> Result<Map<String, Value>> {
    match serde_json::to_value(value)? {
        Value::Object(map) => Ok(map),
        other => bail!("expected an object record, got {other}"),
    }
}

fn prefixed(mut head: Map<String, Value>, tail: impl Serialize) -> Result<Map<String, Value>> {
    head.extend(record(tail)?);
    Ok(head)
}

fn verdict_record(m: &SymmetricMatrix) -> Result<Map<String, Value>> {
    let exact = spectrum::simplicity_exact(m);
    let certificate = match &exact {
        SimplicityVerdict::NotSimpleExact { certificate } => serde_json::to_value(certificate)?,
        _ => Value::Null,
    };
    let (min_gap, reconciled) = match spectrum::simplicity_numeric(m) {
        Ok((_, numeric)) => {
            let gap = match &numeric {
                SimplicityVerdict::SimpleNumeric { min_gap } | SimplicityVerdict::NotSimpleNumeric { min_gap } => {
                    *min_gap
                }
                _ => None,
            };
            (gap, spectrum::reconcile(exact.clone(), &numeric).tag())
        }
        Err(_) => (None, exact.tag()),
    };
    record(json!({
        "n": m.n(),
        "simple": exact.is_simple(),
        "verdict": exact.tag(),
        "certificate": certificate,
        "char_poly": char_poly(m),
        "numeric_min_gap": min_gap,
        "reconciled": reconciled,
    }))
}

fn run(command: Command) -> Result<Vec<Map<String, Value>>> {
    let rec = match command {
        Command::Census { n } => {
            let c = harness::exhaustive_census(n)?;
            prefixed(record(c)?, json!({
                "simple_fraction": rational::format(&c.simple_fraction()),
                "nonsimple_fraction": rational::format(&c.nonsimple_fraction()),
            }))?
        }
        Command::Montecarlo { ensemble: kind, n, trials, seed, p } => {
            let spec = ensemble(kind, &p)?;
            let summary = harness::monte_carlo_simplicity(&spec, n, trials, seed)?;
            prefixed(record(json!({ "ensemble": name(kind), "n": n }))?, summary)?
        }
        Command::Richness { n, a, delta, trials, seed, ensemble: kind, p } => {
            let spec = ensemble(kind, &p)?;
            let summary = harness::rich_eigenvector_frequency(&spec, n, a, delta, trials, seed)?;
            prefixed(record(json!({ "ensemble": name(kind), "n": n, "A": a, "delta": delta }))?, summary)?
        }
        Command::CheckSimple { matrix } => verdict_record(&load_matrix(&matrix)?)?,
        Command::ConcProb { vector, dist, delta, trials, seed } => {
            let v = load_vector(&vector)?;
            let d = load_dist(&dist)?;
            let result = match delta {
                None => smallball::small_ball_exact(&v, &d)?,
                Some(delta) => {
                    let floats: Vec<f64> = v.iter().map(rational::to_f64).collect();
                    smallball::small_ball_windowed(&floats, &d, delta, trials, &mut trial_rng(seed, 0))?
                }
            };
            record(result)?
        }
        Command::GapCover { vector, m, rmax, volmax } => {
            let v = load_vector(&vector)?;
            match structure::find_covering_gap(&v, m, rmax, volmax)? {
                None => record(json!({ "found": false }))?,
                Some(gap) => {
                    let members = gap.membership(simspec_core::gaps::DEFAULT_ENUM_CAP)?;
                    let covered = v.iter().filter(|x| members.contains(x)).count();
                    let head = record(json!({ "found": true }))?;
                    prefixed(head, json!({
                        "generators": serde_json::to_value(&gap)?["generators"],
                        "dims": serde_json::to_value(&gap)?["dims"],
                        "rank": gap.rank(),
                        "volume": gap.volume().to_string(),
                        "covered": covered,
                    }))?
                }
            }
        }
        Command::Refine { vector, dist, a, eps, d0, c0 } => {
            let v = load_vector(&vector)?;
            let d = load_dist(&dist)?;
            let params = StructureParams::new(a, eps, d0, parse_rational(&c0)?)?;
            record(structure::refine_structure(&v, &d, &params)?)?
        }
    };
    Ok(vec![rec])
}

fn name(kind: Ensemble) -> &'static str {
    match kind {
        Ensemble::Gnp => "gnp",
        Ensemble::Sign => "sign",
    }
}

fn cell(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn emit(records: &[Map<String, Value>], format: Format, out: impl Write) -> Result<()> {
    match format {
        Format::Json => {
            let mut out = io::BufWriter::new(out);
            for r in records {
                serde_json::to_writer(&mut out, r)?;
                writeln!(out)?;
            }
            out.flush()?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if let Some(first) = records.first() {
                w.write_record(first.keys())?;
            }
            for r in records {
                w.write_record(r.values().map(cell))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = with_threads(cli.threads, move || run(cli.command))
        .map_err(anyhow::Error::from)
        .and_then(|r| r)
        .and_then(|records| emit(&records, cli.out, io::stdout().lock()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
