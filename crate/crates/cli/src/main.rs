//! `bpchess`: build strategy-feature datasets from PGN, train and evaluate
//! move-prediction models, and print report tables.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

mod commands;
mod config;
mod error;

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};

use bpchess::ml::{Family, Task};

use crate::config::RunConfig;
use crate::error::{usage, Failure};

#[derive(Parser, Debug)]
#[command(name = "bpchess", version, about = "Behavioral-programming strategy features for human chess move prediction")]
struct Cli {
    /// Flat key=value config file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Master seed (falls back to BPCHESS_SEED, then the config file value).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override any config key, e.g. --set mlp.epochs=50 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// More logging on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Parse, filter and replay PGN games into a dataset CSV.
    Build(BuildArgs),
    /// Fit one model on the training part of a dataset.
    Train(TrainArgs),
    /// Repeated held-out evaluation of a model family or a trained model.
    Eval(EvalArgs),
    /// Summary tables from a directory of evaluation CSVs.
    Report(ReportArgs),
    /// Feature dump for every candidate move at one ply of a game.
    Explain(ExplainArgs),
    /// Count leaf nodes of the legal move tree.
    Perft(PerftArgs),
    /// Build, evaluate and report every bucket x strategy set x family.
    Grid(GridArgs),
    /// Write seeded synthetic games in Lichess-style PGN.
    Synth(SynthArgs),
    /// Print the effective configuration.
    Config(ConfigArgs),
}

#[derive(Args, Debug)]
struct BuildArgs {
    /// PGN files (comma separated or repeated); defaults to the config `pgn` key.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pgn: Vec<PathBuf>,
    /// Dataset CSV to write; schema, provenance and skipped-game files go next to it.
    #[arg(long)]
    out: PathBuf,
    /// Elo bucket lower bound; the bucket spans 100 points.
    #[arg(long)]
    elo_bucket: Option<u32>,
    /// Include the advanced strategies (37 features per snapshot instead of 27).
    #[arg(long)]
    advanced: bool,
    #[arg(long)]
    max_games: Option<usize>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// Model family: ridge, logreg, svc (binary) or linreg, mlp (regression).
    #[arg(long)]
    model: Family,
    /// Task; must match the model family when given.
    #[arg(long)]
    task: Option<Task>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("what").required(true).args(["model", "family"]))]
struct EvalArgs {
    #[arg(long)]
    data: PathBuf,
    /// Score this trained model on each held-out split.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Retrain this family on each training split.
    #[arg(long)]
    family: Option<Family>,
    #[arg(long)]
    repeats: Option<usize>,
    /// Append-free CSV with one evaluation record.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bucket label for the record; defaults to the dataset's.
    #[arg(long)]
    bucket: Option<u32>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Directory holding evaluation CSVs.
    #[arg(long)]
    runs: PathBuf,
    /// Where report.md and report.csv go; defaults to the runs directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExplainArgs {
    #[arg(long)]
    pgn: PathBuf,
    /// Game number in the file, from 1.
    #[arg(long, default_value_t = 1)]
    game: usize,
    /// Plies already played, from 0.
    #[arg(long, default_value_t = 0)]
    ply: usize,
    /// Basic strategies only.
    #[arg(long)]
    basic: bool,
}

#[derive(Args, Debug)]
struct PerftArgs {
    #[arg(long)]
    depth: u32,
    #[arg(long)]
    fen: Option<String>,
    /// Per-move subtotals.
    #[arg(long)]
    divide: bool,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pgn: Vec<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, value_delimiter = ',')]
    buckets: Vec<u32>,
    #[arg(long, value_delimiter = ',')]
    families: Vec<Family>,
    #[arg(long, value_delimiter = ',')]
    sets: Vec<String>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    max_games: Option<usize>,
    /// Also write each bucket's dataset CSV.
    #[arg(long)]
    save_datasets: bool,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1200")]
    buckets: Vec<u32>,
    #[arg(long, default_value_t = 50)]
    games: usize,
    /// Mix in games the default filters reject.
    #[arg(long)]
    with_rejects: bool,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// Print every key with its effective value.
    #[arg(long)]
    dump: bool,
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn paths(items: &[PathBuf]) -> String {
    join(&items.iter().map(|p| p.display()).collect::<Vec<_>>())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    cfg.set_opt("seed", cli.seed);
    for kv in &cli.overrides {
        let (k, v) = kv.split_once('=').ok_or_else(|| usage(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim()).map_err(Failure::Usage)?;
    }
    match cli.cmd {
        Cmd::Build(a) => {
            if !a.pgn.is_empty() {
                cfg.set("pgn", &paths(&a.pgn)).map_err(Failure::Usage)?;
            }
            if let Some(b) = a.elo_bucket {
                cfg.set_opt("elo_lo", Some(b));
                cfg.set_opt("elo_hi", Some(b + 100));
            }
            if a.advanced {
                cfg.set_opt("advanced", Some(true));
            }
            cfg.set_opt("max_games", a.max_games);
            commands::build(&cfg, &a.out)
        }
        Cmd::Train(a) => commands::train(&cfg, &a.data, a.model, a.task, &a.out),
        Cmd::Eval(a) => {
            cfg.set_opt("repeats", a.repeats);
            commands::eval(&cfg, &a.data, a.model.as_deref(), a.family, a.out.as_deref(), a.bucket)
        }
        Cmd::Report(a) => commands::report(&a.runs, a.out_dir.as_deref().unwrap_or(&a.runs)),
        Cmd::Explain(a) => commands::explain(&cfg, &a.pgn, a.game, a.ply, !a.basic),
        Cmd::Perft(a) => commands::perft(a.fen.as_deref(), a.depth, a.divide),
        Cmd::Grid(a) => {
            if !a.pgn.is_empty() {
                cfg.set("pgn", &paths(&a.pgn)).map_err(Failure::Usage)?;
            }
            if !a.buckets.is_empty() {
                cfg.set_opt("buckets", Some(join(&a.buckets)));
            }
            if !a.families.is_empty() {
                cfg.set_opt("families", Some(join(&a.families.iter().map(|f| f.name()).collect::<Vec<_>>())));
            }
            if !a.sets.is_empty() {
                cfg.set_opt("sets", Some(a.sets.join(",")));
            }
            cfg.set_opt("repeats", a.repeats);
            cfg.set_opt("max_games", a.max_games);
            commands::grid(&cfg, &a.out_dir, a.save_datasets)
        }
        Cmd::Synth(a) => commands::synth(&a.out, a.buckets, a.games, a.with_rejects, cli.seed),
        Cmd::Config(_) => {
            print!("{}", cfg.dump());
            Ok(())
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    if let Err(f) = run(cli) {
        eprintln!("error: {:#}", f.error());
        std::process::exit(f.exit_code());
    }
}
