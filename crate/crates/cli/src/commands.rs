use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::anyhow;
use log::{info, warn};

use bpchess::chess::{parse_pgn, perft as count_nodes, Board};
use bpchess::dataset::{
    aggregate_probabilities, build_dataset, dataset_to_string, opening_length, read_dataset, smote_balance,
    Dataset, DatasetError, DatasetRow, PgnSource,
};
use bpchess::experiment::{
    records_from_csv, records_to_csv, render_report, run_grid, EvalRecord, GridConfig, StrategySet, EVAL_HEADER,
};
use bpchess::ml::{
    derive_seed, evaluate_repeated, fit_model, read_model, split_by_game, write_model, Family, MlError, Task,
};
use bpchess::strategy::{ChessProgram, FeatureSchema};
use bpchess::synth::{synth_pgn, SynthConfig};

use crate::config::RunConfig;
use crate::error::{data, read_input, usage, write_file, CmdResult, Failure};

pub const MAX_PERFT_DEPTH: u32 = 6;

fn sources(cfg: &RunConfig) -> Result<Vec<PgnSource>, Failure> {
    let paths = cfg.pgn_paths();
    if paths.is_empty() {
        return Err(usage("no PGN input: pass --pgn or set the pgn config key"));
    }
    paths
        .into_iter()
        .map(|p| {
            let text = read_input(Path::new(&p))?;
            Ok(PgnSource { name: p, text })
        })
        .collect()
}

/// `data.csv` → `data.<suffix>`.
fn sibling(out: &Path, suffix: &str) -> std::path::PathBuf {
    out.with_extension(suffix)
}

pub fn build(cfg: &RunConfig, out: &Path) -> CmdResult {
    let srcs = sources(cfg)?;
    let opts = cfg.build_options()?;
    let built = build_dataset(&srcs, &opts)?;
    let mut dataset = built.dataset;
    dataset.provenance.config.insert(0, ("pgn".into(), cfg.get("pgn").into()));

    write_file(out, &dataset_to_string(&dataset))?;
    write_file(&sibling(out, "schema.txt"), &dataset.schema.to_schema_text())?;
    write_file(&sibling(out, "provenance.txt"), &dataset.provenance.to_text())?;
    let mut skipped = String::new();
    for d in &built.diagnostics {
        writeln!(skipped, "{d}").unwrap();
    }
    write_file(&sibling(out, "skipped.txt"), &skipped)?;

    let c = &dataset.provenance.counts;
    println!(
        "{}: {} games replayed ({} parsed, {} after time control, {} after Elo, {} complete, {} sampled), {} plies, {} rows, schema {}",
        out.display(),
        c.replayed,
        c.parsed,
        c.time_control,
        c.elo,
        c.complete,
        c.sampled,
        c.plies,
        c.rows,
        dataset.schema.version()
    );
    if !built.diagnostics.is_empty() {
        println!("{} games skipped, see {}", built.diagnostics.len(), sibling(out, "skipped.txt").display());
    }
    Ok(())
}

fn load(path: &Path) -> Result<Dataset, Failure> {
    read_dataset(path, None).map_err(|e| match e {
        DatasetError::Io { .. } => Failure::Usage(e.into()),
        other => Failure::Data(anyhow!("{}: {other}", path.display())),
    })
}

pub fn train(cfg: &RunConfig, data_path: &Path, family: Family, task: Option<Task>, out: &Path) -> CmdResult {
    if let Some(task) = task.filter(|t| *t != family.task()) {
        return Err(MlError::TaskMismatch {
            family,
            family_task: family.task(),
            task,
        }
        .into());
    }
    let tc = cfg.train()?;
    let dataset = load(data_path)?;
    let real: Vec<&DatasetRow> = dataset.rows.iter().filter(|r| !r.synthetic).collect();
    if real.is_empty() {
        return Err(MlError::Empty.into());
    }
    let split = split_by_game(&real, tc.test_fraction, derive_seed(tc.seed, 0));
    let train: Vec<&DatasetRow> = split.train.iter().map(|&i| real[i]).collect();
    let games = train.iter().map(|r| &r.game_id).collect::<BTreeSet<_>>().len();
    let version = dataset.schema.version();

    let (mut model, rows, synthetic) = match family.task() {
        Task::Binary => {
            let smote = smote_balance(&train, tc.smote_k, derive_seed(tc.seed, 1))?;
            let balanced = smote.balanced(&train);
            (fit_model(family, &tc, version, &balanced)?, balanced.len(), smote.synthetic_count())
        }
        Task::Regression => {
            let agg = aggregate_probabilities(&train);
            let refs: Vec<&DatasetRow> = agg.iter().collect();
            (fit_model(family, &tc, version, &refs)?, refs.len(), 0)
        }
    };
    model.info.extend([
        ("train_games".to_string(), games.to_string()),
        ("train_rows".to_string(), rows.to_string()),
        ("synthetic_rows".to_string(), synthetic.to_string()),
        ("test_fraction".to_string(), tc.test_fraction.to_string()),
    ]);
    write_model(&model, out).map_err(|e| Failure::Internal(e.into()))?;
    println!(
        "{}: {} on {games} games, {rows} rows ({synthetic} synthetic), schema {version}",
        out.display(),
        family.title()
    );
    Ok(())
}

fn metric_name(task: Task) -> &'static str {
    match task {
        Task::Binary => "balanced accuracy %",
        Task::Regression => "mean abs error, points",
    }
}

pub fn eval(
    cfg: &RunConfig,
    data_path: &Path,
    model_path: Option<&Path>,
    family: Option<Family>,
    out: Option<&Path>,
    bucket: Option<u32>,
) -> CmdResult {
    let tc = cfg.train()?;
    let fixed = model_path.map(read_model).transpose()?;
    let family = fixed.as_ref().map(|m| m.family).or(family).expect("clap requires one");
    let dataset = load(data_path)?;
    let summary = evaluate_repeated(&dataset, family, &tc, fixed.as_ref())?;
    let set = StrategySet::of(&dataset.schema);
    let bucket = bucket.or(dataset.bucket).unwrap_or(0);
    let record = EvalRecord::from_summary(bucket, set, &summary);
    println!(
        "{} ({set}, bucket {bucket}): {:.2} ± {:.2} {} over {} repeats{}",
        family.title(),
        summary.mean,
        summary.std,
        metric_name(family.task()),
        summary.repeats.len(),
        if fixed.is_some() { ", fixed model" } else { "" }
    );
    if let Some(out) = out {
        write_file(out, &records_to_csv(&[record]))?;
    }
    Ok(())
}

pub fn report(runs: &Path, out_dir: &Path) -> CmdResult {
    let entries = std::fs::read_dir(runs).map_err(|e| usage(format!("cannot read {}: {e}", runs.display())))?;
    let mut files: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    let mut records = Vec::new();
    for f in &files {
        let text = read_input(f)?;
        if text.lines().next() != Some(EVAL_HEADER) {
            info!("skipping {}: not an evaluation CSV", f.display());
            continue;
        }
        records.extend(records_from_csv(&text).map_err(|e| data(format!("{}: {e}", f.display())))?);
    }
    if records.is_empty() {
        return Err(data(format!("no evaluation CSVs in {}", runs.display())));
    }
    let report = render_report(&records)?;
    write_file(&out_dir.join("report.md"), &report.markdown)?;
    write_file(&out_dir.join("report.csv"), &report.csv)?;
    print!("{}", report.markdown);
    Ok(())
}

/// Changed registers between two snapshots, skipping ply and turn bookkeeping.
fn deltas(before: &bpchess::bp::KernelSnapshot, after: &bpchess::bp::KernelSnapshot) -> String {
    before
        .iter()
        .zip(after.iter())
        .filter(|((name, a), (_, b))| a != b && *name != "ply_index" && *name != "side_to_move")
        .map(|((name, a), (_, b))| format!("{name} {a}->{b}"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn explain(cfg: &RunConfig, pgn: &Path, game: usize, ply: usize, advanced: bool) -> CmdResult {
    let text = read_input(pgn)?;
    let parsed = parse_pgn(&text, &pgn.display().to_string());
    let record = game
        .checked_sub(1)
        .and_then(|i| parsed.games.get(i))
        .ok_or_else(|| usage(format!("game {game} not found: {} has {} readable games", pgn.display(), parsed.games.len())))?;
    let keep = opening_length(&record.san_moves);
    if ply >= keep {
        return Err(usage(format!(
            "ply {ply} is outside the opening: this game keeps plies 0..{keep} (through the second castle if both sides castle, else at most the first 20 plies)"
        )));
    }
    let schema = FeatureSchema::new(advanced);
    let mut program = ChessProgram::new(Board::start(), advanced, cfg.strategy()?);
    for san in &record.san_moves[..ply] {
        program
            .play_san(san)
            .map_err(|e| data(format!("game {game} does not replay: {e}")))?;
    }
    let board = program.board().clone();
    let played = board
        .parse_san(&record.san_moves[ply])
        .map_err(|e| data(format!("game {game} ply {ply}: {e}")))?;
    let before = program.snapshot();
    let vector = schema.encode(&before).map_err(|e| Failure::Internal(e.into()))?;

    println!(
        "game {game} ({}), ply {ply}, {} to move, opening keeps {keep} plies",
        record.source,
        board.side_to_move().name()
    );
    println!("fen {}", board.to_fen());
    let shown: Vec<String> = schema.names().iter().zip(&vector).map(|(n, v)| format!("{n}={v}")).collect();
    println!("before ({}): {}", schema.version(), shown.join(" "));
    let legal = board.legal_moves();
    for (mv, san) in legal.iter().zip(board.san_list(&legal)) {
        let mut child = program.fork();
        child.play(mv, san.clone()).map_err(|e| Failure::Internal(e.into()))?;
        let mark = if mv.id() == played.id() { '*' } else { ' ' };
        println!("{mark} {san:<8} {}", deltas(&before, &child.snapshot()));
    }
    Ok(())
}

pub fn perft(fen: Option<&str>, depth: u32, divide: bool) -> CmdResult {
    if depth > MAX_PERFT_DEPTH {
        return Err(usage(format!("depth {depth} refused: at most {MAX_PERFT_DEPTH}")));
    }
    let board = match fen {
        Some(f) => Board::from_fen(f).map_err(usage)?,
        None => Board::start(),
    };
    if divide && depth > 0 {
        let mut total = 0;
        for mv in board.legal_moves() {
            let n = count_nodes(&board.apply_move(&mv).map_err(|e| Failure::Internal(e.into()))?, depth - 1);
            println!("{} {n}", mv.uci());
            total += n;
        }
        println!("\n{total}");
    } else {
        println!("{}", count_nodes(&board, depth));
    }
    Ok(())
}

pub fn grid(cfg: &RunConfig, out_dir: &Path, save_datasets: bool) -> CmdResult {
    let srcs = sources(cfg)?;
    let gc = GridConfig {
        buckets: cfg.buckets()?,
        sets: cfg.sets()?,
        families: cfg.families()?,
        filter: cfg.filter()?,
        strategy: cfg.strategy()?,
        train: cfg.train()?,
    };
    if gc.buckets.is_empty() || gc.sets.is_empty() || gc.families.is_empty() {
        return Err(usage("grid needs at least one bucket, strategy set and family"));
    }
    let outcome = run_grid(&srcs, &gc)?;
    write_file(&out_dir.join("grid.config"), &cfg.dump())?;
    for &bucket in &gc.buckets {
        let records: Vec<EvalRecord> = outcome.records.iter().filter(|r| r.bucket == bucket).cloned().collect();
        write_file(&out_dir.join(format!("eval-{bucket}.csv")), &records_to_csv(&records))?;
    }
    if save_datasets {
        for d in &outcome.datasets {
            let mut d = d.clone();
            d.provenance.config.insert(0, ("pgn".into(), cfg.get("pgn").into()));
            let name = format!("data-{}.csv", d.bucket.unwrap_or(0));
            write_file(&out_dir.join(name), &dataset_to_string(&d))?;
        }
    }
    let report = render_report(&outcome.records)?;
    write_file(&out_dir.join("report.md"), &report.markdown)?;
    write_file(&out_dir.join("report.csv"), &report.csv)?;
    print!("{}", report.markdown);
    Ok(())
}

pub fn synth(out: &Path, buckets: Vec<u32>, games: usize, with_rejects: bool, seed: Option<u64>) -> CmdResult {
    let mut sc = SynthConfig {
        buckets,
        games_per_bucket: games,
        with_rejects,
        ..SynthConfig::default()
    };
    if let Some(s) = seed {
        sc.seed = s;
    }
    if sc.buckets.is_empty() || games == 0 {
        warn!("nothing to generate");
    }
    write_file(out, &synth_pgn(&sc))?;
    println!("{}: {} games", out.display(), sc.buckets.len() * games);
    Ok(())
}
