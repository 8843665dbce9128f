//! Shared inputs for the benchmarks.

use bpchess::chess::{parse_pgn, GameRecord};
use bpchess::dataset::{extract_rows, DatasetRow};
use bpchess::strategy::{FeatureSchema, StrategyConfig};
use bpchess::synth::{synth_pgn, SynthConfig};

/// Seeded synthetic games, all inside the 1200 bucket filters.
pub fn games(n: usize) -> Vec<GameRecord> {
    let text = synth_pgn(&SynthConfig {
        buckets: vec![1200],
        games_per_bucket: n,
        ..SynthConfig::default()
    });
    parse_pgn(&text, "bench").games
}

pub fn rows(games: &[GameRecord], advanced: bool) -> Vec<DatasetRow> {
    let schema = FeatureSchema::new(advanced);
    games
        .iter()
        .filter_map(|g| extract_rows(g, &schema, StrategyConfig::default()).ok())
        .flatten()
        .collect()
}
