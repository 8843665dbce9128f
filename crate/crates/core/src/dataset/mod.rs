//! From PGN archives to training rows: filter, truncate to the opening, replay
//! through the strategy program, then balance or aggregate labels.

mod aggregate;
mod extract;
mod filter;
mod io;
mod smote;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::chess::{parse_pgn, Diagnostic};
use crate::strategy::{FeatureSchema, StrategyConfig};

pub use aggregate::aggregate_probabilities;
pub use extract::extract_rows;
pub use filter::{
    filter_games, opening_length, time_base_seconds, truncate_opening, FilterConfig, FilterCounts,
    FilterOutcome,
};
pub use io::{dataset_from_str, dataset_to_string, format_sig9, header, read_dataset, write_dataset};
pub use smote::{nearest_neighbors, smote_balance, SmoteOutput, DEFAULT_NEIGHBORS};

/// Move text carried by SMOTE rows.
pub const SYNTHETIC_MOVE: &str = "<smote>";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("missing column '{0}'")]
    MissingColumn(String),
    #[error("schema mismatch: expected {expected}, found {found}")]
    SchemaMismatch { expected: String, found: String },
    #[error("invalid filter configuration: {0}")]
    Config(String),
    #[error("SMOTE: {0}")]
    Smote(String),
    #[error("no games left after {0}")]
    NoGames(&'static str),
}

impl DatasetError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> DatasetError {
        DatasetError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// One candidate move at one ply. `features` holds the before-vector followed by
/// the after-vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    pub game_id: Arc<str>,
    /// Zero-based ply the move is played from.
    pub ply: u32,
    /// SAN of the candidate; informational only.
    pub mv: String,
    pub features: Vec<f32>,
    /// 0/1 for the binary task, a probability after aggregation.
    pub label: f64,
    pub synthetic: bool,
}

impl DatasetRow {
    pub fn before(&self) -> &[f32] {
        &self.features[..self.features.len() / 2]
    }

    pub fn after(&self) -> &[f32] {
        &self.features[self.features.len() / 2..]
    }
}

/// Counts at each pipeline stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageCounts {
    pub parsed: usize,
    pub parse_rejected: usize,
    pub time_control: usize,
    pub elo: usize,
    pub complete: usize,
    pub sampled: usize,
    pub replayed: usize,
    pub plies: usize,
    pub rows: usize,
}

impl StageCounts {
    const KEYS: [&'static str; 9] = [
        "parsed",
        "parse_rejected",
        "time_control",
        "elo",
        "complete",
        "sampled",
        "replayed",
        "plies",
        "rows",
    ];

    pub fn pairs(&self) -> Vec<(&'static str, usize)> {
        let v = [
            self.parsed,
            self.parse_rejected,
            self.time_control,
            self.elo,
            self.complete,
            self.sampled,
            self.replayed,
            self.plies,
            self.rows,
        ];
        Self::KEYS.into_iter().zip(v).collect()
    }

    pub fn from_pairs(pairs: &[(String, usize)]) -> Result<StageCounts, String> {
        let mut c = StageCounts::default();
        for (k, v) in pairs {
            let slot = match k.as_str() {
                "parsed" => &mut c.parsed,
                "parse_rejected" => &mut c.parse_rejected,
                "time_control" => &mut c.time_control,
                "elo" => &mut c.elo,
                "complete" => &mut c.complete,
                "sampled" => &mut c.sampled,
                "replayed" => &mut c.replayed,
                "plies" => &mut c.plies,
                "rows" => &mut c.rows,
                other => return Err(format!("unknown count '{other}'")),
            };
            *slot = *v;
        }
        Ok(c)
    }

    /// Game counts never grow from one stage to the next.
    pub fn is_monotone(&self) -> bool {
        let g = [self.parsed, self.time_control, self.elo, self.complete, self.sampled, self.replayed];
        g.windows(2).all(|w| w[0] >= w[1])
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Provenance {
    /// Configuration echo, in a flat `key=value` form.
    pub config: Vec<(String, String)>,
    pub counts: StageCounts,
}

impl Provenance {
    /// Config lines as `key=value`, then counts as comments.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# bpchess provenance\n");
        for (k, v) in &self.config {
            writeln!(out, "{k}={v}").unwrap();
        }
        for (k, v) in self.counts.pairs() {
            writeln!(out, "# {k}={v}").unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: FeatureSchema,
    pub bucket: Option<u32>,
    pub rows: Vec<DatasetRow>,
    pub provenance: Provenance,
}

impl Dataset {
    /// Keeps only the columns of `schema`, whose registers must all be present.
    pub fn project(&self, schema: &FeatureSchema) -> Result<Dataset, DatasetError> {
        let names = self.schema.names();
        let idx: Vec<usize> = schema
            .names()
            .iter()
            .map(|n| {
                names
                    .iter()
                    .position(|m| m == n)
                    .ok_or_else(|| DatasetError::MissingColumn(format!("before_{n}")))
            })
            .collect::<Result<_, _>>()?;
        let half = names.len();
        let rows = self
            .rows
            .iter()
            .map(|r| DatasetRow {
                features: idx.iter().map(|&i| r.features[i]).chain(idx.iter().map(|&i| r.features[half + i])).collect(),
                ..r.clone()
            })
            .collect();
        let mut provenance = self.provenance.clone();
        for (k, v) in &mut provenance.config {
            if k == "advanced" {
                *v = schema.is_advanced().to_string();
            }
        }
        Ok(Dataset {
            schema: schema.clone(),
            bucket: self.bucket,
            rows,
            provenance,
        })
    }
}

pub struct PgnSource {
    pub name: String,
    pub text: String,
}

#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    pub filter: FilterConfig,
    pub advanced: bool,
    pub strategy: StrategyConfig,
}

impl BuildOptions {
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut v = self.filter.echo();
        v.push(("advanced".into(), self.advanced.to_string()));
        v.push(("early_queen_moves".into(), self.strategy.early_queen_moves.to_string()));
        v
    }
}

pub struct BuildOutput {
    pub dataset: Dataset,
    /// Parse, filter and replay problems, in input order within each stage.
    pub diagnostics: Vec<Diagnostic>,
}

/// Runs parse → filter → truncate → extract over all sources.
pub fn build_dataset(sources: &[PgnSource], options: &BuildOptions) -> Result<BuildOutput, DatasetError> {
    options.filter.validate()?;
    let schema = FeatureSchema::new(options.advanced);
    let mut diagnostics = Vec::new();
    let mut games = Vec::new();
    let mut counts = StageCounts::default();
    for s in sources {
        let parsed = parse_pgn(&s.text, &s.name);
        counts.parse_rejected += parsed.diagnostics.len();
        diagnostics.extend(parsed.diagnostics);
        games.extend(parsed.games);
    }
    counts.parsed = games.len();

    let filtered = filter_games(games, &options.filter);
    diagnostics.extend(filtered.diagnostics);
    counts.time_control = filtered.counts.time_control;
    counts.elo = filtered.counts.elo;
    counts.complete = filtered.counts.complete;
    counts.sampled = filtered.counts.sampled;
    if filtered.games.is_empty() {
        return Err(DatasetError::NoGames("filtering"));
    }

    let extracted: Vec<_> = filtered
        .games
        .par_iter()
        .map(|g| extract_rows(&truncate_opening(g), &schema, options.strategy))
        .collect();
    let mut rows = Vec::new();
    for r in extracted {
        match r {
            Ok(game_rows) => {
                counts.replayed += 1;
                counts.plies += game_rows.iter().filter(|r| r.label == 1.0).count();
                rows.extend(game_rows);
            }
            Err(d) => diagnostics.push(d),
        }
    }
    if counts.replayed == 0 {
        return Err(DatasetError::NoGames("replay"));
    }
    counts.rows = rows.len();

    Ok(BuildOutput {
        dataset: Dataset {
            schema,
            bucket: Some(options.filter.elo_bucket_lo),
            rows,
            provenance: Provenance {
                config: options.echo(),
                counts,
            },
        },
        diagnostics,
    })
}

#[cfg(test)]
mod tests;
