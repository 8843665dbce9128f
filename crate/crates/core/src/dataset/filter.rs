use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chess::{Diagnostic, GameRecord};

use super::DatasetError;

/// Which games enter a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterConfig {
    /// Inclusive lower Elo bound for both players.
    pub elo_bucket_lo: u32,
    /// Exclusive upper Elo bound.
    pub elo_bucket_hi: u32,
    /// Base clock in seconds, increment ignored.
    pub time_base_min: u32,
    pub time_base_max: u32,
    pub require_complete: bool,
    pub max_games: Option<usize>,
    pub seed: u64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig::bucket(1200)
    }
}

impl FilterConfig {
    /// Rapid games with both players in `[lo, lo + 100)`.
    pub fn bucket(lo: u32) -> FilterConfig {
        FilterConfig {
            elo_bucket_lo: lo,
            elo_bucket_hi: lo + 100,
            time_base_min: 600,
            time_base_max: 1200,
            require_complete: true,
            max_games: Some(5000),
            seed: 42,
        }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.elo_bucket_lo >= self.elo_bucket_hi {
            return Err(DatasetError::Config(format!(
                "Elo bucket [{}, {}) is empty",
                self.elo_bucket_lo, self.elo_bucket_hi
            )));
        }
        if self.time_base_min == 0 || self.time_base_min > self.time_base_max {
            return Err(DatasetError::Config(format!(
                "time base range [{}, {}] s is invalid",
                self.time_base_min, self.time_base_max
            )));
        }
        Ok(())
    }

    pub fn echo(&self) -> Vec<(String, String)> {
        vec![
            ("elo_lo".into(), self.elo_bucket_lo.to_string()),
            ("elo_hi".into(), self.elo_bucket_hi.to_string()),
            ("time_base_min".into(), self.time_base_min.to_string()),
            ("time_base_max".into(), self.time_base_max.to_string()),
            ("require_complete".into(), self.require_complete.to_string()),
            (
                "max_games".into(),
                self.max_games.map_or("none".into(), |n| n.to_string()),
            ),
            ("seed".into(), self.seed.to_string()),
        ]
    }
}

/// Survivors after each filter stage, in pipeline order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FilterCounts {
    pub input: usize,
    pub time_control: usize,
    pub elo: usize,
    pub complete: usize,
    pub sampled: usize,
}

#[derive(Debug, Clone, Default)]
pub struct FilterOutcome {
    pub games: Vec<GameRecord>,
    pub counts: FilterCounts,
    /// Games dropped because a required header was missing or unreadable.
    pub diagnostics: Vec<Diagnostic>,
}

/// Base seconds of a `TimeControl` tag such as `600+5`; `None` for `-` or `?`.
pub fn time_base_seconds(tc: &str) -> Option<u32> {
    tc.trim().split('+').next()?.parse().ok()
}

pub fn filter_games(records: Vec<GameRecord>, config: &FilterConfig) -> FilterOutcome {
    let mut out = FilterOutcome {
        counts: FilterCounts {
            input: records.len(),
            ..Default::default()
        },
        ..Default::default()
    };
    let mut diag = |g: &GameRecord, reason: String| {
        out.diagnostics.push(Diagnostic {
            source: g.source.clone(),
            reason,
        })
    };

    let mut stage = Vec::with_capacity(records.len());
    for g in records {
        match g.header("TimeControl") {
            None => diag(&g, "missing header TimeControl".into()),
            Some(tc) => match time_base_seconds(tc) {
                Some(base) if (config.time_base_min..=config.time_base_max).contains(&base) => {
                    stage.push(g)
                }
                Some(_) => {}
                None if tc.trim() == "-" => {}
                None => diag(&g, format!("unreadable TimeControl '{tc}'")),
            },
        }
    }
    let time_control = stage.len();

    let bucket = config.elo_bucket_lo..config.elo_bucket_hi;
    let mut kept = Vec::with_capacity(stage.len());
    for g in stage {
        match (g.elo("WhiteElo"), g.elo("BlackElo")) {
            (Some(w), Some(b)) => {
                if bucket.contains(&w) && bucket.contains(&b) {
                    kept.push(g);
                }
            }
            _ => diag(&g, "missing or unreadable WhiteElo/BlackElo".into()),
        }
    }
    let elo = kept.len();

    let mut stage = Vec::with_capacity(kept.len());
    for g in kept {
        if !config.require_complete {
            stage.push(g);
            continue;
        }
        let finished = match g.header("Result") {
            None => {
                diag(&g, "missing header Result".into());
                continue;
            }
            Some(r) => matches!(r, "1-0" | "0-1" | "1/2-1/2"),
        };
        let terminated = !matches!(g.header("Termination"), Some("Abandoned" | "Unterminated"));
        if finished && terminated {
            stage.push(g);
        }
    }
    let complete = stage.len();

    let games = match config.max_games {
        Some(n) if stage.len() > n => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let mut picked = sample(&mut rng, stage.len(), n).into_vec();
            picked.sort_unstable();
            let mut slots: Vec<Option<GameRecord>> = stage.into_iter().map(Some).collect();
            picked.into_iter().map(|i| slots[i].take().expect("distinct indices")).collect()
        }
        _ => stage,
    };

    out.counts.time_control = time_control;
    out.counts.elo = elo;
    out.counts.complete = complete;
    out.counts.sampled = games.len();
    out.games = games;
    out
}

fn is_castle_token(san: &str) -> bool {
    san.starts_with("O-O") || san.starts_with("0-0")
}

/// Number of plies that make up the opening of `san_moves`.
pub fn opening_length(san_moves: &[String]) -> usize {
    let mut castled = [false; 2];
    for (ply, san) in san_moves.iter().enumerate() {
        if is_castle_token(san) {
            castled[ply % 2] = true;
            if castled == [true, true] {
                return ply + 1;
            }
        }
    }
    san_moves.len().min(20)
}

/// Keeps the opening: through the second castle, or the first 20 plies.
pub fn truncate_opening(record: &GameRecord) -> GameRecord {
    let mut out = record.clone();
    out.san_moves.truncate(opening_length(&record.san_moves));
    out
}
