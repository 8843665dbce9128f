use std::borrow::Borrow;
use std::collections::HashMap;
use std::time::Instant;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{aggregate_probabilities, smote_balance, Dataset, DatasetRow};

use super::{fit_model, Family, MlError, ModelParams, Task, TrainConfig};

/// Row indices of a train/test partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Deterministic child seed for `stream` under `master` (splitmix64 finalizer).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random partition by game: every row of a game lands on the same side.
/// With at least two games, each side gets at least one.
pub fn split_by_game<R: Borrow<DatasetRow>>(rows: &[R], test_fraction: f64, seed: u64) -> Split {
    let mut games: Vec<&str> = Vec::new();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for r in rows {
        let id = r.borrow().game_id.as_ref();
        if !seen.contains_key(id) {
            seen.insert(id, games.len());
            games.push(id);
        }
    }
    let mut order: Vec<usize> = (0..games.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut n_test = (test_fraction * games.len() as f64).round() as usize;
    if games.len() >= 2 {
        n_test = n_test.clamp(1, games.len() - 1);
    }
    let mut is_test = vec![false; games.len()];
    for &g in &order[..n_test.min(games.len())] {
        is_test[g] = true;
    }
    let mut split = Split {
        train: Vec::new(),
        test: Vec::new(),
    };
    for (i, r) in rows.iter().enumerate() {
        if is_test[seen[r.borrow().game_id.as_ref()]] {
            split.test.push(i);
        } else {
            split.train.push(i);
        }
    }
    split
}

/// Keeps every minority row and an equally large random subset of the majority,
/// in input order.
pub fn undersample<'a>(rows: &[&'a DatasetRow], seed: u64) -> Vec<&'a DatasetRow> {
    let ones: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].label == 1.0).collect();
    let zeros: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].label != 1.0).collect();
    let (minority, majority) = if ones.len() <= zeros.len() { (ones, zeros) } else { (zeros, ones) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = minority;
    keep.extend(sample(&mut rng, majority.len(), keep.len()).into_iter().map(|i| majority[i]));
    keep.sort_unstable();
    keep.into_iter().map(|i| rows[i]).collect()
}

pub fn accuracy_percent(model: &ModelParams, rows: &[&DatasetRow]) -> f64 {
    if rows.is_empty() {
        return f64::NAN;
    }
    let hits = rows.iter().filter(|r| model.predict(&r.features) == r.label).count();
    100.0 * hits as f64 / rows.len() as f64
}

/// Mean |prediction − label| in percentage points, predictions clamped to [0, 1].
pub fn mean_abs_error_points(model: &ModelParams, rows: &[&DatasetRow]) -> f64 {
    if rows.is_empty() {
        return f64::NAN;
    }
    let total: f64 = rows
        .iter()
        .map(|r| (model.predict(&r.features).clamp(0.0, 1.0) - r.label).abs())
        .sum();
    100.0 * total / rows.len() as f64
}

/// Accuracy (binary) or mean error (regression) of `model` on `rows`.
pub fn evaluate(model: &ModelParams, rows: &[&DatasetRow], task: Task) -> Result<f64, MlError> {
    if model.family.task() != task {
        return Err(MlError::TaskMismatch {
            family: model.family,
            family_task: model.family.task(),
            task,
        });
    }
    if let Some(r) = rows.first() {
        if r.features.len() != model.dim() {
            return Err(MlError::SchemaMismatch {
                expected: format!("{} ({} features)", model.schema_version, model.dim()),
                found: format!("{} features", r.features.len()),
            });
        }
    }
    Ok(match task {
        Task::Binary => accuracy_percent(model, rows),
        Task::Regression => mean_abs_error_points(model, rows),
    })
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone)]
pub struct RepeatOutcome {
    pub metric: f64,
    pub train_rows: usize,
    pub synthetic_rows: usize,
    pub test_rows: usize,
    pub test_games: usize,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub family: Family,
    pub task: Task,
    pub mean: f64,
    pub std: f64,
    pub repeats: Vec<RepeatOutcome>,
    pub seconds: f64,
}

fn one_repeat(
    data: &Dataset,
    family: Family,
    config: &TrainConfig,
    fixed: Option<&ModelParams>,
    repeat: usize,
) -> Result<RepeatOutcome, MlError> {
    let seed = derive_seed(config.seed, repeat as u64);
    let real: Vec<&DatasetRow> = data.rows.iter().filter(|r| !r.synthetic).collect();
    let split = split_by_game(&real, config.test_fraction, seed);
    let train: Vec<&DatasetRow> = split.train.iter().map(|&i| real[i]).collect();
    let test: Vec<&DatasetRow> = split.test.iter().map(|&i| real[i]).collect();
    let test_games = split.test.iter().map(|&i| real[i].game_id.clone()).collect::<std::collections::BTreeSet<_>>().len();
    let model_config = TrainConfig {
        seed,
        ..config.clone()
    };
    let version = data.schema.version();

    match family.task() {
        Task::Binary => {
            let test = undersample(&test, derive_seed(seed, 2));
            let (model, train_rows, synthetic_rows) = match fixed {
                Some(m) => (m.clone(), 0, 0),
                None => {
                    let smote = smote_balance(&train, config.smote_k, derive_seed(seed, 1))?;
                    let balanced = smote.balanced(&train);
                    debug_assert!(test.iter().all(|r| !r.synthetic));
                    (fit_model(family, &model_config, version, &balanced)?, balanced.len(), smote.synthetic_count())
                }
            };
            Ok(RepeatOutcome {
                metric: evaluate(&model, &test, Task::Binary)?,
                train_rows,
                synthetic_rows,
                test_rows: test.len(),
                test_games,
            })
        }
        Task::Regression => {
            let agg_test = aggregate_probabilities(&test);
            let test_refs: Vec<&DatasetRow> = agg_test.iter().collect();
            let (model, train_rows) = match fixed {
                Some(m) => (m.clone(), 0),
                None => {
                    let agg_train = aggregate_probabilities(&train);
                    let refs: Vec<&DatasetRow> = agg_train.iter().collect();
                    (fit_model(family, &model_config, version, &refs)?, refs.len())
                }
            };
            Ok(RepeatOutcome {
                metric: evaluate(&model, &test_refs, Task::Regression)?,
                train_rows,
                synthetic_rows: 0,
                test_rows: test_refs.len(),
                test_games,
            })
        }
    }
}

/// Repeated random game-level splits: train a fresh `family` model on each
/// training part (SMOTE-balanced for the binary task, aggregated to
/// probabilities for regression) and score it on the held-out games.
///
/// With `fixed`, that model is scored on each held-out part instead of
/// retraining.
pub fn evaluate_repeated(
    data: &Dataset,
    family: Family,
    config: &TrainConfig,
    fixed: Option<&ModelParams>,
) -> Result<RunSummary, MlError> {
    config.validate()?;
    if let Some(m) = fixed {
        if m.schema_version != data.schema.version() {
            return Err(MlError::SchemaMismatch {
                expected: m.schema_version.clone(),
                found: data.schema.version().into(),
            });
        }
    }
    if data.rows.is_empty() {
        return Err(MlError::Empty);
    }
    let start = Instant::now();
    let repeats: Vec<RepeatOutcome> = (0..config.repeats)
        .into_par_iter()
        .map(|r| one_repeat(data, family, config, fixed, r))
        .collect::<Result<_, _>>()?;
    let metrics: Vec<f64> = repeats.iter().map(|r| r.metric).collect();
    let (mean, std) = mean_std(&metrics);
    Ok(RunSummary {
        family,
        task: family.task(),
        mean,
        std,
        repeats,
        seconds: start.elapsed().as_secs_f64(),
    })
}
