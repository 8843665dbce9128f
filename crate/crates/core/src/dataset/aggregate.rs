use std::borrow::Borrow;
use std::collections::HashMap;

use super::DatasetRow;

fn bits(xs: &[f32]) -> Vec<u32> {
    // -0.0 and 0.0 are the same state
    xs.iter().map(|x| if *x == 0.0 { 0 } else { x.to_bits() }).collect()
}

/// Collapses binary rows into one row per distinct (before, after) pair whose
/// label is the empirical probability of that move given the before-state.
///
/// Output keeps first-appearance order; bookkeeping columns come from the first
/// occurrence.
pub fn aggregate_probabilities<R: Borrow<DatasetRow>>(rows: &[R]) -> Vec<DatasetRow> {
    let mut key_index: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut state_seen: HashMap<Vec<u32>, u64> = HashMap::new();
    let mut out: Vec<DatasetRow> = Vec::new();
    let mut played = Vec::new();
    let mut last_group: Option<(&str, u32)> = None;

    for r in rows {
        let r: &DatasetRow = r.borrow();
        let half = r.features.len() / 2;
        let group = (r.game_id.as_ref(), r.ply);
        if last_group != Some(group) {
            *state_seen.entry(bits(&r.features[..half])).or_default() += 1;
            last_group = Some(group);
        }
        let idx = *key_index.entry(bits(&r.features)).or_insert_with(|| {
            let mut first = r.clone();
            first.label = 0.0;
            first.synthetic = false;
            out.push(first);
            played.push(0u64);
            out.len() - 1
        });
        if r.label == 1.0 {
            played[idx] += 1;
        }
    }
    for (row, count) in out.iter_mut().zip(played) {
        let half = row.features.len() / 2;
        let seen = state_seen[&bits(&row.features[..half])];
        row.label = count as f64 / seen as f64;
    }
    out
}
