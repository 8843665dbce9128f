use log::warn;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::borrow::Borrow;

use super::{DatasetError, DatasetRow};

pub const DEFAULT_NEIGHBORS: usize = 5;

/// New minority rows, each with the indices of its two parents in the input.
#[derive(Debug, Clone)]
pub struct SmoteOutput {
    pub synthetic: Vec<DatasetRow>,
    pub parents: Vec<(usize, usize)>,
    /// Neighbor count actually used after clamping.
    pub k: usize,
}

impl SmoteOutput {
    pub fn synthetic_count(&self) -> usize {
        self.parents.len()
    }

    /// The input rows followed by the synthetic ones.
    pub fn balanced<'a, R: Borrow<DatasetRow>>(&'a self, input: &'a [R]) -> Vec<&'a DatasetRow> {
        input.iter().map(Borrow::borrow).chain(&self.synthetic).collect()
    }
}

const QUERY_BLOCK: usize = 256;
const CANDIDATE_BLOCK: usize = 2048;

/// Exact k nearest neighbors (self excluded) under Euclidean distance, ties to
/// the lower index. `points` is row-major `n × d`.
pub fn nearest_neighbors(points: &[f32], d: usize, k: usize) -> Vec<Vec<usize>> {
    let n = points.len().checked_div(d).unwrap_or(0);
    let norms: Vec<f32> = points.chunks(d.max(1)).map(|p| p.iter().map(|x| x * x).sum()).collect();
    let block = |start: usize, len: usize| DMatrix::from_row_slice(len, d, &points[start * d..(start + len) * d]);

    (0..n.div_ceil(QUERY_BLOCK))
        .into_par_iter()
        .flat_map_iter(|qb| {
            let q0 = qb * QUERY_BLOCK;
            let qn = QUERY_BLOCK.min(n - q0);
            let queries = block(q0, qn);
            let mut best: Vec<Vec<(f32, usize)>> = vec![Vec::with_capacity(k + 1); qn];
            for c0 in (0..n).step_by(CANDIDATE_BLOCK) {
                let cn = CANDIDATE_BLOCK.min(n - c0);
                let dots = &queries * block(c0, cn).transpose();
                for (qi, top) in best.iter_mut().enumerate() {
                    let i = q0 + qi;
                    for cj in 0..cn {
                        let j = c0 + cj;
                        if j == i {
                            continue;
                        }
                        let dist = (norms[i] + norms[j] - 2.0 * dots[(qi, cj)]).max(0.0);
                        if top.len() == k && dist >= top[k - 1].0 {
                            continue;
                        }
                        let pos = top.partition_point(|&(e, _)| e <= dist);
                        top.insert(pos, (dist, j));
                        top.truncate(k);
                    }
                }
            }
            best.into_iter().map(|top| top.into_iter().map(|(_, j)| j).collect::<Vec<_>>())
        })
        .collect()
}

/// Oversamples the minority label with SMOTE until both labels are equally
/// frequent. Distances are measured after per-feature standardization of the
/// minority rows; interpolation happens in the raw feature space.
pub fn smote_balance<R: Borrow<DatasetRow>>(rows: &[R], k: usize, seed: u64) -> Result<SmoteOutput, DatasetError> {
    let rows: Vec<&DatasetRow> = rows.iter().map(Borrow::borrow).collect();
    let mut counts = [0usize; 2];
    for r in &rows {
        match r.label {
            0.0 => counts[0] += 1,
            1.0 => counts[1] += 1,
            l => return Err(DatasetError::Smote(format!("label {l} is not binary"))),
        }
    }
    let minority_label = if counts[1] <= counts[0] { 1.0 } else { 0.0 };
    let minority: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].label == minority_label).collect();
    let m = minority.len();
    if m < 2 {
        return Err(DatasetError::Smote(format!(
            "minority class has {m} row(s); at least 2 are needed"
        )));
    }
    if k == 0 {
        return Err(DatasetError::Smote("neighbor count must be positive".into()));
    }
    let k = if k > m - 1 {
        warn!("SMOTE k={k} exceeds minority size - 1 = {}; clamping", m - 1);
        m - 1
    } else {
        k
    };
    let needed = counts[0].max(counts[1]) - m;
    let mut out = SmoteOutput {
        synthetic: Vec::with_capacity(needed),
        parents: Vec::with_capacity(needed),
        k,
    };
    if needed == 0 {
        return Ok(out);
    }

    let d = rows[minority[0]].features.len();
    let mut mean = vec![0.0f64; d];
    let mut sq = vec![0.0f64; d];
    for &i in &minority {
        for (c, &x) in rows[i].features.iter().enumerate() {
            mean[c] += x as f64;
            sq[c] += (x as f64) * (x as f64);
        }
    }
    let scale: Vec<f64> = (0..d)
        .map(|c| {
            mean[c] /= m as f64;
            let var = (sq[c] / m as f64 - mean[c] * mean[c]).max(0.0);
            if var > 0.0 {
                var.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let mut standardized = Vec::with_capacity(m * d);
    for &i in &minority {
        standardized.extend(
            rows[i]
                .features
                .iter()
                .enumerate()
                .map(|(c, &x)| ((x as f64 - mean[c]) / scale[c]) as f32),
        );
    }
    let neighbors = nearest_neighbors(&standardized, d, k);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..needed {
        let a = rng.gen_range(0..m);
        let b = neighbors[a][rng.gen_range(0..k)];
        let u: f64 = rng.gen();
        let (pa, pb) = (&rows[minority[a]], &rows[minority[b]]);
        let features = pa
            .features
            .iter()
            .zip(&pb.features)
            .map(|(&x, &y)| {
                let v = (x as f64 + u * (y as f64 - x as f64)) as f32;
                v.clamp(x.min(y), x.max(y))
            })
            .collect();
        out.synthetic.push(DatasetRow {
            game_id: pa.game_id.clone(),
            ply: pa.ply,
            mv: super::SYNTHETIC_MOVE.to_string(),
            features,
            label: minority_label,
            synthetic: true,
        });
        out.parents.push((minority[a], minority[b]));
    }
    Ok(out)
}
