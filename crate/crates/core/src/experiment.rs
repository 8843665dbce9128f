//! The evaluation grid (Elo bucket × strategy set × model family) and the
//! report tables built from its CSV output.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use log::info;
use thiserror::Error;

use crate::dataset::{build_dataset, BuildOptions, Dataset, DatasetError, FilterConfig, PgnSource};
use crate::ml::{evaluate_repeated, Family, MlError, RunSummary, Task, TrainConfig};
use crate::strategy::{FeatureSchema, StrategyConfig};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error("eval CSV line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("no evaluation records")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategySet {
    Basic,
    Advanced,
}

impl StrategySet {
    pub const ALL: [StrategySet; 2] = [StrategySet::Basic, StrategySet::Advanced];

    pub fn name(self) -> &'static str {
        match self {
            StrategySet::Basic => "basic",
            StrategySet::Advanced => "advanced",
        }
    }

    pub fn is_advanced(self) -> bool {
        self == StrategySet::Advanced
    }

    pub fn of(schema: &FeatureSchema) -> StrategySet {
        if schema.is_advanced() {
            StrategySet::Advanced
        } else {
            StrategySet::Basic
        }
    }
}

impl fmt::Display for StrategySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategySet {
    type Err = String;
    fn from_str(s: &str) -> Result<StrategySet, String> {
        match s {
            "basic" => Ok(StrategySet::Basic),
            "advanced" => Ok(StrategySet::Advanced),
            _ => Err(format!("unknown strategy set '{s}' (basic|advanced)")),
        }
    }
}

/// One cell of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub bucket: u32,
    pub strategy_set: StrategySet,
    pub family: Family,
    pub metric_mean: f64,
    pub metric_std: f64,
    pub repeats: usize,
}

impl EvalRecord {
    pub fn from_summary(bucket: u32, set: StrategySet, s: &RunSummary) -> EvalRecord {
        EvalRecord {
            bucket,
            strategy_set: set,
            family: s.family,
            metric_mean: s.mean,
            metric_std: s.std,
            repeats: s.repeats.len(),
        }
    }
}

pub const EVAL_HEADER: &str = "bucket,strategy_set,family,metric_mean,metric_std,repeats";

pub fn records_to_csv(records: &[EvalRecord]) -> String {
    let mut out = format!("{EVAL_HEADER}\n");
    for r in records {
        writeln!(
            out,
            "{},{},{},{:.4},{:.4},{}",
            r.bucket, r.strategy_set, r.family, r.metric_mean, r.metric_std, r.repeats
        )
        .unwrap();
    }
    out
}

pub fn records_from_csv(text: &str) -> Result<Vec<EvalRecord>, ExperimentError> {
    let bad = |line: usize, reason: String| ExperimentError::Format { line, reason };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == EVAL_HEADER => {}
        _ => return Err(bad(1, format!("expected header '{EVAL_HEADER}'"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(bad(i + 1, format!("expected 6 fields, found {}", f.len())));
        }
        let num = |j: usize| f[j].parse::<f64>().map_err(|_| bad(i + 1, format!("'{}' is not a number", f[j])));
        out.push(EvalRecord {
            bucket: f[0].parse().map_err(|_| bad(i + 1, format!("bad bucket '{}'", f[0])))?,
            strategy_set: f[1].parse().map_err(|e| bad(i + 1, e))?,
            family: f[2].parse().map_err(|e: MlError| bad(i + 1, e.to_string()))?,
            metric_mean: num(3)?,
            metric_std: num(4)?,
            repeats: f[5].parse().map_err(|_| bad(i + 1, format!("bad repeats '{}'", f[5])))?,
        });
    }
    Ok(out)
}

/// Markdown and CSV versions of the summary tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub markdown: String,
    pub csv: String,
}

const MISSING: &str = "\u{2014}";

fn task_heading(task: Task) -> &'static str {
    match task {
        Task::Binary => "Binary classification: balanced-test accuracy (%), higher is better",
        Task::Regression => "Regression: mean absolute error (percentage points), lower is better",
    }
}

/// Rows are strategy set × family, columns Elo buckets; the best value in each
/// column is marked (bold in markdown, `*` in CSV).
pub fn render_report(records: &[EvalRecord]) -> Result<Report, ExperimentError> {
    if records.is_empty() {
        return Err(ExperimentError::Empty);
    }
    let mut md = String::new();
    let mut csv = String::new();
    for task in [Task::Binary, Task::Regression] {
        let mine: Vec<&EvalRecord> = records.iter().filter(|r| r.family.task() == task).collect();
        if mine.is_empty() {
            continue;
        }
        let buckets: Vec<u32> = mine.iter().map(|r| r.bucket).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        // later records replace earlier ones for the same cell
        let mut cells: BTreeMap<(StrategySet, Family, u32), &EvalRecord> = BTreeMap::new();
        for r in &mine {
            cells.insert((r.strategy_set, r.family, r.bucket), r);
        }
        let rows: Vec<(StrategySet, Family)> = StrategySet::ALL
            .iter()
            .flat_map(|&s| Family::for_task(task).into_iter().map(move |f| (s, f)))
            .filter(|&(s, f)| buckets.iter().any(|&b| cells.contains_key(&(s, f, b))))
            .collect();
        let best: Vec<Option<f64>> = buckets
            .iter()
            .map(|&b| {
                let vals = rows.iter().filter_map(|&(s, f)| cells.get(&(s, f, b)).map(|r| r.metric_mean));
                match task {
                    Task::Binary => vals.reduce(f64::max),
                    Task::Regression => vals.reduce(f64::min),
                }
            })
            .collect();
        let is_best = |v: f64, i: usize| best[i].is_some_and(|b| format!("{v:.2}") == format!("{b:.2}"));

        writeln!(md, "## {}\n", task_heading(task)).unwrap();
        let cols: Vec<String> = buckets.iter().map(|b| format!("{b}–{}", b + 99)).collect();
        writeln!(md, "| Strategies | Model | {} |", cols.join(" | ")).unwrap();
        writeln!(md, "|---|---|{}", "---:|".repeat(buckets.len())).unwrap();
        writeln!(csv, "task,strategy_set,family,{}", buckets.iter().map(u32::to_string).collect::<Vec<_>>().join(",")).unwrap();
        for &(s, f) in &rows {
            let mut md_cells = Vec::new();
            let mut csv_cells = Vec::new();
            for (i, &b) in buckets.iter().enumerate() {
                match cells.get(&(s, f, b)) {
                    Some(r) => {
                        let text = format!("{:.2} ± {:.2}", r.metric_mean, r.metric_std);
                        let mark = is_best(r.metric_mean, i);
                        md_cells.push(if mark { format!("**{text}**") } else { text });
                        csv_cells.push(format!("{:.4}{}", r.metric_mean, if mark { "*" } else { "" }));
                    }
                    None => {
                        md_cells.push(MISSING.into());
                        csv_cells.push(MISSING.into());
                    }
                }
            }
            writeln!(md, "| {s} | {} | {} |", f.title(), md_cells.join(" | ")).unwrap();
            writeln!(csv, "{task},{s},{f},{}", csv_cells.join(",")).unwrap();
        }
        md.push('\n');
    }
    Ok(Report { markdown: md, csv })
}

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub buckets: Vec<u32>,
    pub sets: Vec<StrategySet>,
    pub families: Vec<Family>,
    /// Filter settings shared by all buckets; the Elo window is set per bucket.
    pub filter: FilterConfig,
    pub strategy: StrategyConfig,
    pub train: TrainConfig,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            buckets: vec![1200, 1300, 1400, 1500],
            sets: StrategySet::ALL.to_vec(),
            families: Family::ALL.to_vec(),
            filter: FilterConfig::default(),
            strategy: StrategyConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub records: Vec<EvalRecord>,
    pub summaries: Vec<(u32, StrategySet, RunSummary)>,
    /// The advanced dataset of each bucket, as built.
    pub datasets: Vec<Dataset>,
}

/// Builds one dataset per bucket (advanced schema, projected for the basic set)
/// and runs the repeated evaluation for every set × family.
pub fn run_grid(sources: &[PgnSource], cfg: &GridConfig) -> Result<GridOutcome, ExperimentError> {
    let mut out = GridOutcome {
        records: Vec::new(),
        summaries: Vec::new(),
        datasets: Vec::new(),
    };
    for &bucket in &cfg.buckets {
        let filter = FilterConfig {
            elo_bucket_lo: bucket,
            elo_bucket_hi: bucket + 100,
            ..cfg.filter.clone()
        };
        let built = build_dataset(
            sources,
            &BuildOptions {
                filter,
                advanced: true,
                strategy: cfg.strategy,
            },
        )?;
        let advanced = built.dataset;
        info!(
            "bucket {bucket}: {} games, {} rows",
            advanced.provenance.counts.replayed, advanced.provenance.counts.rows
        );
        for &set in &cfg.sets {
            let data = if set.is_advanced() {
                advanced.clone()
            } else {
                advanced.project(&FeatureSchema::basic())?
            };
            for &family in &cfg.families {
                let summary = evaluate_repeated(&data, family, &cfg.train, None)?;
                info!(
                    "bucket {bucket} {set} {family}: {:.2} ± {:.2} ({:.1}s)",
                    summary.mean, summary.std, summary.seconds
                );
                out.records.push(EvalRecord::from_summary(bucket, set, &summary));
                out.summaries.push((bucket, set, summary));
            }
        }
        out.datasets.push(advanced);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(bucket: u32, set: StrategySet, family: Family, mean: f64) -> EvalRecord {
        EvalRecord {
            bucket,
            strategy_set: set,
            family,
            metric_mean: mean,
            metric_std: 0.01,
            repeats: 10,
        }
    }

    #[test]
    fn csv_round_trip() {
        let rs = vec![
            rec(1200, StrategySet::Basic, Family::Ridge, 80.5),
            rec(1300, StrategySet::Advanced, Family::Mlp, 13.25),
        ];
        let text = records_to_csv(&rs);
        assert!(text.starts_with("bucket,strategy_set,family,metric_mean,metric_std,repeats\n"));
        assert_eq!(records_from_csv(&text).unwrap(), rs);
        assert!(records_from_csv("nope\n").is_err());
    }

    #[test]
    fn report_layout_and_best_marks() {
        let rs = vec![
            rec(1200, StrategySet::Basic, Family::Ridge, 80.0),
            rec(1200, StrategySet::Advanced, Family::Ridge, 82.0),
            rec(1300, StrategySet::Basic, Family::Ridge, 79.0),
            rec(1200, StrategySet::Advanced, Family::Svc, 81.0),
            rec(1200, StrategySet::Basic, Family::Mlp, 14.0),
            rec(1200, StrategySet::Basic, Family::LinReg, 24.0),
        ];
        let r = render_report(&rs).unwrap();
        let lines: Vec<&str> = r.csv.lines().collect();
        assert_eq!(lines[0], "task,strategy_set,family,1200,1300");
        assert_eq!(lines[1], "binary,basic,ridge,80.0000,79.0000*");
        assert_eq!(lines[2], "binary,advanced,ridge,82.0000*,\u{2014}");
        assert_eq!(lines[3], "binary,advanced,svc,81.0000,\u{2014}");
        assert_eq!(lines[4], "task,strategy_set,family,1200");
        assert_eq!(lines[5], "regression,basic,linreg,24.0000");
        assert_eq!(lines[6], "regression,basic,mlp,14.0000*");
        assert!(r.markdown.contains("| advanced | Ridge Classifier | **82.00 ± 0.01** | \u{2014} |"));
        assert!(matches!(render_report(&[]), Err(ExperimentError::Empty)));
    }
}
