//! Linear models, a small MLP, and the repeated-split evaluation protocol.
//!
//! Every model works on standardized features; the fitted [`Standardizer`]
//! travels with the weights so predictions take raw feature vectors.

mod artifact;
mod eval;
mod lbfgs;
mod linear;
mod mlp;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dataset::DatasetRow;

pub use artifact::{model_from_str, model_to_string, read_model, write_model};
pub use eval::{
    accuracy_percent, derive_seed, evaluate, evaluate_repeated, mean_abs_error_points, mean_std, split_by_game,
    undersample, RepeatOutcome, RunSummary, Split,
};
pub use lbfgs::{minimize, LbfgsOptions, LbfgsResult};
pub use linear::{
    fit_linear_regression, fit_linear_svc, fit_logistic_regression, fit_ridge_classifier,
    logistic_objective, ridge_objective, sigmoid, svc_objective, LinearFit,
};
pub use mlp::{fit_mlp, Layer, MlpFit, MlpOptions, Network};

#[derive(Debug, Error)]
pub enum MlError {
    #[error("no training rows")]
    Empty,
    #[error("{0}")]
    Singular(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("training diverged: {0}")]
    Diverged(String),
    #[error("{family} is a {family_task} model, not usable for the {task} task")]
    TaskMismatch {
        family: Family,
        family_task: Task,
        task: Task,
    },
    #[error("schema mismatch: model expects {expected}, data is {found}")]
    SchemaMismatch { expected: String, found: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("model file line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Dataset(#[from] crate::dataset::DatasetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Task {
    Binary,
    Regression,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Binary => "binary",
            Task::Regression => "regression",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = MlError;
    fn from_str(s: &str) -> Result<Task, MlError> {
        match s {
            "binary" => Ok(Task::Binary),
            "regression" => Ok(Task::Regression),
            _ => Err(MlError::Config(format!("unknown task '{s}' (binary|regression)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Ridge,
    LogReg,
    Svc,
    LinReg,
    Mlp,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Ridge, Family::LogReg, Family::Svc, Family::LinReg, Family::Mlp];

    pub fn name(self) -> &'static str {
        match self {
            Family::Ridge => "ridge",
            Family::LogReg => "logreg",
            Family::Svc => "svc",
            Family::LinReg => "linreg",
            Family::Mlp => "mlp",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Family::Ridge => "Ridge Classifier",
            Family::LogReg => "Logistic Regression",
            Family::Svc => "LinearSVC",
            Family::LinReg => "Linear Regression",
            Family::Mlp => "MLP",
        }
    }

    pub fn task(self) -> Task {
        match self {
            Family::Ridge | Family::LogReg | Family::Svc => Task::Binary,
            Family::LinReg | Family::Mlp => Task::Regression,
        }
    }

    pub fn for_task(task: Task) -> Vec<Family> {
        Family::ALL.into_iter().filter(|f| f.task() == task).collect()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = MlError;
    fn from_str(s: &str) -> Result<Family, MlError> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| MlError::Config(format!("unknown model '{s}' (ridge|logreg|svc|linreg|mlp)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlpLoss {
    Mse,
    CrossEntropy,
}

impl MlpLoss {
    pub fn name(self) -> &'static str {
        match self {
            MlpLoss::Mse => "mse",
            MlpLoss::CrossEntropy => "cross_entropy",
        }
    }

    pub fn parse(s: &str) -> Option<MlpLoss> {
        match s {
            "mse" => Some(MlpLoss::Mse),
            "cross_entropy" => Some(MlpLoss::CrossEntropy),
            _ => None,
        }
    }
}

/// Hyperparameters for every family plus the evaluation protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub ridge_alpha: f64,
    pub logreg_c: f64,
    pub logreg_max_iter: usize,
    pub logreg_tol: f64,
    pub svc_c: f64,
    pub svc_max_iter: usize,
    pub svc_tol: f64,
    /// 0 means ordinary least squares, with a tiny ridge fallback when singular.
    pub linreg_alpha: f64,
    pub mlp: MlpOptions,
    pub smote_k: usize,
    pub test_fraction: f64,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            ridge_alpha: 1.0,
            logreg_c: 0.1,
            logreg_max_iter: 4000,
            logreg_tol: 1e-4,
            svc_c: 1.0,
            svc_max_iter: 1000,
            svc_tol: 1e-4,
            linreg_alpha: 0.0,
            mlp: MlpOptions::default(),
            smote_k: crate::dataset::DEFAULT_NEIGHBORS,
            test_fraction: 0.2,
            repeats: 10,
            seed: 42,
        }
    }
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl TrainConfig {
    /// Hyperparameters that matter for `family`, as written in model headers.
    pub fn hyper(&self, family: Family) -> Vec<(String, String)> {
        let kv = |k: &str, v: String| (k.to_string(), v);
        match family {
            Family::Ridge => vec![kv("alpha", self.ridge_alpha.to_string())],
            Family::LogReg => vec![
                kv("C", self.logreg_c.to_string()),
                kv("max_iter", self.logreg_max_iter.to_string()),
                kv("tol", self.logreg_tol.to_string()),
                kv("penalty", "l2".into()),
            ],
            Family::Svc => vec![
                kv("C", self.svc_c.to_string()),
                kv("max_iter", self.svc_max_iter.to_string()),
                kv("tol", self.svc_tol.to_string()),
                kv("loss", "squared_hinge".into()),
            ],
            Family::LinReg => vec![kv("alpha", self.linreg_alpha.to_string())],
            Family::Mlp => vec![
                kv("layers", join(&self.mlp.hidden)),
                kv("activation", "relu".into()),
                kv("output", "sigmoid".into()),
                kv("loss", self.mlp.loss.name().into()),
                kv("lr", self.mlp.lr.to_string()),
                kv("epochs", self.mlp.epochs.to_string()),
                kv("batch", self.mlp.batch.to_string()),
                kv("patience", self.mlp.patience.to_string()),
                kv("min_improvement", self.mlp.min_improvement.to_string()),
            ],
        }
    }

    /// Inverse of [`TrainConfig::hyper`].
    pub fn set_hyper(&mut self, family: Family, key: &str, value: &str) -> Result<(), MlError> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T, MlError> {
            v.parse().map_err(|_| MlError::Config(format!("bad value '{v}' for {key}")))
        }
        match (family, key) {
            (Family::Ridge, "alpha") => self.ridge_alpha = num(key, value)?,
            (Family::LogReg, "C") => self.logreg_c = num(key, value)?,
            (Family::LogReg, "max_iter") => self.logreg_max_iter = num(key, value)?,
            (Family::LogReg, "tol") => self.logreg_tol = num(key, value)?,
            (Family::Svc, "C") => self.svc_c = num(key, value)?,
            (Family::Svc, "max_iter") => self.svc_max_iter = num(key, value)?,
            (Family::Svc, "tol") => self.svc_tol = num(key, value)?,
            (Family::LinReg, "alpha") => self.linreg_alpha = num(key, value)?,
            (Family::Mlp, "layers") => {
                self.mlp.hidden = if value.is_empty() {
                    Vec::new()
                } else {
                    value.split(',').map(|v| num(key, v.trim())).collect::<Result<_, _>>()?
                }
            }
            (Family::Mlp, "loss") => {
                self.mlp.loss =
                    MlpLoss::parse(value).ok_or_else(|| MlError::Config(format!("unknown loss '{value}'")))?
            }
            (Family::Mlp, "lr") => self.mlp.lr = num(key, value)?,
            (Family::Mlp, "epochs") => self.mlp.epochs = num(key, value)?,
            (Family::Mlp, "batch") => self.mlp.batch = num(key, value)?,
            (Family::Mlp, "patience") => self.mlp.patience = num(key, value)?,
            (Family::Mlp, "min_improvement") => self.mlp.min_improvement = num(key, value)?,
            (_, "penalty" | "loss" | "activation" | "output") => {}
            _ => return Err(MlError::Config(format!("unknown {family} hyperparameter '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), MlError> {
        let bad = |m: &str| Err(MlError::Config(m.into()));
        if self.ridge_alpha < 0.0 || self.linreg_alpha < 0.0 {
            return bad("alpha must be non-negative");
        }
        if self.logreg_c <= 0.0 || self.svc_c <= 0.0 {
            return bad("C must be positive");
        }
        if !(0.0..1.0).contains(&self.test_fraction) || self.test_fraction == 0.0 {
            return bad("test fraction must lie in (0, 1)");
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1");
        }
        if self.mlp.batch == 0 || self.mlp.lr <= 0.0 {
            return bad("MLP batch and learning rate must be positive");
        }
        if self.smote_k == 0 {
            return bad("SMOTE neighbor count must be positive");
        }
        Ok(())
    }
}

/// Per-feature centering and scaling fitted on training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Always positive; constant features get scale 1.
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a [f32]>, d: usize) -> Standardizer {
        let mut n = 0usize;
        let mut mean = vec![0.0; d];
        let mut m2 = vec![0.0; d];
        // Welford, for stability on large counts
        for r in rows {
            n += 1;
            for (j, &x) in r.iter().enumerate() {
                let x = x as f64;
                let delta = x - mean[j];
                mean[j] += delta / n as f64;
                m2[j] += delta * (x - mean[j]);
            }
        }
        let scale = m2
            .iter()
            .map(|&s| {
                let sd = if n > 0 { (s / n as f64).sqrt() } else { 0.0 };
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, raw: &[f32]) -> Vec<f64> {
        raw.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(&x, (m, s))| (x as f64 - m) / s)
            .collect()
    }
}

/// Standardized design matrix (row-major, `f32`) with targets.
#[derive(Debug, Clone)]
pub struct Samples {
    x: Vec<f32>,
    y: Vec<f64>,
    d: usize,
}

impl Samples {
    pub fn new(x: Vec<f32>, y: Vec<f64>, d: usize) -> Samples {
        assert_eq!(x.len(), y.len() * d, "matrix shape does not match targets");
        Samples { x, y, d }
    }

    pub fn from_rows(rows: &[&DatasetRow], standardizer: &Standardizer) -> Samples {
        let d = standardizer.dim();
        let mut x = Vec::with_capacity(rows.len() * d);
        for r in rows {
            x.extend(standardizer.apply(&r.features).into_iter().map(|v| v as f32));
        }
        Samples::new(x, rows.iter().map(|r| r.label).collect(), d)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.x.chunks(self.d.max(1)).take(self.y.len())
    }

    pub fn targets(&self) -> &[f64] {
        &self.y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    Linear { w: Vec<f64>, b: f64 },
    Mlp(Network),
}

/// A trained model: family, hyperparameters, scaling and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub family: Family,
    pub schema_version: String,
    pub seed: u64,
    pub hyper: Vec<(String, String)>,
    /// Solver facts such as iteration counts; informational.
    pub info: Vec<(String, String)>,
    pub standardizer: Standardizer,
    pub weights: Weights,
}

impl ModelParams {
    pub fn dim(&self) -> usize {
        self.standardizer.dim()
    }

    /// Linear score, or the network output, for a raw feature vector.
    pub fn decision(&self, raw: &[f32]) -> f64 {
        let x = self.standardizer.apply(raw);
        match &self.weights {
            Weights::Linear { w, b } => b + w.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>(),
            Weights::Mlp(net) => net.predict(&x),
        }
    }

    /// Class label 0/1 for classifiers, unclamped value for regressors.
    pub fn predict(&self, raw: &[f32]) -> f64 {
        let s = self.decision(raw);
        match self.family.task() {
            Task::Binary => {
                if s > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Task::Regression => s,
        }
    }

    /// Logistic-link probability, for logistic regression only.
    pub fn probability(&self, raw: &[f32]) -> Option<f64> {
        (self.family == Family::LogReg).then(|| sigmoid(self.decision(raw)))
    }

    pub fn config(&self) -> Result<TrainConfig, MlError> {
        let mut c = TrainConfig {
            seed: self.seed,
            ..TrainConfig::default()
        };
        for (k, v) in &self.hyper {
            c.set_hyper(self.family, k, v)?;
        }
        Ok(c)
    }
}

/// Fits `family` on raw rows; the standardizer is fitted on the same rows.
pub fn fit_model(
    family: Family,
    config: &TrainConfig,
    schema_version: &str,
    rows: &[&DatasetRow],
) -> Result<ModelParams, MlError> {
    config.validate()?;
    let first = rows.first().ok_or(MlError::Empty)?;
    let standardizer = Standardizer::fit(rows.iter().map(|r| r.features.as_slice()), first.features.len());
    let samples = Samples::from_rows(rows, &standardizer);
    let (weights, info) = match family {
        Family::Ridge => {
            let fit = fit_ridge_classifier(&samples, config.ridge_alpha)?;
            (fit.weights(), fit.info)
        }
        Family::LogReg => {
            let fit = fit_logistic_regression(&samples, config.logreg_c, config.logreg_max_iter, config.logreg_tol)?;
            (fit.weights(), fit.info)
        }
        Family::Svc => {
            let fit = fit_linear_svc(&samples, config.svc_c, config.svc_max_iter, config.svc_tol)?;
            (fit.weights(), fit.info)
        }
        Family::LinReg => {
            let fit = fit_linear_regression(&samples, config.linreg_alpha)?;
            (fit.weights(), fit.info)
        }
        Family::Mlp => {
            let fit = fit_mlp(&samples, &config.mlp, config.seed)?;
            let info = vec![
                ("epochs_run".into(), fit.epochs_run.to_string()),
                ("final_loss".into(), fit.losses.last().copied().unwrap_or(f64::NAN).to_string()),
            ];
            (Weights::Mlp(fit.network), info)
        }
    };
    Ok(ModelParams {
        family,
        schema_version: schema_version.to_string(),
        seed: config.seed,
        hyper: config.hyper(family),
        info,
        standardizer,
        weights,
    })
}
