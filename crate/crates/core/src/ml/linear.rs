use log::warn;
use nalgebra::{DMatrix, DVector};

use super::lbfgs::{minimize, LbfgsOptions};
use super::{MlError, Samples, Weights};

/// Weights and bias of a linear model plus solver facts.
#[derive(Debug, Clone)]
pub struct LinearFit {
    pub w: Vec<f64>,
    pub b: f64,
    pub info: Vec<(String, String)>,
    /// Objective per accepted iteration (iterative solvers only).
    pub trace: Vec<f64>,
}

impl LinearFit {
    pub fn weights(&self) -> Weights {
        Weights::Linear {
            w: self.w.clone(),
            b: self.b,
        }
    }

    pub fn score(&self, x: &[f32]) -> f64 {
        self.b + self.w.iter().zip(x).map(|(w, &v)| w * v as f64).sum::<f64>()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn pm1(y: f64) -> f64 {
    if y > 0.5 {
        1.0
    } else {
        -1.0
    }
}

/// Sums a per-row loss over the samples; `params` is `[w.., b]`.
/// Returns the loss sum and its gradient.
fn linear_pass(s: &Samples, params: &[f64], row_loss: impl Fn(f64, f64) -> (f64, f64)) -> (f64, Vec<f64>) {
    let d = s.dim();
    let (w, b) = (&params[..d], params[d]);
    let mut grad = vec![0.0; d + 1];
    let mut total = 0.0;
    for (x, &y) in s.rows().zip(s.targets()) {
        let z = b + w.iter().zip(x).map(|(w, &v)| w * v as f64).sum::<f64>();
        let (loss, dz) = row_loss(z, y);
        total += loss;
        if dz != 0.0 {
            for (g, &v) in grad.iter_mut().zip(x) {
                *g += dz * v as f64;
            }
            grad[d] += dz;
        }
    }
    (total, grad)
}

fn add_l2(value: &mut f64, grad: &mut [f64], params: &[f64], coef: f64) {
    let d = params.len() - 1;
    for j in 0..d {
        *value += 0.5 * coef * params[j] * params[j];
        grad[j] += coef * params[j];
    }
}

/// Mean log-loss plus ‖w‖²/(2Cn), labels in {0, 1}; the bias is not penalized.
pub fn logistic_objective(s: &Samples, c: f64) -> impl Fn(&[f64]) -> (f64, Vec<f64>) + '_ {
    let n = s.len() as f64;
    move |p: &[f64]| {
        let (sum, mut g) = linear_pass(s, p, |z, y| (softplus(z) - y * z, sigmoid(z) - y));
        let mut v = sum / n;
        g.iter_mut().for_each(|x| *x /= n);
        add_l2(&mut v, &mut g, p, 1.0 / (c * n));
        (v, g)
    }
}

/// Mean squared hinge on ±1 labels plus ‖w‖²/(2Cn).
pub fn svc_objective(s: &Samples, c: f64) -> impl Fn(&[f64]) -> (f64, Vec<f64>) + '_ {
    let n = s.len() as f64;
    move |p: &[f64]| {
        let (sum, mut g) = linear_pass(s, p, |z, y| {
            let t = pm1(y);
            let slack = 1.0 - t * z;
            if slack > 0.0 {
                (slack * slack, -2.0 * t * slack)
            } else {
                (0.0, 0.0)
            }
        });
        let mut v = sum / n;
        g.iter_mut().for_each(|x| *x /= n);
        add_l2(&mut v, &mut g, p, 1.0 / (c * n));
        (v, g)
    }
}

/// ‖t − Xw − b‖² + α‖w‖² on ±1 targets, the ridge classifier's objective.
pub fn ridge_objective(s: &Samples, alpha: f64) -> impl Fn(&[f64]) -> (f64, Vec<f64>) + '_ {
    move |p: &[f64]| {
        let (mut v, mut g) = linear_pass(s, p, |z, y| {
            let r = z - pm1(y);
            (r * r, 2.0 * r)
        });
        add_l2(&mut v, &mut g, p, 2.0 * alpha);
        (v, g)
    }
}

fn check_binary(s: &Samples) -> Result<(), MlError> {
    if s.is_empty() {
        return Err(MlError::Empty);
    }
    if let Some(y) = s.targets().iter().find(|&&y| y != 0.0 && y != 1.0) {
        return Err(MlError::Config(format!("binary models need 0/1 labels, found {y}")));
    }
    Ok(())
}

fn iterative(
    s: &Samples,
    objective: impl FnMut(&[f64]) -> (f64, Vec<f64>),
    max_iter: usize,
    tol: f64,
) -> Result<LinearFit, MlError> {
    let d = s.dim();
    let r = minimize(
        objective,
        vec![0.0; d + 1],
        LbfgsOptions {
            max_iter,
            tol,
            ..LbfgsOptions::default()
        },
    )?;
    if !r.converged {
        warn!(
            "solver stopped after {} iterations with gradient norm {:.3e} > tol {tol:e}",
            r.iterations, r.grad_norm
        );
    }
    Ok(LinearFit {
        w: r.x[..d].to_vec(),
        b: r.x[d],
        info: vec![
            ("iterations".into(), r.iterations.to_string()),
            ("converged".into(), r.converged.to_string()),
        ],
        trace: r.trace,
    })
}

pub fn fit_logistic_regression(s: &Samples, c: f64, max_iter: usize, tol: f64) -> Result<LinearFit, MlError> {
    check_binary(s)?;
    iterative(s, logistic_objective(s, c), max_iter, tol)
}

pub fn fit_linear_svc(s: &Samples, c: f64, max_iter: usize, tol: f64) -> Result<LinearFit, MlError> {
    check_binary(s)?;
    iterative(s, svc_objective(s, c), max_iter, tol)
}

const CHUNK: usize = 4096;

/// Centered normal equations: (G, r, x̄, ȳ) with G = X̃ᵀX̃ and r = X̃ᵀỹ.
fn normal_equations(s: &Samples, target: impl Fn(f64) -> f64) -> (DMatrix<f64>, DVector<f64>, Vec<f64>, f64) {
    let (n, d) = (s.len(), s.dim());
    let mut mean = vec![0.0; d];
    let mut ymean = 0.0;
    for (x, &y) in s.rows().zip(s.targets()) {
        for (m, &v) in mean.iter_mut().zip(x) {
            *m += v as f64;
        }
        ymean += target(y);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    ymean /= n as f64;

    let mut gram = DMatrix::<f64>::zeros(d, d);
    let mut rhs = DVector::<f64>::zeros(d);
    for start in (0..n).step_by(CHUNK) {
        let len = CHUNK.min(n - start);
        let chunk = DMatrix::from_fn(len, d, |i, j| s.row(start + i)[j] as f64 - mean[j]);
        let yc = DVector::from_fn(len, |i, _| target(s.targets()[start + i]) - ymean);
        gram.gemm_tr(1.0, &chunk, &chunk, 1.0);
        rhs.gemv_tr(1.0, &chunk, &yc, 1.0);
    }
    (gram, rhs, mean, ymean)
}

/// Solves (G + αI)w = r; `None` when the system is numerically singular.
fn solve_spd(gram: &DMatrix<f64>, rhs: &DVector<f64>, alpha: f64) -> Option<DVector<f64>> {
    let d = gram.nrows();
    let a = gram + DMatrix::identity(d, d) * alpha;
    let scale = (0..d).map(|i| a[(i, i)]).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let chol = a.cholesky()?;
    let l = chol.l_dirty();
    if (0..d).any(|i| l[(i, i)] * l[(i, i)] < 1e-12 * scale) {
        return None;
    }
    Some(chol.solve(rhs))
}

fn closed_form(s: &Samples, target: impl Fn(f64) -> f64, alpha: f64, fallback: bool) -> Result<LinearFit, MlError> {
    if s.is_empty() {
        return Err(MlError::Empty);
    }
    let (gram, rhs, mean, ymean) = normal_equations(s, target);
    let d = s.dim();
    let mut used = alpha;
    let w = match solve_spd(&gram, &rhs, alpha) {
        Some(w) => w,
        None if fallback => {
            let trace = (0..d).map(|i| gram[(i, i)]).sum::<f64>() / d.max(1) as f64;
            used = 1e-8 * trace.max(1.0);
            warn!("design matrix is rank-deficient; refitting with ridge alpha {used:e}");
            solve_spd(&gram, &rhs, used)
                .ok_or_else(|| MlError::Singular("normal equations singular even with the ridge fallback".into()))?
        }
        None => {
            return Err(MlError::Singular(format!(
                "normal equations are singular with alpha = {alpha}; use alpha > 0"
            )))
        }
    };
    let w: Vec<f64> = w.iter().copied().collect();
    let b = ymean - w.iter().zip(&mean).map(|(a, m)| a * m).sum::<f64>();
    Ok(LinearFit {
        w,
        b,
        info: vec![("alpha_used".into(), used.to_string())],
        trace: Vec::new(),
    })
}

/// Least squares on ±1 targets with L2 penalty `alpha`; predict by the score's sign.
pub fn fit_ridge_classifier(s: &Samples, alpha: f64) -> Result<LinearFit, MlError> {
    check_binary(s)?;
    closed_form(s, pm1, alpha, false)
}

/// Least squares on continuous targets. `alpha = 0` is plain OLS, switching to a
/// tiny ridge term (with a warning) when the design is rank-deficient.
pub fn fit_linear_regression(s: &Samples, alpha: f64) -> Result<LinearFit, MlError> {
    closed_form(s, |y| y, alpha, true)
}
