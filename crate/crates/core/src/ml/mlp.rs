use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::linear::sigmoid;
use super::{MlError, MlpLoss, Samples};

#[derive(Debug, Clone, PartialEq)]
pub struct MlpOptions {
    pub hidden: Vec<usize>,
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    /// Stop after this many epochs without an improvement of `min_improvement`.
    pub patience: usize,
    pub min_improvement: f64,
    pub loss: MlpLoss,
}

impl Default for MlpOptions {
    fn default() -> Self {
        MlpOptions {
            hidden: vec![32, 16],
            lr: 1e-3,
            epochs: 200,
            batch: 128,
            patience: 10,
            min_improvement: 1e-5,
            loss: MlpLoss::Mse,
        }
    }
}

/// Dense layer; `w` is `outputs × inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub w: DMatrix<f64>,
    pub b: DVector<f64>,
}

/// ReLU hidden layers and a single sigmoid output.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub layers: Vec<Layer>,
}

impl Network {
    /// Glorot-uniform weights, zero biases. `sizes` runs input, hidden.., 1.
    pub fn init(sizes: &[usize], rng: &mut impl Rng) -> Network {
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                Layer {
                    w: DMatrix::from_fn(fan_out, fan_in, |_, _| rng.gen_range(-limit..=limit)),
                    b: DVector::zeros(fan_out),
                }
            })
            .collect();
        Network { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.ncols()
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1].iter().map(|l| l.w.nrows()).collect()
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut a = DVector::from_column_slice(x);
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = &l.w * &a + &l.b;
            if i < last {
                z.apply(|v| *v = v.max(0.0));
            }
            a = z;
        }
        sigmoid(a[0])
    }

    /// Pre-activations of every layer for a `batch × inputs` matrix.
    fn forward(&self, x: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
        let mut zs: Vec<DMatrix<f64>> = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.iter().enumerate() {
            let input = if i == 0 { x.clone() } else { zs[i - 1].map(|v| v.max(0.0)) };
            let mut z = input * l.w.transpose();
            for mut row in z.row_iter_mut() {
                row += l.b.transpose();
            }
            zs.push(z);
        }
        zs
    }

    /// Mean loss over the batch and its gradient for every layer.
    pub fn loss_and_grad(&self, x: &DMatrix<f64>, y: &[f64], loss: MlpLoss) -> (f64, Vec<Layer>) {
        let n = x.nrows() as f64;
        let zs = self.forward(x);
        let out = zs.last().expect("at least one layer");
        let mut value = 0.0;
        let mut dz = DMatrix::zeros(x.nrows(), 1);
        for (i, &t) in y.iter().enumerate() {
            let z = out[(i, 0)];
            let p = sigmoid(z);
            match loss {
                MlpLoss::Mse => {
                    value += (p - t) * (p - t);
                    dz[(i, 0)] = 2.0 * (p - t) * p * (1.0 - p) / n;
                }
                MlpLoss::CrossEntropy => {
                    let sp = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
                    value += sp - t * z;
                    dz[(i, 0)] = (p - t) / n;
                }
            }
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        for i in (0..self.layers.len()).rev() {
            let input = if i == 0 { x.clone() } else { zs[i - 1].map(|v| v.max(0.0)) };
            let gw = dz.transpose() * &input;
            let gb = DVector::from_iterator(dz.ncols(), dz.column_iter().map(|c| c.sum()));
            if i > 0 {
                let mut da = &dz * &self.layers[i].w;
                da.zip_apply(&zs[i - 1], |g, z| {
                    if z <= 0.0 {
                        *g = 0.0
                    }
                });
                dz = da;
            }
            grads.push(Layer { w: gw, b: gb });
        }
        grads.reverse();
        (value / n, grads)
    }
}

#[derive(Debug, Clone)]
pub struct MlpFit {
    pub network: Network,
    /// Mean training loss per completed epoch.
    pub losses: Vec<f64>,
    pub epochs_run: usize,
}

fn batch_matrix(s: &Samples, idx: &[usize]) -> (DMatrix<f64>, Vec<f64>) {
    let x = DMatrix::from_fn(idx.len(), s.dim(), |i, j| s.row(idx[i])[j] as f64);
    (x, idx.iter().map(|&i| s.targets()[i]).collect())
}

struct Adam {
    m: Vec<Layer>,
    v: Vec<Layer>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(net: &Network) -> Adam {
        let zeros = || {
            net.layers
                .iter()
                .map(|l| Layer {
                    w: DMatrix::zeros(l.w.nrows(), l.w.ncols()),
                    b: DVector::zeros(l.b.len()),
                })
                .collect::<Vec<_>>()
        };
        Adam {
            m: zeros(),
            v: zeros(),
            t: 0,
        }
    }

    fn step(&mut self, net: &mut Network, grads: &[Layer], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for k in 0..p.len() {
                m[k] = Self::B1 * m[k] + (1.0 - Self::B1) * g[k];
                v[k] = Self::B2 * v[k] + (1.0 - Self::B2) * g[k] * g[k];
                p[k] -= lr * (m[k] / c1) / ((v[k] / c2).sqrt() + Self::EPS);
            }
        };
        for (((layer, g), m), v) in net.layers.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            update(layer.w.as_mut_slice(), g.w.as_slice(), m.w.as_mut_slice(), v.w.as_mut_slice());
            update(layer.b.as_mut_slice(), g.b.as_slice(), m.b.as_mut_slice(), v.b.as_mut_slice());
        }
    }
}

/// Mini-batch Adam on targets in [0, 1]; deterministic for a given seed.
pub fn fit_mlp(s: &Samples, opts: &MlpOptions, seed: u64) -> Result<MlpFit, MlError> {
    if s.is_empty() {
        return Err(MlError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sizes = vec![s.dim()];
    sizes.extend(&opts.hidden);
    sizes.push(1);
    let mut net = Network::init(&sizes, &mut rng);
    let mut adam = Adam::new(&net);
    let mut order: Vec<usize> = (0..s.len()).collect();

    let full_loss = |net: &Network| {
        order
            .chunks(4096)
            .map(|c| {
                let (x, y) = batch_matrix(s, c);
                net.loss_and_grad(&x, &y, opts.loss).0 * c.len() as f64
            })
            .sum::<f64>()
            / s.len() as f64
    };
    let initial = full_loss(&net);

    let mut losses = Vec::new();
    let mut best = f64::INFINITY;
    let mut stall = 0;
    for epoch in 0..opts.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(opts.batch) {
            let (x, y) = batch_matrix(s, chunk);
            let (loss, grads) = net.loss_and_grad(&x, &y, opts.loss);
            total += loss * chunk.len() as f64;
            adam.step(&mut net, &grads, opts.lr);
        }
        let loss = total / s.len() as f64;
        if !loss.is_finite() || loss > 10.0 * initial.max(1e-12) {
            return Err(MlError::Diverged(format!(
                "epoch {} loss {loss} vs initial {initial}; try a smaller learning rate",
                epoch + 1
            )));
        }
        losses.push(loss);
        if loss < best - opts.min_improvement {
            best = loss;
            stall = 0;
        } else {
            stall += 1;
            if stall >= opts.patience {
                break;
            }
        }
    }
    Ok(MlpFit {
        network: net,
        epochs_run: losses.len(),
        losses,
    })
}
