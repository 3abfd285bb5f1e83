//! Minibatch Adam on mean squared error with early stopping.

use ndarray::{Array1, Array2, Axis, Zip};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, Layer, WismModel};
use crate::error::{Error, Result};

/// Minimum corpus size accepted by [`train`].
const MIN_SAMPLES: usize = 1000;

/// Hyperparameters for one training run. Deserializes from a config file
/// where every omitted field keeps its default.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop after this many epochs without a new best validation loss.
    pub patience: usize,
    pub validation_fraction: f64,
    /// Hidden layer widths; the output layer is always a single neuron.
    pub hidden: Vec<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 1024,
            max_epochs: 300,
            patience: 10,
            validation_fraction: 0.2,
            hidden: vec![256, 256, 256],
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0
            && self.batch_size >= 1
            && self.max_epochs >= 1
            && self.patience >= 1
            && self.validation_fraction > 0.0
            && self.validation_fraction < 1.0
            && !self.hidden.is_empty()
            && self.hidden.iter().all(|&h| h >= 1);
        if ok {
            Ok(())
        } else {
            Err(Error::config("invalid training configuration"))
        }
    }
}

/// Loss trace of one epoch, on the standardized target scale.
#[derive(Clone, Copy, Debug)]
pub struct EpochStat {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

/// One Adam update for a single parameter; moment estimates update in
/// place, `t` is the 1-based global step count.
#[allow(clippy::too_many_arguments)]
pub(crate) fn adam_scalar(
    theta: f64,
    grad: f64,
    m: &mut f64,
    v: &mut f64,
    t: u64,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) -> f64 {
    *m = beta1 * *m + (1.0 - beta1) * grad;
    *v = beta2 * *v + (1.0 - beta2) * grad * grad;
    let m_hat = *m / (1.0 - beta1.powi(t as i32));
    let v_hat = *v / (1.0 - beta2.powi(t as i32));
    theta - lr * m_hat / (v_hat.sqrt() + eps)
}

struct LayerGrad {
    weights: Array2<f64>,
    bias: Array1<f64>,
}

struct AdamState {
    m: Vec<LayerGrad>,
    v: Vec<LayerGrad>,
    t: u64,
}

impl AdamState {
    fn new(layers: &[Layer]) -> Self {
        let zero = |l: &Layer| LayerGrad {
            weights: Array2::zeros(l.weights.raw_dim()),
            bias: Array1::zeros(l.bias.raw_dim()),
        };
        AdamState {
            m: layers.iter().map(zero).collect(),
            v: layers.iter().map(zero).collect(),
            t: 0,
        }
    }

    fn update(&mut self, layers: &mut [Layer], grads: &[LayerGrad], cfg: &TrainConfig) {
        self.t += 1;
        let t = self.t;
        // Zip handles any memory layout; matrix products of transposed
        // views come back column-major.
        for (l, layer) in layers.iter_mut().enumerate() {
            Zip::from(&mut layer.weights)
                .and(&grads[l].weights)
                .and(&mut self.m[l].weights)
                .and(&mut self.v[l].weights)
                .for_each(|p, &g, m, v| {
                    *p = adam_scalar(
                        *p, g, m, v, t,
                        cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon,
                    );
                });
            Zip::from(&mut layer.bias)
                .and(&grads[l].bias)
                .and(&mut self.m[l].bias)
                .and(&mut self.v[l].bias)
                .for_each(|p, &g, m, v| {
                    *p = adam_scalar(
                        *p, g, m, v, t,
                        cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon,
                    );
                });
        }
    }
}

/// Fan-in-scaled uniform initialization, drawn in a fixed (layer, row,
/// column) order so a seed pins every weight.
fn init_layers(dims: &[usize], rng: &mut ChaCha8Rng) -> Vec<Layer> {
    dims.windows(2)
        .map(|d| {
            let (fan_in, fan_out) = (d[0], d[1]);
            let limit = (6.0 / fan_in as f64).sqrt();
            let values: Vec<f64> =
                (0..fan_in * fan_out).map(|_| rng.random_range(-limit..limit)).collect();
            Layer {
                weights: Array2::from_shape_vec((fan_in, fan_out), values).unwrap(),
                bias: Array1::zeros(fan_out),
            }
        })
        .collect()
}

/// Forward pass retaining per-layer inputs and pre-activations for the
/// backward pass. Returns (layer inputs, pre-activations).
fn forward_full(layers: &[Layer], x: &Array2<f64>) -> (Vec<Array2<f64>>, Vec<Array2<f64>>) {
    let last = layers.len() - 1;
    let mut inputs = Vec::with_capacity(layers.len());
    let mut preacts = Vec::with_capacity(layers.len());
    let mut a = x.to_owned();
    for (l, layer) in layers.iter().enumerate() {
        let z = a.dot(&layer.weights) + &layer.bias;
        inputs.push(a);
        a = if l < last { z.mapv(|v| v.max(0.0)) } else { z.clone() };
        preacts.push(z);
    }
    (inputs, preacts)
}

/// Mean squared error and parameter gradients for one batch.
fn backward(
    layers: &[Layer],
    inputs: &[Array2<f64>],
    preacts: &[Array2<f64>],
    y: &Array1<f64>,
) -> (f64, Vec<LayerGrad>) {
    let batch = y.len() as f64;
    let pred = preacts.last().unwrap().index_axis(Axis(1), 0);
    let err = &pred - y;
    let loss = err.iter().map(|e| e * e).sum::<f64>() / batch;

    let mut delta = err.insert_axis(Axis(1)) * (2.0 / batch);
    let mut grads: Vec<Option<LayerGrad>> = (0..layers.len()).map(|_| None).collect();
    for l in (0..layers.len()).rev() {
        grads[l] = Some(LayerGrad {
            weights: inputs[l].t().dot(&delta),
            bias: delta.sum_axis(Axis(0)),
        });
        if l > 0 {
            let mut prev = delta.dot(&layers[l].weights.t());
            prev.zip_mut_with(&preacts[l - 1], |d, &z| {
                if z <= 0.0 {
                    *d = 0.0;
                }
            });
            delta = prev;
        }
    }
    (loss, grads.into_iter().map(Option::unwrap).collect())
}

/// Compares analytic gradients against central finite differences on a
/// freshly initialized network with random inputs and returns the worst
/// relative deviation over every weight and bias. A healthy
/// backpropagation implementation stays below 1e-4.
pub fn gradient_check(dims: &[usize], batch: usize, seed: u64) -> f64 {
    assert!(dims.len() >= 2 && *dims.last().unwrap() == 1, "dims must end in one output");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = init_layers(dims, &mut rng);
    let x = Array2::from_shape_fn((batch, dims[0]), |_| rng.random_range(-1.0..1.0));
    let y = Array1::from_shape_fn(batch, |_| rng.random_range(-1.0..1.0));

    let (inputs, preacts) = forward_full(&layers, &x);
    let (_, grads) = backward(&layers, &inputs, &preacts, &y);

    let loss_of = |layers: &[Layer]| -> f64 {
        let (_, preacts) = forward_full(layers, &x);
        let pred = preacts.last().unwrap().index_axis(Axis(1), 0);
        pred.iter().zip(y.iter()).map(|(p, t)| (p - t) * (p - t)).sum::<f64>()
            / y.len() as f64
    };

    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for l in 0..layers.len() {
        let cols = layers[l].weights.ncols();
        for flat in 0..layers[l].weights.len() + layers[l].bias.len() {
            let weight = flat < layers[l].weights.len();
            let read = |layers: &[Layer]| {
                if weight {
                    layers[l].weights[(flat / cols, flat % cols)]
                } else {
                    layers[l].bias[flat - layers[l].weights.len()]
                }
            };
            let write = |layers: &mut [Layer], v: f64| {
                if weight {
                    layers[l].weights[(flat / cols, flat % cols)] = v;
                } else {
                    let i = flat - layers[l].weights.len();
                    layers[l].bias[i] = v;
                }
            };
            let orig = read(&layers);
            write(&mut layers, orig + h);
            let up = loss_of(&layers);
            write(&mut layers, orig - h);
            let down = loss_of(&layers);
            write(&mut layers, orig);
            let numeric = (up - down) / (2.0 * h);
            let analytic = if weight {
                grads[l].weights[(flat / cols, flat % cols)]
            } else {
                grads[l].bias[flat - layers[l].weights.len()]
            };
            let denom = analytic.abs().max(numeric.abs()).max(1.0);
            worst = worst.max((analytic - numeric).abs() / denom);
        }
    }
    worst
}

/// Mean squared error of the current parameters on (x, y), in chunks to
/// bound peak activation memory.
fn eval_mse(layers: &[Layer], x: &Array2<f64>, y: &Array1<f64>) -> f64 {
    let last = layers.len() - 1;
    let rows = x.nrows();
    let mut sse = 0.0;
    let mut at = 0;
    while at < rows {
        let hi = (at + 4096).min(rows);
        let mut a = x.slice(ndarray::s![at..hi, ..]).to_owned();
        for (l, layer) in layers.iter().enumerate() {
            a = a.dot(&layer.weights) + &layer.bias;
            if l < last {
                a.mapv_inplace(|v| v.max(0.0));
            }
        }
        let pred = a.index_axis(Axis(1), 0);
        for (p, t) in pred.iter().zip(y.slice(ndarray::s![at..hi]).iter()) {
            let e = p - t;
            sse += e * e;
        }
        at = hi;
    }
    sse / rows as f64
}

/// Trains a regressor on the dataset; see [`train_with_history`].
pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<WismModel> {
    train_with_history(dataset, config).map(|(model, _)| model)
}

/// Trains a regressor and returns the per-epoch loss trace.
///
/// The dataset is split into train/validation parts by a seeded shuffle,
/// targets are standardized with the train split's mean and deviation, and
/// optimization stops early when the validation loss fails to improve for
/// `patience` consecutive epochs. The returned model carries the parameters
/// of the best validation epoch.
pub fn train_with_history(
    dataset: &Dataset,
    config: &TrainConfig,
) -> Result<(WismModel, Vec<EpochStat>)> {
    config.validate()?;
    let count = dataset.samples.len();
    if count < MIN_SAMPLES {
        return Err(Error::config(format!(
            "dataset has {count} samples; need at least {MIN_SAMPLES}"
        )));
    }
    let in_dim = dataset.input_dim();
    if dataset.samples.iter().any(|s| s.coords.len() != in_dim) {
        return Err(Error::config("sample width does not match dataset window size"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut idx: Vec<usize> = (0..count).collect();
    idx.shuffle(&mut rng);
    let val_count = ((count as f64 * config.validation_fraction).round() as usize)
        .clamp(1, count - 1);
    let (val_idx, train_idx) = idx.split_at(val_count);

    let raw_target = |i: usize| dataset.samples[i].target;
    let train_count = train_idx.len();
    let target_mean = train_idx.iter().map(|&i| raw_target(i)).sum::<f64>() / train_count as f64;
    let target_var = train_idx
        .iter()
        .map(|&i| {
            let d = raw_target(i) - target_mean;
            d * d
        })
        .sum::<f64>()
        / train_count as f64;
    let target_std = target_var.sqrt();
    if target_std.is_nan() || target_std <= 1e-12 {
        return Err(Error::config("target variance is zero; nothing to regress"));
    }

    let gather = |ids: &[usize]| -> (Array2<f64>, Array1<f64>) {
        let mut x = Array2::zeros((ids.len(), in_dim));
        let mut y = Array1::zeros(ids.len());
        for (row, &i) in ids.iter().enumerate() {
            let s = &dataset.samples[i];
            for (col, &c) in s.coords.iter().enumerate() {
                x[(row, col)] = c;
            }
            y[row] = (s.target - target_mean) / target_std;
        }
        (x, y)
    };
    let (x_train, y_train) = gather(train_idx);
    let (x_val, y_val) = gather(val_idx);

    let mut dims = vec![in_dim];
    dims.extend_from_slice(&config.hidden);
    dims.push(1);
    let mut layers = init_layers(&dims, &mut rng);
    let mut adam = AdamState::new(&layers);

    let mut history = Vec::new();
    let mut best_val = f64::INFINITY;
    let mut best_layers = layers.clone();
    let mut epochs_since_best = 0usize;

    let mut order: Vec<usize> = (0..train_count).collect();
    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut train_sse = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let xb = x_train.select(Axis(0), chunk);
            let yb = y_train.select(Axis(0), chunk);
            let (inputs, preacts) = forward_full(&layers, &xb);
            let (loss, grads) = backward(&layers, &inputs, &preacts, &yb);
            adam.update(&mut layers, &grads, config);
            train_sse += loss * chunk.len() as f64;
        }
        let val_mse = eval_mse(&layers, &x_val, &y_val);
        history.push(EpochStat { epoch, train_mse: train_sse / train_count as f64, val_mse });

        if val_mse < best_val {
            best_val = val_mse;
            best_layers = layers.clone();
            epochs_since_best = 0;
        } else {
            epochs_since_best += 1;
            if epochs_since_best >= config.patience {
                break;
            }
        }
    }

    let model =
        WismModel { w: dataset.w, layers: best_layers, target_mean, target_std };
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogate::WindowSample;

    fn linear_dataset(count: usize, w: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = 2 * (w + 1);
        let samples = (0..count)
            .map(|_| {
                let coords: Vec<f64> =
                    (0..dim).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
                let target = coords.iter().sum::<f64>();
                WindowSample { coords, target }
            })
            .collect();
        Dataset { w, k_max: 8, seed, samples }
    }

    #[test]
    fn adam_first_steps_match_hand_computation() {
        let (lr, b1, b2, eps) = (0.001, 0.9, 0.999, 1e-8);
        let (mut m, mut v) = (0.0, 0.0);

        // step 1 at theta=1 with gradient 2:
        //   m = 0.1·2 = 0.2, v = 0.001·4 = 0.004
        //   m̂ = 0.2/(1-0.9) = 2, v̂ = 0.004/(1-0.999) = 4
        //   theta' = 1 - 0.001·2/(√4 + 1e-8)
        let theta1 = adam_scalar(1.0, 2.0, &mut m, &mut v, 1, lr, b1, b2, eps);
        let expect1 = 1.0 - 0.001 * 2.0 / (2.0 + 1e-8);
        assert!((theta1 - expect1).abs() < 1e-16);
        assert!((m - 0.2).abs() < 1e-16 && (v - 0.004).abs() < 1e-16);

        // step 2 with gradient 1:
        //   m = 0.9·0.2 + 0.1·1 = 0.28, v = 0.999·0.004 + 0.001·1 = 0.004996
        //   m̂ = 0.28/(1-0.81), v̂ = 0.004996/(1-0.998001)
        let theta2 = adam_scalar(theta1, 1.0, &mut m, &mut v, 2, lr, b1, b2, eps);
        let m_hat = 0.28 / (1.0 - 0.81);
        let v_hat: f64 = 0.004996 / (1.0 - 0.998001);
        let expect2 = expect1 - 0.001 * m_hat / (v_hat.sqrt() + 1e-8);
        assert!((theta2 - expect2).abs() < 1e-15);
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let worst = gradient_check(&[8, 4, 1], 10, 42);
        assert!(worst <= 1e-4, "worst relative deviation {worst}");
    }

    #[test]
    fn rejects_small_and_degenerate_datasets() {
        let small = linear_dataset(100, 1, 1);
        assert!(train(&small, &TrainConfig::default()).is_err());

        let mut constant = linear_dataset(1200, 1, 2);
        for s in &mut constant.samples {
            s.target = 5.0;
        }
        let err = train(&constant, &TrainConfig::default()).unwrap_err();
        assert!(err.to_string().contains("variance"));
    }

    #[test]
    fn fits_a_linear_target() {
        let ds = linear_dataset(2000, 1, 3);
        let cfg = TrainConfig {
            hidden: vec![64],
            batch_size: 64,
            learning_rate: 0.005,
            max_epochs: 50,
            patience: 50,
            seed: 7,
            ..TrainConfig::default()
        };
        let (model, history) = train_with_history(&ds, &cfg).unwrap();
        let best = history.iter().map(|h| h.val_mse).fold(f64::INFINITY, f64::min);
        assert!(best < 1e-3, "best standardized validation mse {best}");
        assert!(history.len() <= 50);

        // predictions must be on the raw target scale
        let sample = &ds.samples[0];
        let pred = model.predict_window(&sample.coords).unwrap();
        assert!((pred - sample.target).abs() < 0.3, "pred {pred} vs {}", sample.target);
    }

    #[test]
    fn training_is_seed_deterministic() {
        let ds = linear_dataset(1000, 1, 4);
        let cfg = TrainConfig {
            hidden: vec![8],
            batch_size: 128,
            max_epochs: 3,
            seed: 11,
            ..TrainConfig::default()
        };
        let a = train(&ds, &cfg).unwrap();
        let b = train(&ds, &cfg).unwrap();
        for (la, lb) in a.layers.iter().zip(&b.layers) {
            assert_eq!(la.weights, lb.weights);
            assert_eq!(la.bias, lb.bias);
        }
        assert_eq!(a.target_mean.to_bits(), b.target_mean.to_bits());
    }

    #[test]
    fn standardization_round_trips() {
        let ds = linear_dataset(1000, 1, 5);
        let cfg = TrainConfig {
            hidden: vec![4],
            max_epochs: 1,
            seed: 1,
            ..TrainConfig::default()
        };
        let model = train(&ds, &cfg).unwrap();
        for y in [-3.25, 0.0, 1e-7, 42.5] {
            let standardized = (y - model.target_mean) / model.target_std;
            let back = standardized * model.target_std + model.target_mean;
            assert!((back - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }
}
