//! From-scratch multilayer perceptron: Glorot-initialized dense layers,
//! full-batch gradient-descent training on mean squared error, recursive
//! multi-step forecasting, and versioned JSON persistence.
//!
//! Networks are plain values: cloning, sending across threads, and training
//! per-series models concurrently are all safe because nothing is shared.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{ScaleParams, Series};
use crate::transform::{self, TrainPair};

/// Neuron activation functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Linear,
    Sigmoid,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Linear => z,
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation output `a = act(z)`.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

/// Feed-forward network state: layer sizes, per-layer `out × in` weight
/// matrices, bias vectors, and one activation per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    layer_sizes: Vec<usize>,
    activations: Vec<Activation>,
    weights: Vec<DMatrix<f64>>,
    biases: Vec<DVector<f64>>,
}

/// Gradient of the batch MSE with respect to every parameter, congruent to
/// the network's weight/bias layout.
#[derive(Debug, Clone)]
pub struct MlpGradient {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

/// Training hyperparameters. `seed` drives order shuffling only; weight
/// initialization takes its seed in [`MlpNetwork::init`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 4000,
            seed: 0,
            shuffle: false,
        }
    }
}

impl MlpNetwork {
    /// Glorot-uniform initialization: weights uniform in `[-r, r]` with
    /// `r = sqrt(6 / (fan_in + fan_out))`, biases zero, deterministic in
    /// `seed`. Draw order is layer by layer, row-major within a layer.
    ///
    /// Intended for regression training, so the output activation must be
    /// `linear` (targets are unbounded after denormalization); build other
    /// output activations with [`MlpNetwork::from_parameters`].
    pub fn init(layer_sizes: &[usize], activations: &[Activation], seed: u64) -> Result<Self> {
        if layer_sizes.len() < 3 {
            return Err(Error::NetworkSpec(format!(
                "need input, ≥1 hidden, output layers; got {} sizes",
                layer_sizes.len()
            )));
        }
        Self::check_spec(layer_sizes, activations)?;
        if *activations.last().unwrap() != Activation::Linear {
            return Err(Error::NetworkSpec(
                "output layer activation must be linear for regression training".to_string(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 1..layer_sizes.len() {
            let fan_in = layer_sizes[l - 1];
            let fan_out = layer_sizes[l];
            let r = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let w = DMatrix::from_fn(fan_out, fan_in, |_, _| rng.gen_range(-r..=r));
            weights.push(w);
            biases.push(DVector::zeros(fan_out));
        }
        Ok(MlpNetwork {
            layer_sizes: layer_sizes.to_vec(),
            activations: activations.to_vec(),
            weights,
            biases,
        })
    }

    /// Build a network from explicit parameters (any activations allowed).
    /// `weights[l]` must be `layer_sizes[l+1] × layer_sizes[l]`.
    pub fn from_parameters(
        layer_sizes: &[usize],
        activations: &[Activation],
        weights: Vec<DMatrix<f64>>,
        biases: Vec<DVector<f64>>,
    ) -> Result<Self> {
        Self::check_spec(layer_sizes, activations)?;
        if weights.len() != layer_sizes.len() - 1 || biases.len() != weights.len() {
            return Err(Error::NetworkSpec(format!(
                "expected {} weight/bias layers, got {}/{}",
                layer_sizes.len() - 1,
                weights.len(),
                biases.len()
            )));
        }
        for l in 0..weights.len() {
            let (rows, cols) = (weights[l].nrows(), weights[l].ncols());
            if rows != layer_sizes[l + 1] || cols != layer_sizes[l] {
                return Err(Error::NetworkSpec(format!(
                    "layer {l}: weight shape {rows}×{cols}, expected {}×{}",
                    layer_sizes[l + 1],
                    layer_sizes[l]
                )));
            }
            if biases[l].len() != layer_sizes[l + 1] {
                return Err(Error::NetworkSpec(format!(
                    "layer {l}: bias length {}, expected {}",
                    biases[l].len(),
                    layer_sizes[l + 1]
                )));
            }
            let finite = weights[l].iter().chain(biases[l].iter()).all(|v| v.is_finite());
            if !finite {
                return Err(Error::NonFinite {
                    context: format!("network parameters, layer {l}"),
                });
            }
        }
        Ok(MlpNetwork {
            layer_sizes: layer_sizes.to_vec(),
            activations: activations.to_vec(),
            weights,
            biases,
        })
    }

    fn check_spec(layer_sizes: &[usize], activations: &[Activation]) -> Result<()> {
        if layer_sizes.len() < 2 {
            return Err(Error::NetworkSpec(
                "need at least input and output layers".to_string(),
            ));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::NetworkSpec("zero-width layer".to_string()));
        }
        if activations.len() != layer_sizes.len() - 1 {
            return Err(Error::NetworkSpec(format!(
                "need one activation per non-input layer: {} layers, {} activations",
                layer_sizes.len() - 1,
                activations.len()
            )));
        }
        Ok(())
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn weights(&self) -> &[DMatrix<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[DVector<f64>] {
        &self.biases
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Forward pass returning every layer's activation output (index 0 is
    /// the input itself) — the trace backpropagation consumes.
    fn forward_trace(&self, x: &[f64]) -> Result<Vec<DVector<f64>>> {
        if x.len() != self.input_size() {
            return Err(Error::DimensionMismatch {
                context: "mlp forward input".to_string(),
                expected: self.input_size(),
                got: x.len(),
            });
        }
        let mut acts = Vec::with_capacity(self.layer_sizes.len());
        acts.push(DVector::from_column_slice(x));
        for l in 0..self.weights.len() {
            let z = &self.weights[l] * acts.last().unwrap() + &self.biases[l];
            let a = z.map(|v| self.activations[l].apply(v));
            acts.push(a);
        }
        Ok(acts)
    }

    /// Forward pass; returns the output layer.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let acts = self.forward_trace(x)?;
        Ok(acts.last().unwrap().iter().cloned().collect())
    }

    /// Forward pass for scalar-output networks.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if self.output_size() != 1 {
            return Err(Error::NetworkSpec(format!(
                "predict() requires a scalar output, network has {}",
                self.output_size()
            )));
        }
        Ok(self.forward(x)?[0])
    }

    /// Batch mean-squared error `(1/B) Σ (pred − target)²` for scalar-output
    /// networks.
    pub fn loss(&self, pairs: &[TrainPair]) -> Result<f64> {
        if pairs.is_empty() {
            return Err(Error::InvalidParameter("empty training batch".to_string()));
        }
        let mut total = 0.0;
        for p in pairs {
            let e = self.predict(&p.inputs)? - p.target;
            total += e * e;
        }
        Ok(total / pairs.len() as f64)
    }

    /// Exact gradient of [`MlpNetwork::loss`] by reverse-mode accumulation
    /// ("backward propagation of errors").
    pub fn gradient(&self, pairs: &[TrainPair]) -> Result<MlpGradient> {
        if pairs.is_empty() {
            return Err(Error::InvalidParameter("empty training batch".to_string()));
        }
        if self.output_size() != 1 {
            return Err(Error::NetworkSpec(format!(
                "gradient() requires a scalar output, network has {}",
                self.output_size()
            )));
        }
        let mut gw: Vec<DMatrix<f64>> = self
            .weights
            .iter()
            .map(|w| DMatrix::zeros(w.nrows(), w.ncols()))
            .collect();
        let mut gb: Vec<DVector<f64>> =
            self.biases.iter().map(|b| DVector::zeros(b.len())).collect();
        let b_inv = 1.0 / pairs.len() as f64;
        for pair in pairs {
            let acts = self.forward_trace(&pair.inputs)?;
            let last = self.weights.len() - 1;
            // dL/da at the output for squared error, then walk backwards.
            let out = &acts[last + 1];
            let mut delta: DVector<f64> = DVector::from_element(1, 2.0 * (out[0] - pair.target));
            for l in (0..=last).rev() {
                let a_out = &acts[l + 1];
                let dz = DVector::from_iterator(
                    a_out.len(),
                    a_out
                        .iter()
                        .zip(delta.iter())
                        .map(|(&a, &d)| d * self.activations[l].derivative_from_output(a)),
                );
                gw[l] += b_inv * &dz * acts[l].transpose();
                gb[l] += b_inv * &dz;
                if l > 0 {
                    delta = self.weights[l].transpose() * dz;
                }
            }
        }
        Ok(MlpGradient {
            weights: gw,
            biases: gb,
        })
    }

    /// Full-batch gradient descent for `cfg.epochs` epochs. Returns the
    /// post-update full-batch MSE per epoch. When `cfg.shuffle` is set the
    /// summation order of the batch is reshuffled each epoch (deterministic
    /// in `cfg.seed`); with full-batch updates this only perturbs rounding.
    pub fn train(&mut self, pairs: &[TrainPair], cfg: &TrainConfig) -> Result<Vec<f64>> {
        if pairs.is_empty() {
            return Err(Error::InvalidParameter("empty training set".to_string()));
        }
        if cfg.epochs == 0 {
            return Err(Error::InvalidParameter("epochs must be ≥ 1".to_string()));
        }
        if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(
                "learning rate must be positive and finite".to_string(),
            ));
        }
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut history = Vec::with_capacity(cfg.epochs);
        let mut shuffled: Vec<TrainPair>;
        for epoch in 0..cfg.epochs {
            let batch: &[TrainPair] = if cfg.shuffle {
                for i in (1..order.len()).rev() {
                    let j = rng.gen_range(0..=i);
                    order.swap(i, j);
                }
                shuffled = order.iter().map(|&i| pairs[i].clone()).collect();
                &shuffled
            } else {
                pairs
            };
            let grad = self.gradient(batch)?;
            for l in 0..self.weights.len() {
                self.weights[l] -= cfg.learning_rate * &grad.weights[l];
                self.biases[l] -= cfg.learning_rate * &grad.biases[l];
            }
            let loss = self.loss(pairs)?;
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            history.push(loss);
        }
        Ok(history)
    }

    /// Recursive multi-step forecast: predict one step from `window`
    /// (normalized units), slide the window over the prediction, repeat
    /// `steps` times; finally map every prediction back to level units.
    pub fn forecast_recursive(
        &self,
        window: &[f64],
        steps: usize,
        scale: ScaleParams,
    ) -> Result<Vec<f64>> {
        if window.len() != self.input_size() {
            return Err(Error::DimensionMismatch {
                context: "forecast window".to_string(),
                expected: self.input_size(),
                got: window.len(),
            });
        }
        if steps == 0 {
            return Err(Error::InvalidParameter("steps must be ≥ 1".to_string()));
        }
        let mut win = window.to_vec();
        let mut normalized = Vec::with_capacity(steps);
        for _ in 0..steps {
            let next = self.predict(&win)?;
            normalized.push(next);
            win.rotate_left(1);
            *win.last_mut().unwrap() = next;
        }
        Ok(scale.invert_all(&normalized))
    }
}

/// Central-difference approximation of [`MlpNetwork::gradient`], used to
/// verify backpropagation. `step` is the half-width of each difference.
pub fn finite_difference_gradient(
    net: &MlpNetwork,
    pairs: &[TrainPair],
    step: f64,
) -> Result<MlpGradient> {
    let mut gw = Vec::new();
    let mut gb = Vec::new();
    for l in 0..net.weights.len() {
        let mut g = DMatrix::zeros(net.weights[l].nrows(), net.weights[l].ncols());
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let mut plus = net.clone();
                plus.weights[l][(i, j)] += step;
                let mut minus = net.clone();
                minus.weights[l][(i, j)] -= step;
                g[(i, j)] = (plus.loss(pairs)? - minus.loss(pairs)?) / (2.0 * step);
            }
        }
        gw.push(g);
        let mut g = DVector::zeros(net.biases[l].len());
        for i in 0..g.len() {
            let mut plus = net.clone();
            plus.biases[l][i] += step;
            let mut minus = net.clone();
            minus.biases[l][i] -= step;
            g[i] = (plus.loss(pairs)? - minus.loss(pairs)?) / (2.0 * step);
        }
        gb.push(g);
    }
    Ok(MlpGradient {
        weights: gw,
        biases: gb,
    })
}

/// Forecast-accuracy summary: `accuracy = 100·(1 − MAPE)` plus RMSE.
/// Zero-valued actuals cannot enter MAPE and are counted in
/// `excluded_zero_actuals` instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub accuracy_pct: f64,
    pub mape: f64,
    pub rmse: f64,
    pub excluded_zero_actuals: usize,
}

/// Compare a forecast to realized values.
pub fn accuracy(actual: &[f64], predicted: &[f64]) -> Result<AccuracyReport> {
    if actual.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            context: "accuracy comparison".to_string(),
            expected: actual.len(),
            got: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::InvalidParameter("empty accuracy input".to_string()));
    }
    let mut ape_sum = 0.0;
    let mut ape_n = 0usize;
    let mut sq_sum = 0.0;
    let mut excluded = 0usize;
    for (&a, &p) in actual.iter().zip(predicted) {
        sq_sum += (a - p) * (a - p);
        if a == 0.0 {
            excluded += 1;
        } else {
            ape_sum += ((a - p) / a).abs();
            ape_n += 1;
        }
    }
    if ape_n == 0 {
        return Err(Error::InvalidParameter(
            "all actual values are zero; MAPE undefined".to_string(),
        ));
    }
    let mape = ape_sum / ape_n as f64;
    Ok(AccuracyReport {
        accuracy_pct: 100.0 * (1.0 - mape),
        mape,
        rmse: (sq_sum / actual.len() as f64).sqrt(),
        excluded_zero_actuals: excluded,
    })
}

/// Hyperparameters for fitting one per-series forecaster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecasterConfig {
    /// Input window length in quarters.
    pub window: usize,
    /// Hidden layer widths.
    pub hidden: Vec<usize>,
    /// Hidden-layer activation (output is always linear).
    pub hidden_activation: Activation,
    /// Held-out quarters at the end of the sample used for the accuracy score.
    pub holdout: usize,
    /// Quarters to forecast beyond the observed sample.
    pub steps: usize,
    pub train: TrainConfig,
}

impl Default for ForecasterConfig {
    fn default() -> Self {
        ForecasterConfig {
            window: 8,
            hidden: vec![16],
            hidden_activation: Activation::Tanh,
            holdout: 4,
            steps: 20,
            train: TrainConfig::default(),
        }
    }
}

/// Outcome of fitting and applying one per-series forecaster.
#[derive(Debug, Clone)]
pub struct ForecastResult {
    /// Forecast continuation of the input series, `steps` quarters long,
    /// starting the quarter after the last observation.
    pub predicted: Series,
    /// Post-update full-batch MSE per epoch (normalized units).
    pub training_loss: Vec<f64>,
    /// Out-of-sample score on the held-out tail.
    pub accuracy: AccuracyReport,
    /// Trained network (normalized in/out).
    pub network: MlpNetwork,
    /// Scaling fitted on the training span.
    pub scale: ScaleParams,
}

/// Train a forecaster on `series` and produce its continuation.
///
/// The scaling and the network are fitted on the series minus its last
/// `holdout` observations; the holdout is predicted recursively (never seen
/// in training) to produce the accuracy score; the forward forecast then
/// re-anchors on the last observed window so it starts from current data.
pub fn forecast_series(series: &Series, cfg: &ForecasterConfig) -> Result<ForecastResult> {
    let n = series.len();
    let min_len = cfg.window + cfg.holdout + 2;
    if n < min_len {
        return Err(Error::SeriesTooShort {
            operation: format!("forecast of {}/{}", series.unit(), series.indicator()),
            needed: min_len,
            got: n,
        });
    }
    if cfg.holdout == 0 {
        return Err(Error::InvalidParameter(
            "holdout must be ≥ 1 to score accuracy".to_string(),
        ));
    }
    let values = series.values();
    let train_span = &values[..n - cfg.holdout];
    let scale = ScaleParams::fit(train_span)?;
    let train_scaled = scale.apply_all(train_span);
    let pairs = transform::windowize_values(&train_scaled, cfg.window)?;

    let mut sizes = Vec::with_capacity(cfg.hidden.len() + 2);
    sizes.push(cfg.window);
    sizes.extend_from_slice(&cfg.hidden);
    sizes.push(1);
    let mut acts = vec![cfg.hidden_activation; cfg.hidden.len()];
    acts.push(Activation::Linear);
    let mut net = MlpNetwork::init(&sizes, &acts, cfg.train.seed)?;
    let training_loss = net.train(&pairs, &cfg.train)?;

    // Score: recurse through the holdout from the end of the training span.
    let holdout_window = &train_scaled[train_scaled.len() - cfg.window..];
    let holdout_pred = net.forecast_recursive(holdout_window, cfg.holdout, scale)?;
    let holdout_actual = &values[n - cfg.holdout..];
    let acc = accuracy(holdout_actual, &holdout_pred)?;

    // Forecast: re-anchor on the last observed window (training scale).
    let full_scaled = scale.apply_all(values);
    let anchor = &full_scaled[n - cfg.window..];
    let future = net.forecast_recursive(anchor, cfg.steps, scale)?;
    let predicted = Series::new(
        series.unit(),
        series.indicator(),
        series.end().next(),
        future,
    )?;

    Ok(ForecastResult {
        predicted,
        training_loss,
        accuracy: acc,
        network: net,
        scale,
    })
}

const MODEL_VERSION: u32 = 1;

/// On-disk network document (versioned JSON; weights row-major per layer).
#[derive(Debug, Serialize, Deserialize)]
struct ModelDocument {
    version: u32,
    layer_sizes: Vec<usize>,
    activations: Vec<Activation>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    scale_params: Option<ScaleParams>,
    seed: Option<u64>,
}

/// A network plus the context needed to reuse it: scaling record and the
/// initialization seed it was trained from.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistedModel {
    pub network: MlpNetwork,
    pub scale_params: Option<ScaleParams>,
    pub seed: Option<u64>,
}

impl PersistedModel {
    pub fn write_json(&self, writer: impl Write) -> Result<()> {
        let doc = ModelDocument {
            version: MODEL_VERSION,
            layer_sizes: self.network.layer_sizes.clone(),
            activations: self.network.activations.clone(),
            weights: self
                .network
                .weights
                .iter()
                .map(|w| {
                    // nalgebra stores column-major; emit row-major.
                    (0..w.nrows())
                        .flat_map(|i| (0..w.ncols()).map(move |j| (i, j)))
                        .map(|(i, j)| w[(i, j)])
                        .collect()
                })
                .collect(),
            biases: self
                .network
                .biases
                .iter()
                .map(|b| b.iter().cloned().collect())
                .collect(),
            scale_params: self.scale_params,
            seed: self.seed,
        };
        serde_json::to_writer_pretty(writer, &doc)?;
        Ok(())
    }

    pub fn read_json(reader: impl Read) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_reader(reader)?;
        if doc.version != MODEL_VERSION {
            return Err(Error::ModelVersion {
                found: doc.version,
                supported: MODEL_VERSION,
            });
        }
        let mut weights = Vec::new();
        for (l, flat) in doc.weights.iter().enumerate() {
            if l + 1 >= doc.layer_sizes.len() {
                return Err(Error::NetworkSpec("too many weight layers".to_string()));
            }
            let rows = doc.layer_sizes[l + 1];
            let cols = doc.layer_sizes[l];
            if flat.len() != rows * cols {
                return Err(Error::NetworkSpec(format!(
                    "layer {l}: {} weights for a {rows}×{cols} matrix",
                    flat.len()
                )));
            }
            weights.push(DMatrix::from_row_slice(rows, cols, flat));
        }
        let biases = doc.biases.iter().map(|b| DVector::from_column_slice(b)).collect();
        let network =
            MlpNetwork::from_parameters(&doc.layer_sizes, &doc.activations, weights, biases)?;
        Ok(PersistedModel {
            network,
            scale_params: doc.scale_params,
            seed: doc.seed,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_json(std::fs::File::create(path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_json(std::fs::File::open(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::Period;

    fn pair(inputs: &[f64], target: f64) -> TrainPair {
        TrainPair {
            inputs: inputs.to_vec(),
            target,
        }
    }

    #[test]
    fn init_is_deterministic_and_shaped() {
        let a = MlpNetwork::init(&[8, 16, 1], &[Activation::Tanh, Activation::Linear], 7).unwrap();
        let b = MlpNetwork::init(&[8, 16, 1], &[Activation::Tanh, Activation::Linear], 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.weights()[0].shape(), (16, 8));
        assert_eq!(a.weights()[1].shape(), (1, 16));
        assert!(a.biases().iter().all(|b| b.iter().all(|&v| v == 0.0)));
        // Glorot bound for fan_in 8, fan_out 16: sqrt(6/24) = 0.5.
        let r = 0.5;
        assert!(a.weights()[0].iter().all(|&w| (-r..=r).contains(&w)));
        assert!(a.weights()[0].iter().any(|&w| w.abs() > 0.25), "degenerate draw");
        let c = MlpNetwork::init(&[8, 16, 1], &[Activation::Tanh, Activation::Linear], 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn init_rejects_bad_specs() {
        assert!(MlpNetwork::init(&[8, 1], &[Activation::Linear], 0).is_err());
        assert!(MlpNetwork::init(&[8, 0, 1], &[Activation::Tanh, Activation::Linear], 0).is_err());
        assert!(MlpNetwork::init(&[8, 4, 1], &[Activation::Tanh, Activation::Tanh], 0).is_err());
        assert!(MlpNetwork::init(&[8, 4, 1], &[Activation::Tanh], 0).is_err());
    }

    fn single_neuron(w: f64, b: f64, act: Activation) -> MlpNetwork {
        MlpNetwork::from_parameters(
            &[1, 1],
            &[act],
            vec![DMatrix::from_element(1, 1, w)],
            vec![DVector::from_element(1, b)],
        )
        .unwrap()
    }

    #[test]
    fn forward_affine_and_sigmoid_cases() {
        let net = single_neuron(2.0, 1.0, Activation::Linear);
        assert_eq!(net.predict(&[3.0]).unwrap(), 7.0);
        let net = single_neuron(0.0, 0.0, Activation::Sigmoid);
        assert_eq!(net.predict(&[123.0]).unwrap(), 0.5);
    }

    #[test]
    fn forward_two_layer_golden() {
        // Hand matrix algebra: h = tanh(W1 x + b1), y = W2 h + b2 with
        // W1 = [[0.5,−0.25],[0.3,0.1]], b1 = [0.1,−0.2], W2 = [0.4,0.6],
        // b2 = 0.05, x = [1,2].
        let net = MlpNetwork::from_parameters(
            &[2, 2, 1],
            &[Activation::Tanh, Activation::Linear],
            vec![
                DMatrix::from_row_slice(2, 2, &[0.5, -0.25, 0.3, 0.1]),
                DMatrix::from_row_slice(1, 2, &[0.4, 0.6]),
            ],
            vec![
                DVector::from_row_slice(&[0.1, -0.2]),
                DVector::from_row_slice(&[0.05]),
            ],
        )
        .unwrap();
        let y = net.predict(&[1.0, 2.0]).unwrap();
        assert!((y - 0.26465476532093685).abs() < 1e-15, "got {y}");
    }

    #[test]
    fn forward_rejects_dimension_mismatch() {
        let net = single_neuron(1.0, 0.0, Activation::Linear);
        assert!(matches!(
            net.predict(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gradient_hand_case_and_perfect_fit() {
        let net = single_neuron(1.0, 0.0, Activation::Linear);
        // x=1, y=0, pred=1: dL/dw = 2·(1−0)·1 = 2, dL/db = 2.
        let g = net.gradient(&[pair(&[1.0], 0.0)]).unwrap();
        assert!((g.weights[0][(0, 0)] - 2.0).abs() < 1e-14);
        assert!((g.biases[0][0] - 2.0).abs() < 1e-14);
        // At a perfect fit (y = 2x, w=2, b=0) the gradient vanishes.
        let net = single_neuron(2.0, 0.0, Activation::Linear);
        let g = net
            .gradient(&[pair(&[1.0], 2.0), pair(&[-0.5], -1.0)])
            .unwrap();
        assert!(g.weights[0][(0, 0)].abs() < 1e-14);
        assert!(g.biases[0][0].abs() < 1e-14);
    }

    fn assert_gradient_matches_fd(net: &MlpNetwork, pairs: &[TrainPair]) {
        let g = net.gradient(pairs).unwrap();
        let fd = finite_difference_gradient(net, pairs, 1e-5).unwrap();
        for l in 0..g.weights.len() {
            for (a, b) in g.weights[l].iter().zip(fd.weights[l].iter()) {
                let denom = a.abs().max(b.abs()).max(1.0);
                assert!(
                    (a - b).abs() / denom < 1e-6,
                    "weight grad mismatch: {a} vs {b}"
                );
            }
            for (a, b) in g.biases[l].iter().zip(fd.biases[l].iter()) {
                let denom = a.abs().max(b.abs()).max(1.0);
                assert!((a - b).abs() / denom < 1e-6, "bias grad mismatch: {a} vs {b}");
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences_small_net() {
        let net = MlpNetwork::init(&[2, 3, 1], &[Activation::Sigmoid, Activation::Linear], 42)
            .unwrap();
        let pairs = vec![
            pair(&[0.2, -0.4], 0.3),
            pair(&[1.0, 0.5], -0.2),
            pair(&[-0.7, 0.1], 0.8),
        ];
        assert_gradient_matches_fd(&net, &pairs);
    }

    #[test]
    fn training_fits_linear_rule() {
        // y = 2x: closed-form least squares is (w, b) = (2, 0).
        let pairs: Vec<TrainPair> = (-5..=5).map(|i| pair(&[i as f64 / 5.0], 2.0 * i as f64 / 5.0)).collect();
        let mut net = single_neuron(0.0, 0.0, Activation::Linear);
        let cfg = TrainConfig {
            learning_rate: 0.05,
            epochs: 200,
            seed: 0,
            shuffle: false,
        };
        let history = net.train(&pairs, &cfg).unwrap();
        assert_eq!(history.len(), 200);
        assert!(history.last().unwrap() < &history[0]);
        assert!((net.weights()[0][(0, 0)] - 2.0).abs() < 0.01);
    }

    #[test]
    fn training_is_deterministic() {
        let pairs: Vec<TrainPair> = (0..30)
            .map(|i| {
                let x = (i as f64 / 7.0).sin();
                pair(&[x, x * x], 0.5 * x)
            })
            .collect();
        let cfg = TrainConfig {
            learning_rate: 0.05,
            epochs: 50,
            seed: 9,
            shuffle: true,
        };
        let mut a =
            MlpNetwork::init(&[2, 4, 1], &[Activation::Tanh, Activation::Linear], 3).unwrap();
        let ha = a.train(&pairs, &cfg).unwrap();
        let mut b =
            MlpNetwork::init(&[2, 4, 1], &[Activation::Tanh, Activation::Linear], 3).unwrap();
        let hb = b.train(&pairs, &cfg).unwrap();
        assert_eq!(ha, hb);
        assert_eq!(a, b);
    }

    #[test]
    fn training_rejects_zero_epochs_and_reports_divergence() {
        let mut net = single_neuron(0.0, 0.0, Activation::Linear);
        let pairs = vec![pair(&[1.0], 2.0)];
        let mut cfg = TrainConfig::default();
        cfg.epochs = 0;
        assert!(net.train(&pairs, &cfg).is_err());
        // An absurd learning rate oscillates to overflow on y = x data.
        let mut net = single_neuron(0.0, 0.0, Activation::Linear);
        let cfg = TrainConfig {
            learning_rate: 1e12,
            epochs: 2000,
            seed: 0,
            shuffle: false,
        };
        let pairs: Vec<TrainPair> = (0..10).map(|i| pair(&[i as f64], i as f64)).collect();
        match net.train(&pairs, &cfg) {
            Err(Error::TrainingDiverged { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn forecast_fixed_point_and_base_case() {
        // Identity-behaving net: predicts its last input.
        let mut w = DMatrix::zeros(1, 3);
        w[(0, 2)] = 1.0;
        let net = MlpNetwork::from_parameters(
            &[3, 1],
            &[Activation::Linear],
            vec![w],
            vec![DVector::zeros(1)],
        )
        .unwrap();
        let scale = ScaleParams { min: 0.0, max: 2.0 };
        let out = net.forecast_recursive(&[0.1, 0.4, 0.7], 20, scale).unwrap();
        assert_eq!(out.len(), 20);
        assert!(out.iter().all(|&v| (v - scale.invert(0.7)).abs() < 1e-12));
        // steps = 1 is forward + denormalize.
        let one = net.forecast_recursive(&[0.1, 0.4, 0.7], 1, scale).unwrap();
        assert!((one[0] - scale.invert(net.predict(&[0.1, 0.4, 0.7]).unwrap())).abs() < 1e-15);
    }

    #[test]
    fn forecast_ramp_recursion() {
        // Net computes x_t = x_{t−1} + 1 from a window of 2 (weight on last
        // input 1, bias 1): recursion yields an arithmetic ramp.
        let net = MlpNetwork::from_parameters(
            &[2, 1],
            &[Activation::Linear],
            vec![DMatrix::from_row_slice(1, 2, &[0.0, 1.0])],
            vec![DVector::from_element(1, 1.0)],
        )
        .unwrap();
        let identity = ScaleParams { min: 0.0, max: 1.0 };
        let out = net.forecast_recursive(&[0.0, 0.0], 5, identity).unwrap();
        assert_eq!(out, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn accuracy_cases() {
        let r = accuracy(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(r.accuracy_pct, 100.0);
        let r = accuracy(&[100.0, 100.0], &[99.0, 101.0]).unwrap();
        assert!((r.accuracy_pct - 99.0).abs() < 1e-12);
        let r = accuracy(&[10.0], &[20.0]).unwrap();
        assert!((r.accuracy_pct - 0.0).abs() < 1e-12);
        let r = accuracy(&[0.0, 10.0], &[1.0, 10.0]).unwrap();
        assert_eq!(r.excluded_zero_actuals, 1);
        assert_eq!(r.accuracy_pct, 100.0);
        assert!(accuracy(&[0.0], &[1.0]).is_err());
    }

    #[test]
    fn forecast_series_contract() {
        // Smooth learnable series; forecast length and determinism.
        let values: Vec<f64> =
            (0..60).map(|t| 10.0 + 0.05 * t as f64 + (t as f64 / 6.0).sin()).collect();
        let s = Series::new("USA", "GDP", Period::new(2000, 1).unwrap(), values).unwrap();
        let mut cfg = ForecasterConfig::default();
        cfg.train.epochs = 800;
        let a = forecast_series(&s, &cfg).unwrap();
        let b = forecast_series(&s, &cfg).unwrap();
        assert_eq!(a.predicted, b.predicted);
        assert_eq!(a.predicted.len(), cfg.steps);
        assert_eq!(a.predicted.start(), s.end().next());
        assert_eq!(a.training_loss.len(), cfg.train.epochs);
    }

    #[test]
    fn model_roundtrip_preserves_behavior() {
        let net = MlpNetwork::init(&[4, 5, 1], &[Activation::Tanh, Activation::Linear], 11).unwrap();
        let saved = PersistedModel {
            network: net.clone(),
            scale_params: Some(ScaleParams { min: 1.0, max: 9.0 }),
            seed: Some(11),
        };
        let mut buf = Vec::new();
        saved.write_json(&mut buf).unwrap();
        let loaded = PersistedModel::read_json(&buf[..]).unwrap();
        assert_eq!(loaded, saved);
        let x = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(
            net.predict(&x).unwrap(),
            loaded.network.predict(&x).unwrap()
        );
    }

    #[test]
    fn model_version_is_checked() {
        let doc = r#"{"version":99,"layer_sizes":[1,1],"activations":["linear"],"weights":[[1.0]],"biases":[[0.0]],"scale_params":null,"seed":null}"#;
        assert!(matches!(
            PersistedModel::read_json(doc.as_bytes()),
            Err(Error::ModelVersion { found: 99, .. })
        ));
    }
}
