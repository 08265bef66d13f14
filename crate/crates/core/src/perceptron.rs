//! Perceptrons built from stochastic binary switches.
//!
//! A unit fires (`n = +1`) with probability `1 / (1 + exp(-beta A))` where
//! `A = w . xi + b`. Training estimates the mean output `n̄ = 2 p - 1` from
//! repeated samples at fixed weights, then moves the weights along the
//! gradient of the mean error `(1 - n_T n̄) / 2`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::error::{ensure, Error, Result};
use crate::numeric::sigmoid;
use crate::rng::RngStream;

/// Binary input vector with a binary label.
#[derive(Debug, Clone, PartialEq)]
pub struct Datum {
    pub xi: Vec<f64>,
    pub label: f64,
}

impl Datum {
    pub fn new(xi: Vec<f64>, label: f64) -> Result<Self> {
        for &x in &xi {
            ensure(x == 1.0 || x == -1.0, "xi", x, "input components must be -1 or +1")?;
        }
        ensure(label == 1.0 || label == -1.0, "n_T", label, "label must be -1 or +1")?;
        Ok(Self { xi, label })
    }
}

/// The two NOT examples `(-1, +1)` and `(+1, -1)`.
pub fn not_data() -> Vec<Datum> {
    vec![Datum { xi: vec![-1.0], label: 1.0 }, Datum { xi: vec![1.0], label: -1.0 }]
}

/// The four XOR examples.
pub fn xor_data() -> Vec<Datum> {
    [(-1.0, -1.0, -1.0), (-1.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, -1.0)]
        .iter()
        .map(|&(a, b, l)| Datum { xi: vec![a, b], label: l })
        .collect()
}

#[inline]
pub fn activation(weights: &[f64], bias: f64, xi: &[f64]) -> f64 {
    weights.iter().zip(xi).map(|(w, x)| w * x).sum::<f64>() + bias
}

/// Switching probability `1 / (1 + exp(-beta A))`.
pub fn fire_probability(weights: &[f64], bias: f64, xi: &[f64], beta: f64) -> Result<f64> {
    if weights.len() != xi.len() {
        return Err(Error::ShapeMismatch { context: "weights and input", expected: weights.len(), found: xi.len() });
    }
    Ok(sigmoid(beta * activation(weights, bias, xi)))
}

/// Mean error `(1 - n_T n̄) / 2` for label `n_T`.
#[inline]
pub fn mean_error(label: f64, nbar: f64) -> f64 {
    0.5 * (1.0 - label * nbar)
}

/// Variance `e (1 - e)` of the single-trial 0/1 cost with mean `e`.
#[inline]
pub fn error_variance(mean_error: f64) -> f64 {
    mean_error * (1.0 - mean_error)
}

/// One layer of units; `weights[j]` feeds unit `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

impl Layer {
    pub fn new(weights: Vec<Vec<f64>>, biases: Vec<f64>) -> Result<Self> {
        if weights.len() != biases.len() {
            return Err(Error::ShapeMismatch { context: "layer biases", expected: weights.len(), found: biases.len() });
        }
        let inputs = weights.first().map_or(0, Vec::len);
        for row in &weights {
            if row.len() != inputs {
                return Err(Error::ShapeMismatch { context: "layer weight rows", expected: inputs, found: row.len() });
            }
        }
        ensure(!weights.is_empty(), "units", 0.0, "layer needs at least one unit")?;
        Ok(Self { weights, biases })
    }

    pub fn units(&self) -> usize {
        self.biases.len()
    }

    pub fn inputs(&self) -> usize {
        self.weights[0].len()
    }

    pub fn probabilities(&self, input: &[f64], beta: f64) -> Vec<f64> {
        self.weights.iter().zip(&self.biases).map(|(w, &b)| sigmoid(beta * activation(w, b, input))).collect()
    }
}

/// Layers plus the sharpness `beta` and learning scale `eta`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptronNet {
    pub layers: Vec<Layer>,
    pub beta: f64,
    pub eta: f64,
}

impl PerceptronNet {
    pub fn new(layers: Vec<Layer>, beta: f64, eta: f64) -> Result<Self> {
        ensure(beta > 0.0 && beta.is_finite(), "beta", beta, "sharpness must be positive")?;
        ensure(eta >= 0.0 && eta.is_finite(), "eta", eta, "learning scale must be non-negative")?;
        ensure(!layers.is_empty(), "layers", 0.0, "network needs at least one layer")?;
        for pair in layers.windows(2) {
            if pair[1].inputs() != pair[0].units() {
                return Err(Error::ShapeMismatch {
                    context: "layer chaining",
                    expected: pair[0].units(),
                    found: pair[1].inputs(),
                });
            }
        }
        Ok(Self { layers, beta, eta })
    }

    /// A single unit with weights `w` and bias `b`.
    pub fn single(w: Vec<f64>, b: f64, beta: f64, eta: f64) -> Result<Self> {
        Self::new(vec![Layer::new(vec![w], vec![b])?], beta, eta)
    }

    /// Two hidden units and one output; `wh[i][j]` connects input `i` to
    /// hidden unit `j`.
    pub fn two_layer(wh: [[f64; 2]; 2], bh: [f64; 2], wo: [f64; 2], bo: f64, beta: f64, eta: f64) -> Result<Self> {
        let hidden = Layer::new(vec![vec![wh[0][0], wh[1][0]], vec![wh[0][1], wh[1][1]]], bh.to_vec())?;
        let output = Layer::new(vec![wo.to_vec()], vec![bo])?;
        Self::new(vec![hidden, output], beta, eta)
    }

    /// The XOR starting point used for the training figures.
    pub fn xor_reference_init(beta: f64, eta: f64) -> Result<Self> {
        Self::two_layer([[-5.0, 8.0], [-2.0, 3.0]], [-1.0, -3.0], [-2.0, -3.0], -1.0, beta, eta)
    }

    pub fn inputs(&self) -> usize {
        self.layers[0].inputs()
    }

    fn check_input(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.inputs() {
            return Err(Error::ShapeMismatch { context: "network input", expected: self.inputs(), found: xi.len() });
        }
        Ok(())
    }

    fn check_two_layer(&self) -> Result<()> {
        if self.layers.len() != 2 || self.layers[1].units() != 1 {
            return Err(Error::ShapeMismatch {
                context: "two-layer network with one output",
                expected: 2,
                found: self.layers.len(),
            });
        }
        Ok(())
    }

    fn check_single(&self) -> Result<()> {
        if self.layers.len() != 1 || self.layers[0].units() != 1 {
            return Err(Error::ShapeMismatch {
                context: "single-unit network",
                expected: 1,
                found: self.layers.iter().map(Layer::units).sum(),
            });
        }
        Ok(())
    }

    /// Every weight and bias, unit by unit with the bias last.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            for (w, b) in layer.weights.iter().zip(&layer.biases) {
                out.extend_from_slice(w);
                out.push(*b);
            }
        }
        out
    }

    /// Names matching [`parameters`](Self::parameters): `w`, `b` for a single
    /// unit, `wh{i}{j}`, `b{j}`, `wo{j}`, `b{H+1}` for two layers.
    pub fn parameter_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.layers.len() == 1 {
            let layer = &self.layers[0];
            for (j, w) in layer.weights.iter().enumerate() {
                let suffix = if layer.units() == 1 { String::new() } else { format!("{}", j + 1) };
                for i in 0..w.len() {
                    if w.len() == 1 {
                        out.push(format!("w{suffix}"));
                    } else {
                        out.push(format!("w{}{suffix}", i + 1));
                    }
                }
                out.push(format!("b{suffix}"));
            }
            return out;
        }
        let mut bias_index = 0;
        for (l, layer) in self.layers.iter().enumerate() {
            let last = l + 1 == self.layers.len();
            for (j, w) in layer.weights.iter().enumerate() {
                for i in 0..w.len() {
                    if last {
                        out.push(format!("wo{}", i + 1));
                    } else {
                        out.push(format!("wh{}{}", i + 1, j + 1));
                    }
                }
                bias_index += 1;
                out.push(format!("b{bias_index}"));
            }
        }
        out
    }
}

/// Empirical firing frequency of one unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitEstimate {
    pub p_hat: f64,
    pub nbar: f64,
    /// Binomial standard error `sqrt(p (1 - p) / N)` of `p_hat`.
    pub stderr: f64,
}

impl UnitEstimate {
    fn from_count(fired: u32, n: u32) -> Self {
        let p_hat = fired as f64 / n as f64;
        Self { p_hat, nbar: 2.0 * p_hat - 1.0, stderr: (p_hat * (1.0 - p_hat) / n as f64).sqrt() }
    }
}

fn sample_count(p: f64, n: u32, rng: &mut RngStream) -> u32 {
    (0..n).filter(|_| rng.bernoulli(p)).count() as u32
}

/// Estimates of a single unit's mean output and error on one datum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochEstimate {
    pub unit: UnitEstimate,
    pub error: f64,
}

/// Samples the unit `n_samples` times at fixed weights.
pub fn epoch_estimate(
    net: &PerceptronNet,
    datum: &Datum,
    n_samples: u32,
    rng: &mut RngStream,
) -> Result<EpochEstimate> {
    net.check_single()?;
    net.check_input(&datum.xi)?;
    ensure(n_samples >= 1, "n_samples", n_samples as f64, "need at least one sample")?;
    let p = net.layers[0].probabilities(&datum.xi, net.beta)[0];
    let unit = UnitEstimate::from_count(sample_count(p, n_samples, rng), n_samples);
    Ok(EpochEstimate { unit, error: mean_error(datum.label, unit.nbar) })
}

/// Increment for one unit's weights and bias.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitIncrement {
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// `dw = eta n_T beta (1 - n̄^2) xi / 4`; the bias sees input 1.
pub fn single_layer_update(net: &PerceptronNet, datum: &Datum, nbar: f64) -> Result<UnitIncrement> {
    net.check_single()?;
    net.check_input(&datum.xi)?;
    let g = net.eta * datum.label * net.beta * (1.0 - nbar * nbar) / 4.0;
    Ok(UnitIncrement { weights: datum.xi.iter().map(|x| g * x).collect(), bias: g })
}

/// First-order change of the mean error under the gradient step,
/// `-eta |grad|^2` with the bias counted as an input.
pub fn predicted_error_change(net: &PerceptronNet, datum: &Datum, nbar: f64) -> f64 {
    let g = net.beta * (1.0 - nbar * nbar) / 4.0;
    let norm2 = datum.xi.iter().map(|x| x * x).sum::<f64>() + 1.0;
    -net.eta * g * g * norm2
}

fn apply_unit(layer: &mut Layer, j: usize, inc: &UnitIncrement) {
    for (w, d) in layer.weights[j].iter_mut().zip(&inc.weights) {
        *w += d;
    }
    layer.biases[j] += inc.bias;
}

/// Exact mean error of a single unit on `datum`.
pub fn single_layer_error(net: &PerceptronNet, datum: &Datum) -> Result<f64> {
    net.check_single()?;
    let p = fire_probability(&net.layers[0].weights[0], net.layers[0].biases[0], &datum.xi, net.beta)?;
    Ok(mean_error(datum.label, 2.0 * p - 1.0))
}

/// Sampled mean outputs of the hidden units and the output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardSample {
    pub hidden: Vec<UnitEstimate>,
    pub output: UnitEstimate,
}

impl ForwardSample {
    pub fn hidden_means(&self) -> Vec<f64> {
        self.hidden.iter().map(|u| u.nbar).collect()
    }
}

/// Runs the two-layer network `n_samples` times. Each trial samples binary
/// hidden outputs and feeds them to the output unit.
pub fn xor_forward(net: &PerceptronNet, xi: &[f64], n_samples: u32, rng: &mut RngStream) -> Result<ForwardSample> {
    net.check_two_layer()?;
    net.check_input(xi)?;
    ensure(n_samples >= 1, "n_samples", n_samples as f64, "need at least one sample")?;
    let hidden_layer = &net.layers[0];
    let out = &net.layers[1];
    let p_h = hidden_layer.probabilities(xi, net.beta);
    let mut fired_h = vec![0u32; p_h.len()];
    let mut fired_o = 0u32;
    let mut n_h = vec![0.0; p_h.len()];
    for _ in 0..n_samples {
        for (j, &p) in p_h.iter().enumerate() {
            let on = rng.bernoulli(p);
            fired_h[j] += on as u32;
            n_h[j] = if on { 1.0 } else { -1.0 };
        }
        let p_o = sigmoid(net.beta * activation(&out.weights[0], out.biases[0], &n_h));
        fired_o += rng.bernoulli(p_o) as u32;
    }
    Ok(ForwardSample {
        hidden: fired_h.into_iter().map(|c| UnitEstimate::from_count(c, n_samples)).collect(),
        output: UnitEstimate::from_count(fired_o, n_samples),
    })
}

/// Scaling of the hidden-layer rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HiddenRule {
    /// Exact chain rule of the mean-field error, with gain `beta^2`.
    #[default]
    Gradient,
    /// Gain `beta`, as in the published rule; equal to `Gradient` at
    /// `beta = 1`.
    LinearBeta,
}

/// Increments for both layers of a two-layer network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetIncrement {
    /// `hidden[j]` for hidden unit `j`.
    pub hidden: Vec<UnitIncrement>,
    pub output: UnitIncrement,
}

/// Backward pass from epoch averages:
/// `d wo_j = eta n_T beta (1 - n̄_o^2) n̄_hj / 4` and
/// `d wh_ij = eta n_T g (1 - n̄_o^2) wo_j (1 - n̄_hj^2) xi_i / 8`.
/// Biases use the same rules with input 1.
pub fn xor_backward(
    net: &PerceptronNet,
    xi: &[f64],
    label: f64,
    nbar_h: &[f64],
    nbar_o: f64,
    rule: HiddenRule,
) -> Result<NetIncrement> {
    net.check_two_layer()?;
    net.check_input(xi)?;
    let wo = &net.layers[1].weights[0];
    if nbar_h.len() != wo.len() {
        return Err(Error::ShapeMismatch { context: "hidden averages", expected: wo.len(), found: nbar_h.len() });
    }
    let beta = net.beta;
    let out_gain = net.eta * label * beta * (1.0 - nbar_o * nbar_o);
    let output = UnitIncrement { weights: nbar_h.iter().map(|h| out_gain * h / 4.0).collect(), bias: out_gain / 4.0 };
    let hidden_beta = match rule {
        HiddenRule::Gradient => beta * beta,
        HiddenRule::LinearBeta => beta,
    };
    let hidden = nbar_h
        .iter()
        .zip(wo)
        .map(|(h, w)| {
            let g = net.eta * label * hidden_beta * (1.0 - nbar_o * nbar_o) * w * (1.0 - h * h) / 8.0;
            UnitIncrement { weights: xi.iter().map(|x| g * x).collect(), bias: g }
        })
        .collect();
    Ok(NetIncrement { hidden, output })
}

/// Mean error with hidden units replaced by their mean outputs.
pub fn mean_field_error(net: &PerceptronNet, datum: &Datum) -> Result<f64> {
    net.check_two_layer()?;
    net.check_input(&datum.xi)?;
    let nbar_h: Vec<f64> = net.layers[0].probabilities(&datum.xi, net.beta).iter().map(|p| 2.0 * p - 1.0).collect();
    let out = &net.layers[1];
    let p_o = sigmoid(net.beta * activation(&out.weights[0], out.biases[0], &nbar_h));
    Ok(mean_error(datum.label, 2.0 * p_o - 1.0))
}

/// Exact mean error of the stochastic two-layer network, summing over all
/// binary hidden states.
pub fn exact_two_layer_error(net: &PerceptronNet, datum: &Datum) -> Result<f64> {
    net.check_two_layer()?;
    net.check_input(&datum.xi)?;
    let p_h = net.layers[0].probabilities(&datum.xi, net.beta);
    let h = p_h.len();
    ensure(h <= 20, "hidden units", h as f64, "exact enumeration limited to 20 hidden units")?;
    let out = &net.layers[1];
    let mut p_o = 0.0;
    let mut states = vec![0.0; h];
    for mask in 0u32..(1 << h) {
        let mut weight = 1.0;
        for j in 0..h {
            let on = mask >> j & 1 == 1;
            states[j] = if on { 1.0 } else { -1.0 };
            weight *= if on { p_h[j] } else { 1.0 - p_h[j] };
        }
        p_o += weight * sigmoid(net.beta * activation(&out.weights[0], out.biases[0], &states));
    }
    Ok(mean_error(datum.label, 2.0 * p_o - 1.0))
}

fn apply_net(net: &mut PerceptronNet, inc: &NetIncrement) {
    for (j, u) in inc.hidden.iter().enumerate() {
        apply_unit(&mut net.layers[0], j, u);
    }
    apply_unit(&mut net.layers[1], 0, &inc.output);
}

/// One training epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub datum: usize,
    pub label: f64,
    /// Estimated mean output per unit, hidden units first.
    pub nbar: Vec<f64>,
    /// Sampled estimate of the mean error.
    pub error_estimate: f64,
    /// Exact mean error on the chosen datum before and after the update.
    pub error_before: f64,
    pub error_after: f64,
    /// Output-unit activation before the update.
    pub activation: f64,
    /// Parameters after the update, ordered as [`PerceptronNet::parameters`].
    pub parameters: Vec<f64>,
}

impl EpochRecord {
    /// Exact change of the mean error caused by this epoch's update.
    pub fn error_change(&self) -> f64 {
        self.error_after - self.error_before
    }
}

/// Epoch-by-epoch history of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRecord {
    pub parameter_names: Vec<String>,
    pub epochs: Vec<EpochRecord>,
    pub final_net: PerceptronNet,
}

impl TrainingRecord {
    /// Trailing moving average of the error estimate over `window` epochs
    /// (shorter at the start).
    pub fn moving_average(&self, window: usize) -> Vec<f64> {
        let window = window.max(1);
        let mut out = Vec::with_capacity(self.epochs.len());
        let mut acc = 0.0;
        for (k, e) in self.epochs.iter().enumerate() {
            acc += e.error_estimate;
            if k >= window {
                acc -= self.epochs[k - window].error_estimate;
            }
            out.push(acc / (k + 1).min(window) as f64);
        }
        out
    }
}

/// Settings of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub beta: f64,
    pub eta: f64,
    pub n_samples: u32,
    pub epochs: usize,
}

/// Trains a single unit on NOT from weight `w0` and bias `b0`.
pub fn train_not(config: &TrainingConfig, w0: f64, b0: f64, rng: &mut RngStream) -> Result<TrainingRecord> {
    let net = PerceptronNet::single(vec![w0], b0, config.beta, config.eta)?;
    train_single(config, net, &not_data(), rng)
}

/// Trains a single unit on `data`, drawing one datum uniformly per epoch.
pub fn train_single(
    config: &TrainingConfig,
    mut net: PerceptronNet,
    data: &[Datum],
    rng: &mut RngStream,
) -> Result<TrainingRecord> {
    ensure(config.epochs >= 1, "epochs", config.epochs as f64, "need at least one epoch")?;
    ensure(!data.is_empty(), "data", 0.0, "need at least one datum")?;
    net.check_single()?;
    let names = net.parameter_names();
    let mut epochs = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let k = rng.index(data.len());
        let datum = &data[k];
        let estimate = epoch_estimate(&net, datum, config.n_samples, rng)?;
        let error_before = single_layer_error(&net, datum)?;
        let a = activation(&net.layers[0].weights[0], net.layers[0].biases[0], &datum.xi);
        let inc = single_layer_update(&net, datum, estimate.unit.nbar)?;
        apply_unit(&mut net.layers[0], 0, &inc);
        epochs.push(EpochRecord {
            epoch,
            datum: k,
            label: datum.label,
            nbar: vec![estimate.unit.nbar],
            error_estimate: estimate.error,
            error_before,
            error_after: single_layer_error(&net, datum)?,
            activation: a,
            parameters: net.parameters(),
        });
    }
    Ok(TrainingRecord { parameter_names: names, epochs, final_net: net })
}

/// Trains a two-layer network on XOR from `net`.
pub fn train_xor(
    config: &TrainingConfig,
    net: PerceptronNet,
    rule: HiddenRule,
    rng: &mut RngStream,
) -> Result<TrainingRecord> {
    train_two_layer(config, net, &xor_data(), rule, rng)
}

pub fn train_two_layer(
    config: &TrainingConfig,
    mut net: PerceptronNet,
    data: &[Datum],
    rule: HiddenRule,
    rng: &mut RngStream,
) -> Result<TrainingRecord> {
    ensure(config.epochs >= 1, "epochs", config.epochs as f64, "need at least one epoch")?;
    ensure(!data.is_empty(), "data", 0.0, "need at least one datum")?;
    net.check_two_layer()?;
    net.beta = config.beta;
    net.eta = config.eta;
    let names = net.parameter_names();
    let mut epochs = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let k = rng.index(data.len());
        let datum = &data[k];
        let sample = xor_forward(&net, &datum.xi, config.n_samples, rng)?;
        let nbar_h = sample.hidden_means();
        let nbar_o = sample.output.nbar;
        let error_before = exact_two_layer_error(&net, datum)?;
        let a = activation(&net.layers[1].weights[0], net.layers[1].biases[0], &nbar_h);
        let inc = xor_backward(&net, &datum.xi, datum.label, &nbar_h, nbar_o, rule)?;
        apply_net(&mut net, &inc);
        let mut nbar = nbar_h;
        nbar.push(nbar_o);
        epochs.push(EpochRecord {
            epoch,
            datum: k,
            label: datum.label,
            nbar,
            error_estimate: mean_error(datum.label, nbar_o),
            error_before,
            error_after: exact_two_layer_error(&net, datum)?,
            activation: a,
            parameters: net.parameters(),
        });
    }
    Ok(TrainingRecord { parameter_names: names, epochs, final_net: net })
}

/// Mean-field output `n̄_o` of a two-layer network for input `xi`.
pub fn mean_field_output(net: &PerceptronNet, xi: &[f64]) -> Result<f64> {
    net.check_two_layer()?;
    net.check_input(xi)?;
    let nbar_h: Vec<f64> = net.layers[0].probabilities(xi, net.beta).iter().map(|p| 2.0 * p - 1.0).collect();
    let out = &net.layers[1];
    Ok(2.0 * sigmoid(net.beta * activation(&out.weights[0], out.biases[0], &nbar_h)) - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Moments;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn fire_probability_examples() {
        assert_eq!(fire_probability(&[2.0], -2.0, &[1.0], 0.7).unwrap(), 0.5);
        let p = fire_probability(&[3f64.ln()], 0.0, &[1.0], 1.0).unwrap();
        assert!((p - 0.75).abs() < 1e-15);
        assert!(fire_probability(&[1.0, 2.0], 0.0, &[1.0], 1.0).is_err());
    }

    #[test]
    fn bernoulli_variance_peaks_at_zero_activation() {
        let var = |a: f64| {
            let p = fire_probability(&[a], 0.0, &[1.0], 0.6).unwrap();
            p * (1.0 - p)
        };
        assert_eq!(var(0.0), 0.25);
        assert!(var(0.0) > var(0.5) && var(0.0) > var(-0.5) && var(3.0) < var(1.0));
    }

    #[test]
    fn saturated_unit_has_no_spread() {
        let net = PerceptronNet::single(vec![0.0], 1e3, 1.0, 1.0).unwrap();
        let d = Datum::new(vec![1.0], -1.0).unwrap();
        let mut rng = RngStream::new(1, 0);
        let e = epoch_estimate(&net, &d, 50, &mut rng).unwrap();
        assert_eq!(e.unit.nbar, 1.0);
        assert_eq!(e.unit.stderr, 0.0);
        assert_eq!(e.error, 1.0);
    }

    #[test]
    fn estimate_spread_follows_binomial_law() {
        let net = PerceptronNet::single(vec![0.0], 0.0, 1.0, 1.0).unwrap();
        let d = Datum::new(vec![1.0], 1.0).unwrap();
        let mut rng = RngStream::new(2, 0);
        let p: Vec<f64> = (0..4000).map(|_| epoch_estimate(&net, &d, 200, &mut rng).unwrap().unit.p_hat).collect();
        let sd = Moments::of(&p).variance.sqrt();
        assert!((sd - (0.25f64 / 200.0).sqrt()).abs() < 0.002, "{sd}");
    }

    #[test]
    fn error_estimator_is_unbiased() {
        let net = PerceptronNet::single(vec![0.7], -0.2, 1.3, 1.0).unwrap();
        let d = Datum::new(vec![-1.0], 1.0).unwrap();
        let exact = single_layer_error(&net, &d).unwrap();
        let mut rng = RngStream::new(3, 0);
        let e: Vec<f64> = (0..5000).map(|_| epoch_estimate(&net, &d, 20, &mut rng).unwrap().error).collect();
        let m = Moments::of(&e);
        assert!((m.mean - exact).abs() < 3.0 * m.stderr());
        assert!((error_variance(0.3) - 0.21).abs() < 1e-15);
    }

    #[test]
    fn single_layer_update_examples() {
        let net = PerceptronNet::single(vec![0.0], 0.0, 1.0, 1.0).unwrap();
        let d = Datum::new(vec![-1.0], 1.0).unwrap();
        let inc = single_layer_update(&net, &d, 0.0).unwrap();
        assert_eq!(inc.weights, vec![-0.25]);
        assert_eq!(inc.bias, 0.25);
        assert_eq!(single_layer_update(&net, &d, 1.0).unwrap().weights, vec![0.0]);
        assert_eq!(single_layer_update(&net, &d, -1.0).unwrap().bias, 0.0);
        let flipped = single_layer_update(&net, &Datum::new(vec![-1.0], -1.0).unwrap(), 0.3).unwrap();
        let orig = single_layer_update(&net, &d, 0.3).unwrap();
        assert_eq!(flipped.weights[0], -orig.weights[0]);
        assert!(predicted_error_change(&net, &d, 0.3) < 0.0);
    }

    #[test]
    fn single_layer_rule_is_the_negative_gradient() {
        let mut rng = RngStream::new(4, 0);
        for _ in 0..100 {
            let (w, b) = (4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0);
            let beta = 0.05 + 2.0 * rng.uniform();
            let d = if rng.bernoulli(0.5) { not_data()[0].clone() } else { not_data()[1].clone() };
            let net = PerceptronNet::single(vec![w], b, beta, 0.7).unwrap();
            let nbar = 2.0 * fire_probability(&[w], b, &d.xi, beta).unwrap() - 1.0;
            let inc = single_layer_update(&net, &d, nbar).unwrap();
            let h = 1e-5;
            let err = |w: f64, b: f64| {
                single_layer_error(&PerceptronNet::single(vec![w], b, beta, 0.7).unwrap(), &d).unwrap()
            };
            let gw = (err(w + h, b) - err(w - h, b)) / (2.0 * h);
            let gb = (err(w, b + h) - err(w, b - h)) / (2.0 * h);
            assert!(rel_err(inc.weights[0], -0.7 * gw) < 1e-6);
            assert!(rel_err(inc.bias, -0.7 * gb) < 1e-6);
        }
    }

    #[test]
    fn xor_forward_limits() {
        let zero = PerceptronNet::two_layer([[0.0; 2]; 2], [0.0; 2], [0.0; 2], 0.0, 1.0, 1.0).unwrap();
        let mut rng = RngStream::new(5, 0);
        let s = xor_forward(&zero, &[1.0, -1.0], 10_000, &mut rng).unwrap();
        for u in s.hidden.iter().chain(core::iter::once(&s.output)) {
            assert!(u.nbar.abs() < 3.0 * 2.0 * 0.005);
        }
        let sat = PerceptronNet::two_layer([[0.0; 2]; 2], [50.0; 2], [0.0; 2], 0.0, 1.0, 1.0).unwrap();
        let s = xor_forward(&sat, &[1.0, -1.0], 100, &mut rng).unwrap();
        assert_eq!(s.hidden_means(), vec![1.0, 1.0]);
        assert!(xor_forward(&sat, &[1.0], 10, &mut rng).is_err());
    }

    #[test]
    fn xor_backward_examples() {
        let net = PerceptronNet::two_layer([[0.0; 2]; 2], [0.0; 2], [-2.0, -3.0], 0.0, 1.0, 1.0).unwrap();
        let inc = xor_backward(&net, &[1.0, 1.0], 1.0, &[0.0, 0.0], 0.0, HiddenRule::Gradient).unwrap();
        assert_eq!(inc.hidden[0].weights, vec![-0.25, -0.25]);
        assert_eq!(inc.hidden[1].weights, vec![-0.375, -0.375]);
        let done = xor_backward(&net, &[1.0, 1.0], 1.0, &[0.3, 0.2], 1.0, HiddenRule::Gradient).unwrap();
        assert!(done.hidden.iter().all(|u| u.weights.iter().all(|&w| w == 0.0) && u.bias == 0.0));
        assert!(done.output.weights.iter().all(|&w| w == 0.0));
        let neg = xor_backward(&net, &[1.0, -1.0], -1.0, &[0.3, 0.2], 0.1, HiddenRule::Gradient).unwrap();
        let pos = xor_backward(&net, &[1.0, -1.0], 1.0, &[0.3, 0.2], 0.1, HiddenRule::Gradient).unwrap();
        assert_eq!(neg.output.weights[1], -pos.output.weights[1]);
        assert_eq!(neg.hidden[0].weights[1], -pos.hidden[0].weights[1]);
    }

    /// Central differences of the mean-field error in every parameter.
    fn mean_field_gradient(net: &PerceptronNet, d: &Datum) -> Vec<f64> {
        let h = 1e-5;
        let base = net.parameters();
        (0..base.len())
            .map(|k| {
                let eval = |delta: f64| {
                    let mut p = base.clone();
                    p[k] += delta;
                    mean_field_error(&with_parameters(net, &p), d).unwrap()
                };
                (eval(h) - eval(-h)) / (2.0 * h)
            })
            .collect()
    }

    fn with_parameters(net: &PerceptronNet, p: &[f64]) -> PerceptronNet {
        let mut out = net.clone();
        let mut it = p.iter();
        for layer in &mut out.layers {
            for (w, b) in layer.weights.iter_mut().zip(layer.biases.iter_mut()) {
                for v in w.iter_mut() {
                    *v = *it.next().unwrap();
                }
                *b = *it.next().unwrap();
            }
        }
        out
    }

    fn flatten(inc: &NetIncrement) -> Vec<f64> {
        let mut out = Vec::new();
        for u in inc.hidden.iter().chain(core::iter::once(&inc.output)) {
            out.extend_from_slice(&u.weights);
            out.push(u.bias);
        }
        out
    }

    #[test]
    fn xor_rules_match_mean_field_gradient() {
        let mut rng = RngStream::new(6, 0);
        let data = xor_data();
        for _ in 0..100 {
            let mut u = || 4.0 * rng.uniform() - 2.0;
            let wh = [[u(), u()], [u(), u()]];
            let (bh, wo, bo) = ([u(), u()], [u(), u()], u());
            let beta = 0.1 + 1.9 * rng.uniform();
            let net = PerceptronNet::two_layer(wh, bh, wo, bo, beta, 0.8).unwrap();
            let d = &data[rng.index(4)];
            let nbar_h: Vec<f64> = net.layers[0].probabilities(&d.xi, beta).iter().map(|p| 2.0 * p - 1.0).collect();
            let nbar_o = mean_field_output(&net, &d.xi).unwrap();
            let inc = flatten(&xor_backward(&net, &d.xi, d.label, &nbar_h, nbar_o, HiddenRule::Gradient).unwrap());
            let grad = mean_field_gradient(&net, d);
            for (a, g) in inc.iter().zip(&grad) {
                if g.abs() > 1e-8 {
                    assert!(rel_err(*a, -0.8 * g) < 1e-4, "{a} vs {}", -0.8 * g);
                } else {
                    assert!(a.abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn linear_beta_rule_coincides_at_unit_beta() {
        let net = PerceptronNet::xor_reference_init(1.0, 1.0).unwrap();
        let a = xor_backward(&net, &[1.0, -1.0], 1.0, &[0.2, -0.4], 0.3, HiddenRule::Gradient).unwrap();
        let b = xor_backward(&net, &[1.0, -1.0], 1.0, &[0.2, -0.4], 0.3, HiddenRule::LinearBeta).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parameter_layout() {
        let net = PerceptronNet::xor_reference_init(1.0, 1.0).unwrap();
        assert_eq!(net.parameters(), vec![-5.0, -2.0, -1.0, 8.0, 3.0, -3.0, -2.0, -3.0, -1.0]);
        assert_eq!(net.parameter_names(), ["wh11", "wh21", "b1", "wh12", "wh22", "b2", "wo1", "wo2", "b3"]);
        let single = PerceptronNet::single(vec![0.01], 1.0, 1.0, 1.0).unwrap();
        assert_eq!(single.parameter_names(), ["w", "b"]);
    }

    #[test]
    fn exact_error_agrees_with_sampling() {
        let net = PerceptronNet::xor_reference_init(1.0, 1.0).unwrap();
        let d = &xor_data()[1];
        let exact = exact_two_layer_error(&net, d).unwrap();
        let mut rng = RngStream::new(7, 0);
        let s = xor_forward(&net, &d.xi, 200_000, &mut rng).unwrap();
        let e = mean_error(d.label, s.output.nbar);
        assert!((e - exact).abs() < 3.0 * s.output.stderr);
    }

    #[test]
    fn not_training_learns_negative_weight() {
        let cfg = TrainingConfig { beta: 1.0, eta: 1.0, n_samples: 200, epochs: 500 };
        let mut rng = RngStream::new(8, 0);
        let rec = train_not(&cfg, 0.01, 1.0, &mut rng).unwrap();
        let w = rec.final_net.layers[0].weights[0][0];
        assert!(w < -2.0, "w = {w}");
        let ma = rec.moving_average(50);
        assert!(ma[499] < ma[49]);
        assert!(rec.epochs.iter().all(|e| (0.0..=1.0).contains(&e.error_estimate)));
    }

    #[test]
    fn well_trained_not_starts_small() {
        let net = PerceptronNet::single(vec![-5.0], 0.0, 1.0, 1.0).unwrap();
        for d in not_data() {
            assert!(single_layer_error(&net, &d).unwrap() < 0.01);
        }
        let cfg = TrainingConfig { beta: 1.0, eta: 1.0, n_samples: 200, epochs: 100 };
        let rec = train_not(&cfg, -5.0, 0.0, &mut RngStream::new(9, 0)).unwrap();
        assert!(rec.moving_average(100)[99] < 0.02);
    }

    #[test]
    fn frozen_learning_keeps_weights() {
        let cfg = TrainingConfig { beta: 1.0, eta: 0.0, n_samples: 50, epochs: 50 };
        let rec = train_not(&cfg, 0.3, -0.1, &mut RngStream::new(10, 0)).unwrap();
        assert!(rec.epochs.iter().all(|e| e.parameters == vec![0.3, -0.1]));
        let rec = train_xor(
            &cfg,
            PerceptronNet::xor_reference_init(1.0, 0.0).unwrap(),
            HiddenRule::Gradient,
            &mut RngStream::new(10, 1),
        )
        .unwrap();
        let init = PerceptronNet::xor_reference_init(1.0, 0.0).unwrap().parameters();
        assert!(rec.epochs.iter().all(|e| e.parameters == init));
    }

    #[test]
    fn xor_training_reduces_error() {
        let cfg = TrainingConfig { beta: 1.0, eta: 1.0, n_samples: 200, epochs: 3000 };
        let rec = train_xor(
            &cfg,
            PerceptronNet::xor_reference_init(1.0, 1.0).unwrap(),
            HiddenRule::Gradient,
            &mut RngStream::new(11, 0),
        )
        .unwrap();
        let ma = rec.moving_average(100);
        assert!(ma[2999] < ma[99], "{} vs {}", ma[2999], ma[99]);
    }
}
