//! Limit-cycle neurons built from a switch driving a damped oscillator.
//!
//! The switch variable `v` relaxes as `v' = mu(x)(1 - v) - nu(x)(1 + v)` with
//! `mu = gamma e^-x`, `nu = gamma e^x`; the oscillator obeys `x' = y`,
//! `y' = -x - kappa y + chi (v - epsilon)` plus thermal noise `sqrt(sigma) dW`
//! on `y`. Above a Hopf threshold in `chi` the rest point gives way to a
//! limit cycle whose period jitters by phase diffusion.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::error::{ensure, Error, Result};
use crate::numeric::{bisect, sigmoid};
use crate::rng::RngStream;
use crate::stats::Moments;
use crate::trajectory::Trajectory;

/// How the switch variable evolves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SwitchMode {
    /// Mean-field relaxation of `v` in `[-1, 1]`.
    #[default]
    MeanField,
    /// `v = +-1` flipping at rates `mu(x)` (up) and `nu(x)` (down).
    Jump,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikingNeuron {
    pub gamma: f64,
    pub kappa: f64,
    pub chi: f64,
    pub epsilon: f64,
    /// Variance rate of the noise on `y`.
    pub sigma: f64,
    pub switch: SwitchMode,
}

impl SpikingNeuron {
    pub fn new(gamma: f64, kappa: f64, chi: f64, epsilon: f64, sigma: f64) -> Result<Self> {
        let n = Self { gamma, kappa, chi, epsilon, sigma, switch: SwitchMode::MeanField };
        n.validate()?;
        Ok(n)
    }

    /// Deterministic clock: `gamma = kappa = 1`, `chi = 40`, `epsilon = 0.1`.
    pub fn quartz() -> Self {
        Self { gamma: 1.0, kappa: 1.0, chi: 40.0, epsilon: 0.1, sigma: 0.0, switch: SwitchMode::MeanField }
    }

    /// Noisy clock: `gamma = 10`, `chi = 40`, `kappa = 1`, `sigma = 25`,
    /// `epsilon = 0.1`.
    pub fn noisy_quartz() -> Self {
        Self { gamma: 10.0, sigma: 25.0, ..Self::quartz() }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.gamma > 0.0 && self.gamma.is_finite(), "gamma", self.gamma, "switch rate must be positive")?;
        ensure(self.kappa > 0.0 && self.kappa.is_finite(), "kappa", self.kappa, "damping must be positive")?;
        ensure(self.chi.is_finite(), "chi", self.chi, "coupling must be finite")?;
        ensure(self.epsilon.is_finite(), "epsilon", self.epsilon, "bias must be finite")?;
        ensure(self.sigma >= 0.0 && self.sigma.is_finite(), "sigma", self.sigma, "noise must be non-negative")
    }

    /// `(mu, nu) = (gamma e^-x, gamma e^x)`.
    pub fn rates(&self, x: f64) -> (f64, f64) {
        (self.gamma * (-x).exp(), self.gamma * x.exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NeuronState {
    pub v: f64,
    pub x: f64,
    pub y: f64,
}

/// Advances one step of length `h` with coupling `chi` and bias `epsilon`.
///
/// With `x` frozen over the step, `v` relaxes exactly towards `-tanh x` at
/// rate `2 gamma cosh x`, so it never leaves `[-1, 1]`. The oscillator uses
/// semi-implicit Euler: `y` first, then `x` with the new `y`.
pub fn neuron_step(
    neuron: &SpikingNeuron,
    state: &mut NeuronState,
    chi: f64,
    epsilon: f64,
    h: f64,
    rng: &mut RngStream,
) -> Result<()> {
    let NeuronState { v, x, y } = *state;
    let v_next = match neuron.switch {
        SwitchMode::MeanField => {
            let target = -x.tanh();
            let rate = 2.0 * neuron.gamma * x.cosh();
            target + (v - target) * (-rate * h).exp()
        }
        SwitchMode::Jump => {
            let (mu, nu) = neuron.rates(x);
            let rate = if v > 0.0 { nu } else { mu };
            if rng.bernoulli(-(-rate * h).exp_m1()) {
                -v.signum()
            } else {
                v
            }
        }
    };
    let noise = if neuron.sigma > 0.0 { neuron.sigma.sqrt() * rng.wiener(h) } else { 0.0 };
    let y_next = y + (-x - neuron.kappa * y + chi * (v - epsilon)) * h + noise;
    let x_next = x + y_next * h;
    if !(v_next.is_finite() && x_next.is_finite() && y_next.is_finite()) {
        return Err(Error::NonFinite { t: f64::NAN, state: alloc::vec![v, x, y] });
    }
    *state = NeuronState { v: v_next, x: x_next, y: y_next };
    Ok(())
}

fn step_count(dt: f64, t_end: f64) -> Result<usize> {
    ensure(dt > 0.0 && dt.is_finite(), "dt", dt, "step must be positive")?;
    ensure(t_end > 0.0 && t_end.is_finite(), "t_end", t_end, "duration must be positive")?;
    Ok((t_end / dt * (1.0 - 1e-12)).ceil() as usize)
}

/// Path of `(v, x, y)` under `drive(t) = (chi, epsilon)`, sampled every step.
/// Steps have length `dt`; the last one is shortened to end at `t_end`.
pub fn simulate_driven<F: Fn(f64) -> (f64, f64)>(
    neuron: &SpikingNeuron,
    start: NeuronState,
    drive: F,
    dt: f64,
    t_end: f64,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    neuron.validate()?;
    let steps = step_count(dt, t_end)?;
    let mut tr = Trajectory::with_capacity(&["v", "x", "y"], rng.seed(), steps + 1);
    let mut s = start;
    tr.push(0.0, &[s.v, s.x, s.y])?;
    for k in 0..steps {
        let t = k as f64 * dt;
        let t_next = if k + 1 == steps { t_end } else { t + dt };
        let (chi, eps) = drive(t);
        neuron_step(neuron, &mut s, chi, eps, t_next - t, rng).map_err(|e| with_time(e, t))?;
        tr.push(t_next, &[s.v, s.x, s.y])?;
    }
    Ok(tr)
}

fn with_time(e: Error, t: f64) -> Error {
    match e {
        Error::NonFinite { state, .. } => Error::NonFinite { t, state },
        other => other,
    }
}

/// Path under the neuron's own constant `chi` and `epsilon`.
pub fn simulate_neuron(
    neuron: &SpikingNeuron,
    start: NeuronState,
    dt: f64,
    t_end: f64,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    let (chi, eps) = (neuron.chi, neuron.epsilon);
    simulate_driven(neuron, start, |_| (chi, eps), dt, t_end, rng)
}

/// Averaged radial velocity `-kappa r / 2 + (2 chi / pi) cos psi0`.
pub fn radial_rate(r: f64, chi: f64, kappa: f64, psi0: f64) -> f64 {
    -0.5 * kappa * r + 2.0 * chi / PI * psi0.cos()
}

/// Averaged phase velocity `-1 + 2 chi sin(psi0) / (pi r)`.
pub fn phase_rate(r: f64, chi: f64, psi0: f64) -> f64 {
    -1.0 + 2.0 * chi * psi0.sin() / (PI * r)
}

/// Stable radius `4 chi cos(psi0) / (pi kappa)` of the averaged dynamics.
pub fn limit_cycle_radius(chi: f64, kappa: f64, psi0: f64) -> Result<f64> {
    ensure(kappa > 0.0, "kappa", kappa, "damping must be positive")?;
    let c = psi0.cos();
    let outward = c > 0.0 && chi > 0.0;
    if !outward {
        return Err(Error::NoLimitCycle { cos_psi0: c });
    }
    Ok(4.0 * chi * c / (PI * kappa))
}

/// Solves `r = 4 chi cos(psi0) / (pi kappa)` with
/// `cos(psi0) = ln(r / gamma) / r` on the branch `cos(psi0) > 0`, taking the
/// larger radius. Returns `(r*, psi0)`.
pub fn self_consistent_cycle(chi: f64, kappa: f64, gamma: f64) -> Result<(f64, f64)> {
    ensure(gamma > 0.0, "gamma", gamma, "switch rate must be positive")?;
    ensure(kappa > 0.0, "kappa", kappa, "damping must be positive")?;
    ensure(chi > 0.0, "chi", chi, "coupling must be positive")?;
    let k = 4.0 * chi / (PI * kappa);
    // f(r) = r^2 - k ln(r / gamma) is convex with its minimum at sqrt(k / 2).
    let f = |r: f64| r * r - k * (r / gamma).ln();
    let r_min = (0.5 * k).sqrt();
    if f(r_min) > 0.0 {
        return Err(Error::NoLimitCycle { cos_psi0: (r_min / gamma).ln() / r_min });
    }
    let mut hi = 2.0 * r_min.max(gamma);
    while f(hi) <= 0.0 {
        hi *= 2.0;
    }
    let r = bisect(f, r_min, hi, 1e-12).ok_or(Error::NoLimitCycle { cos_psi0: f64::NAN })?;
    let c = ((r / gamma).ln() / r).clamp(-1.0, 1.0);
    Ok((r, c.acos()))
}

/// Rest point `x*` with `y* = 0` and `v* = -tanh x*`: the root of
/// `x + chi (tanh x + epsilon) = 0`, unique for `chi >= 0`.
pub fn rest_point(chi: f64, epsilon: f64) -> f64 {
    let g = |x: f64| x + chi * (x.tanh() + epsilon);
    let span = chi.abs() * (1.0 + epsilon.abs()) + 1.0;
    bisect(g, -span, span, 1e-14).unwrap_or(0.0)
}

/// Routh-Hurwitz margin `(kappa + b)(1 + kappa b) - (b + c chi)` of the rest
/// point, with `b = 2 gamma cosh x*` and `c = 2 gamma / cosh x*`. Positive
/// means stable.
pub fn stability_margin(gamma: f64, kappa: f64, chi: f64, epsilon: f64) -> f64 {
    let x = rest_point(chi, epsilon);
    let b = 2.0 * gamma * x.cosh();
    let c = 2.0 * gamma / x.cosh();
    (kappa + b) * (1.0 + kappa * b) - (b + c * chi)
}

/// Smallest coupling at which the rest point loses stability.
pub fn hopf_threshold(gamma: f64, kappa: f64, epsilon: f64) -> Result<f64> {
    ensure(gamma > 0.0 && kappa > 0.0, "gamma, kappa", gamma.min(kappa), "rates must be positive")?;
    let m = |chi: f64| stability_margin(gamma, kappa, chi, epsilon);
    let mut hi = 1.0;
    while m(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e7 {
            return Err(Error::NoLimitCycle { cos_psi0: f64::NAN });
        }
    }
    bisect(m, 0.0, hi, 1e-12).ok_or(Error::NoLimitCycle { cos_psi0: f64::NAN })
}

/// Spread `lambda = 4 pi^2 r* / sigma` of the period law.
pub fn wald_shape(r_star: f64, sigma: f64) -> f64 {
    4.0 * PI * PI * r_star / sigma
}

/// Period density `sqrt(2 pi r* / (sigma T^3)) exp(-r* (2 pi - T)^2 / (2 sigma T))`,
/// the inverse Gaussian with mean `2 pi` and variance `2 pi sigma / r*`.
pub fn wald_pdf(t: f64, r_star: f64, sigma: f64) -> Result<f64> {
    ensure(t > 0.0, "T", t, "period must be positive")?;
    ensure(sigma > 0.0, "sigma", sigma, "noise must be positive")?;
    ensure(r_star > 0.0, "r*", r_star, "radius must be positive")?;
    let two_pi = 2.0 * PI;
    Ok((two_pi * r_star / (sigma * t * t * t)).sqrt() * (-r_star * (two_pi - t).powi(2) / (2.0 * sigma * t)).exp())
}

/// Inverse Gaussian law by mean and shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaldFit {
    pub mean: f64,
    pub shape: f64,
}

impl WaldFit {
    /// Moment matching: `shape = mean^3 / variance`.
    pub fn from_moments(mean: f64, variance: f64) -> Self {
        Self { mean, shape: mean.powi(3) / variance }
    }

    pub fn variance(&self) -> f64 {
        self.mean.powi(3) / self.shape
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let (m, l) = (self.mean, self.shape);
        (l / (2.0 * PI * t * t * t)).sqrt() * (-l * (t - m).powi(2) / (2.0 * m * m * t)).exp()
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let (m, l) = (self.mean, self.shape);
        let s = (l / t).sqrt();
        let a = normal_cdf(s * (t / m - 1.0));
        // exp(2 l / m) Phi(-z) evaluated in logs to avoid overflow.
        let z = s * (t / m + 1.0);
        let b = (2.0 * l / m + log_normal_tail(z)).exp();
        (a + b).clamp(0.0, 1.0)
    }
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

/// `ln Phi(-z)` for `z >= 0`.
fn log_normal_tail(z: f64) -> f64 {
    if z < 30.0 {
        (0.5 * libm::erfc(z / core::f64::consts::SQRT_2)).ln()
    } else {
        let z2 = z * z;
        -0.5 * z2 - (z * (2.0 * PI).sqrt()).ln() + (1.0 - 1.0 / z2 + 3.0 / (z2 * z2)).ln()
    }
}

/// Settings of the spike detector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpikeDetector {
    /// `x` must drop below `-band` before the next upward crossing counts.
    /// `None` uses a tenth of the largest `|x|` after `t_min`.
    pub band: Option<f64>,
    /// Crossings before this time are ignored.
    pub t_min: f64,
}

/// Upward zero crossings of `x`, linearly interpolated, with hysteresis.
pub fn spike_times(times: &[f64], x: &[f64], detector: &SpikeDetector) -> Vec<f64> {
    let start = times.iter().position(|&t| t >= detector.t_min).unwrap_or(times.len());
    let band = detector.band.unwrap_or_else(|| 0.1 * x[start..].iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let mut armed = false;
    let mut out = Vec::new();
    for k in start..x.len().saturating_sub(1) {
        if x[k] < -band {
            armed = true;
        }
        if armed && x[k] < 0.0 && x[k + 1] >= 0.0 {
            let frac = -x[k] / (x[k + 1] - x[k]);
            out.push(times[k] + frac * (times[k + 1] - times[k]));
            armed = false;
        }
    }
    out
}

/// Periods between consecutive spikes with their moments and Wald fit.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodStats {
    pub periods: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    pub wald: WaldFit,
}

pub fn period_statistics(times: &[f64], x: &[f64], detector: &SpikeDetector) -> Result<PeriodStats> {
    if times.len() != x.len() {
        return Err(Error::ShapeMismatch { context: "times and x", expected: times.len(), found: x.len() });
    }
    let spikes = spike_times(times, x, detector);
    if spikes.len() < 2 {
        return Err(Error::NoCycles { crossings: spikes.len() });
    }
    let periods: Vec<f64> = spikes.windows(2).map(|w| w[1] - w[0]).collect();
    let m = Moments::of(&periods);
    Ok(PeriodStats { wald: WaldFit::from_moments(m.mean, m.variance), mean: m.mean, variance: m.variance, periods })
}

/// Mean of `sqrt(x^2 + y^2)` after `t_min`.
pub fn cycle_radius(tr: &Trajectory, t_min: f64) -> Result<f64> {
    let (x, y) = match (tr.channel("x"), tr.channel("y")) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(Error::Empty("trajectory needs x and y channels")),
    };
    let r: Vec<f64> = tr
        .times()
        .iter()
        .zip(x.iter().zip(y))
        .filter(|(t, _)| **t >= t_min)
        .map(|(_, (a, b))| (a * a + b * b).sqrt())
        .collect();
    if r.is_empty() {
        return Err(Error::Empty("no samples after t_min"));
    }
    Ok(Moments::of(&r).mean)
}

/// Leaky integrator of incoming switch signals,
/// `dJ = -k^2 J dt + k sum_l w_l h(t) (1 + v_l) dt + k sqrt(sigma) dW` with
/// turn-off gate `h(t) = 1 / (1 + exp(alpha (t - tau)))`.
#[derive(Debug, Clone, PartialEq)]
pub struct LifSynapse {
    pub k: f64,
    pub weights: Vec<f64>,
    pub tau: f64,
    pub alpha: f64,
    pub sigma: f64,
}

impl LifSynapse {
    pub fn new(k: f64, weights: Vec<f64>, tau: f64, alpha: f64, sigma: f64) -> Result<Self> {
        ensure(k > 0.0 && k.is_finite(), "k", k, "leak must be positive")?;
        ensure(alpha > 0.0 && alpha.is_finite(), "alpha", alpha, "turn-off sharpness must be positive")?;
        ensure(sigma >= 0.0 && sigma.is_finite(), "sigma", sigma, "noise must be non-negative")?;
        ensure(tau.is_finite(), "tau", tau, "window must be finite")?;
        Ok(Self { k, weights, tau, alpha, sigma })
    }

    pub fn gate(&self, t: f64) -> f64 {
        sigmoid(-self.alpha * (t - self.tau))
    }

    /// Stationary current for constant inputs with the gate held at `h`.
    pub fn steady_current(&self, v_inputs: &[f64], h: f64) -> f64 {
        self.weights.iter().zip(v_inputs).map(|(w, v)| w * h * (1.0 + v)).sum::<f64>() / self.k
    }

    /// One Euler step of length `dt` with Wiener increment `dw`.
    pub fn lif_step(&self, j: f64, v_inputs: &[f64], t: f64, dt: f64, dw: f64) -> Result<f64> {
        if v_inputs.len() != self.weights.len() {
            return Err(Error::ShapeMismatch {
                context: "synapse inputs",
                expected: self.weights.len(),
                found: v_inputs.len(),
            });
        }
        let h = self.gate(t);
        let input: f64 = self.weights.iter().zip(v_inputs).map(|(w, v)| w * h * (1.0 + v)).sum();
        Ok(j + (-self.k * self.k * j + self.k * input) * dt + self.k * self.sigma.sqrt() * dw)
    }
}

/// Coupling switched on by the integrated current:
/// `chi / (1 + exp(-beta_s (J - J0)))`.
pub fn threshold_coupling(j: f64, chi_base: f64, beta_s: f64, j0: f64) -> f64 {
    chi_base * sigmoid(beta_s * (j - j0))
}

/// Binary message carried by the coupling `chi (1 + theta M(t))`, with
/// `M(t)` the sign of `sin(2 pi t / period)` (taken as `+1` at zeros).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCode {
    pub chi_base: f64,
    pub theta: f64,
    pub period: f64,
}

impl RateCode {
    pub fn new(chi_base: f64, theta: f64, period: f64) -> Result<Self> {
        ensure((0.0..=1.0).contains(&theta), "theta", theta, "modulation depth must lie in [0, 1]")?;
        ensure(period > 0.0, "period", period, "message period must be positive")?;
        Ok(Self { chi_base, theta, period })
    }

    pub fn message(&self, t: f64) -> f64 {
        if (2.0 * PI * t / self.period).sin() >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn chi(&self, t: f64) -> f64 {
        self.chi_base * (1.0 + self.theta * self.message(t))
    }
}

/// Decodes one bit per half message period from the mean spike interval in
/// that window: intervals shorter than `threshold` read as `short_bit`.
/// Windows without two spikes decode as `0`.
pub fn decode_intervals(spikes: &[f64], window: f64, windows: usize, threshold: f64, short_bit: f64) -> Vec<f64> {
    (0..windows)
        .map(|w| {
            let (lo, hi) = (w as f64 * window, (w + 1) as f64 * window);
            let inside: Vec<f64> = spikes.iter().copied().filter(|&s| s >= lo && s < hi).collect();
            if inside.len() < 2 {
                return 0.0;
            }
            let mean = (inside[inside.len() - 1] - inside[0]) / (inside.len() - 1) as f64;
            if mean < threshold {
                short_bit
            } else {
                -short_bit
            }
        })
        .collect()
}

/// A post-synaptic neuron driven through a leaky integrator by the
/// pre-synaptic signal `m(t) = tanh(lambda sin(2 pi t / T))`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedforwardConfig {
    pub post: SpikingNeuron,
    pub synapse: LifSynapse,
    pub beta_s: f64,
    pub j0: f64,
    pub input_sharpness: f64,
    pub input_period: f64,
    pub dt: f64,
    pub t_end: f64,
}

impl FeedforwardConfig {
    /// `chi = 20, kappa = gamma = 1, epsilon = 0.1`, `k = 0.01`, `beta_s = 1`,
    /// `lambda = 10`, `T = 5`, `tau = 20`, `alpha = 1`, `w = 1`, noise off.
    pub fn reference(j0: f64) -> Result<Self> {
        Ok(Self {
            post: SpikingNeuron::new(1.0, 1.0, 20.0, 0.1, 0.0)?,
            synapse: LifSynapse::new(0.01, alloc::vec![1.0], 20.0, 1.0, 0.0)?,
            beta_s: 1.0,
            j0,
            input_sharpness: 10.0,
            input_period: 5.0,
            dt: 0.01,
            t_end: 60.0,
        })
    }

    pub fn input(&self, t: f64) -> f64 {
        (self.input_sharpness * (2.0 * PI * t / self.input_period).sin()).tanh()
    }
}

/// Path of `(v_pre, J, chi_post, v_post, x_post)` from rest.
pub fn simulate_feedforward_pair(config: &FeedforwardConfig, rng: &mut RngStream) -> Result<Trajectory> {
    config.post.validate()?;
    if config.synapse.weights.len() != 1 {
        return Err(Error::ShapeMismatch {
            context: "feedforward synapse weights",
            expected: 1,
            found: config.synapse.weights.len(),
        });
    }
    let steps = step_count(config.dt, config.t_end)?;
    let mut tr = Trajectory::with_capacity(&["v_pre", "J", "chi_post", "v_post", "x_post"], rng.seed(), steps + 1);
    let mut j = 0.0;
    let mut post = NeuronState::default();
    let chi_of = |j: f64| threshold_coupling(j, config.post.chi, config.beta_s, config.j0);
    tr.push(0.0, &[config.input(0.0), j, chi_of(j), post.v, post.x])?;
    for k in 0..steps {
        let t = k as f64 * config.dt;
        let t_next = if k + 1 == steps { config.t_end } else { t + config.dt };
        let h = t_next - t;
        let chi = chi_of(j);
        neuron_step(&config.post, &mut post, chi, config.post.epsilon, h, rng).map_err(|e| with_time(e, t))?;
        let dw = if config.synapse.sigma > 0.0 { rng.wiener(h) } else { 0.0 };
        j = config.synapse.lif_step(j, &[config.input(t)], t, h, dw)?;
        tr.push(t_next, &[config.input(t_next), j, chi_of(j), post.v, post.x])?;
    }
    Ok(tr)
}

/// Whether the post-synaptic neuron spiked at least `min_spikes` times,
/// counting upward crossings of `x_post` through a band of `band`.
pub fn post_fired(tr: &Trajectory, band: f64, min_spikes: usize) -> Result<bool> {
    let x = tr.channel("x_post").ok_or(Error::Empty("trajectory needs an x_post channel"))?;
    let detector = SpikeDetector { band: Some(band), t_min: 0.0 };
    Ok(spike_times(tr.times(), x, &detector).len() >= min_spikes)
}
