//! Continuous-time learning of NOT on a square-wave signal.
//!
//! Without feedback the weight is an Ornstein-Uhlenbeck process
//! `dw = -gamma_w w dt + sqrt(D) dW`. Feedback from the switch adds
//! `L x n_T (1 - n̄^2) dt`, which for NOT (`n_T = -x`) with the switch at its
//! sigmoid mean becomes `-L sech^2(beta w x / 2) dt`.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::ensemble::Executor;
use crate::error::{ensure, Error, Result};
use crate::numeric::{bisect, density_from_log_weights, sech2, sigmoid, UniformGrid};
use crate::observer::{clamp_unit, ReadoutModel};
use crate::rng::RngStream;
use crate::sde::{integrate, SdeSystem, TimeGrid};
use crate::trajectory::Trajectory;

/// Source of `1 - n̄^2` in the weight drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeedbackMode {
    /// Switch at its instantaneous sigmoid mean: `-L sech^2(beta w x / 2)`.
    #[default]
    ClosedForm,
    /// Observer's conditional mean: `-L x n_T (1 - n_c^2)`.
    Conditional,
}

/// Weight dynamics coupled to an observed switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousLearner {
    /// `L = eta beta / 4`; zero switches feedback off.
    pub learning_scale: f64,
    pub weight_decay: f64,
    pub diffusion: f64,
    pub beta: f64,
    /// Rate scale of the switch: `mu + nu = gamma`.
    pub switch_rate: f64,
    pub readout: ReadoutModel,
    /// Period of the square-wave input; `x = +1` on the first half.
    pub signal_period: f64,
    pub feedback: FeedbackMode,
}

impl ContinuousLearner {
    /// Learner with a fast switch (`gamma = 10`), the readout
    /// `kappa = 40, Gamma = 10, r = 20` and a signal period of 4.
    pub fn new(learning_scale: f64, weight_decay: f64, diffusion: f64, beta: f64) -> Result<Self> {
        let learner = Self {
            learning_scale,
            weight_decay,
            diffusion,
            beta,
            switch_rate: 10.0,
            readout: ReadoutModel::with_strength(40.0, 10.0, 20.0)?,
            signal_period: 4.0,
            feedback: FeedbackMode::ClosedForm,
        };
        learner.validate()?;
        Ok(learner)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            self.learning_scale >= 0.0 && self.learning_scale.is_finite(),
            "L",
            self.learning_scale,
            "learning scale must be non-negative",
        )?;
        ensure(
            self.weight_decay > 0.0 && self.weight_decay.is_finite(),
            "gamma_w",
            self.weight_decay,
            "weight decay must be positive",
        )?;
        ensure(
            self.diffusion >= 0.0 && self.diffusion.is_finite(),
            "D",
            self.diffusion,
            "diffusion must be non-negative",
        )?;
        ensure(self.beta > 0.0 && self.beta.is_finite(), "beta", self.beta, "sharpness must be positive")?;
        ensure(
            self.switch_rate > 0.0 && self.switch_rate.is_finite(),
            "gamma",
            self.switch_rate,
            "switch rate must be positive",
        )?;
        ensure(
            self.signal_period > 0.0 && self.signal_period.is_finite(),
            "period",
            self.signal_period,
            "signal period must be positive",
        )
    }

    /// Square-wave training input `x(t)`.
    pub fn signal(&self, t: f64) -> f64 {
        if (t / self.signal_period).fract() < 0.5 {
            1.0
        } else {
            -1.0
        }
    }

    /// `(mu, nu)` of the switch at weight `w` and input `x`.
    pub fn rates(&self, w: f64, x: f64) -> (f64, f64) {
        let p = sigmoid(self.beta * w * x);
        (self.switch_rate * p, self.switch_rate * (1.0 - p))
    }

    /// Closed-form weight drift for input `x`.
    pub fn drift(&self, w: f64, x: f64) -> f64 {
        weight_drift(w, x, self.learning_scale, self.weight_decay, self.beta)
    }

    /// `a = 2 gamma_w / (L beta)`, the parameter of the fixed-point equation.
    pub fn fixed_point_parameter(&self) -> f64 {
        2.0 * self.weight_decay / (self.learning_scale * self.beta)
    }

    /// Stable weight of the noise-free closed-form dynamics, `2 v* / beta`.
    pub fn fixed_point(&self) -> Result<f64> {
        if self.learning_scale == 0.0 {
            return Ok(0.0);
        }
        Ok(2.0 * weight_fixed_points(self.fixed_point_parameter())?[0] / self.beta)
    }
}

/// `-L sech^2(beta w x / 2) - gamma_w w`.
#[inline]
pub fn weight_drift(w: f64, x: f64, learning_scale: f64, weight_decay: f64, beta: f64) -> f64 {
    -learning_scale * sech2(0.5 * beta * w * x) - weight_decay * w
}

/// The published learning potential
/// `gamma_w w^2 / 2 + (2 L / (w x)) tanh(beta w x / 2)`, continued to `L beta`
/// at `w = 0`.
pub fn learning_potential(w: f64, x: f64, learning_scale: f64, weight_decay: f64, beta: f64) -> f64 {
    let z = 0.5 * beta * w * x;
    // tanh(z) / z -> 1 with relative error z^2 / 3.
    let ratio = if z.abs() < 1e-8 { 1.0 } else { z.tanh() / z };
    0.5 * weight_decay * w * w + learning_scale * beta * ratio
}

/// Potential whose negative slope is [`weight_drift`]:
/// `gamma_w w^2 / 2 + (2 L / (beta x)) tanh(beta w x / 2)`.
pub fn drift_potential(w: f64, x: f64, learning_scale: f64, weight_decay: f64, beta: f64) -> f64 {
    0.5 * weight_decay * w * w + 2.0 * learning_scale / (beta * x) * (0.5 * beta * w * x).tanh()
}

/// Roots of `sech^2(v) + a v = 0`. For `a > 0` there is exactly one, and it
/// is negative: the left side rises strictly on `v < 0` and is positive on
/// `v >= 0`.
pub fn weight_fixed_points(a: f64) -> Result<Vec<f64>> {
    ensure(a > 0.0 && a.is_finite(), "a", a, "fixed-point parameter must be positive")?;
    let f = |v: f64| sech2(v) + a * v;
    let lo = -(1.0 + 1.0 / a);
    let root = bisect(f, lo, 0.0, 1e-14).ok_or(Error::InvalidParameter {
        name: "a",
        value: a,
        reason: "fixed point not bracketed",
    })?;
    Ok(alloc::vec![root])
}

/// Which stationary law to tabulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightDensity {
    /// `exp(-2 U / D)` with `U` = [`drift_potential`]; the stationary law of
    /// `dw = -U' dt + sqrt(D) dW`.
    #[default]
    Process,
    /// `exp(-V / (2 D))` with `V` = [`learning_potential`], as published.
    Published,
}

/// Zero-mean Gaussian prior of the feedback-free weight process, variance
/// `D / (2 gamma_w)`.
pub fn ou_prior_density(weight_decay: f64, diffusion: f64, grid: &UniformGrid) -> Result<Vec<f64>> {
    gaussian_density(diffusion / (2.0 * weight_decay), weight_decay, diffusion, grid)
}

/// The published prior `exp(-gamma_w w^2 / (2 D))`, variance `D / gamma_w`.
pub fn published_prior_density(weight_decay: f64, diffusion: f64, grid: &UniformGrid) -> Result<Vec<f64>> {
    gaussian_density(diffusion / weight_decay, weight_decay, diffusion, grid)
}

fn gaussian_density(variance: f64, weight_decay: f64, diffusion: f64, grid: &UniformGrid) -> Result<Vec<f64>> {
    ensure(weight_decay > 0.0, "gamma_w", weight_decay, "weight decay must be positive")?;
    ensure(diffusion > 0.0, "D", diffusion, "diffusion must be positive")?;
    let log_w: Vec<f64> = grid.points().map(|w| -0.5 * w * w / variance).collect();
    Ok(density_from_log_weights(&log_w, grid))
}

/// Stationary weight density for input `x` under the chosen law.
pub fn stationary_weight_density(
    learner: &ContinuousLearner,
    x: f64,
    law: WeightDensity,
    grid: &UniformGrid,
) -> Result<Vec<f64>> {
    let d = learner.diffusion;
    ensure(d > 0.0, "D", d, "stationary density needs positive diffusion")?;
    let (l, g, b) = (learner.learning_scale, learner.weight_decay, learner.beta);
    let log_w: Vec<f64> = grid
        .points()
        .map(|w| match law {
            WeightDensity::Process => -2.0 * drift_potential(w, x, l, g, b) / d,
            WeightDensity::Published => -learning_potential(w, x, l, g, b) / (2.0 * d),
        })
        .collect();
    Ok(density_from_log_weights(&log_w, grid))
}

/// Weight, conditional mean and filtered current as one SDE with two noise
/// sources: the weight's own and the shared readout noise.
#[derive(Debug, Clone, Copy)]
struct CoupledSystem<'a> {
    learner: &'a ContinuousLearner,
}

impl SdeSystem for CoupledSystem<'_> {
    fn dim(&self) -> usize {
        3
    }

    fn noise_dim(&self) -> usize {
        2
    }

    fn drift(&self, t: f64, s: &[f64], out: &mut [f64]) {
        let l = self.learner;
        let (w, n, i) = (s[0], s[1], s[2]);
        let x = l.signal(t);
        let label = -x;
        out[0] = match l.feedback {
            FeedbackMode::ClosedForm => l.drift(w, x),
            FeedbackMode::Conditional => l.learning_scale * x * label * (1.0 - n * n) - l.weight_decay * w,
        };
        let (mu, nu) = l.rates(w, x);
        let m = &l.readout;
        out[1] = m.drift.scale() * (mu * (1.0 - n) - nu * (1.0 + n));
        out[2] = -m.decay_rate() * i + m.r * m.kappa * n;
    }

    fn diffusion(&self, _t: f64, s: &[f64], out: &mut [f64]) {
        let l = self.learner;
        let n = s[1];
        let m = &l.readout;
        let g = m.strength();
        out.copy_from_slice(&[
            l.diffusion.sqrt(),
            0.0,
            0.0,
            -(g / 2.0).sqrt() * (1.0 - n * n),
            0.0,
            m.r * m.kappa * (2.0 / g).sqrt(),
        ]);
    }

    fn constrain(&self, t: f64, s: &mut [f64]) -> Result<()> {
        clamp_unit(t, "n_c", &mut s[1], -1.0, 1.0)
    }
}

/// Start of the observer pair in its noise-free steady state for `w0`.
fn observer_start(learner: &ContinuousLearner, w0: f64) -> (f64, f64) {
    let (mu, nu) = learner.rates(w0, learner.signal(0.0));
    let n0 = (mu - nu) / (mu + nu);
    let m = &learner.readout;
    (n0, m.r * m.kappa * n0 / m.decay_rate())
}

/// Path of `(w, n_c, I_oc, x)` from weight `w0`, with the observer started
/// at its steady state.
pub fn simulate_continuous_not(
    learner: &ContinuousLearner,
    w0: f64,
    dt: f64,
    t_end: f64,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    learner.validate()?;
    let grid = TimeGrid::new(dt, t_end)?;
    let (n0, i0) = observer_start(learner, w0);
    let sys = CoupledSystem { learner };
    let mut tr = Trajectory::with_capacity(&["w", "n_c", "I_oc", "x"], rng.seed(), grid.points());
    let mut failed = None;
    integrate(&sys, &[w0, n0, i0], grid, rng, |t, s| {
        if let Err(e) = tr.push(t, &[s[0], s[1], s[2], learner.signal(t)]) {
            failed.get_or_insert(e);
        }
    })?;
    failed.map_or(Ok(tr), Err)
}

/// Final weight only. In closed-form mode the observer cannot influence the
/// weight, so only the weight equation is integrated.
pub fn final_weight(learner: &ContinuousLearner, w0: f64, dt: f64, t_end: f64, rng: &mut RngStream) -> Result<f64> {
    learner.validate()?;
    let grid = TimeGrid::new(dt, t_end)?;
    match learner.feedback {
        FeedbackMode::ClosedForm => {
            let sys = WeightOnly { learner };
            Ok(integrate(&sys, &[w0], grid, rng, |_, _| {})?[0])
        }
        FeedbackMode::Conditional => {
            let (n0, i0) = observer_start(learner, w0);
            Ok(integrate(&CoupledSystem { learner }, &[w0, n0, i0], grid, rng, |_, _| {})?[0])
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct WeightOnly<'a> {
    learner: &'a ContinuousLearner,
}

impl SdeSystem for WeightOnly<'_> {
    fn dim(&self) -> usize {
        1
    }

    fn drift(&self, t: f64, s: &[f64], out: &mut [f64]) {
        out[0] = self.learner.drift(s[0], self.learner.signal(t));
    }

    fn diffusion(&self, _t: f64, _s: &[f64], out: &mut [f64]) {
        out[0] = self.learner.diffusion.sqrt();
    }
}

/// Final weights of `paths` trajectories started from the feedback-free
/// prior. Path `i` uses stream `i` of `seed`.
pub fn final_weight_ensemble<E: Executor>(
    exec: &E,
    learner: &ContinuousLearner,
    dt: f64,
    t_end: f64,
    paths: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let sd = (learner.diffusion / (2.0 * learner.weight_decay)).sqrt();
    exec.map_streams(seed, paths, |mut rng| {
        let w0 = sd * rng.normal();
        final_weight(learner, w0, dt, t_end, &mut rng)
    })
    .into_iter()
    .collect()
}
