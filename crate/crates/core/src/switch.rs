//! Two-state activation switch driven by time-dependent Markov rates.
//!
//! State `n = -1` jumps up at rate `mu(t)`; state `n = +1` jumps down at rate
//! `nu(t)`. Paths are sampled exactly (no time discretisation) by thinning
//! the merged up/down Poisson process against the schedule's rate ceiling.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::error::{ensure, Error, Result};
use crate::numeric::{adaptive_simpson, sigmoid};
use crate::rng::RngStream;
use crate::trajectory::Trajectory;

/// Rates, energy splitting `E+ - E-` and current state of a switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStateSwitch {
    pub mu: f64,
    pub nu: f64,
    pub e0: f64,
    n: i8,
}

impl TwoStateSwitch {
    pub fn new(mu: f64, nu: f64, e0: f64, n: i8) -> Result<Self> {
        ensure(mu >= 0.0 && mu.is_finite(), "mu", mu, "rate must be finite and non-negative")?;
        ensure(nu >= 0.0 && nu.is_finite(), "nu", nu, "rate must be finite and non-negative")?;
        ensure(n == 1 || n == -1, "n", n as f64, "state must be -1 or +1")?;
        Ok(Self { mu, nu, e0, n })
    }

    pub fn state(&self) -> i8 {
        self.n
    }

    /// Measured energy `E0 (1 + n) / 2`.
    pub fn energy(&self) -> f64 {
        self.e0 * (1.0 + self.n as f64) / 2.0
    }
}

/// Time profile of the switching rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    Constant,
    /// Rates swap linearly over `[0, tau]`; the profile is zero outside.
    LinearRamp {
        tau: f64,
    },
    /// Rates swap along a logistic profile centred on `t0`.
    Sigmoid {
        t0: f64,
        slope: f64,
    },
    /// `nu(t) = nu (1 + a H(t - t0))` with `mu` held constant.
    Step {
        t0: f64,
        a: f64,
    },
    /// Quantum-dot preset swept linearly in gate voltage from `x_start` to
    /// `x_end` over `sweep_time`; the base rates are ignored.
    DotTanh {
        gamma: f64,
        b: f64,
        c: f64,
        x_start: f64,
        x_end: f64,
        sweep_time: f64,
    },
}

/// Base rates `(mu, nu)` together with their time profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSchedule {
    pub kind: ScheduleKind,
    pub mu: f64,
    pub nu: f64,
}

impl RateSchedule {
    pub fn new(kind: ScheduleKind, mu: f64, nu: f64) -> Result<Self> {
        ensure(mu >= 0.0 && mu.is_finite(), "mu", mu, "rate must be finite and non-negative")?;
        ensure(nu >= 0.0 && nu.is_finite(), "nu", nu, "rate must be finite and non-negative")?;
        match kind {
            ScheduleKind::Constant => {}
            ScheduleKind::LinearRamp { tau } => ensure(tau > 0.0, "tau", tau, "ramp duration must be positive")?,
            ScheduleKind::Sigmoid { slope, .. } => {
                ensure(slope > 0.0, "slope", slope, "sigmoid slope must be positive")?
            }
            ScheduleKind::Step { a, .. } => ensure(a >= -1.0, "a", a, "step must keep the rate non-negative")?,
            ScheduleKind::DotTanh { gamma, sweep_time, .. } => {
                ensure(gamma > 0.0, "gamma", gamma, "rate scale must be positive")?;
                ensure(sweep_time > 0.0, "sweep_time", sweep_time, "sweep duration must be positive")?;
            }
        }
        Ok(Self { kind, mu, nu })
    }

    pub fn constant(mu: f64, nu: f64) -> Result<Self> {
        Self::new(ScheduleKind::Constant, mu, nu)
    }

    /// Swap profile `f(t)` in `[0, 1]`; zero for kinds without a swap.
    pub fn profile(&self, t: f64) -> f64 {
        match self.kind {
            ScheduleKind::LinearRamp { tau } if (0.0..=tau).contains(&t) => t / tau,
            ScheduleKind::Sigmoid { t0, slope } => sigmoid(slope * (t - t0)),
            _ => 0.0,
        }
    }

    /// `(mu(t), nu(t))`.
    pub fn rates(&self, t: f64) -> (f64, f64) {
        match self.kind {
            ScheduleKind::Constant => (self.mu, self.nu),
            ScheduleKind::LinearRamp { .. } | ScheduleKind::Sigmoid { .. } => {
                let f = self.profile(t);
                let d = f * (self.nu - self.mu);
                (self.mu + d, self.nu - d)
            }
            ScheduleKind::Step { t0, a } => {
                let on = if t >= t0 { 1.0 } else { 0.0 };
                (self.mu, self.nu * (1.0 + a * on))
            }
            ScheduleKind::DotTanh { gamma, b, c, x_start, x_end, sweep_time } => {
                let s = (t / sweep_time).clamp(0.0, 1.0);
                dot_rate_preset(gamma, b, c, x_start + s * (x_end - x_start))
            }
        }
    }

    /// Upper bound on `mu(t) + nu(t)` over all `t`.
    pub fn ceiling(&self) -> f64 {
        match self.kind {
            ScheduleKind::Constant | ScheduleKind::LinearRamp { .. } | ScheduleKind::Sigmoid { .. } => {
                self.mu + self.nu
            }
            ScheduleKind::Step { a, .. } => self.mu + self.nu * (1.0 + a.max(0.0)),
            ScheduleKind::DotTanh { gamma, .. } => 2.0 * gamma,
        }
    }
}

/// Rates of the quantum-dot preset at gate voltage `x`:
/// `mu = gamma (1 + tanh(b x + c)) / 2`, `nu = gamma`.
pub fn dot_rate_preset(gamma: f64, b: f64, c: f64, x: f64) -> (f64, f64) {
    (gamma * (1.0 + (b * x + c).tanh()) / 2.0, gamma)
}

/// Stationary `(p_minus, p_plus)` of constant rates.
pub fn steady_state(mu: f64, nu: f64) -> Result<(f64, f64)> {
    let s = mu + nu;
    ensure(mu >= 0.0 && nu >= 0.0 && s > 0.0, "mu + nu", s, "steady state needs a positive total rate")?;
    Ok((nu / s, mu / s))
}

/// Stationary mean of `n`, `(mu - nu) / (mu + nu)`.
pub fn mean_state(mu: f64, nu: f64) -> Result<f64> {
    let (pm, pp) = steady_state(mu, nu)?;
    Ok(pp - pm)
}

/// Rates `(nu e^{-beta E0}, nu)` whose stationary state is thermal at inverse
/// temperature `beta`.
pub fn thermal_rates(nu: f64, beta: f64, e0: f64) -> (f64, f64) {
    (nu * (-beta * e0).exp(), nu)
}

/// `(p_minus, p_plus)` at `t = tau` after a linear swap ramp, starting from
/// the steady state of `(mu, nu)`.
pub fn ramp_propagate(mu: f64, nu: f64, tau: f64) -> Result<(f64, f64)> {
    let (_, _) = steady_state(mu, nu)?;
    ensure(tau > 0.0, "tau", tau, "ramp duration must be positive")?;
    let s = mu + nu;
    let p_minus = mu / s + (nu - mu) / (tau * s * s) * (1.0 - (-s * tau).exp());
    Ok((p_minus, 1.0 - p_minus))
}

/// Outcome of a swap action classified by the last Poisson event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SwapOutcome {
    /// No event of either process in the window.
    NoSwitch,
    /// Last event was an up event (`s = 1`).
    Up,
    /// Last event was a down event (`s = -1`).
    Down,
}

impl SwapOutcome {
    pub fn value(self) -> i8 {
        match self {
            SwapOutcome::NoSwitch => 0,
            SwapOutcome::Up => 1,
            SwapOutcome::Down => -1,
        }
    }
}

/// Closed-form outcome probabilities of a linear swap ramp of length `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapStatistics {
    pub no_switch: f64,
    pub up: f64,
    pub down: f64,
}

impl SwapStatistics {
    pub fn total(&self) -> f64 {
        self.no_switch + self.up + self.down
    }
}

pub fn swap_statistics(mu: f64, nu: f64, tau: f64) -> Result<SwapStatistics> {
    let (_, _) = steady_state(mu, nu)?;
    ensure(tau > 0.0, "tau", tau, "ramp duration must be positive")?;
    let s = mu + nu;
    let eta = (-s * tau).exp();
    let drift = (nu - mu) / s * (1.0 - (1.0 - eta) / (tau * s));
    Ok(SwapStatistics { no_switch: eta, up: mu / s * (1.0 - eta) + drift, down: nu / s * (1.0 - eta) - drift })
}

/// Mean work `E0 (nu - mu) / (nu + mu)` of a complete, slow-enough swap.
pub fn mean_work(mu: f64, nu: f64, e0: f64) -> Result<f64> {
    let (_, _) = steady_state(mu, nu)?;
    Ok(e0 * (nu - mu) / (nu + mu))
}

/// Mean energy change of a linear swap ramp of finite length `tau` started
/// from the steady state; tends to [`mean_work`] as `(mu + nu) tau` grows.
pub fn ramp_energy_change(mu: f64, nu: f64, e0: f64, tau: f64) -> Result<f64> {
    let (_, p_plus_0) = steady_state(mu, nu)?;
    let (_, p_plus_tau) = ramp_propagate(mu, nu, tau)?;
    Ok(e0 * (p_plus_tau - p_plus_0))
}

/// Survival `exp(-int_0^t rate)` of the initial state.
pub fn wait_time_survival<R: Fn(f64) -> f64>(rate: R, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let integral = adaptive_simpson(&rate, 0.0, t, 1e-12);
    (-integral.max(0.0)).exp().min(1.0)
}

/// One Poisson event of a sampled path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub t: f64,
    /// `true` for an up (`dN+`) event, `false` for a down (`dN-`) event.
    pub up: bool,
    /// Whether the event changed the state.
    pub flipped: bool,
}

/// A sampled switch path: initial state and every Poisson event on
/// `[0, t_end]`, including those that leave the state unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpPath {
    pub n0: i8,
    pub t_end: f64,
    pub events: Vec<JumpEvent>,
}

impl JumpPath {
    pub fn final_state(&self) -> i8 {
        self.state_at(self.t_end)
    }

    pub fn state_at(&self, t: f64) -> i8 {
        self.events.iter().take_while(|e| e.t <= t).filter(|e| e.flipped).fold(self.n0, |n, _| -n)
    }

    pub fn flips(&self) -> impl Iterator<Item = &JumpEvent> {
        self.events.iter().filter(|e| e.flipped)
    }

    pub fn outcome(&self) -> SwapOutcome {
        match self.events.last() {
            None => SwapOutcome::NoSwitch,
            Some(e) if e.up => SwapOutcome::Up,
            Some(_) => SwapOutcome::Down,
        }
    }

    /// Realised energy change: each flip contributes `+E0` upward and `-E0`
    /// downward.
    pub fn energy_change(&self, e0: f64) -> f64 {
        e0 * (self.final_state() - self.n0) as f64 / 2.0
    }

    /// Time spent in `n = +1` and in `n = -1`.
    pub fn occupation(&self) -> (f64, f64) {
        let (mut up, mut down) = (0.0, 0.0);
        let mut n = self.n0;
        let mut last = 0.0;
        for e in self.flips().chain(core::iter::once(&JumpEvent { t: self.t_end, up: false, flipped: false })) {
            if n > 0 {
                up += e.t - last;
            } else {
                down += e.t - last;
            }
            last = e.t;
            n = -n;
        }
        (up, down)
    }

    /// Piecewise-constant `n(t)` sampled at `0`, every flip and `t_end`.
    pub fn trajectory(&self, seed: crate::StreamSeed) -> Trajectory {
        let mut tr = Trajectory::new(&["n"], seed);
        let mut n = self.n0;
        let _ = tr.push(0.0, &[n as f64]);
        for e in self.flips() {
            n = -n;
            let _ = tr.push(e.t, &[n as f64]);
        }
        let _ = tr.push(self.t_end, &[n as f64]);
        tr
    }
}

/// Samples every up and down event on `[0, t_end]` from the initial state
/// of `switch`. Up events set `n = +1`, down events set `n = -1`.
pub fn simulate_path(
    switch: &TwoStateSwitch,
    schedule: &RateSchedule,
    t_end: f64,
    rng: &mut RngStream,
) -> Result<JumpPath> {
    ensure(t_end > 0.0 && t_end.is_finite(), "t_end", t_end, "duration must be positive and finite")?;
    let ceiling = schedule.ceiling();
    let mut events = Vec::new();
    let mut n = switch.n;
    let mut t = 0.0;
    if ceiling > 0.0 {
        loop {
            t += rng.exp1() / ceiling;
            if t > t_end {
                break;
            }
            let (mu, nu) = schedule.rates(t);
            if mu + nu > ceiling * (1.0 + 1e-12) {
                return Err(Error::RateAboveCeiling { t, rate: mu + nu, ceiling });
            }
            let u = rng.uniform() * ceiling;
            let up = if u < mu {
                true
            } else if u < mu + nu {
                false
            } else {
                continue;
            };
            let target = if up { 1 } else { -1 };
            let flipped = n != target;
            n = target;
            events.push(JumpEvent { t, up, flipped });
        }
    }
    Ok(JumpPath { n0: switch.n, t_end, events })
}

/// Draws an initial state from the steady state of `(mu, nu)`.
pub fn sample_steady_state(mu: f64, nu: f64, rng: &mut RngStream) -> Result<i8> {
    let (_, p_plus) = steady_state(mu, nu)?;
    Ok(if rng.bernoulli(p_plus) { 1 } else { -1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{Executor, Sequential};
    use crate::stats::{binomial_stderr, Moments};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// RK4 solution of the master equation for `p_plus` under `schedule`.
    fn master_equation_p_plus(schedule: &RateSchedule, p0: f64, t_end: f64, steps: usize) -> f64 {
        let h = t_end / steps as f64;
        let rhs = |t: f64, p: f64| {
            let (mu, nu) = schedule.rates(t);
            mu * (1.0 - p) - nu * p
        };
        let mut p = p0;
        for k in 0..steps {
            let t = k as f64 * h;
            let k1 = rhs(t, p);
            let k2 = rhs(t + h / 2.0, p + h * k1 / 2.0);
            let k3 = rhs(t + h / 2.0, p + h * k2 / 2.0);
            let k4 = rhs(t + h, p + h * k3);
            p += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        }
        p
    }

    #[test]
    fn steady_state_examples() {
        assert_eq!(steady_state(2.0, 2.0).unwrap(), (0.5, 0.5));
        assert_eq!(steady_state(1.0, 3.0).unwrap(), (0.75, 0.25));
        assert_eq!(steady_state(0.0, 4.0).unwrap(), (1.0, 0.0));
        assert!(steady_state(0.0, 0.0).is_err());
    }

    #[test]
    fn ramp_propagate_matches_master_equation() {
        for &(mu, nu, tau) in &[(1.0, 3.0, 2.0), (0.5, 0.5, 1.0), (1.0, 10.0, 0.3), (2.0, 0.1, 5.0)] {
            let sched = RateSchedule::new(ScheduleKind::LinearRamp { tau }, mu, nu).unwrap();
            let oracle = master_equation_p_plus(&sched, mu / (mu + nu), tau, 20_000);
            let (pm, pp) = ramp_propagate(mu, nu, tau).unwrap();
            assert!(close(pp, oracle, 1e-10), "{mu} {nu} {tau}: {pp} vs {oracle}");
            assert!(close(pm + pp, 1.0, 1e-12));
        }
    }

    #[test]
    fn ramp_propagate_limits() {
        let (pm, _) = ramp_propagate(1.0, 3.0, 1e4).unwrap();
        assert!(close(pm, 0.25, 1e-4));
        let (pm, _) = ramp_propagate(1.0, 3.0, 1e-9).unwrap();
        assert!(close(pm, 0.75, 1e-6));
    }

    #[test]
    fn ramp_propagate_matches_monte_carlo() {
        let (mu, nu, tau) = (1.0, 3.0, 2.0);
        let sched = RateSchedule::new(ScheduleKind::LinearRamp { tau }, mu, nu).unwrap();
        let n = 100_000;
        let ups = Sequential.map_streams(21, n, |mut rng| {
            let n0 = sample_steady_state(mu, nu, &mut rng).unwrap();
            let sw = TwoStateSwitch::new(mu, nu, 1.0, n0).unwrap();
            (simulate_path(&sw, &sched, tau, &mut rng).unwrap().final_state() == 1) as u32 as f64
        });
        let p_hat = Moments::of(&ups).mean;
        let (_, pp) = ramp_propagate(mu, nu, tau).unwrap();
        assert!((p_hat - pp).abs() < 3.0 * binomial_stderr(pp, n), "{p_hat} vs {pp}");
    }

    #[test]
    fn swap_statistics_examples() {
        let s = swap_statistics(1.0, 1.0, 1.0).unwrap();
        assert!(close(s.no_switch, (-2.0f64).exp(), 1e-15));
        assert!(close(s.no_switch, 0.1353, 1e-4));
        assert!(close(s.up, (1.0 - s.no_switch) / 2.0, 1e-15));
        assert!(close(s.down, s.up, 1e-15));
        assert!(swap_statistics(1.0, 3.0, 1e3).unwrap().no_switch < 1e-300);
    }

    #[test]
    fn swap_statistics_match_last_event_frequencies() {
        let (mu, nu, tau) = (1.0, 3.0, 0.5);
        let sched = RateSchedule::new(ScheduleKind::LinearRamp { tau }, mu, nu).unwrap();
        let n = 100_000;
        let outcomes = Sequential.map_streams(5, n, |mut rng| {
            let sw = TwoStateSwitch::new(mu, nu, 1.0, 1).unwrap();
            simulate_path(&sw, &sched, tau, &mut rng).unwrap().outcome()
        });
        let s = swap_statistics(mu, nu, tau).unwrap();
        for (kind, p) in [(SwapOutcome::NoSwitch, s.no_switch), (SwapOutcome::Up, s.up), (SwapOutcome::Down, s.down)] {
            let f = outcomes.iter().filter(|&&o| o == kind).count() as f64 / n as f64;
            assert!((f - p).abs() < 3.0 * binomial_stderr(p, n), "{kind:?}: {f} vs {p}");
        }
    }

    #[test]
    fn mean_work_examples() {
        assert_eq!(mean_work(2.0, 2.0, 5.0).unwrap(), 0.0);
        assert!(close(mean_work(1e-6, 1.0, 3.0).unwrap(), 3.0, 1e-5));
        assert!(close(mean_work(1.0, 3.0, 2.0).unwrap(), 1.0, 1e-15));
    }

    #[test]
    fn ramp_energy_change_tends_to_mean_work() {
        let slow = ramp_energy_change(1.0, 3.0, 2.0, 1e5).unwrap();
        assert!(close(slow, 1.0, 1e-4));
        // At (mu + nu) tau = 20 the finite-ramp deficit is (1 - eta) / 20.
        let finite = ramp_energy_change(1.0, 3.0, 2.0, 5.0).unwrap();
        assert!(close(finite, 1.0 * (1.0 - (1.0 - (-20.0f64).exp()) / 20.0), 1e-12));
    }

    #[test]
    fn wait_time_survival_examples() {
        assert_eq!(wait_time_survival(|_| 0.0, 7.0), 1.0);
        for t in [0.5, 5.0, 20.0, 60.0] {
            let s = wait_time_survival(|_| 0.1, t);
            assert!(((s - (-0.1 * t).exp()) / (-0.1 * t).exp()).abs() < 1e-6);
        }
        let step = RateSchedule::new(ScheduleKind::Step { t0: 5.0, a: 20.0 }, 0.0, 0.1).unwrap();
        let rate = |t: f64| step.rates(t).1;
        let before = wait_time_survival(rate, 4.9);
        let at = wait_time_survival(rate, 5.0);
        let after = wait_time_survival(rate, 5.1);
        // Slope changes by the step factor 1 + a across t0.
        let slope_before = (at.ln() - before.ln()) / 0.1;
        let slope_after = (after.ln() - at.ln()) / 0.1;
        assert!(close(slope_before, -0.1, 1e-6));
        assert!(close(slope_after, -2.1, 1e-6));
    }

    #[test]
    fn step_wait_times_follow_survival() {
        let step = RateSchedule::new(ScheduleKind::Step { t0: 5.0, a: 20.0 }, 0.0, 0.1).unwrap();
        let n = 50_000;
        let waits = Sequential.map_streams(8, n, |mut rng| {
            let sw = TwoStateSwitch::new(0.0, 0.1, 1.0, 1).unwrap();
            let path = simulate_path(&sw, &step, 50.0, &mut rng).unwrap();
            let first = path.flips().next().map(|e| e.t);
            first.unwrap_or(f64::INFINITY)
        });
        for t in [2.0, 5.0, 5.2, 6.0] {
            let s = wait_time_survival(|u| step.rates(u).1, t);
            let f = waits.iter().filter(|&&w| w > t).count() as f64 / n as f64;
            assert!((f - s).abs() < 3.0 * binomial_stderr(s, n) + 1e-9, "t={t}: {f} vs {s}");
        }
    }

    #[test]
    fn frozen_rates_keep_state() {
        let sw = TwoStateSwitch::new(0.0, 0.0, 1.0, -1).unwrap();
        let sched = RateSchedule::constant(0.0, 0.0).unwrap();
        let mut rng = RngStream::new(1, 0);
        let path = simulate_path(&sw, &sched, 100.0, &mut rng).unwrap();
        assert!(path.events.is_empty());
        assert_eq!(path.final_state(), -1);
        let tr = path.trajectory(rng.seed());
        assert_eq!(tr.channel("n").unwrap(), &[-1.0, -1.0][..]);
    }

    #[test]
    fn constant_rate_occupation_and_jump_counts() {
        let (mu, nu) = (1.0, 3.0);
        let sched = RateSchedule::constant(mu, nu).unwrap();
        let sw = TwoStateSwitch::new(mu, nu, 1.0, 1).unwrap();
        let t_end = 20_000.0;
        let mut rng = RngStream::new(4, 0);
        let path = simulate_path(&sw, &sched, t_end, &mut rng).unwrap();
        let (up_time, down_time) = path.occupation();
        assert!(close(up_time + down_time, t_end, 1e-6));
        // Correlation time 1/(mu+nu): about t_end (mu+nu)/2 independent blocks.
        let p = mu / (mu + nu);
        let sigma = (2.0 * p * (1.0 - p) / (t_end * (mu + nu))).sqrt();
        assert!((up_time / t_end - p).abs() < 3.0 * sigma);
        let ups = path.flips().filter(|e| e.up).count() as f64;
        let downs = path.flips().filter(|e| !e.up).count() as f64;
        assert!((ups - mu * down_time).abs() < 3.0 * (mu * down_time).sqrt());
        assert!((downs - nu * up_time).abs() < 3.0 * (nu * up_time).sqrt());
    }

    #[test]
    fn sigmoid_swap_mean_crosses_zero_near_centre() {
        let (mu, nu, t0) = (1.0, 10.0, 5.0);
        let sched = RateSchedule::new(ScheduleKind::Sigmoid { t0, slope: 2.0 }, mu, nu).unwrap();
        let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
        let paths = Sequential.map_streams(3, 4000, |mut rng| {
            let n0 = sample_steady_state(mu, nu, &mut rng).unwrap();
            let sw = TwoStateSwitch::new(mu, nu, 1.0, n0).unwrap();
            simulate_path(&sw, &sched, 10.0, &mut rng).unwrap()
        });
        let mean: Vec<f64> = times
            .iter()
            .map(|&t| paths.iter().map(|p| p.state_at(t) as f64).sum::<f64>() / paths.len() as f64)
            .collect();
        assert!(mean[0] < -0.7 && mean[100] > 0.7);
        let crossing = times[mean.iter().position(|&m| m > 0.0).unwrap()];
        assert!((crossing - t0).abs() < 0.5, "crossing {crossing}");
    }

    #[test]
    fn thermal_mean_state_is_minus_tanh_half() {
        for &(beta, e0) in &[(1.0, 0.5), (2.0, 1.3), (0.1, 4.0)] {
            let (mu, nu) = thermal_rates(2.0, beta, e0);
            let nbar = mean_state(mu, nu).unwrap();
            assert!(close(nbar, -(beta * e0 / 2.0).tanh(), 1e-14));
        }
    }

    #[test]
    fn dot_preset_examples() {
        let (mu, nu) = dot_rate_preset(2.0, 1.0, -0.5, 0.5);
        assert!(close(mu, 1.0, 1e-15) && nu == 2.0);
        assert!(close(steady_state(mu, nu).unwrap().1, 1.0 / 3.0, 1e-15));
        let (mu, nu) = dot_rate_preset(2.0, 1.0, 0.0, -50.0);
        assert!(steady_state(mu, nu).unwrap().1 < 1e-20);
        let (mu, nu) = dot_rate_preset(2.0, 1.0, 0.0, 50.0);
        assert!(close(steady_state(mu, nu).unwrap().1, 0.5, 1e-15));
    }
}
