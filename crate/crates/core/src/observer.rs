//! Partially observed switches: Gaussian readout with Bayes updates, the
//! continuous-measurement conditional mean with its filtered current, and the
//! quantum-dot / point-contact pair.

use alloc::vec;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::error::{ensure, Error, Result};
use crate::numeric::sigmoid;
use crate::rng::RngStream;
use crate::sde::{integrate, SdeSystem, TimeGrid};
use crate::trajectory::Trajectory;

/// Readout `x ~ N(chi n, Delta)` of a single switch sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianReadout {
    pub chi: f64,
    pub delta: f64,
}

impl GaussianReadout {
    pub fn new(chi: f64, delta: f64) -> Result<Self> {
        ensure(delta > 0.0, "Delta", delta, "readout variance must be positive")?;
        Ok(Self { chi, delta })
    }

    /// Posterior `(p_minus, p_plus)` after observing `x`.
    pub fn bayes_update(&self, prior: (f64, f64), x: f64) -> Result<(f64, f64)> {
        bayes_update(prior, x, self.chi, self.delta)
    }
}

/// Posterior `(p_minus, p_plus)` given prior `(p_minus, p_plus)` and one
/// readout `x`. The odds ratio is multiplied by `exp(2 chi x / Delta)`.
pub fn bayes_update(prior: (f64, f64), x: f64, chi: f64, delta: f64) -> Result<(f64, f64)> {
    let (pm, pp) = prior;
    ensure(delta > 0.0, "Delta", delta, "readout variance must be positive")?;
    ensure(pm >= 0.0 && pp >= 0.0, "prior", pm.min(pp), "probabilities must be non-negative")?;
    ensure((pm + pp - 1.0).abs() < 1e-9, "prior", pm + pp, "prior must sum to one")?;
    if pm == 0.0 || pp == 0.0 {
        return Ok(prior);
    }
    let log_odds = (pp / pm).ln() + 2.0 * chi * x / delta;
    let post_plus = sigmoid(log_odds);
    Ok((1.0 - post_plus, post_plus))
}

/// Mean `chi (2 p+ - 1)` and variance `Delta + 4 chi^2 p+ (1 - p+)` of the
/// readout.
pub fn readout_stats(p_plus: f64, chi: f64, delta: f64) -> Result<(f64, f64)> {
    ensure((0.0..=1.0).contains(&p_plus), "p_plus", p_plus, "probability must lie in [0, 1]")?;
    Ok((chi * (2.0 * p_plus - 1.0), delta + 4.0 * chi * chi * p_plus * (1.0 - p_plus)))
}

/// Decay rate of the filtered current.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterDecay {
    /// `-r^2 I dt`, as in the filtered-current SDE.
    #[default]
    Squared,
    /// `-r I dt`, as implied by the exponential response kernel.
    Linear,
}

/// Switching drift of the conditional mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackgroundDrift {
    /// `mu (1 - n) / 2 - nu (1 + n) / 2`, relaxing at `(mu + nu) / 2`.
    #[default]
    Halved,
    /// `mu (1 - n) - nu (1 + n)`, the master-equation rate `mu + nu`.
    MasterEquation,
}

impl BackgroundDrift {
    pub(crate) fn scale(self) -> f64 {
        match self {
            BackgroundDrift::Halved => 0.5,
            BackgroundDrift::MasterEquation => 1.0,
        }
    }
}

/// Continuous measurement of a switch: coupling `kappa`, measurement rate
/// `gamma`, strength `Gamma = 2 kappa^2 / gamma` and filter rate `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutModel {
    pub kappa: f64,
    pub gamma: f64,
    pub r: f64,
    pub decay: FilterDecay,
    pub drift: BackgroundDrift,
}

impl ReadoutModel {
    pub fn new(kappa: f64, gamma: f64, r: f64) -> Result<Self> {
        ensure(kappa > 0.0 && kappa.is_finite(), "kappa", kappa, "coupling must be positive")?;
        ensure(gamma > 0.0 && gamma.is_finite(), "gamma", gamma, "measurement rate must be positive")?;
        ensure(r > 0.0 && r.is_finite(), "r", r, "filter rate must be positive")?;
        Ok(Self { kappa, gamma, r, decay: FilterDecay::default(), drift: BackgroundDrift::default() })
    }

    /// Model with measurement strength `Gamma`, i.e. `gamma = 2 kappa^2 / Gamma`.
    pub fn with_strength(kappa: f64, strength: f64, r: f64) -> Result<Self> {
        ensure(strength > 0.0 && strength.is_finite(), "Gamma", strength, "measurement strength must be positive")?;
        Self::new(kappa, 2.0 * kappa * kappa / strength, r)
    }

    /// `Gamma = 2 kappa^2 / gamma`.
    pub fn strength(&self) -> f64 {
        2.0 * self.kappa * self.kappa / self.gamma
    }

    pub fn decay_rate(&self) -> f64 {
        match self.decay {
            FilterDecay::Squared => self.r * self.r,
            FilterDecay::Linear => self.r,
        }
    }

    /// Stationary variance of the filtered current for a frozen state.
    pub fn frozen_current_variance(&self) -> f64 {
        let amp = self.r * self.kappa;
        amp * amp * (2.0 / self.strength()) / (2.0 * self.decay_rate())
    }
}

/// Values within this distance outside `[-1, 1]` are clamped back; larger
/// excursions reject the step.
const BOUND_TOLERANCE: f64 = 1e-6;
const CLAMP: f64 = 1.0 - 1e-12;

/// Conditional mean `n_c` and filtered current `I_oc`, both driven by the
/// same Wiener process. `rates(t)` gives `(mu, nu)`.
#[derive(Debug, Clone, Copy)]
pub struct ConditionalObserver<F> {
    pub model: ReadoutModel,
    pub rates: F,
}

impl<F: Fn(f64) -> (f64, f64)> SdeSystem for ConditionalObserver<F> {
    fn dim(&self) -> usize {
        2
    }

    fn noise_dim(&self) -> usize {
        1
    }

    fn drift(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let (mu, nu) = (self.rates)(t);
        let n = x[0];
        let m = &self.model;
        out[0] = m.drift.scale() * (mu * (1.0 - n) - nu * (1.0 + n));
        out[1] = -m.decay_rate() * x[1] + m.r * m.kappa * n;
    }

    fn diffusion(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        let n = x[0];
        let m = &self.model;
        let g = m.strength();
        out[0] = -(g / 2.0).sqrt() * (1.0 - n * n);
        out[1] = m.r * m.kappa * (2.0 / g).sqrt();
    }

    fn constrain(&self, t: f64, x: &mut [f64]) -> Result<()> {
        clamp_unit(t, "n_c", &mut x[0], -1.0, 1.0)
    }
}

pub(crate) fn clamp_unit(t: f64, variable: &'static str, v: &mut f64, lo: f64, hi: f64) -> Result<()> {
    if *v < lo - BOUND_TOLERANCE || *v > hi + BOUND_TOLERANCE {
        return Err(Error::StepRejected { t, variable, value: *v, lo, hi });
    }
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo) * CLAMP;
    *v = v.clamp(mid - half, mid + half);
    Ok(())
}

/// Path of `(n_c, I_oc)` under constant rates from `(n0, i0)`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_conditional(
    mu: f64,
    nu: f64,
    model: &ReadoutModel,
    n0: f64,
    i0: f64,
    t_end: f64,
    dt: f64,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    ensure(mu >= 0.0 && nu >= 0.0, "mu, nu", mu.min(nu), "rates must be non-negative")?;
    ensure(n0.abs() <= 1.0, "n0", n0, "conditional mean must lie in [-1, 1]")?;
    let grid = TimeGrid::new(dt, t_end)?;
    let sys = ConditionalObserver { model: *model, rates: |_| (mu, nu) };
    crate::sde::integrate_recorded(&sys, &[n0, i0], grid, &["n_c", "I_oc"], rng)
}

/// Mean of `n_c` at time `t` under constant rates: the solution of the
/// noise-free conditional equation.
pub fn expected_conditional_mean(mu: f64, nu: f64, n0: f64, t: f64, drift: BackgroundDrift) -> f64 {
    let s = mu + nu;
    if s == 0.0 {
        return n0;
    }
    let target = (mu - nu) / s;
    target + (n0 - target) * (-drift.scale() * s * t).exp()
}

/// Dot tunnelling rates and point-contact readout parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DotQpcModel {
    pub gamma_in: f64,
    pub gamma_out: f64,
    pub chi: f64,
    pub eta: f64,
    pub epsilon: f64,
}

impl DotQpcModel {
    pub fn new(gamma_in: f64, gamma_out: f64, chi: f64, eta: f64, epsilon: f64) -> Result<Self> {
        ensure(gamma_in >= 0.0, "Gamma_in", gamma_in, "rate must be non-negative")?;
        ensure(gamma_out >= 0.0, "Gamma_out", gamma_out, "rate must be non-negative")?;
        ensure(eta > 0.0 && eta <= 1.0, "eta", eta, "efficiency must lie in (0, 1]")?;
        ensure((0.0..=1.0).contains(&epsilon), "epsilon", epsilon, "constriction must lie in [0, 1]")?;
        ensure(chi.is_finite(), "chi", chi, "coupling must be finite")?;
        Ok(Self { gamma_in, gamma_out, chi, eta, epsilon })
    }

    /// Stationary occupation `Gamma_in / (Gamma_in + Gamma_out)`.
    pub fn steady_occupation(&self) -> f64 {
        self.gamma_in / (self.gamma_in + self.gamma_out)
    }

    /// Mean occupation at `t` from `s0`, solving the rate equation.
    pub fn mean_occupation(&self, s0: f64, t: f64) -> f64 {
        let total = self.gamma_in + self.gamma_out;
        if total == 0.0 {
            return s0;
        }
        let ss = self.steady_occupation();
        ss + (s0 - ss) * (-total * t).exp()
    }
}

/// Path of the conditional occupation `s_c` and the point-contact current
/// `I_c`. Each `I_c` sample is the current averaged over the step ending at
/// that time; the initial sample is its noise-free mean.
pub fn simulate_dot_qpc(model: &DotQpcModel, s0: f64, t_end: f64, dt: f64, rng: &mut RngStream) -> Result<Trajectory> {
    ensure((0.0..=1.0).contains(&s0), "s0", s0, "occupation must lie in [0, 1]")?;
    let grid = TimeGrid::new(dt, t_end)?;
    let mut tr = Trajectory::with_capacity(&["s_c", "I_c"], rng.seed(), grid.points());
    let m = *model;
    let mean_current = |s: f64| m.eta * (1.0 - 2.0 * m.epsilon * s);
    let mut s = s0;
    tr.push(0.0, &[s, mean_current(s)])?;
    for k in 0..grid.steps() {
        let t = grid.time(k);
        let h = grid.step_len(k);
        let dw = rng.wiener(h);
        let current = mean_current(s) + m.eta.sqrt() * dw / h;
        s += (m.gamma_in * (1.0 - s) - m.gamma_out * s) * h - 2.0 * m.chi * s * (1.0 - s) * dw;
        if !s.is_finite() {
            return Err(Error::NonFinite { t, state: vec![s] });
        }
        let t_next = grid.time(k + 1);
        clamp_unit(t_next, "s_c", &mut s, 0.0, 1.0)?;
        tr.push(t_next, &[s, current])?;
    }
    Ok(tr)
}

/// Runs the conditional pair under `rates(t)` and reports every grid point
/// to `observe`.
pub fn integrate_conditional<F, O>(
    model: &ReadoutModel,
    rates: F,
    n0: f64,
    i0: f64,
    grid: TimeGrid,
    rng: &mut RngStream,
    observe: O,
) -> Result<[f64; 2]>
where
    F: Fn(f64) -> (f64, f64),
    O: FnMut(f64, &[f64]),
{
    let sys = ConditionalObserver { model: *model, rates };
    let x = integrate(&sys, &[n0, i0], grid, rng, observe)?;
    Ok([x[0], x[1]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{Executor, Sequential};
    use crate::stats::Moments;
    use alloc::vec::Vec;

    /// Wraps a system with its diffusion switched off.
    struct Noiseless<S>(S);

    impl<S: SdeSystem> SdeSystem for Noiseless<S> {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn noise_dim(&self) -> usize {
            self.0.noise_dim()
        }
        fn drift(&self, t: f64, x: &[f64], out: &mut [f64]) {
            self.0.drift(t, x, out)
        }
        fn diffusion(&self, _t: f64, _x: &[f64], out: &mut [f64]) {
            out.fill(0.0)
        }
        fn constrain(&self, t: f64, x: &mut [f64]) -> Result<()> {
            self.0.constrain(t, x)
        }
    }

    #[test]
    fn bayes_update_examples() {
        let post = bayes_update((0.3, 0.7), 1.7, 1.0, 1e300).unwrap();
        assert!((post.1 - 0.7).abs() < 1e-15);
        let chi = 1.3;
        let post = bayes_update((0.5, 0.5), chi, chi, chi * chi).unwrap();
        assert!((post.1 / post.0 - 2f64.exp()).abs() < 1e-12);
        assert_eq!(bayes_update((0.0, 1.0), -50.0, 1.0, 0.1).unwrap(), (0.0, 1.0));
        assert!(bayes_update((0.5, 0.5), 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn bayes_updates_commute() {
        let xs = [0.3, -1.2, 2.0, 0.05];
        let forward = xs.iter().fold((0.6, 0.4), |p, &x| bayes_update(p, x, 0.8, 1.5).unwrap());
        let backward = xs.iter().rev().fold((0.6, 0.4), |p, &x| bayes_update(p, x, 0.8, 1.5).unwrap());
        assert!((forward.1 - backward.1).abs() < 1e-14);
    }

    #[test]
    fn bayes_matches_direct_gaussian_likelihoods() {
        let (chi, delta, x, prior) = (0.7, 0.9, 0.4, (0.35, 0.65));
        let like = |n: f64| (-(x - chi * n) * (x - chi * n) / (2.0 * delta)).exp();
        let z = like(-1.0) * prior.0 + like(1.0) * prior.1;
        let post = bayes_update(prior, x, chi, delta).unwrap();
        assert!((post.1 - like(1.0) * prior.1 / z).abs() < 1e-14);
    }

    #[test]
    fn readout_stats_examples() {
        assert_eq!(readout_stats(1.0, 2.0, 0.5).unwrap(), (2.0, 0.5));
        assert_eq!(readout_stats(0.5, 1.0, 2.0).unwrap(), (0.0, 3.0));
        let v = |p| readout_stats(p, 1.0, 1.0).unwrap().1;
        assert!(v(0.0) < v(0.3) && v(1.0) < v(0.7) && v(0.5) > v(0.4));
    }

    #[test]
    fn noise_off_relaxation_matches_ode() {
        let model = ReadoutModel::with_strength(40.0, 10.0, 20.0).unwrap();
        for drift in [BackgroundDrift::Halved, BackgroundDrift::MasterEquation] {
            let model = ReadoutModel { drift, ..model };
            let sys = Noiseless(ConditionalObserver { model, rates: |_| (1.0, 1.0) });
            let mut rng = RngStream::new(0, 0);
            let dt = 1e-4;
            let x = integrate(&sys, &[0.8, 0.0], TimeGrid::new(dt, 2.0).unwrap(), &mut rng, |_, _| {}).unwrap();
            let exact = expected_conditional_mean(1.0, 1.0, 0.8, 2.0, drift);
            assert!((x[0] - exact).abs() < 2.0 * dt, "{drift:?}: {} vs {exact}", x[0]);
        }
        assert!(
            (expected_conditional_mean(1.0, 1.0, 0.8, 1.0, BackgroundDrift::Halved) - 0.8 * (-1.0f64).exp()).abs()
                < 1e-15
        );
    }

    #[test]
    fn conditional_mean_is_a_martingale_plus_drift() {
        let model = ReadoutModel::with_strength(40.0, 10.0, 20.0).unwrap();
        let (mu, nu, n0) = (0.5, 0.5, 0.8);
        let checkpoints = [0.5, 1.0, 2.0];
        let grid = TimeGrid::new(1e-3, 2.0).unwrap();
        let samples = Sequential.map_streams(51, 2000, |mut rng| {
            let mut out = [0.0; 3];
            let mut next = 0;
            integrate_conditional(
                &model,
                |_| (mu, nu),
                n0,
                0.0,
                grid,
                &mut rng,
                |t, x| {
                    if next < 3 && (t - checkpoints[next]).abs() < 1e-9 {
                        out[next] = x[0];
                        next += 1;
                    }
                },
            )
            .unwrap();
            out
        });
        for (j, &t) in checkpoints.iter().enumerate() {
            let col: Vec<f64> = samples.iter().map(|s| s[j]).collect();
            let m = Moments::of(&col);
            let exact = expected_conditional_mean(mu, nu, n0, t, BackgroundDrift::Halved);
            assert!((m.mean - exact).abs() < 3.0 * m.stderr(), "t={t}: {} vs {exact}", m.mean);
        }
    }

    #[test]
    fn strong_measurement_pins_conditional_mean() {
        let model = ReadoutModel::with_strength(40.0, 200.0, 20.0).unwrap();
        let mut rng = RngStream::new(52, 0);
        let tr = simulate_conditional(0.5, 0.5, &model, 0.0, 0.0, 40.0, 1e-4, &mut rng).unwrap();
        let n = tr.channel("n_c").unwrap();
        let pinned = n.iter().filter(|v| v.abs() > 0.9).count() as f64 / n.len() as f64;
        let sign_changes = n.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
        assert!(pinned > 0.8, "pinned {pinned}");
        assert!(sign_changes >= 2);
        assert!(n.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn frozen_state_current_variance() {
        let model = ReadoutModel::with_strength(40.0, 10.0, 20.0).unwrap();
        let expected = 40.0 * 40.0 / 10.0;
        assert!((model.frozen_current_variance() - expected).abs() < 1e-9);
        let finals = Sequential.map_streams(53, 20_000, |mut rng| {
            let tr = simulate_conditional(0.0, 0.0, &model, 1.0, 40.0 * 20.0 / 400.0, 0.02, 2e-5, &mut rng).unwrap();
            tr.last().unwrap().1[1]
        });
        let m = Moments::of(&finals);
        assert!((m.mean - 40.0 / 20.0).abs() < 3.0 * m.stderr());
        assert!((m.variance / expected - 1.0).abs() < 0.05, "{}", m.variance);
    }

    #[test]
    fn linear_decay_option_scales_variance() {
        let model =
            ReadoutModel { decay: FilterDecay::Linear, ..ReadoutModel::with_strength(40.0, 10.0, 20.0).unwrap() };
        assert!((model.frozen_current_variance() - 20.0 * 160.0).abs() < 1e-9);
    }

    #[test]
    fn dot_without_coupling_follows_rate_equation() {
        let m = DotQpcModel::new(2.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        let dt = 1e-4;
        let mut rng = RngStream::new(0, 0);
        let tr = simulate_dot_qpc(&m, 0.0, 3.0, dt, &mut rng).unwrap();
        let (t, last) = tr.last().unwrap();
        assert!((last[0] - m.mean_occupation(0.0, t)).abs() < 2.0 * dt);
    }

    #[test]
    fn dot_ensemble_mean_follows_rate_equation_under_measurement() {
        let m = DotQpcModel::new(1.0, 1.0, 0.8, 0.9, 1.0).unwrap();
        let finals = Sequential.map_streams(54, 5_000, |mut rng| {
            simulate_dot_qpc(&m, 0.1, 3.0, 1e-3, &mut rng).unwrap().last().unwrap().1[0]
        });
        let s = Moments::of(&finals);
        assert!((s.mean - m.mean_occupation(0.1, 3.0)).abs() < 3.0 * s.stderr());
        assert!((m.mean_occupation(0.1, 50.0) - 0.5).abs() < 1e-12);
        assert!(finals.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn uncoupled_current_averages_to_efficiency() {
        let m = DotQpcModel::new(1.0, 0.5, 0.8, 0.6, 0.0).unwrap();
        let mut rng = RngStream::new(55, 0);
        let dt = 1e-3;
        let tr = simulate_dot_qpc(&m, 0.3, 200.0, dt, &mut rng).unwrap();
        let i = &tr.channel("I_c").unwrap()[1..];
        let mean = i.iter().sum::<f64>() / i.len() as f64;
        // Step currents are independent with variance eta / dt.
        let se = (0.6 / dt / i.len() as f64).sqrt();
        assert!((mean - 0.6).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn out_of_range_state_is_rejected() {
        let mut v = 1.0 + 1e-3;
        assert!(matches!(clamp_unit(0.0, "n_c", &mut v, -1.0, 1.0), Err(Error::StepRejected { .. })));
        let mut v = 1.0 + 1e-9;
        clamp_unit(0.0, "n_c", &mut v, -1.0, 1.0).unwrap();
        assert!(v < 1.0);
    }
}
