//! Energy, entropy and free-energy bookkeeping for learning, and a
//! nonequilibrium work estimator for the double well.
//!
//! Per training trial the switch's mean energy and Shannon entropy change in
//! proportion to the change of the mean error:
//! `dE = -2 eta n_T E0 d_err` and `dS = eta n_T beta A d_err`. In the thermal
//! case `dF = dE - dS / beta_th`.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::doublewell::{
    default_grid, equilibrium_sampler, log_partition_function, potential, DoubleWell, Smoluchowski,
};
use crate::ensemble::Executor;
use crate::error::{ensure, Result};
use crate::numeric::UniformGrid;
use crate::perceptron::TrainingRecord;
use crate::rng::RngStream;
use crate::sde::{integrate, TimeGrid};
use crate::stats::{jackknife_mean_stderr, Moments};

/// `-2 eta n_T E0 d_err`.
#[inline]
pub fn trial_energy_change(eta: f64, label: f64, e0: f64, delta_error: f64) -> f64 {
    -2.0 * eta * label * e0 * delta_error
}

/// `eta n_T beta A d_err`.
#[inline]
pub fn trial_entropy_change(eta: f64, label: f64, beta: f64, activation: f64, delta_error: f64) -> f64 {
    eta * label * beta * activation * delta_error
}

/// Energy change `E0 (dp_up - dp_down)` from the up-state probability
/// before and after a trial.
pub fn occupation_energy_change(e0: f64, p_up_before: f64, p_up_after: f64) -> f64 {
    2.0 * e0 * (p_up_after - p_up_before)
}

/// Entropy change `dp_up ln(p_down / p_up)` with the logarithm taken
/// before the trial.
pub fn occupation_entropy_change(p_up_before: f64, p_up_after: f64) -> f64 {
    (p_up_after - p_up_before) * ((1.0 - p_up_before) / p_up_before).ln()
}

/// Whether `beta` is an inverse temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LedgerMode {
    Thermal {
        beta_th: f64,
    },
    /// `beta` is set by device parameters; no free energy is booked.
    Quantum,
}

/// Inputs describing one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialInput {
    pub eta: f64,
    pub label: f64,
    pub e0: f64,
    pub beta: f64,
    pub activation: f64,
    pub delta_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    pub delta_error: f64,
    pub delta_energy: f64,
    pub delta_entropy: f64,
    /// `None` in quantum mode.
    pub delta_free_energy: Option<f64>,
}

/// Running sums of every ledger column.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LedgerTotals {
    pub delta_error: f64,
    pub delta_energy: f64,
    pub delta_entropy: f64,
    pub delta_free_energy: f64,
}

/// One row per trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoLedger {
    mode: LedgerMode,
    rows: Vec<LedgerRow>,
    totals: LedgerTotals,
}

impl ThermoLedger {
    pub fn new(mode: LedgerMode) -> Result<Self> {
        if let LedgerMode::Thermal { beta_th } = mode {
            ensure(beta_th > 0.0 && beta_th.is_finite(), "beta_th", beta_th, "inverse temperature must be positive")?;
        }
        Ok(Self { mode, rows: Vec::new(), totals: LedgerTotals::default() })
    }

    pub fn mode(&self) -> LedgerMode {
        self.mode
    }

    pub fn rows(&self) -> &[LedgerRow] {
        &self.rows
    }

    pub fn totals(&self) -> LedgerTotals {
        self.totals
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Books one trial and returns its row.
    pub fn step(&mut self, trial: &TrialInput) -> &LedgerRow {
        let de = trial_energy_change(trial.eta, trial.label, trial.e0, trial.delta_error);
        let ds = trial_entropy_change(trial.eta, trial.label, trial.beta, trial.activation, trial.delta_error);
        let df = match self.mode {
            LedgerMode::Thermal { beta_th } => Some(de - ds / beta_th),
            LedgerMode::Quantum => None,
        };
        self.totals.delta_error += trial.delta_error;
        self.totals.delta_energy += de;
        self.totals.delta_entropy += ds;
        self.totals.delta_free_energy += df.unwrap_or(0.0);
        self.rows.push(LedgerRow {
            delta_error: trial.delta_error,
            delta_energy: de,
            delta_entropy: ds,
            delta_free_energy: df,
        });
        self.rows.last().expect("row was just pushed")
    }
}

/// Books every epoch of a training run, using the exact error change on
/// the trained datum and the output activation before the update.
pub fn ledger_from_training(record: &TrainingRecord, e0: f64, mode: LedgerMode) -> Result<ThermoLedger> {
    let mut ledger = ThermoLedger::new(mode)?;
    let (eta, beta) = (record.final_net.eta, record.final_net.beta);
    for epoch in &record.epochs {
        ledger.step(&TrialInput {
            eta,
            label: epoch.label,
            e0,
            beta,
            activation: epoch.activation,
            delta_error: epoch.error_change(),
        });
    }
    Ok(ledger)
}

/// Work along one path of the tilted well. The bias jumps at the start of
/// each step with the particle held fixed, so each step adds
/// `V(x, lambda_next) - V(x, lambda)`.
pub fn path_work<F: Fn(f64) -> f64>(bias: &F, d: f64, x0: f64, grid: TimeGrid, rng: &mut RngStream) -> Result<f64> {
    let sys = Smoluchowski { d, bias };
    let mut work = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    integrate(&sys, &[x0], grid, rng, |t, x| {
        if let Some((t0, x_prev)) = prev {
            work += potential(x_prev, bias(t)) - potential(x_prev, bias(t0));
        }
        prev = Some((t, x[0]));
    })?;
    Ok(work)
}

/// `-(1 / beta) ln(Z(lambda_1) / Z(lambda_0))` with `D = 1 / beta`.
pub fn free_energy_change(lambda0: f64, lambda1: f64, beta: f64, grid: &UniformGrid) -> Result<f64> {
    ensure(beta > 0.0 && beta.is_finite(), "beta_th", beta, "inverse temperature must be positive")?;
    let d = 1.0 / beta;
    let z0 = log_partition_function(&DoubleWell::new(lambda0, d)?, grid)?;
    let z1 = log_partition_function(&DoubleWell::new(lambda1, d)?, grid)?;
    Ok(-(z1 - z0) / beta)
}

/// Work-fluctuation estimate for one protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JarzynskiEstimate {
    /// Ensemble mean of `exp(-beta W)`.
    pub lhs: f64,
    /// `exp(-beta dF)` from quadrature.
    pub rhs: f64,
    /// Jackknife standard error of `lhs`.
    pub stderr: f64,
    pub delta_f: f64,
    pub mean_work: f64,
    pub work_stderr: f64,
    pub paths: usize,
}

impl JarzynskiEstimate {
    /// `|lhs - rhs|` in units of `stderr`.
    pub fn z_score(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.stderr
    }

    /// Mean work is at least `dF`, allowing `k` standard errors.
    pub fn second_law_holds(&self, k: f64) -> bool {
        self.mean_work + k * self.work_stderr >= self.delta_f
    }
}

/// Settings of a work-fluctuation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JarzynskiConfig {
    pub beta: f64,
    pub duration: f64,
    pub dt: f64,
    pub paths: usize,
    pub seed: u64,
}

/// Drives `paths` equilibrium-started particles through `bias(t)` on
/// `[0, duration]` with `D = 1 / beta` and compares the mean of
/// `exp(-beta W)` with `exp(-beta dF)`. Path `i` uses stream `i`.
pub fn jarzynski_check<E, F>(exec: &E, bias: F, config: &JarzynskiConfig) -> Result<JarzynskiEstimate>
where
    E: Executor,
    F: Fn(f64) -> f64 + Sync + Send,
{
    let JarzynskiConfig { beta, duration, dt, paths, seed } = *config;
    ensure(beta > 0.0 && beta.is_finite(), "beta_th", beta, "inverse temperature must be positive")?;
    ensure(paths >= 2, "paths", paths as f64, "need at least two paths")?;
    let d = 1.0 / beta;
    let grid = default_grid();
    let time = TimeGrid::new(dt, duration)?;
    let (l0, l1) = (bias(0.0), bias(duration));
    let sampler = equilibrium_sampler(&DoubleWell::new(l0, d)?, grid)?;
    let works: Vec<Result<f64>> = exec.map_streams(seed, paths, |mut rng| {
        let x0 = sampler.quantile(rng.uniform());
        path_work(&bias, d, x0, time, &mut rng)
    });
    let works = works.into_iter().collect::<Result<Vec<f64>>>()?;
    let delta_f = free_energy_change(l0, l1, beta, &grid)?;
    let boltz: Vec<f64> = works.iter().map(|w| (-beta * w).exp()).collect();
    let wm = Moments::of(&works);
    Ok(JarzynskiEstimate {
        lhs: Moments::of(&boltz).mean,
        rhs: (-beta * delta_f).exp(),
        stderr: jackknife_mean_stderr(&boltz, 100),
        delta_f,
        mean_work: wm.mean,
        work_stderr: wm.stderr(),
        paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::Sequential;
    use crate::perceptron::{train_not, TrainingConfig};

    #[test]
    fn energy_change_examples() {
        assert_eq!(trial_energy_change(1.0, 1.0, 2.0, 0.0), 0.0);
        assert!((trial_energy_change(1.0, 1.0, 2.0, -0.1) - 0.4).abs() < 1e-15);
        assert_eq!(trial_energy_change(0.5, -1.0, 2.0, 0.3), -trial_energy_change(0.5, 1.0, 2.0, 0.3));
    }

    #[test]
    fn entropy_change_examples() {
        assert_eq!(trial_entropy_change(1.0, 1.0, 1.0, 0.0, 0.3), 0.0);
        assert_eq!(trial_entropy_change(1.0, 1.0, 1.0, 2.0, 0.0), 0.0);
        assert!((trial_entropy_change(1.0, 1.0, 1.0, 2.0, -0.05) + 0.1).abs() < 1e-15);
        let a = trial_entropy_change(0.7, -1.0, 1.5, 0.4, 0.02);
        assert!((trial_entropy_change(0.7, -1.0, 3.0, 0.4, 0.02) - 2.0 * a).abs() < 1e-15);
    }

    #[test]
    fn zero_trial_books_zero_row() {
        let mut ledger = ThermoLedger::new(LedgerMode::Thermal { beta_th: 2.0 }).unwrap();
        let row =
            *ledger.step(&TrialInput { eta: 1.0, label: 1.0, e0: 1.0, beta: 2.0, activation: 1.3, delta_error: 0.0 });
        assert_eq!(row.delta_energy, 0.0);
        assert_eq!(row.delta_entropy, 0.0);
        assert_eq!(row.delta_free_energy, Some(0.0));
        assert!(ThermoLedger::new(LedgerMode::Thermal { beta_th: 0.0 }).is_err());
    }

    #[test]
    fn quantum_ledger_books_no_free_energy() {
        let mut ledger = ThermoLedger::new(LedgerMode::Quantum).unwrap();
        let row =
            *ledger.step(&TrialInput { eta: 1.0, label: 1.0, e0: 1.0, beta: 2.0, activation: 1.3, delta_error: -0.1 });
        assert_eq!(row.delta_free_energy, None);
        assert!(row.delta_energy > 0.0);
    }

    fn not_run(seed: u64) -> TrainingRecord {
        let cfg = TrainingConfig { beta: 1.0, eta: 1.0, n_samples: 200, epochs: 500 };
        train_not(&cfg, 0.01, 1.0, &mut RngStream::new(seed, 0)).unwrap()
    }

    #[test]
    fn ledger_identities_hold_on_a_not_run() {
        let rec = not_run(1);
        let ledger = ledger_from_training(&rec, 1.5, LedgerMode::Thermal { beta_th: 1.0 }).unwrap();
        assert_eq!(ledger.len(), rec.epochs.len());
        let mut abs_e = 0.0;
        let mut abs_err = 0.0;
        for r in ledger.rows() {
            let df = r.delta_free_energy.unwrap();
            assert!((df - (r.delta_energy - r.delta_entropy)).abs() <= 1e-12);
            abs_e += r.delta_energy.abs();
            abs_err += r.delta_error.abs();
        }
        assert!((abs_e / abs_err - 2.0 * 1.5).abs() < 1e-12);
    }

    #[test]
    fn displayed_ledger_matches_occupation_changes_at_unit_rate() {
        let rec = not_run(2);
        let ledger = ledger_from_training(&rec, 1.0, LedgerMode::Thermal { beta_th: 1.0 }).unwrap();
        for (e, r) in rec.epochs.iter().zip(ledger.rows()) {
            // err = (1 - n_T (2 p - 1)) / 2 inverted for p.
            let p_up = |err: f64| 0.5 * (1.0 + e.label * (1.0 - 2.0 * err));
            let (pb, pa) = (p_up(e.error_before), p_up(e.error_after));
            assert!((occupation_energy_change(1.0, pb, pa) - r.delta_energy).abs() < 1e-12);
            assert!((occupation_entropy_change(pb, pa) - r.delta_entropy).abs() < 1e-9 * (1.0 + r.delta_entropy.abs()));
        }
    }

    #[test]
    fn late_trials_cost_less_free_energy() {
        let rec = not_run(3);
        let ledger = ledger_from_training(&rec, 1.0, LedgerMode::Thermal { beta_th: 1.0 }).unwrap();
        let df: Vec<f64> = ledger.rows().iter().map(|r| r.delta_free_energy.unwrap().abs()).collect();
        let decile = df.len() / 10;
        let early = Moments::of(&df[..decile]).mean;
        let late = Moments::of(&df[df.len() - decile..]).mean;
        assert!(late < early, "{late} vs {early}");
    }

    #[test]
    fn constant_protocol_does_no_work() {
        let cfg = JarzynskiConfig { beta: 20.0, duration: 0.2, dt: 1e-3, paths: 200, seed: 1 };
        let est = jarzynski_check(&Sequential, |_| 0.2, &cfg).unwrap();
        assert_eq!(est.lhs, 1.0);
        assert_eq!(est.rhs, 1.0);
        assert_eq!(est.mean_work, 0.0);
    }

    #[test]
    fn free_energy_is_odd_in_tilt_direction() {
        let g = default_grid();
        let up = free_energy_change(0.0, 0.3, 10.0, &g).unwrap();
        let down = free_energy_change(0.0, -0.3, 10.0, &g).unwrap();
        assert!((up - down).abs() < 1e-10);
        assert!(up < 0.0);
        assert_eq!(free_energy_change(0.1, 0.1, 10.0, &g).unwrap(), 0.0);
    }

    #[test]
    fn slower_ramps_dissipate_less() {
        let dissipated = |duration: f64| {
            let cfg = JarzynskiConfig { beta: 5.0, duration, dt: 2e-3, paths: 400, seed: 4 };
            let est = jarzynski_check(&Sequential, |t| 0.2 * t / duration, &cfg).unwrap();
            assert!(est.second_law_holds(3.0), "{est:?}");
            assert!(est.z_score() < 3.0, "{est:?}");
            est.mean_work - est.delta_f
        };
        let (fast, slow) = (dissipated(0.5), dissipated(50.0));
        assert!(slow < fast / 3.0, "{slow} vs {fast}");
    }

    #[test]
    fn fast_ramp_satisfies_work_identity() {
        let cfg = JarzynskiConfig { beta: 20.0, duration: 1.0, dt: 1e-3, paths: 20_000, seed: 5 };
        let est = jarzynski_check(&Sequential, |t| 0.5 * t, &cfg).unwrap();
        assert!(est.z_score() < 3.0, "{est:?}");
        assert!(est.mean_work > est.delta_f);
    }
}
