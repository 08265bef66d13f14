use physlearn_core::ensemble::Executor;
use physlearn_core::observer::{expected_conditional_mean, simulate_conditional, ReadoutModel};
use physlearn_core::sde::jump_sample;
use physlearn_core::stats::Moments;
use physlearn_core::switch::{
    sample_steady_state, simulate_path, wait_time_survival, RateSchedule, ScheduleKind, TwoStateSwitch,
};

use super::{push_trajectory, stride, Experiment, ModelResult, Run};
use crate::output::{CsvWriter, Field};
use crate::params::ParamSpec;

pub(super) const SWITCH_SIGMOID: Experiment = Experiment {
    name: "switch-sigmoid",
    reproduces: "Fig. sigmoid-switch",
    description: "Two-state switch whose rates swap along a sigmoid: rates, one sample path and the ensemble mean",
    params: || {
        vec![
            ParamSpec::float("mu", 1.0, "initial up rate"),
            ParamSpec::float("nu", 10.0, "initial down rate"),
            ParamSpec::float("t0", 5.0, "centre of the swap"),
            ParamSpec::float("slope", 2.0, "steepness of the swap"),
            ParamSpec::float("t_end", 10.0, "duration"),
            ParamSpec::float("e0", 1.0, "energy scale"),
            ParamSpec::int("paths", 2000, "paths in the ensemble mean"),
            ParamSpec::int("grid_points", 501, "time points in the output tables"),
        ]
    },
    body: switch_sigmoid,
};

fn switch_sigmoid(run: &mut Run<'_>) -> ModelResult<()> {
    let p = run.params;
    let (mu, nu) = (p.float("mu"), p.float("nu"));
    let kind = ScheduleKind::Sigmoid { t0: p.float("t0"), slope: p.float("slope") };
    let schedule = RateSchedule::new(kind, mu, nu)?;
    let t_end = p.float("t_end");
    let e0 = p.float("e0");
    let paths = run.count_at_least("paths", 1)?;
    let points = run.count_at_least("grid_points", 2)?;
    let times: Vec<f64> = (0..points).map(|i| t_end * i as f64 / (points - 1) as f64).collect();

    // Each path starts in the stationary state of the initial rates.
    let (mu0, nu0) = schedule.rates(0.0);
    let sampled = run.exec.map_streams(run.seed, paths, |mut rng| {
        let n0 = sample_steady_state(mu0, nu0, &mut rng)?;
        let switch = TwoStateSwitch::new(mu0, nu0, e0, n0)?;
        simulate_path(&switch, &schedule, t_end, &mut rng)
    });
    let sampled = sampled.into_iter().collect::<ModelResult<Vec<_>>>()?;

    let mut rates = CsvWriter::new(&["t", "mu", "nu", "n_sample", "n_mean", "n_stderr"]);
    for &t in &times {
        let (m, v) = schedule.rates(t);
        let states: Vec<f64> = sampled.iter().map(|path| path.state_at(t) as f64).collect();
        let stats = Moments::of(&states);
        rates.row([
            Field::from(t),
            m.into(),
            v.into(),
            sampled[0].state_at(t).into(),
            stats.mean.into(),
            stats.stderr().into(),
        ]);
    }
    run.table("switch", rates);
    let flips: Vec<f64> = sampled.iter().map(|path| path.flips().count() as f64).collect();
    run.note("mean_flips", Moments::of(&flips).mean);
    let work: Vec<f64> = sampled.iter().map(|path| path.energy_change(e0)).collect();
    run.note("mean_energy_change", Moments::of(&work).mean);
    Ok(())
}

pub(super) const WAIT_TIME: Experiment = Experiment {
    name: "wait-time",
    reproduces: "Fig. wait-time",
    description: "Survival of the initial state under a constant and a step-modulated exit rate",
    params: || {
        vec![
            ParamSpec::float("nu", 0.1, "exit rate before modulation"),
            ParamSpec::float("a", 10.0, "relative rate increase after the step"),
            ParamSpec::float("t0", 5.0, "step time"),
            ParamSpec::float("t_max", 30.0, "observation window"),
            ParamSpec::int("samples", 20000, "sampled wait times per case"),
            ParamSpec::int("grid_points", 301, "time points in the output table"),
        ]
    },
    body: wait_time,
};

fn wait_time(run: &mut Run<'_>) -> ModelResult<()> {
    let p = run.params;
    let (nu, a, t0, t_max) = (p.float("nu"), p.float("a"), p.float("t0"), p.float("t_max"));
    let samples = run.count_at_least("samples", 1)?;
    let points = run.count_at_least("grid_points", 2)?;
    let constant = RateSchedule::constant(0.0, nu)?;
    let step = RateSchedule::new(ScheduleKind::Step { t0, a }, 0.0, nu)?;
    let exit_rate = |s: &RateSchedule, t: f64| s.rates(t).1;

    // Streams 0..samples serve the constant case, the rest the step case.
    let waits = run.exec.map_streams(run.seed, 2 * samples, |mut rng| {
        let s = if (rng.seed().stream_id as usize) < samples { &constant } else { &step };
        jump_sample(|t| exit_rate(s, t), s.ceiling(), 0.0, t_max, &mut rng)
    });
    let waits = waits.into_iter().collect::<ModelResult<Vec<_>>>()?;
    let (first, second) = waits.split_at(samples);

    let survival_of =
        |w: &[Option<f64>], t: f64| w.iter().filter(|x| x.map_or(true, |x| x > t)).count() as f64 / w.len() as f64;
    let mut table =
        CsvWriter::new(&["t", "survival_constant", "survival_step", "empirical_constant", "empirical_step"]);
    for i in 0..points {
        let t = t_max * i as f64 / (points - 1) as f64;
        table.row([
            t,
            wait_time_survival(|u| exit_rate(&constant, u), t),
            wait_time_survival(|u| exit_rate(&step, u), t),
            survival_of(first, t),
            survival_of(second, t),
        ]);
    }
    run.table("survival", table);
    let observed = |w: &[Option<f64>]| w.iter().flatten().copied().collect::<Vec<f64>>();
    run.note("mean_wait_constant", Moments::of(&observed(first)).mean);
    run.note("mean_wait_step", Moments::of(&observed(second)).mean);
    Ok(())
}

pub(super) const OBSERVED_TRIAL: Experiment = Experiment {
    name: "observed-trial",
    reproduces: "Fig. observed-trial",
    description:
        "Conditional mean and filtered current of a continuously observed switch for three measurement strengths",
    params: || {
        vec![
            ParamSpec::float("mu", 0.5, "up rate"),
            ParamSpec::float("nu", 0.5, "down rate"),
            ParamSpec::float("kappa", 40.0, "readout coupling"),
            ParamSpec::float("r", 20.0, "filter bandwidth"),
            ParamSpec::float("gamma_low", 1.0, "weakest measurement strength"),
            ParamSpec::float("gamma_mid", 10.0, "middle measurement strength"),
            ParamSpec::float("gamma_high", 100.0, "strongest measurement strength"),
            ParamSpec::float("n0", 0.0, "initial conditional mean"),
            ParamSpec::float("t_end", 10.0, "duration"),
            ParamSpec::float("dt", 1e-4, "time step"),
            ParamSpec::int("record_points", 2000, "approximate rows kept per path"),
        ]
    },
    body: observed_trial,
};

fn observed_trial(run: &mut Run<'_>) -> ModelResult<()> {
    let p = run.params;
    let (mu, nu, kappa, r) = (p.float("mu"), p.float("nu"), p.float("kappa"), p.float("r"));
    let strengths = [p.float("gamma_low"), p.float("gamma_mid"), p.float("gamma_high")];
    let (n0, t_end, dt) = (p.float("n0"), p.float("t_end"), p.float("dt"));
    let keep = p.count("record_points");
    let models =
        strengths.iter().map(|&g| ReadoutModel::with_strength(kappa, g, r)).collect::<ModelResult<Vec<_>>>()?;
    let paths = run.exec.map_streams(run.seed, models.len(), |mut rng| {
        let model = &models[rng.seed().stream_id as usize];
        simulate_conditional(mu, nu, model, n0, 0.0, t_end, dt, &mut rng)
    });
    let mut table = CsvWriter::new(&["strength", "t", "n_c", "I_oc"]);
    for (k, path) in paths.into_iter().enumerate() {
        let tr = path?;
        push_trajectory(&mut table, &[Field::from(strengths[k])], &tr, stride(tr.len(), keep));
        let n_c = tr.channel("n_c").unwrap_or_default();
        let flips = n_c.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
        run.note(&format!("sign_changes_{}", ["low", "mid", "high"][k]), flips);
    }
    run.table("observed", table);
    run.note("noise_free_mean_at_end", expected_conditional_mean(mu, nu, n0, t_end, models[0].drift));
    Ok(())
}
