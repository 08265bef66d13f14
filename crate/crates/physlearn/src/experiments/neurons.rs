use physlearn_core::ensemble::Executor;
use physlearn_core::spiking::{
    cycle_radius, decode_intervals, hopf_threshold, period_statistics, post_fired, self_consistent_cycle,
    simulate_driven, simulate_feedforward_pair, simulate_neuron, spike_times, wald_pdf, FeedforwardConfig, NeuronState,
    RateCode, SpikeDetector, SpikingNeuron, SwitchMode,
};
use physlearn_core::stats::ks_statistic;
use physlearn_core::Trajectory;

use super::{push_trajectory, stride, Experiment, ModelResult, Run};
use crate::output::{CsvWriter, Field};
use crate::params::{ParamSpec, Params};

const START: NeuronState = NeuronState { v: 0.0, x: 1.0, y: 0.0 };

fn neuron_specs(gamma: f64, sigma: f64, dt: f64, t_end: f64) -> Vec<ParamSpec> {
    vec![
        ParamSpec::float("gamma", gamma, "switch rate scale"),
        ParamSpec::float("kappa", 1.0, "oscillator damping"),
        ParamSpec::float("chi", 40.0, "switch-to-oscillator coupling"),
        ParamSpec::float("epsilon", 0.1, "switch bias"),
        ParamSpec::float("sigma", sigma, "variance rate of the oscillator noise"),
        ParamSpec::choice("switch", &["mean-field", "jump"], "switch dynamics"),
        ParamSpec::float("dt", dt, "time step"),
        ParamSpec::float("t_end", t_end, "duration"),
        ParamSpec::float("t_transient", 10.0, "time discarded before measuring cycles"),
    ]
}

fn neuron_from(p: &Params) -> ModelResult<SpikingNeuron> {
    let mut n =
        SpikingNeuron::new(p.float("gamma"), p.float("kappa"), p.float("chi"), p.float("epsilon"), p.float("sigma"))?;
    n.switch = match p.choice("switch") {
        "jump" => SwitchMode::Jump,
        _ => SwitchMode::MeanField,
    };
    Ok(n)
}

/// Period statistics after the transient, noted in the summary.
fn note_cycles(run: &mut Run<'_>, tr: &Trajectory, t_min: f64) -> ModelResult<()> {
    let x = tr.channel("x").unwrap_or_default();
    let stats = period_statistics(tr.times(), x, &SpikeDetector { band: None, t_min })?;
    let spread = stats.periods.iter().fold(f64::NEG_INFINITY, |m, &p| m.max(p))
        - stats.periods.iter().fold(f64::INFINITY, |m, &p| m.min(p));
    run.note("cycles", stats.periods.len());
    run.note("period_mean", stats.mean);
    run.note("period_variance", stats.variance);
    run.note("period_spread", spread);
    run.note("cycle_radius", cycle_radius(tr, t_min)?);
    Ok(())
}

pub(super) const QUARTZ: Experiment = Experiment {
    name: "quartz",
    reproduces: "Fig. quartz",
    description: "Deterministic limit cycle of a switch-driven oscillator",
    params: || {
        let mut specs = neuron_specs(1.0, 0.0, 1e-3, 40.0);
        specs.push(ParamSpec::int("record_points", 4000, "approximate rows kept"));
        specs
    },
    body: quartz,
};

fn quartz(run: &mut Run<'_>) -> ModelResult<()> {
    let p = run.params;
    let neuron = neuron_from(p)?;
    let (dt, t_end, t_min) = (p.float("dt"), p.float("t_end"), p.float("t_transient"));
    let keep = p.count("record_points");
    let tr = simulate_neuron(&neuron, START, dt, t_end, &mut physlearn_core::RngStream::new(run.seed, 0))?;
    let mut table = CsvWriter::new(&["t", "v", "x", "y"]);
    push_trajectory(&mut table, &[], &tr, stride(tr.len(), keep));
    run.table("trajectory", table);
    note_cycles(run, &tr, t_min)?;
    if let Ok((r, psi0)) = self_consistent_cycle(neuron.chi, neuron.kappa, neuron.gamma) {
        run.note("averaged_radius", r);
        run.note("averaged_phase", psi0);
    }
    run.note("hopf_threshold", hopf_threshold(neuron.gamma, neuron.kappa, neuron.epsilon)?);
    Ok(())
}

pub(super) const QUARTZ_NOISY: Experiment = Experiment {
    name: "quartz-noisy",
    reproduces: "Fig. obs-quartz",
    description: "Sample paths of the noisy limit-cycle neuron showing phase diffusion",
    params: || {
        let mut specs = neuron_specs(10.0, 25.0, 1e-3, 20.0);
        specs.push(ParamSpec::int("samples", 2, "independent paths"));
        specs.push(ParamSpec::int("record_points", 4000, "approximate rows kept per path"));
        specs
    },
    body: quartz_noisy,
};

fn quartz_noisy(run: &mut Run<'_>) -> ModelResult<()> {
    let p = run.params;
    let neuron = neuron_from(p)?;
    let (dt, t_end, t_min) = (p.float("dt"), p.float("t_end"), p.float("t_transient"));
    let samples = run.count_at_least("samples", 1)?;
    let keep = p.count("record_points");
    let paths = run.exec.map_streams(run.seed, samples, |mut rng| simulate_neuron(&neuron, START, dt, t_end, &mut rng));
    let mut table = CsvWriter::new(&["sample", "t", "v", "x", "y"]);
    let mut first = None;
    for (s, path) in paths.into_iter().enumerate() {
        let tr = path?;
        push_trajectory(&mut table, &[Field::from(s)], &tr, stride(tr.len(), keep));
        first.get_or_insert(tr);
    }
    run.table("trajectories", table);
    if let Some(tr) = first {
        note_cycles(run, &tr, t_min.min(0.5 * t_end))?;
    }
    Ok(())
}

pub(super) const WALD: Experiment = Experiment {
    name: "wald",
    reproduces: "Fig. wald-dist",
    description: "Wald period densities for three noise levels and a moment-matched fit to simulated periods",
    params: || {
        let mut specs = neuron_specs(10.0, 25.0, 1e-3, 760.0);
        specs.extend([
            ParamSpec::float("r_star", 10.0, "cycle radius in the displayed densities"),
            ParamSpec::float("sigma_1", 1.0, "first displayed noise level"),
            ParamSpec::float("sigma_2", 5.0, "second displayed noise level"),
            ParamSpec::float("sigma_3", 25.0, "third displayed noise level"),
            ParamSpec::float("t_max", 15.0, "largest period in the density table"),
            ParamSpec::int("points", 300, "period grid points"),
        ]);
        specs
    },
    body: wald,
};

fn wald(run: &mut Run<'_>) -> ModelResult<()> {
    let p = run.params;
    let neuron = neuron_from(p)?;
    let (dt, t_end, t_min) = (p.float("dt"), p.float("t_end"), p.float("t_transient"));
    let r_star = p.float("r_star");
    let sigmas = [p.float("sigma_1"), p.float("sigma_2"), p.float("sigma_3")];
    let t_max = p.float("t_max");
    let n = run.count_at_least("points", 1)?;

    let tr = simulate_neuron(&neuron, START, dt, t_end, &mut physlearn_core::RngStream::new(run.seed, 0))?;
    let x = tr.channel("x").unwrap_or_default();
    let stats = period_statistics(tr.times(), x, &SpikeDetector { band: None, t_min })?;

    let mut density = CsvWriter::new(&["period", "wald_sigma_1", "wald_sigma_2", "wald_sigma_3", "fitted"]);
    for i in 0..n {
        // The density vanishes at zero period, which is not in its domain.
        let t = t_max * (i + 1) as f64 / n as f64;
        let mut row = vec![t];
        for &s in &sigmas {
            row.push(wald_pdf(t, r_star, s)?);
        }
        row.push(stats.wald.pdf(t));
        density.row(row);
    }
    run.table("density", density);
    let mut periods = CsvWriter::new(&["cycle", "period"]);
    for (k, &period) in stats.periods.iter().enumerate() {
        periods.row([Field::from(k), period.into()]);
    }
    run.table("periods", periods);
    run.note("cycles", stats.periods.len());
    run.note("period_mean", stats.mean);
    run.note("period_variance", stats.variance);
    run.note("fitted_shape", stats.wald.shape);
    run.note("ks_statistic", ks_statistic(&stats.periods, |t| stats.wald.cdf(t)));
    Ok(())
}

pub(super) const FEED_FORWARD: Experiment = Experiment {
    name: "feed-forward",
    reproduces: "Fig. feed-forward",
    description: "Post-synaptic neuron driven through a leaky integrator, at a low and a high threshold current",
    params: || {
        vec![
            ParamSpec::float("j0_low", 0.0, "low threshold current"),
            ParamSpec::float("j0_high", 2.0, "high threshold current"),
            ParamSpec::float("chi", 20.0, "post-synaptic coupling"),
            ParamSpec::float("leak", 0.01, "integrator leak k"),
            ParamSpec::float("weight", 1.0, "synaptic weight"),
            ParamSpec::float("tau", 20.0, "integration window"),
            ParamSpec::float("alpha", 1.0, "turn-off sharpness"),
            ParamSpec::float("beta_s", 1.0, "threshold sharpness"),
            ParamSpec::float("input_sharpness", 10.0, "pre-synaptic signal sharpness"),
            ParamSpec::float("input_period", 5.0, "pre-synaptic period"),
            ParamSpec::float("sigma", 0.0, "integrator noise"),
            ParamSpec::float("dt", 0.01, "time step"),
            ParamSpec::float("t_end", 60.0, "duration"),
            ParamSpec::float("spike_band", 1.0, "crossing band for spike detection"),
            ParamSpec::int("min_spikes", 3, "spikes that count as firing"),
        ]
    },
    body: feed_forward,
};

fn feed_forward(run: &mut Run<'_>) -> ModelResult<()> {
    let p = run.params;
    let build = |j0: f64| -> ModelResult<FeedforwardConfig> {
        let mut c = FeedforwardConfig::reference(j0)?;
        c.post = SpikingNeuron::new(c.post.gamma, c.post.kappa, p.float("chi"), c.post.epsilon, c.post.sigma)?;
        c.synapse = physlearn_core::spiking::LifSynapse::new(
            p.float("leak"),
            vec![p.float("weight")],
            p.float("tau"),
            p.float("alpha"),
            p.float("sigma"),
        )?;
        c.beta_s = p.float("beta_s");
        c.input_sharpness = p.float("input_sharpness");
        c.input_period = p.float("input_period");
        c.dt = p.float("dt");
        c.t_end = p.float("t_end");
        Ok(c)
    };
    let configs = [build(p.float("j0_low"))?, build(p.float("j0_high"))?];
    let band = p.float("spike_band");
    let min_spikes = p.count("min_spikes");
    let runs = run.exec.map_streams(run.seed, 2, |mut rng| {
        simulate_feedforward_pair(&configs[rng.seed().stream_id as usize], &mut rng)
    });
    let mut table = CsvWriter::new(&["threshold", "t", "v_pre", "J", "chi_post", "v_post", "x_post"]);
    for (k, (outcome, label)) in runs.into_iter().zip(["low", "high"]).enumerate() {
        let tr = outcome?;
        push_trajectory(&mut table, &[Field::from(k)], &tr, 1);
        run.note(&format!("fired_{label}"), post_fired(&tr, band, min_spikes)?);
    }
    run.table("pair", table);
    Ok(())
}

pub(super) const RATE_CODE: Experiment = Experiment {
    name: "rate-code",
    reproduces: "Fig. spike-rate-code",
    description: "Binary message carried by modulating the coupling, decoded from spike intervals",
    params: || {
        let mut specs = neuron_specs(1.0, 0.0, 1e-3, 200.0);
        specs.retain(|s| s.key != "chi" && s.key != "t_transient");
        specs.extend([
            ParamSpec::float("chi_base", 20.0, "mean coupling"),
            ParamSpec::float("depth", 0.5, "modulation depth"),
            ParamSpec::float("message_period", 20.0, "period of the binary message"),
            ParamSpec::float("threshold", 2.65, "interval below which a window reads as +1"),
            ParamSpec::int("record_points", 4000, "approximate rows kept"),
        ]);
        specs
    },
    body: rate_code,
};

fn rate_code(run: &mut Run<'_>) -> ModelResult<()> {
    let p = run.params;
    let code = RateCode::new(p.float("chi_base"), p.float("depth"), p.float("message_period"))?;
    let mut neuron =
        SpikingNeuron::new(p.float("gamma"), p.float("kappa"), code.chi_base, p.float("epsilon"), p.float("sigma"))?;
    neuron.switch = match p.choice("switch") {
        "jump" => SwitchMode::Jump,
        _ => SwitchMode::MeanField,
    };
    let (dt, t_end) = (p.float("dt"), p.float("t_end"));
    let threshold = p.float("threshold");
    let keep = p.count("record_points");
    let eps = neuron.epsilon;
    let tr = simulate_driven(
        &neuron,
        START,
        |t| (code.chi(t), eps),
        dt,
        t_end,
        &mut physlearn_core::RngStream::new(run.seed, 0),
    )?;

    let mut trace = CsvWriter::new(&["t", "chi", "v", "x", "y"]);
    let every = stride(tr.len(), keep);
    let channels = tr.channels();
    for k in (0..tr.len()).filter(|k| k % every == 0) {
        let t = tr.times()[k];
        trace.row([t, code.chi(t), channels[0].values[k], channels[1].values[k], channels[2].values[k]]);
    }
    run.table("trace", trace);

    let x = tr.channel("x").unwrap_or_default();
    let spikes = spike_times(tr.times(), x, &SpikeDetector { band: None, t_min: 0.0 });
    let window = 0.5 * code.period;
    let windows = (t_end / window).floor() as usize;
    let decoded = decode_intervals(&spikes, window, windows, threshold, 1.0);
    let mut bits = CsvWriter::new(&["window", "sent", "decoded"]);
    let mut errors = 0usize;
    for (w, &d) in decoded.iter().enumerate() {
        let sent = code.message((w as f64 + 0.5) * window);
        errors += (sent != d) as usize;
        bits.row([Field::from(w), sent.into(), d.into()]);
    }
    run.table("bits", bits);
    run.note("windows", windows);
    run.note("bit_errors", errors);
    run.note("spikes", spikes.len());
    Ok(())
}
