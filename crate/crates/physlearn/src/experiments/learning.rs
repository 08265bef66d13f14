use physlearn_core::contlearn::{
    final_weight_ensemble, ou_prior_density, stationary_weight_density, ContinuousLearner, WeightDensity,
};
use physlearn_core::numeric::{sigmoid, UniformGrid};
use physlearn_core::perceptron::{train_not, train_xor, HiddenRule, PerceptronNet, TrainingConfig, TrainingRecord};
use physlearn_core::stats::Histogram;
use physlearn_core::thermo::{jarzynski_check, ledger_from_training, JarzynskiConfig, LedgerMode};
use physlearn_core::RngStream;

use super::{Experiment, ModelResult, Run};
use crate::output::{CsvWriter, Field};
use crate::params::ParamSpec;

pub(super) const BERNOULLI: Experiment = Experiment {
    name: "bernoulli",
    reproduces: "Fig. Bernoulli-example",
    description: "Switching probability versus activation, one sampled outcome per point and the Bernoulli variance",
    params: || {
        vec![
            ParamSpec::float("beta", 0.6, "switch gain"),
            ParamSpec::float("a_min", -10.0, "smallest activation"),
            ParamSpec::float("a_max", 10.0, "largest activation"),
            ParamSpec::int("points", 201, "activation grid points"),
        ]
    },
    body: bernoulli,
};

fn bernoulli(run: &mut Run<'_>) -> ModelResult<()> {
    let p = run.params;
    let beta = p.float("beta");
    let (lo, hi) = (p.float("a_min"), p.float("a_max"));
    let n = run.count_at_least("points", 2)?;
    let mut rng = RngStream::new(run.seed, 0);
    let mut table = CsvWriter::new(&["activation", "probability", "sample", "variance"]);
    let mut fired = 0usize;
    for i in 0..n {
        let a = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let prob = sigmoid(beta * a);
        let sample = rng.bernoulli(prob);
        fired += sample as usize;
        table.row([Field::from(a), prob.into(), sample.into(), (prob * (1.0 - prob)).into()]);
    }
    run.table("bernoulli", table);
    run.note("fired", fired);
    Ok(())
}

fn training_config(run: &Run<'_>) -> ModelResult<TrainingConfig> {
    let p = run.params;
    Ok(TrainingConfig {
        beta: p.float("beta"),
        eta: p.float("eta"),
        n_samples: run.count_at_least("samples", 1)? as u32,
        epochs: run.count_at_least("epochs", 1)?,
    })
}

fn training_table(record: &TrainingRecord, window: usize) -> CsvWriter {
    let mut header = vec!["epoch", "datum", "label", "error_estimate", "error_before", "error_after", "moving_average"];
    header.extend(record.parameter_names.iter().map(String::as_str));
    let mut table = CsvWriter::new(&header);
    let smooth = record.moving_average(window);
    for (e, avg) in record.epochs.iter().zip(smooth) {
        let fields = [
            Field::from(e.epoch),
            e.datum.into(),
            e.label.into(),
            e.error_estimate.into(),
            e.error_before.into(),
            e.error_after.into(),
            avg.into(),
        ];
        table.row(fields.into_iter().chain(e.parameters.iter().map(|&w| Field::from(w))));
    }
    table
}

fn note_training(run: &mut Run<'_>, record: &TrainingRecord, window: usize) {
    let smooth = record.moving_average(window);
    run.note("final_moving_average", smooth.last().copied().unwrap_or(f64::NAN));
    let params = record.final_net.parameters();
    for (name, value) in record.parameter_names.iter().zip(params) {
        run.note(&format!("final_{name}"), value);
    }
}

pub(super) const TRAIN_NOT: Experiment = Experiment {
    name: "train-not",
    reproduces: "Fig. NOT-sim",
    description: "Single stochastic switch trained as a NOT gate from sampled outputs",
    params: || {
        vec![
            ParamSpec::float("beta", 1.0, "switch gain"),
            ParamSpec::float("eta", 1.0, "learning scale"),
            ParamSpec::int("samples", 200, "switch samples per trial"),
            ParamSpec::int("epochs", 500, "training epochs"),
            ParamSpec::float("w0", 0.01, "initial weight"),
            ParamSpec::float("b0", 1.0, "initial bias"),
            ParamSpec::int("window", 50, "moving-average window"),
        ]
    },
    body: run_train_not,
};

fn run_train_not(run: &mut Run<'_>) -> ModelResult<()> {
    let config = training_config(run)?;
    let (w0, b0) = (run.params.float("w0"), run.params.float("b0"));
    let window = run.count_at_least("window", 1)?;
    let record = train_not(&config, w0, b0, &mut RngStream::new(run.seed, 0))?;
    run.table("training", training_table(&record, window));
    note_training(run, &record, window);
    Ok(())
}

pub(super) const TRAIN_XOR: Experiment = Experiment {
    name: "train-xor",
    reproduces: "Fig. XOR-sim",
    description: "Two-layer network of stochastic switches trained as an XOR gate from the reference initialisation",
    params: || {
        vec![
            ParamSpec::float("beta", 1.0, "switch gain"),
            ParamSpec::float("eta", 1.0, "learning scale"),
            ParamSpec::int("samples", 200, "switch samples per trial"),
            ParamSpec::int("epochs", 3000, "training epochs"),
            ParamSpec::choice("hidden_rule", &["gradient", "linear-beta"], "hidden-layer gain: beta^2 or beta"),
            ParamSpec::int("window", 100, "moving-average window"),
        ]
    },
    body: run_train_xor,
};

fn run_train_xor(run: &mut Run<'_>) -> ModelResult<()> {
    let config = training_config(run)?;
    let rule = match run.params.choice("hidden_rule") {
        "linear-beta" => HiddenRule::LinearBeta,
        _ => HiddenRule::Gradient,
    };
    let window = run.count_at_least("window", 1)?;
    let net = PerceptronNet::xor_reference_init(config.beta, config.eta)?;
    let record = train_xor(&config, net, rule, &mut RngStream::new(run.seed, 0))?;
    run.table("training", training_table(&record, window));
    note_training(run, &record, window);
    Ok(())
}

pub(super) const WEIGHT_DIST: Experiment = Experiment {
    name: "weight-dist",
    reproduces: "Fig. ss-dis-weight",
    description: "Weight distribution before and after continuous-time learning of NOT",
    params: || {
        vec![
            ParamSpec::float("learning_scale", 1.0, "feedback strength L"),
            ParamSpec::float("weight_decay", 1.0, "weight relaxation rate"),
            ParamSpec::float("diffusion", 0.2, "weight noise D"),
            ParamSpec::float("beta", 1.0, "switch gain"),
            ParamSpec::float("dt", 1e-3, "time step"),
            ParamSpec::float("t_end", 8.0, "learning time"),
            ParamSpec::int("paths", 10000, "trajectories"),
            ParamSpec::float("w_min", -4.0, "histogram lower edge"),
            ParamSpec::float("w_max", 2.0, "histogram upper edge"),
            ParamSpec::int("bins", 60, "histogram bins"),
        ]
    },
    body: weight_dist,
};

fn weight_dist(run: &mut Run<'_>) -> ModelResult<()> {
    let p = run.params;
    let learner = ContinuousLearner::new(
        p.float("learning_scale"),
        p.float("weight_decay"),
        p.float("diffusion"),
        p.float("beta"),
    )?;
    let (dt, t_end) = (p.float("dt"), p.float("t_end"));
    let paths = run.count_at_least("paths", 1)?;
    let bins = run.count_at_least("bins", 1)?;
    let mut hist = Histogram::new(p.float("w_min"), p.float("w_max"), bins)?;
    for w in final_weight_ensemble(run.exec, &learner, dt, t_end, paths, run.seed)? {
        hist.add(w);
    }

    let grid = UniformGrid::new(hist.edge(0), hist.edge(bins), 20 * bins + 1)?;
    let prior = ou_prior_density(learner.weight_decay, learner.diffusion, &grid)?;
    let process = stationary_weight_density(&learner, 1.0, WeightDensity::Process, &grid)?;
    let published = stationary_weight_density(&learner, 1.0, WeightDensity::Published, &grid)?;
    let at = |density: &[f64], w: f64| {
        let k = (((w - grid.point(0)) / grid.step()).round() as usize).min(density.len() - 1);
        density[k]
    };
    let prior_bins = hist.bin_probabilities(|w| at(&prior, w));
    let process_bins = hist.bin_probabilities(|w| at(&process, w));
    let published_bins = hist.bin_probabilities(|w| at(&published, w));

    let freq = hist.frequencies();
    let mut table =
        CsvWriter::new(&["w_center", "final_density", "initial_density", "process_density", "published_density"]);
    let width = hist.width();
    for (i, f) in freq.iter().enumerate() {
        let centre = hist.edge(i) + 0.5 * width;
        table.row([centre, f / width, at(&prior, centre), at(&process, centre), at(&published, centre)]);
    }
    run.table("weights", table);
    run.note("tv_to_process_density", hist.total_variation(&process_bins));
    run.note("tv_to_published_density", hist.total_variation(&published_bins));
    run.note("tv_to_initial_density", hist.total_variation(&prior_bins));
    run.note("fixed_point", learner.fixed_point()?);
    Ok(())
}

pub(super) const JARZYNSKI: Experiment = Experiment {
    name: "jarzynski",
    reproduces: "work-fluctuation identity check",
    description: "Nonequilibrium work identity for a tilt ramp of the double well",
    params: || {
        vec![
            ParamSpec::float("beta", 20.0, "inverse temperature; D = 1 / beta"),
            ParamSpec::float("lambda_end", 0.5, "final tilt; the ramp starts at 0"),
            ParamSpec::float("duration", 1.0, "ramp duration"),
            ParamSpec::float("dt", 1e-3, "time step"),
            ParamSpec::int("paths", 100000, "work samples"),
        ]
    },
    body: jarzynski,
};

fn jarzynski(run: &mut Run<'_>) -> ModelResult<()> {
    let p = run.params;
    let config = JarzynskiConfig {
        beta: p.float("beta"),
        duration: p.float("duration"),
        dt: p.float("dt"),
        paths: run.count_at_least("paths", 2)?,
        seed: run.seed,
    };
    let (lambda_end, duration) = (p.float("lambda_end"), config.duration);
    let est = jarzynski_check(run.exec, move |t| lambda_end * (t / duration).min(1.0), &config)?;
    let mut table =
        CsvWriter::new(&["lhs", "rhs", "stderr", "z_score", "delta_f", "mean_work", "work_stderr", "paths"]);
    table.row([
        Field::from(est.lhs),
        est.rhs.into(),
        est.stderr.into(),
        est.z_score().into(),
        est.delta_f.into(),
        est.mean_work.into(),
        est.work_stderr.into(),
        est.paths.into(),
    ]);
    run.table("jarzynski", table);
    run.note("lhs", est.lhs);
    run.note("rhs", est.rhs);
    run.note("stderr", est.stderr);
    run.note("z_score", est.z_score());
    run.note("delta_f", est.delta_f);
    run.note("mean_work", est.mean_work);
    run.note("second_law_holds", est.second_law_holds(3.0));
    Ok(())
}

pub(super) const THERMO_LEDGER: Experiment = Experiment {
    name: "thermo-ledger",
    reproduces: "thermodynamic ledger of NOT training",
    description: "Per-trial energy, entropy and free-energy changes booked over a NOT training run",
    params: || {
        vec![
            ParamSpec::float("beta", 1.0, "switch gain"),
            ParamSpec::float("eta", 1.0, "learning scale"),
            ParamSpec::int("samples", 200, "switch samples per trial"),
            ParamSpec::int("epochs", 500, "training epochs"),
            ParamSpec::float("w0", 0.01, "initial weight"),
            ParamSpec::float("b0", 1.0, "initial bias"),
            ParamSpec::float("e0", 1.0, "switch energy scale"),
            ParamSpec::choice("mode", &["thermal", "quantum"], "whether beta is an inverse temperature"),
            ParamSpec::float("beta_th", 1.0, "inverse temperature in thermal mode"),
        ]
    },
    body: thermo_ledger,
};

fn thermo_ledger(run: &mut Run<'_>) -> ModelResult<()> {
    let config = training_config(run)?;
    let p = run.params;
    let (w0, b0, e0) = (p.float("w0"), p.float("b0"), p.float("e0"));
    let beta_th = p.float("beta_th");
    let mode = match p.choice("mode") {
        "quantum" => LedgerMode::Quantum,
        _ => LedgerMode::Thermal { beta_th },
    };
    let record = train_not(&config, w0, b0, &mut RngStream::new(run.seed, 0))?;
    let ledger = ledger_from_training(&record, e0, mode)?;
    let mut table = CsvWriter::new(&["epoch", "delta_error", "delta_energy", "delta_entropy", "delta_free_energy"]);
    for (epoch, row) in record.epochs.iter().zip(ledger.rows()) {
        table.row([
            Field::from(epoch.epoch),
            row.delta_error.into(),
            row.delta_energy.into(),
            row.delta_entropy.into(),
            row.delta_free_energy.unwrap_or(f64::NAN).into(),
        ]);
    }
    run.table("ledger", table);
    let totals = ledger.totals();
    run.note("trials", ledger.len());
    run.note("total_delta_error", totals.delta_error);
    run.note("total_delta_energy", totals.delta_energy);
    run.note("total_delta_entropy", totals.delta_entropy);
    if matches!(mode, LedgerMode::Thermal { .. }) {
        run.note("total_delta_free_energy", totals.delta_free_energy);
    }
    Ok(())
}
