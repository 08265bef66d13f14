use physlearn_core::doublewell::{mean_vs_bias, simulate, stable_points, DoubleWell};
use physlearn_core::ensemble::Executor;

use super::{push_trajectory, stride, Experiment, ModelResult, Run};
use crate::output::{CsvWriter, Field};
use crate::params::ParamSpec;

pub(super) const DW_MEAN: Experiment = Experiment {
    name: "dw-mean",
    reproduces: "Fig. DW-mean",
    description: "Stationary mean displacement of the double well versus bias at three noise levels",
    params: || {
        vec![
            ParamSpec::float("lambda_min", -0.5, "smallest bias"),
            ParamSpec::float("lambda_max", 0.5, "largest bias"),
            ParamSpec::int("points", 101, "bias grid points"),
            ParamSpec::float("d_high", 0.5, "largest diffusion constant"),
            ParamSpec::float("d_mid", 0.1, "middle diffusion constant"),
            ParamSpec::float("d_low", 0.02, "smallest diffusion constant"),
        ]
    },
    body: dw_mean,
};

fn dw_mean(run: &mut Run<'_>) -> ModelResult<()> {
    let p = run.params;
    let (lo, hi) = (p.float("lambda_min"), p.float("lambda_max"));
    let n = run.count_at_least("points", 2)?;
    let lambdas: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let ds = [p.float("d_high"), p.float("d_mid"), p.float("d_low")];
    let curves = ds.iter().map(|&d| mean_vs_bias(d, &lambdas)).collect::<ModelResult<Vec<_>>>()?;

    let mut table = CsvWriter::new(&["lambda", "mean_x_d_high", "mean_x_d_mid", "mean_x_d_low"]);
    for (i, &l) in lambdas.iter().enumerate() {
        table.row([l, curves[0][i], curves[1][i], curves[2][i]]);
    }
    run.table("mean_displacement", table);
    // Slope of the response at zero bias: sharper switching at lower noise.
    let mid = n / 2;
    for (name, curve) in ["d_high", "d_mid", "d_low"].iter().zip(&curves) {
        let (a, b) = (mid.saturating_sub(1), (mid + 1).min(n - 1));
        run.note(&format!("slope_at_center_{name}"), (curve[b] - curve[a]) / (lambdas[b] - lambdas[a]));
    }
    Ok(())
}

pub(super) const DW_PATHS: Experiment = Experiment {
    name: "dw-paths",
    reproduces: "Fig. DW-stochastic",
    description: "Sample displacement paths as the bias ramps up, at three noise levels",
    params: || {
        vec![
            ParamSpec::float("lambda_max", 0.3, "final bias"),
            ParamSpec::float("ramp_time", 5.0, "time over which the bias rises linearly from 0"),
            ParamSpec::float("t_end", 40.0, "duration"),
            ParamSpec::float("dt", 1e-3, "time step"),
            ParamSpec::int("samples", 3, "paths per noise level"),
            ParamSpec::float("d_high", 0.2, "largest diffusion constant"),
            ParamSpec::float("d_mid", 0.05, "middle diffusion constant"),
            ParamSpec::float("d_low", 0.01, "smallest diffusion constant"),
            ParamSpec::int("record_points", 2000, "approximate rows kept per path"),
        ]
    },
    body: dw_paths,
};

fn dw_paths(run: &mut Run<'_>) -> ModelResult<()> {
    let p = run.params;
    let (lmax, ramp) = (p.float("lambda_max"), p.float("ramp_time"));
    let (t_end, dt) = (p.float("t_end"), p.float("dt"));
    let samples = run.count_at_least("samples", 1)?;
    let ds = [p.float("d_high"), p.float("d_mid"), p.float("d_low")];
    let keep = p.count("record_points");
    let wells = ds.iter().map(|&d| DoubleWell::new(0.0, d)).collect::<ModelResult<Vec<_>>>()?;
    let (x0, _) = stable_points(0.0)?;
    let bias = move |t: f64| if ramp > 0.0 { lmax * (t / ramp).min(1.0) } else { lmax };

    // Stream k * samples + s drives sample s at noise level k.
    let paths = run.exec.map_streams(run.seed, 3 * samples, |mut rng| {
        let k = rng.seed().stream_id as usize / samples;
        simulate(&wells[k], bias, x0, dt, t_end, &mut rng)
    });
    let mut table = CsvWriter::new(&["noise_level", "sample", "t", "x", "lambda"]);
    let mut switched = [0usize; 3];
    for (i, path) in paths.into_iter().enumerate() {
        let tr = path?;
        let (k, s) = (i / samples, i % samples);
        if tr.last().is_some_and(|(_, x)| x[0] > 0.0) {
            switched[k] += 1;
        }
        push_trajectory(&mut table, &[Field::from(k), Field::from(s)], &tr, stride(tr.len(), keep));
    }
    run.table("paths", table);
    for (name, n) in ["d_high", "d_mid", "d_low"].iter().zip(switched) {
        run.note(&format!("switched_{name}"), n);
    }
    Ok(())
}
