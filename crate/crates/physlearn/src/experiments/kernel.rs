use physlearn_core::ensemble::Executor;
use physlearn_core::qkernel::{kernel_matrix, sample_kernel, Detection, ModeVector, Shots};
use physlearn_core::stats::{linear_fit, Moments};
use physlearn_core::Error as ModelError;

use super::{Experiment, ModelResult, Run};
use crate::output::{CsvWriter, Field};
use crate::params::ParamSpec;

pub(super) const QKERNEL: Experiment = Experiment {
    name: "qkernel",
    reproduces: "single-photon kernel estimate",
    description: "Kernel matrix of all binary inputs from sampled photon detections, and the shot-noise scaling",
    params: || {
        vec![
            ParamSpec::int("dim", 3, "input dimension; all 2^dim binary inputs are used"),
            ParamSpec::float("eta", 0.8, "detection efficiency"),
            ParamSpec::int("shots", 10000, "detection events per entry; 0 gives exact entries"),
            ParamSpec::choice(
                "detection",
                &["identity", "exponential"],
                "click probability as a function of the overlap",
            ),
            ParamSpec::float("c", 1.0, "rate of the exponential detection law"),
            ParamSpec::float("sweep_value", 0.25, "kernel value of the pair used in the shot sweep"),
            ParamSpec::int("sweep_min_shots", 100, "smallest shot count in the sweep"),
            ParamSpec::int("sweep_levels", 6, "shot counts in the sweep, each four times the last"),
            ParamSpec::int("sweep_repeats", 200, "repetitions per shot count"),
        ]
    },
    body: qkernel,
};

fn qkernel(run: &mut Run<'_>) -> ModelResult<()> {
    let p = run.params;
    let dim = run.count_at_least("dim", 1)?;
    if dim > 10 {
        return Err(ModelError::InvalidParameter {
            name: "dim",
            value: dim as f64,
            reason: "at most 10 so that the matrix stays small",
        });
    }
    let eta = p.float("eta");
    let shots = match p.int("shots") {
        0 => Shots::Exact,
        s => Shots::Finite(s),
    };
    let c = p.float("c");
    let detection = match p.choice("detection") {
        "exponential" => Detection::Exponential { c },
        _ => Detection::Identity,
    };
    let data: Vec<Vec<f64>> =
        (0..1usize << dim).map(|m| (0..dim).map(|k| if m >> k & 1 == 1 { -1.0 } else { 1.0 }).collect()).collect();
    let exact = kernel_matrix(run.exec, &data, eta, Shots::Exact, detection, run.seed)?;
    let sampled = kernel_matrix(run.exec, &data, eta, shots, detection, run.seed)?;
    let mut matrix = CsvWriter::new(&["i", "j", "exact", "estimate"]);
    let mut worst = 0.0f64;
    for i in 0..data.len() {
        for j in 0..data.len() {
            matrix.row([Field::from(i), j.into(), exact.get(i, j).into(), sampled.get(i, j).into()]);
            worst = worst.max((exact.get(i, j) - sampled.get(i, j)).abs());
        }
    }
    run.table("kernel", matrix);
    run.note("max_abs_deviation", worst);

    // Shot sweep on a pair with a prescribed kernel value.
    let target = p.float("sweep_value");
    if !(0.0..=eta).contains(&target) {
        return Err(ModelError::InvalidParameter {
            name: "sweep_value",
            value: target,
            reason: "kernel value must lie in [0, eta]",
        });
    }
    let cos = (target / eta).sqrt();
    let w = ModeVector::new(vec![1.0, 0.0])?;
    let nu = ModeVector::new(vec![cos, (1.0 - cos * cos).max(0.0).sqrt()])?;
    let min_shots = run.count_at_least("sweep_min_shots", 1)? as u64;
    let levels = run.count_at_least("sweep_levels", 2)?;
    let repeats = run.count_at_least("sweep_repeats", 2)?;
    let mut sweep = CsvWriter::new(&["shots", "mean_estimate", "empirical_sd", "mean_stderr"]);
    let (mut log_n, mut log_sd) = (Vec::new(), Vec::new());
    for level in 0..levels {
        let n = min_shots * 4u64.pow(level as u32);
        // Level `level` uses streams `level * repeats ..`, disjoint from the matrix.
        let offset = (level * repeats) as u64;
        let runs = run.exec.map_indexed(repeats, |r| {
            let mut rng = physlearn_core::RngStream::new(run.seed ^ 0x5eed_5eed, offset + r as u64);
            sample_kernel(&w, &nu, eta, n, detection, &mut rng)
        });
        let runs = runs.into_iter().collect::<ModelResult<Vec<_>>>()?;
        let estimates: Vec<f64> = runs.iter().map(|k| k.estimate).collect();
        let stderrs: Vec<f64> = runs.iter().map(|k| k.stderr).collect();
        let m = Moments::of(&estimates);
        let sd = m.variance.sqrt();
        sweep.row([Field::from(n as usize), m.mean.into(), sd.into(), Moments::of(&stderrs).mean.into()]);
        log_n.push((n as f64).ln());
        log_sd.push(sd.ln());
    }
    run.table("shot_sweep", sweep);
    let (slope, _) = linear_fit(&log_n, &log_sd);
    run.note("shot_scaling_exponent", slope);
    Ok(())
}
