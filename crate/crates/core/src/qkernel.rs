//! Kernel estimation from single-photon detection.
//!
//! A binary vector `xi` is encoded as the unit mode vector `xi / sqrt(N)`
//! over an orthonormal temporal-mode basis, so overlaps are plain dot
//! products. A detector with efficiency `eta` clicks with probability
//! `f(A)`, where `A = eta (w . nu)^2`.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::ensemble::Executor;
use crate::error::{ensure, Error, Result};
use crate::rng::RngStream;

const NORM_TOLERANCE: f64 = 1e-12;

/// Unit-norm coefficients over the temporal-mode basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeVector(Vec<f64>);

impl ModeVector {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Empty("mode vector"));
        }
        let norm = coefficients.iter().map(|c| c * c).sum::<f64>().sqrt();
        // A NaN norm fails the comparison and is rejected.
        let unit = (norm * norm - 1.0).abs() <= NORM_TOLERANCE;
        if !unit {
            return Err(Error::NotUnitNorm { norm });
        }
        Ok(Self(coefficients))
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &ModeVector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::ShapeMismatch { context: "mode vectors", expected: self.dim(), found: other.dim() });
        }
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }
}

/// `xi / sqrt(N)` for a vector of `+-1` components.
pub fn encode(xi: &[f64]) -> Result<ModeVector> {
    if xi.is_empty() {
        return Err(Error::Empty("binary input"));
    }
    for &x in xi {
        ensure(x == 1.0 || x == -1.0, "xi", x, "input components must be -1 or +1")?;
    }
    let s = 1.0 / (xi.len() as f64).sqrt();
    ModeVector::new(xi.iter().map(|x| x * s).collect())
}

fn check_efficiency(eta: f64) -> Result<()> {
    ensure(eta > 0.0 && eta <= 1.0, "eta", eta, "efficiency must lie in (0, 1]")
}

/// `A = eta (w . nu)^2`, in `[0, eta]`.
pub fn overlap_probability(w: &ModeVector, nu: &ModeVector, eta: f64) -> Result<f64> {
    check_efficiency(eta)?;
    let d = w.dot(nu)?;
    Ok((eta * d * d).min(eta))
}

/// Map from overlap `A` to click probability.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Detection {
    /// `p = A`.
    #[default]
    Identity,
    /// `p = 1 - exp(-c A)`.
    Exponential { c: f64 },
}

impl Detection {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Detection::Identity => Ok(()),
            Detection::Exponential { c } => ensure(c > 0.0 && c.is_finite(), "c", c, "detection rate must be positive"),
        }
    }

    pub fn click_probability(&self, a: f64) -> f64 {
        match *self {
            Detection::Identity => a,
            Detection::Exponential { c } => -(-c * a).exp_m1(),
        }
    }

    /// Overlap for click probability `p`.
    pub fn invert(&self, p: f64) -> f64 {
        match *self {
            Detection::Identity => p,
            Detection::Exponential { c } => -(-p).ln_1p() / c,
        }
    }

    /// `d invert / d p`.
    pub fn invert_slope(&self, p: f64) -> f64 {
        match *self {
            Detection::Identity => 1.0,
            Detection::Exponential { c } => 1.0 / (c * (1.0 - p)),
        }
    }
}

/// Shot-sampled estimate of an overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEstimate {
    pub exact: f64,
    /// `f^-1` of the click frequency, an estimate of `A`.
    pub estimate: f64,
    pub shots: u64,
    /// Binomial standard error propagated through `f^-1`.
    pub stderr: f64,
    /// Set when the click frequency fell outside the range of `f` on
    /// `[0, eta]` and was clamped.
    pub clamped: bool,
}

impl KernelEstimate {
    /// Estimate of the bare overlap `(w . nu)^2 = A / eta`.
    pub fn overlap(&self, eta: f64) -> f64 {
        self.estimate / eta
    }
}

/// Samples `shots` detection events at click probability `f(A)`.
pub fn sample_kernel(
    w: &ModeVector,
    nu: &ModeVector,
    eta: f64,
    shots: u64,
    detection: Detection,
    rng: &mut RngStream,
) -> Result<KernelEstimate> {
    ensure(shots >= 1, "shots", shots as f64, "need at least one shot")?;
    detection.validate()?;
    let exact = overlap_probability(w, nu, eta)?;
    let p1 = detection.click_probability(exact);
    let clicks = (0..shots).filter(|_| rng.bernoulli(p1)).count();
    let p_hat = clicks as f64 / shots as f64;
    let p_max = detection.click_probability(eta);
    let clamped = p_hat > p_max;
    let p = p_hat.min(p_max);
    Ok(KernelEstimate {
        exact,
        estimate: detection.invert(p),
        shots,
        stderr: (p * (1.0 - p) / shots as f64).sqrt() * detection.invert_slope(p).abs(),
        clamped,
    })
}

/// Number of detection events per entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    /// No sampling: entries are exact overlaps.
    Exact,
    Finite(u64),
}

/// Symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub size: usize,
    pub values: Vec<f64>,
}

impl KernelMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.size.max(1))
    }
}

/// Kernel matrix over encoded data. Each unordered pair `(i, j)` with
/// `i <= j` is sampled once on its own stream and mirrored.
pub fn kernel_matrix<E: Executor>(
    exec: &E,
    data: &[Vec<f64>],
    eta: f64,
    shots: Shots,
    detection: Detection,
    seed: u64,
) -> Result<KernelMatrix> {
    check_efficiency(eta)?;
    detection.validate()?;
    let modes = data.iter().map(|xi| encode(xi)).collect::<Result<Vec<_>>>()?;
    if let Some(first) = modes.first() {
        for m in &modes {
            if m.dim() != first.dim() {
                return Err(Error::ShapeMismatch { context: "kernel data", expected: first.dim(), found: m.dim() });
            }
        }
    }
    let n = modes.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let entries: Vec<Result<f64>> = exec.map_indexed(pairs.len(), |p| {
        let (i, j) = pairs[p];
        match shots {
            Shots::Exact => overlap_probability(&modes[i], &modes[j], eta),
            Shots::Finite(s) => {
                let mut rng = RngStream::new(seed, p as u64);
                sample_kernel(&modes[i], &modes[j], eta, s, detection, &mut rng).map(|k| k.estimate)
            }
        }
    });
    let mut values = alloc::vec![0.0; n * n];
    for (&(i, j), e) in pairs.iter().zip(entries) {
        let v = e?;
        values[i * n + j] = v;
        values[j * n + i] = v;
    }
    Ok(KernelMatrix { size: n, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::Sequential;
    use crate::stats::{linear_fit, Moments};
    use alloc::vec;

    fn unit(c: &[f64]) -> ModeVector {
        ModeVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn encoding_examples() {
        assert_eq!(encode(&[1.0]).unwrap().coefficients(), &[1.0]);
        assert_eq!(encode(&[1.0, 1.0, -1.0, -1.0]).unwrap().coefficients(), &[0.5, 0.5, -0.5, -0.5]);
        assert!(encode(&[]).is_err());
        assert!(encode(&[1.0, 0.5]).is_err());
        assert!(matches!(ModeVector::new(vec![1.0, 1.0]), Err(Error::NotUnitNorm { .. })));
    }

    #[test]
    fn overlap_limits() {
        let a = encode(&[1.0, 1.0, -1.0, -1.0]).unwrap();
        let b = encode(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!(overlap_probability(&a, &b, 1.0).unwrap(), 0.0);
        assert_eq!(overlap_probability(&a, &a, 1.0).unwrap(), 1.0);
        assert_eq!(overlap_probability(&a, &a, 0.7).unwrap(), 0.7);
        let s = 0.75f64.sqrt();
        let w = unit(&[0.5, s]);
        let nu = unit(&[1.0, 0.0]);
        assert!((overlap_probability(&w, &nu, 0.8).unwrap() - 0.2).abs() < 1e-15);
        assert!(overlap_probability(&w, &nu, 0.0).is_err());
        assert!(overlap_probability(&w, &unit(&[1.0]), 1.0).is_err());
    }

    #[test]
    fn zero_overlap_never_clicks() {
        let a = encode(&[1.0, 1.0]).unwrap();
        let b = encode(&[1.0, -1.0]).unwrap();
        let k = sample_kernel(&a, &b, 1.0, 1000, Detection::Identity, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(k.estimate, 0.0);
        assert_eq!(k.stderr, 0.0);
    }

    fn quarter_pair() -> (ModeVector, ModeVector) {
        (unit(&[0.5, 0.75f64.sqrt()]), unit(&[1.0, 0.0]))
    }

    #[test]
    fn estimates_are_unbiased_at_binomial_spread() {
        let (w, nu) = quarter_pair();
        let est: Vec<f64> = Sequential
            .map_streams(2, 400, |mut rng| {
                sample_kernel(&w, &nu, 1.0, 10_000, Detection::Identity, &mut rng).unwrap().estimate
            })
            .into_iter()
            .collect();
        let m = Moments::of(&est);
        let sigma = (0.25f64 * 0.75 / 1e4).sqrt();
        assert!((m.mean - 0.25).abs() < 3.0 * m.stderr());
        assert!((m.variance.sqrt() / sigma - 1.0).abs() < 0.1);
    }

    #[test]
    fn exponential_detection_inverts() {
        let d = Detection::Exponential { c: 3.0 };
        for a in [0.0, 0.1, 0.5, 0.9] {
            assert!((d.invert(d.click_probability(a)) - a).abs() < 1e-14);
        }
        let (w, nu) = quarter_pair();
        let est: Vec<f64> = Sequential
            .map_streams(3, 200, |mut rng| sample_kernel(&w, &nu, 1.0, 20_000, d, &mut rng).unwrap().estimate)
            .into_iter()
            .collect();
        let m = Moments::of(&est);
        assert!((m.mean - 0.25).abs() < 3.0 * m.stderr() + 1e-4);
        let k = sample_kernel(&w, &nu, 1.0, 20_000, d, &mut RngStream::new(4, 0)).unwrap();
        assert!((k.stderr / m.variance.sqrt() - 1.0).abs() < 0.15);
        assert!(Detection::Exponential { c: 0.0 }.validate().is_err());
    }

    #[test]
    fn stderr_scales_as_inverse_root_shots() {
        let (w, nu) = quarter_pair();
        let shots = [100u64, 400, 1600, 6400];
        let spread: Vec<f64> = shots
            .iter()
            .map(|&s| {
                let est: Vec<f64> = Sequential
                    .map_streams(5 + s, 400, |mut rng| {
                        sample_kernel(&w, &nu, 1.0, s, Detection::Identity, &mut rng).unwrap().estimate
                    })
                    .into_iter()
                    .collect();
                Moments::of(&est).variance.sqrt().ln()
            })
            .collect();
        let logs: Vec<f64> = shots.iter().map(|&s| (s as f64).ln()).collect();
        let (slope, _) = linear_fit(&logs, &spread);
        assert!((slope + 0.5).abs() < 0.05, "{slope}");
    }

    #[test]
    fn exact_matrix_is_scaled_squared_gram() {
        let data = vec![vec![1.0, 1.0, -1.0, -1.0], vec![1.0, -1.0, 1.0, -1.0], vec![1.0, 1.0, 1.0, -1.0]];
        let k = kernel_matrix(&Sequential, &data, 0.9, Shots::Exact, Detection::Identity, 0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = data[i].iter().zip(&data[j]).map(|(a, b)| a * b).sum::<f64>() / 4.0;
                assert!((k.get(i, j) - 0.9 * dot * dot).abs() < 1e-15);
            }
        }
        assert_eq!(k.get(0, 1), 0.0);
    }

    #[test]
    fn sampled_matrix_is_symmetric_with_efficiency_on_diagonal() {
        let data = vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, -1.0]];
        let k = kernel_matrix(&Sequential, &data, 0.8, Shots::Finite(20_000), Detection::Identity, 6).unwrap();
        let sigma = (0.8f64 * 0.2 / 2e4).sqrt();
        for i in 0..3 {
            assert!((k.get(i, i) - 0.8).abs() < 4.0 * sigma);
            for j in 0..3 {
                assert_eq!(k.get(i, j), k.get(j, i));
            }
        }
        assert_eq!(k.get(0, 1), 0.0);
        let single =
            kernel_matrix(&Sequential, &data[..1], 0.8, Shots::Finite(20_000), Detection::Identity, 6).unwrap();
        assert_eq!(single.size, 1);
        assert!(kernel_matrix(&Sequential, &[vec![1.0], vec![1.0, 1.0]], 0.8, Shots::Exact, Detection::Identity, 0)
            .is_err());
    }
}
