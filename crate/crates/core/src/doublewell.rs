//! Overdamped particle in the tilted quartic well `V(x) = x^2 (x^2 - 1) - lambda x`.
//!
//! Dynamics follow `dx = -V'(x) dt + sqrt(2 D) dW`, whose stationary density is
//! `exp(-V / D) / Z`.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::error::{ensure, Error, Result};
use crate::numeric::{bisect, density_from_log_weights, log_partition, simpson, TabulatedSampler, UniformGrid};
use crate::rng::RngStream;
use crate::sde::{integrate, SdeSystem, TimeGrid};
use crate::trajectory::Trajectory;

/// Bias beyond which only one minimum survives, `4 / (3 sqrt 6)`.
pub fn saddle_node_bias() -> f64 {
    4.0 / (3.0 * 6f64.sqrt())
}

#[inline]
pub fn potential(x: f64, lambda: f64) -> f64 {
    let x2 = x * x;
    x2 * (x2 - 1.0) - lambda * x
}

/// `V'(x) = 4 x^3 - 2 x - lambda`.
#[inline]
pub fn potential_slope(x: f64, lambda: f64) -> f64 {
    4.0 * x * x * x - 2.0 * x - lambda
}

/// Bias and noise strength of a well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleWell {
    pub lambda: f64,
    pub d: f64,
}

impl DoubleWell {
    pub fn new(lambda: f64, d: f64) -> Result<Self> {
        ensure(d >= 0.0 && d.is_finite(), "D", d, "diffusion constant must be finite and non-negative")?;
        ensure(lambda.is_finite(), "lambda", lambda, "bias must be finite")?;
        Ok(Self { lambda, d })
    }
}

/// Grid wide enough to hold all stationary mass for biases up to a few
/// units.
pub fn default_grid() -> UniformGrid {
    UniformGrid { lo: -2.5, hi: 2.5, n: 8001 }
}

/// Left and right stable fixed points `(x*, y*)` of `-V'`.
pub fn stable_points(lambda: f64) -> Result<(f64, f64)> {
    if lambda.abs() >= saddle_node_bias() {
        return Err(Error::NoBistability { lambda });
    }
    let inflection = 1.0 / 6f64.sqrt();
    let reach = 2.0 + lambda.abs();
    let slope = |x: f64| potential_slope(x, lambda);
    let left = bisect(slope, -reach, -inflection, 1e-13).ok_or(Error::NoBistability { lambda })?;
    let right = bisect(slope, inflection, reach, 1e-13).ok_or(Error::NoBistability { lambda })?;
    Ok((left, right))
}

/// Barrier energy `V(x*) - V(y*)` between the two minima.
pub fn kramers_barrier(lambda: f64) -> Result<f64> {
    let (x, y) = stable_points(lambda)?;
    Ok(potential(x, lambda) - potential(y, lambda))
}

/// `exp(-V / D)` normalised on `grid`.
pub fn stationary_density(well: &DoubleWell, grid: &UniformGrid) -> Result<Vec<f64>> {
    ensure(well.d > 0.0, "D", well.d, "stationary density needs positive noise")?;
    let log_w: Vec<f64> = grid.points().map(|x| -potential(x, well.lambda) / well.d).collect();
    Ok(density_from_log_weights(&log_w, grid))
}

/// `ln Z` with `Z = int exp(-V / D) dx` over `grid`.
pub fn log_partition_function(well: &DoubleWell, grid: &UniformGrid) -> Result<f64> {
    ensure(well.d > 0.0, "D", well.d, "partition function needs positive noise")?;
    let log_w: Vec<f64> = grid.points().map(|x| -potential(x, well.lambda) / well.d).collect();
    Ok(log_partition(&log_w, grid))
}

/// Stationary `<x>` by quadrature.
pub fn mean_displacement(well: &DoubleWell, grid: &UniformGrid) -> Result<f64> {
    let p = stationary_density(well, grid)?;
    let xp: Vec<f64> = grid.points().zip(&p).map(|(x, p)| x * p).collect();
    Ok(simpson(&xp, grid.step()))
}

/// Stationary mass on `x < 0`.
pub fn left_well_mass(well: &DoubleWell, grid: &UniformGrid) -> Result<f64> {
    let p = stationary_density(well, grid)?;
    let masked: Vec<f64> = grid
        .points()
        .zip(&p)
        .map(|(x, &p)| {
            if x < 0.0 {
                p
            } else if x == 0.0 {
                p / 2.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(simpson(&masked, grid.step()))
}

/// Stationary `<x>` for each bias in `lambdas`.
pub fn mean_vs_bias(d: f64, lambdas: &[f64]) -> Result<Vec<f64>> {
    let grid = default_grid();
    lambdas.iter().map(|&lambda| mean_displacement(&DoubleWell::new(lambda, d)?, &grid)).collect()
}

/// Sampler for the stationary density, used to start ensembles in
/// equilibrium.
pub fn equilibrium_sampler(well: &DoubleWell, grid: UniformGrid) -> Result<TabulatedSampler> {
    let p = stationary_density(well, &grid)?;
    TabulatedSampler::new(grid, &p)
}

/// The well as an SDE system with a time-dependent bias.
#[derive(Debug, Clone, Copy)]
pub struct Smoluchowski<F> {
    pub d: f64,
    pub bias: F,
}

impl<F: Fn(f64) -> f64> SdeSystem for Smoluchowski<F> {
    fn dim(&self) -> usize {
        1
    }

    fn drift(&self, t: f64, x: &[f64], out: &mut [f64]) {
        out[0] = -potential_slope(x[0], (self.bias)(t));
    }

    fn diffusion(&self, _t: f64, _x: &[f64], out: &mut [f64]) {
        out[0] = (2.0 * self.d).sqrt();
    }
}

/// Path of the particle under the bias schedule `bias(t)`, with channels
/// `x` and `lambda`. The well's own `lambda` is not used.
pub fn simulate<F: Fn(f64) -> f64>(
    well: &DoubleWell,
    bias: F,
    x0: f64,
    dt: f64,
    t_end: f64,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    let grid = TimeGrid::new(dt, t_end)?;
    let sys = Smoluchowski { d: well.d, bias: &bias };
    let mut tr = Trajectory::with_capacity(&["x", "lambda"], rng.seed(), grid.points());
    let mut failed = None;
    integrate(&sys, &[x0], grid, rng, |t, x| {
        if let Err(e) = tr.push(t, &[x[0], bias(t)]) {
            failed.get_or_insert(e);
        }
    })?;
    failed.map_or(Ok(tr), Err)
}

/// Final position only, without recording the path.
pub fn simulate_final<F: Fn(f64) -> f64>(
    well: &DoubleWell,
    bias: F,
    x0: f64,
    dt: f64,
    t_end: f64,
    rng: &mut RngStream,
) -> Result<f64> {
    let sys = Smoluchowski { d: well.d, bias };
    Ok(integrate(&sys, &[x0], TimeGrid::new(dt, t_end)?, rng, |_, _| {})?[0])
}
