//! Fixed-step Itô Euler–Maruyama integration and thinning for
//! inhomogeneous Poisson event times.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::error::{ensure, Error, Result};
use crate::rng::RngStream;
use crate::trajectory::Trajectory;

/// An Itô SDE `dx = a(x, t) dt + B(x, t) dW` with `dim` state components and
/// `noise_dim` independent Wiener processes.
pub trait SdeSystem {
    fn dim(&self) -> usize;

    fn noise_dim(&self) -> usize {
        self.dim()
    }

    fn drift(&self, t: f64, x: &[f64], out: &mut [f64]);

    /// Fills the `dim x noise_dim` diffusion matrix, row-major.
    fn diffusion(&self, t: f64, x: &[f64], out: &mut [f64]);

    /// Applied after every step, e.g. to keep a bounded variable in range.
    fn constrain(&self, _t: f64, _x: &mut [f64]) -> Result<()> {
        Ok(())
    }
}

/// Uniform step grid over `[0, t_end]`: `ceil(t_end / dt)` steps, the last
/// one shortened so the grid ends exactly at `t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub t_end: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        ensure(dt > 0.0 && dt.is_finite(), "dt", dt, "step must be positive")?;
        ensure(t_end >= dt, "t_end", t_end, "duration must be at least one step")?;
        // Tolerate representation error in t_end / dt before rounding up.
        let steps = ((t_end / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Ok(Self { dt, t_end, steps })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn points(&self) -> usize {
        self.steps + 1
    }

    pub fn time(&self, k: usize) -> f64 {
        if k >= self.steps {
            self.t_end
        } else {
            k as f64 * self.dt
        }
    }

    /// Length of step `k` (from `time(k)` to `time(k + 1)`).
    pub fn step_len(&self, k: usize) -> f64 {
        self.time(k + 1) - self.time(k)
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Integrates `sys` from `x0` over `grid`, calling `observe(t, x)` at every
/// grid point including the initial one. Returns the final state.
///
/// Noise enters at the left end of each step (Itô). A non-finite drift,
/// diffusion or state aborts with [`Error::NonFinite`] carrying the last
/// finite state.
pub fn integrate<S, O>(sys: &S, x0: &[f64], grid: TimeGrid, rng: &mut RngStream, mut observe: O) -> Result<Vec<f64>>
where
    S: SdeSystem + ?Sized,
    O: FnMut(f64, &[f64]),
{
    let dim = sys.dim();
    let m = sys.noise_dim();
    if x0.len() != dim {
        return Err(Error::ShapeMismatch { context: "initial state", expected: dim, found: x0.len() });
    }
    let mut x = x0.to_vec();
    let mut a = vec![0.0; dim];
    let mut b = vec![0.0; dim * m];
    let mut dw = vec![0.0; m];
    observe(0.0, &x);
    for k in 0..grid.steps() {
        let t = grid.time(k);
        let h = grid.step_len(k);
        sys.drift(t, &x, &mut a);
        sys.diffusion(t, &x, &mut b);
        if !all_finite(&a) || !all_finite(&b) {
            return Err(Error::NonFinite { t, state: x });
        }
        for w in dw.iter_mut() {
            *w = rng.wiener(h);
        }
        for i in 0..dim {
            let noise: f64 = b[i * m..(i + 1) * m].iter().zip(&dw).map(|(bij, w)| bij * w).sum();
            x[i] += a[i] * h + noise;
        }
        let t_next = grid.time(k + 1);
        if !all_finite(&x) {
            return Err(Error::NonFinite { t: t_next, state: x });
        }
        sys.constrain(t_next, &mut x)?;
        observe(t_next, &x);
    }
    Ok(x)
}

/// Same as [`integrate`] but records every grid point in a [`Trajectory`]
/// with the given channel names.
pub fn integrate_recorded<S: SdeSystem + ?Sized>(
    sys: &S,
    x0: &[f64],
    grid: TimeGrid,
    names: &[&str],
    rng: &mut RngStream,
) -> Result<Trajectory> {
    let mut tr = Trajectory::with_capacity(names, rng.seed(), grid.points());
    let mut push_err = None;
    integrate(sys, x0, grid, rng, |t, x| {
        if let Err(e) = tr.push(t, x) {
            push_err.get_or_insert(e);
        }
    })?;
    match push_err {
        Some(e) => Err(e),
        None => Ok(tr),
    }
}

/// Adapter turning a pair of closures into an [`SdeSystem`] with diagonal
/// noise (component `i` driven by its own Wiener process).
#[derive(Debug, Clone, Copy)]
pub struct Diagonal<A, B> {
    dim: usize,
    drift: A,
    diffusion: B,
}

impl<A, B> Diagonal<A, B>
where
    A: Fn(&[f64], f64, &mut [f64]),
    B: Fn(&[f64], f64, &mut [f64]),
{
    pub fn new(dim: usize, drift: A, diffusion: B) -> Self {
        Self { dim, drift, diffusion }
    }
}

impl<A, B> SdeSystem for Diagonal<A, B>
where
    A: Fn(&[f64], f64, &mut [f64]),
    B: Fn(&[f64], f64, &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn drift(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.drift)(x, t, out)
    }

    fn diffusion(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let mut diag = vec![0.0; self.dim];
        (self.diffusion)(x, t, &mut diag);
        out.fill(0.0);
        for (i, d) in diag.into_iter().enumerate() {
            out[i * self.dim + i] = d;
        }
    }
}

/// Euler–Maruyama solution of `dx_i = drift_i(x, t) dt + diffusion_i(x, t) dW_i`
/// with one independent Wiener process per component.
///
/// Returns `ceil(t_end / dt) + 1` samples. Channels are named `x` for a
/// scalar state and `x0, x1, ...` otherwise.
pub fn sde_integrate<A, B>(
    drift: A,
    diffusion: B,
    x0: &[f64],
    dt: f64,
    t_end: f64,
    rng: &mut RngStream,
) -> Result<Trajectory>
where
    A: Fn(&[f64], f64, &mut [f64]),
    B: Fn(&[f64], f64, &mut [f64]),
{
    let grid = TimeGrid::new(dt, t_end)?;
    let names: Vec<String> =
        if x0.len() == 1 { vec![String::from("x")] } else { (0..x0.len()).map(|i| format!("x{i}")).collect() };
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let sys = Diagonal::new(x0.len(), drift, diffusion);
    integrate_recorded(&sys, x0, grid, &refs, rng)
}

/// First event time of an inhomogeneous Poisson process with intensity
/// `rate(t)` on `(t0, t_max)`, or `None` if no event occurs before `t_max`.
///
/// Sampled by thinning against the constant `ceiling`; a rate above the
/// ceiling at any proposed time aborts with [`Error::RateAboveCeiling`].
pub fn jump_sample<R: Fn(f64) -> f64>(
    rate: R,
    ceiling: f64,
    t0: f64,
    t_max: f64,
    rng: &mut RngStream,
) -> Result<Option<f64>> {
    ensure(ceiling >= 0.0 && ceiling.is_finite(), "ceiling", ceiling, "rate ceiling must be finite and non-negative")?;
    if ceiling == 0.0 {
        return Ok(None);
    }
    let mut t = t0;
    loop {
        t += rng.exp1() / ceiling;
        if t >= t_max {
            return Ok(None);
        }
        let r = rate(t);
        if r > ceiling * (1.0 + 1e-12) || r < 0.0 || !r.is_finite() {
            return Err(Error::RateAboveCeiling { t, rate: r, ceiling });
        }
        if rng.uniform() * ceiling < r {
            return Ok(Some(t));
        }
    }
}
