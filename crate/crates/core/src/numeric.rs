//! Quadrature, root finding and small special functions shared by the
//! physics modules.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::error::{ensure, Error, Result};

/// `n` equally spaced points covering `[lo, hi]` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        ensure(n >= 3, "n", n as f64, "grid needs at least 3 points")?;
        ensure(hi > lo, "hi", hi, "grid upper bound must exceed lower bound")?;
        Ok(Self { lo, hi, n })
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }
}

/// Composite Simpson rule for samples on a uniform grid with spacing `h`.
/// Falls back to the trapezoid rule on the last interval when the number of
/// intervals is odd.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * h * (values[0] + values[1]);
    }
    let intervals = n - 1;
    let even = intervals - intervals % 2;
    let mut s = values[0] + values[even];
    for (i, v) in values.iter().enumerate().take(even).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    let mut total = s * h / 3.0;
    if even < intervals {
        total += 0.5 * h * (values[n - 2] + values[n - 1]);
    }
    total
}

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance
/// `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if b == a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`, to absolute tolerance
/// `tol` in the argument. Returns `None` when the endpoints do not bracket a
/// root.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 || (hi - lo) < tol {
            return Some(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Logistic function `1 / (1 + e^{-z})`, stable for large `|z|`.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn sech2(z: f64) -> f64 {
    let c = z.abs().min(350.0).cosh();
    1.0 / (c * c)
}

/// Normalised density `exp(log_w) / Z` on a uniform grid, with `Z` from
/// Simpson quadrature. Shifts by the maximum before exponentiating.
pub fn density_from_log_weights(log_w: &[f64], grid: &UniformGrid) -> Vec<f64> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut d: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let z = simpson(&d, grid.step());
    for v in &mut d {
        *v /= z;
    }
    d
}

/// Log of `integral exp(log_w)` over the grid, computed stably.
pub fn log_partition(log_w: &[f64], grid: &UniformGrid) -> f64 {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let d: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    max + simpson(&d, grid.step()).ln()
}

/// Inverse-CDF sampler for a density tabulated on a uniform grid
/// (piecewise-linear CDF by the trapezoid rule).
#[derive(Debug, Clone)]
pub struct TabulatedSampler {
    grid: UniformGrid,
    cdf: Vec<f64>,
}

impl TabulatedSampler {
    pub fn new(grid: UniformGrid, density: &[f64]) -> Result<Self> {
        if density.len() != grid.n {
            return Err(Error::ShapeMismatch { context: "tabulated density", expected: grid.n, found: density.len() });
        }
        let h = grid.step();
        let mut cdf = Vec::with_capacity(grid.n);
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in density.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            cdf.push(acc);
        }
        ensure(acc > 0.0, "density", acc, "density must have positive mass")?;
        for c in &mut cdf {
            *c /= acc;
        }
        Ok(Self { grid, cdf })
    }

    /// Maps a uniform variate on `[0, 1)` to a sample.
    pub fn quantile(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c <= u).clamp(1, self.grid.n - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let x0 = self.grid.point(i - 1);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        x0 + frac.clamp(0.0, 1.0) * self.grid.step()
    }
}
