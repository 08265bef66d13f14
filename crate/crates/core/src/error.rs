use alloc::vec::Vec;

/// Failures raised by the simulation kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },

    /// An integrator produced a NaN or infinity. Carries the last finite
    /// state so the failure can be reproduced.
    #[error("non-finite value at t = {t} (last finite state {state:?})")]
    NonFinite { t: f64, state: Vec<f64> },

    #[error("rate {rate} exceeds declared ceiling {ceiling} at t = {t}; thinning is invalid")]
    RateAboveCeiling { t: f64, rate: f64, ceiling: f64 },

    /// A bounded variable left its interval by more than the integrator's
    /// tolerance. Usually the step size is too large.
    #[error("step rejected at t = {t}: {variable} = {value} outside [{lo}, {hi}]; reduce dt")]
    StepRejected { t: f64, variable: &'static str, value: f64, lo: f64, hi: f64 },

    #[error("no bistability at bias {lambda}: the potential has a single minimum")]
    NoBistability { lambda: f64 },

    #[error("no limit cycle in averaged theory (cos psi0 = {cos_psi0})")]
    NoLimitCycle { cos_psi0: f64 },

    #[error("no cycles: found {crossings} upward crossings, need at least 2")]
    NoCycles { crossings: usize },

    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    ShapeMismatch { context: &'static str, expected: usize, found: usize },

    #[error("vector is not unit norm (norm = {norm})")]
    NotUnitNorm { norm: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter { name, value, reason }
    }
}

/// Rejects `value` unless `ok` holds.
pub(crate) fn ensure(ok: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(name, value, reason))
    }
}
