use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::StreamSeed;

/// One named real-valued series of a [`Trajectory`].
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub name: String,
    pub values: Vec<f64>,
}

/// A time series of one or more named channels, sampled on a strictly
/// increasing time grid, together with the stream that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    channels: Vec<Channel>,
    seed: StreamSeed,
}

impl Trajectory {
    pub fn new(names: &[&str], seed: StreamSeed) -> Self {
        Self::with_capacity(names, seed, 0)
    }

    pub fn with_capacity(names: &[&str], seed: StreamSeed, capacity: usize) -> Self {
        Self {
            times: Vec::with_capacity(capacity),
            channels: names
                .iter()
                .map(|n| Channel { name: String::from(*n), values: Vec::with_capacity(capacity) })
                .collect(),
            seed,
        }
    }

    /// Appends one sample. `t` must exceed the previous time and `values`
    /// must carry one entry per channel.
    pub fn push(&mut self, t: f64, values: &[f64]) -> Result<()> {
        if values.len() != self.channels.len() {
            return Err(Error::ShapeMismatch {
                context: "trajectory sample",
                expected: self.channels.len(),
                found: values.len(),
            });
        }
        if let Some(&last) = self.times.last() {
            // NaN times fail the comparison and are rejected.
            let increasing = t > last;
            if !increasing {
                return Err(Error::invalid("t", t, "trajectory times must strictly increase"));
            }
        }
        self.times.push(t);
        for (c, &v) in self.channels.iter_mut().zip(values) {
            c.values.push(v);
        }
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    pub fn seed(&self) -> StreamSeed {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Values of every channel at the last sample.
    pub fn last(&self) -> Option<(f64, Vec<f64>)> {
        let t = *self.times.last()?;
        Some((t, self.channels.iter().map(|c| *c.values.last().unwrap()).collect()))
    }
}
