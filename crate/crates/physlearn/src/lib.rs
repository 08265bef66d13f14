//! Seeded experiment runner for the physlearn simulation kernels.
//!
//! Each named experiment resolves a flat parameter set, runs its ensembles
//! on a thread pool and writes CSV tables plus a JSON manifest. Outputs
//! depend only on the experiment name, the resolved parameters and the
//! seed, never on the thread count.

mod error;
mod executor;
pub mod experiments;
mod output;
mod params;

pub use error::{RunError, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK};
pub use executor::Parallel;
pub use experiments::{catalog, find, run, Experiment, RunConfig, RunReport};
pub use output::{format_float, CsvWriter, Field, Manifest};
pub use params::{ParamSpec, ParamValue, Params};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PHYSLEARN_OUT";

/// Version recorded in every manifest.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
