//! Pump sweeps, time-versus-accuracy benchmarks, configuration and CSV
//! output.
//!
//! Every stochastic run gets its own ChaCha8 stream seeded from
//! (base seed, method, pump or budget index, run index), so results do not
//! depend on how runs are scheduled across worker threads.

mod bench;
mod config;
mod io;
mod run;
mod sweep;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bench::{
    measure_throughput, run_benchmark, BenchRun, BenchmarkOutput, BenchmarkSpec, TruthSource,
};
pub use config::{
    load_config_file, parse_config, pump_grid, RawBench, RawConfig, RawLangevin, RawLaser,
    RawOracle, RawSweep, RawTauleap, DEFAULT_MAX_STEPS, DEFAULT_PUMP_POINTS,
};
pub use io::{
    parse_results, read_results, results_to_bytes, write_distribution, write_results,
    write_sidecar, write_trajectory, ResultRow, Sidecar, CSV_HEADER,
};
pub use run::{
    estimated_step_time, langevin_duration, run_single, RunOutcome, RunPlan, SimulationSettings,
};
pub use sweep::{analytic_statistics, run_sweep, SweepOutput, SweepSpec};

use crate::error::Error;

/// A solution method. Variant order matches the alphabetical order of the
/// names, which is the row order within a pump point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Langevin,
    Oracle,
    Smallsignal,
    Ssa,
    Tauleap,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Langevin,
        Method::Oracle,
        Method::Smallsignal,
        Method::Ssa,
        Method::Tauleap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Langevin => "langevin",
            Method::Oracle => "oracle",
            Method::Smallsignal => "smallsignal",
            Method::Ssa => "ssa",
            Method::Tauleap => "tauleap",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Method::Ssa | Method::Tauleap | Method::Langevin)
    }

    /// Whether the method has a step size and therefore coarse-step runs.
    pub fn has_step(self) -> bool {
        matches!(self, Method::Tauleap | Method::Langevin)
    }

    fn id(self) -> u64 {
        match self {
            Method::Ssa => 1,
            Method::Tauleap => 2,
            Method::Langevin => 3,
            Method::Smallsignal => 4,
            Method::Oracle => 5,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::config("methods", format!("unknown method `{s}` (expected one of ssa, tauleap, langevin, smallsignal, oracle)")))
    }
}

/// Base-step or doubled-step run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Base,
    Coarse,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable seed for one run.
pub fn run_seed(
    base_seed: u64,
    method: Method,
    variant: Variant,
    point_index: usize,
    run_index: usize,
) -> u64 {
    let tag = method.id() + if variant == Variant::Coarse { 16 } else { 0 };
    [tag, point_index as u64, run_index as u64]
        .into_iter()
        .fold(splitmix64(base_seed), |h, x| splitmix64(h ^ splitmix64(x)))
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub(crate) fn with_pool<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> crate::error::Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::config("threads", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
