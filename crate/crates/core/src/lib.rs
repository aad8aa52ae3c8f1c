//! Photon statistics of nanolasers from the laser Markov chain.
//!
//! The chain tracks the photon number n_p and the number of excited emitters
//! n_e out of n0. It can be sampled exactly ([`ssa`]), approximately with
//! Poisson leaps ([`tauleap`]) or through its Langevin limit ([`langevin`]),
//! linearized analytically ([`smallsignal`]), or solved exactly for its
//! stationary distribution ([`oracle`]). [`stats`] turns trajectories into
//! ⟨n_p⟩, g²(0), RIN and error bars, and [`harness`] runs sweeps and
//! benchmarks and writes CSV.

pub mod error;
pub mod harness;
pub mod langevin;
pub mod model;
pub mod oracle;
pub mod poisson;
pub mod smallsignal;
pub mod ssa;
pub mod stats;
pub mod tauleap;
pub mod trajectory;

pub use error::{Error, Result};
pub use model::{EventTable, LaserParameters, Preset};
