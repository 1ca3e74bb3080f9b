//! Numerical core for nearest-neighbour random walks in random environments
//! on the one-dimensional integer lattice.
//!
//! The crate is `no_std` (it needs `alloc`) and contains the pure algorithmic
//! parts: environment laws and their moments, the averaged-measure posterior
//! kernel, exact and sampled walk distributions, the closed-form one-dimensional
//! asymptotics, and large-deviation rate estimators. IO, file formats and the
//! command line live in the `rwre` companion crate.
//!
//! Monte Carlo estimators take a [`ReplicaMap`] so the caller decides how
//! replicas are scheduled; [`Sequential`] is provided here, a thread-pool
//! implementation lives in the companion crate. Every replica is driven by a
//! seed derived from the top-level seed, so results never depend on the
//! schedule.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod asymptotics;
mod error;
pub mod hash;
pub mod law;
pub mod ldp;
mod numeric;
pub mod posterior;
pub mod replicas;
pub mod walker;

pub use error::Error;
pub use law::{CountVector, DriftInterval, EnvironmentLaw, Functional, JumpDistribution, LawSpec};
pub use posterior::{PosteriorState, SiteKernel, Step, WalkPath};
pub use replicas::{ReplicaMap, Sequential};
pub use walker::{Environment, LatticeDistribution};

/// Mean and standard error of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}
