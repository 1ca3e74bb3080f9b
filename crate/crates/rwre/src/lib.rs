//! Experiment runner for one-dimensional random walks in random
//! environments: configuration, a thread-pool replica runner, output
//! formats, the oracle check suite and the command implementations behind
//! the `rwre` binary. The numerics live in [`rwre_core`], re-exported here
//! as [`core`].

pub mod checks;
pub mod commands;
pub mod config;
pub mod io;
pub mod parallel;

pub use rwre_core as core;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// A check failed, or the run itself failed (for example on IO).
    pub const FAILURE: i32 = 1;
    /// The configuration or an input was rejected.
    pub const CONFIG: i32 = 2;
}
