//! Scheduling of independent Monte Carlo replicas.

use alloc::vec::Vec;

/// Runs `count` independent replicas and returns their results in replica
/// order. Implementations may run replicas concurrently; since every replica
/// is a pure function of its index, the output never depends on scheduling.
pub trait ReplicaMap {
    fn map_replicas<T, F>(&self, count: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send;
}

/// Runs replicas one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl ReplicaMap for Sequential {
    fn map_replicas<T, F>(&self, count: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}
