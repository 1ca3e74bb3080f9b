//! The averaged measure as a self-interacting walk.
//!
//! Averaging the quenched walk over a product environment makes the next step
//! depend on the history only through the jump counts already recorded at the
//! current site: the Bayes posterior predictive
//!
//! ```text
//! q(z | w) = E_β[π(z) Π_z' π(z')^k(w,0,z')] / E_β[Π_z' π(z')^k(w,0,z')]
//! ```
//!
//! Sites are kept in absolute coordinates rather than recentred on the
//! walker after every step; the two descriptions are equivalent.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use libm::exp;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::law::{CountVector, EnvironmentLaw};

/// A nearest-neighbour increment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    Right,
    Left,
}

impl Step {
    pub const BOTH: [Step; 2] = [Step::Right, Step::Left];

    #[inline]
    pub fn value(self) -> i64 {
        match self {
            Step::Right => 1,
            Step::Left => -1,
        }
    }

    pub fn from_value(z: i64) -> Result<Self, Error> {
        match z {
            1 => Ok(Step::Right),
            -1 => Ok(Step::Left),
            other => Err(Error::InvalidIncrement(other)),
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Step::Right => Step::Left,
            Step::Left => Step::Right,
        }
    }
}

impl Serialize for Step {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_i8(self.value() as i8)
    }
}

impl<'de> Deserialize<'de> for Step {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let z = i64::deserialize(deserializer)?;
        Step::from_value(z).map_err(serde::de::Error::custom)
    }
}

/// A finite nearest-neighbour path. Serializes as a bare array of ±1
/// increments; deserialized paths start at the origin.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct WalkPath {
    pub start: i64,
    pub increments: Vec<Step>,
}

impl WalkPath {
    pub fn new(increments: Vec<Step>) -> Self {
        Self { start: 0, increments }
    }

    pub fn from_values(values: &[i64]) -> Result<Self, Error> {
        values.iter().map(|&z| Step::from_value(z)).collect::<Result<Vec<_>, _>>().map(Self::new)
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    /// `S_n`.
    pub fn endpoint(&self) -> i64 {
        self.start + self.increments.iter().map(|s| s.value()).sum::<i64>()
    }

    /// `S_0, S_1, ..., S_n`.
    pub fn positions(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut x = self.start;
        out.push(x);
        for s in &self.increments {
            x += s.value();
            out.push(x);
        }
        out
    }
}

impl Serialize for WalkPath {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.increments.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WalkPath {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Vec::<Step>::deserialize(deserializer).map(WalkPath::new)
    }
}

/// `k(w, x, ·)`: the jumps out of every visited site, split by direction.
pub fn local_time_counts(path: &WalkPath) -> BTreeMap<i64, CountVector> {
    let mut counts: BTreeMap<i64, CountVector> = BTreeMap::new();
    let mut x = path.start;
    for &step in &path.increments {
        let entry = counts.entry(x).or_default();
        *entry = entry.incremented(step);
        x += step.value();
    }
    counts
}

/// Site-wise moments of an environment law, the only ingredient the
/// averaged measure needs.
pub trait SiteKernel {
    /// `ln E_β[p^{k+} q^{k-}]`.
    fn log_moment(&self, counts: CountVector) -> f64;

    /// `(ln q(+1 | counts), ln q(-1 | counts))`.
    fn log_step_pair(&self, counts: CountVector) -> (f64, f64);

    fn step_probability(&self, counts: CountVector, step: Step) -> f64 {
        let (right, left) = self.log_step_pair(counts);
        match step {
            Step::Right => exp(right),
            Step::Left => exp(left),
        }
    }
}

impl SiteKernel for EnvironmentLaw {
    fn log_moment(&self, counts: CountVector) -> f64 {
        EnvironmentLaw::log_moment(self, counts)
    }

    fn log_step_pair(&self, counts: CountVector) -> (f64, f64) {
        EnvironmentLaw::log_step_pair(self, counts)
    }

    fn step_probability(&self, counts: CountVector, step: Step) -> f64 {
        EnvironmentLaw::step_probability(self, counts, step)
    }
}

impl<K: SiteKernel + ?Sized> SiteKernel for &K {
    fn log_moment(&self, counts: CountVector) -> f64 {
        (**self).log_moment(counts)
    }

    fn log_step_pair(&self, counts: CountVector) -> (f64, f64) {
        (**self).log_step_pair(counts)
    }

    fn step_probability(&self, counts: CountVector, step: Step) -> f64 {
        (**self).step_probability(counts, step)
    }
}

/// History of an averaged-measure walk: where it is and what it has
/// learned about each visited site.
#[derive(Debug)]
pub struct PosteriorState<'a, K: ?Sized = EnvironmentLaw> {
    kernel: &'a K,
    position: i64,
    counts: BTreeMap<i64, CountVector>,
    steps: u64,
}

impl<K: ?Sized> Clone for PosteriorState<'_, K> {
    fn clone(&self) -> Self {
        Self { kernel: self.kernel, position: self.position, counts: self.counts.clone(), steps: self.steps }
    }
}

impl<'a, K: SiteKernel + ?Sized> PosteriorState<'a, K> {
    /// Fresh walk at the origin.
    pub fn new(kernel: &'a K) -> Self {
        Self::at(kernel, 0)
    }

    pub fn at(kernel: &'a K, position: i64) -> Self {
        Self { kernel, position, counts: BTreeMap::new(), steps: 0 }
    }

    pub fn position(&self) -> i64 {
        self.position
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn counts(&self) -> &BTreeMap<i64, CountVector> {
        &self.counts
    }

    pub fn counts_at(&self, site: i64) -> CountVector {
        self.counts.get(&site).copied().unwrap_or_default()
    }

    /// `q(step | history)`.
    pub fn step_probability(&self, step: Step) -> f64 {
        self.kernel.step_probability(self.counts_at(self.position), step)
    }

    /// The state after one more `step`; `self` is left untouched.
    #[must_use]
    pub fn advance(&self, step: Step) -> Self {
        let mut next = self.clone();
        next.advance_mut(step);
        next
    }

    pub fn advance_mut(&mut self, step: Step) {
        let entry = self.counts.entry(self.position).or_default();
        *entry = entry.incremented(step);
        self.position += step.value();
        self.steps += 1;
    }
}

/// `ln Q̄[path]` as the product over visited sites of the law's moments.
pub fn log_path_weight<K: SiteKernel + ?Sized>(kernel: &K, path: &WalkPath) -> f64 {
    local_time_counts(path).values().map(|&c| kernel.log_moment(c)).sum()
}

/// `Q̄[path]`.
pub fn path_weight<K: SiteKernel + ?Sized>(kernel: &K, path: &WalkPath) -> f64 {
    exp(log_path_weight(kernel, path))
}

/// `ln Q̄[path]` by the chain rule, summing `ln q(z | w)` along the path.
pub fn log_chain_weight<K: SiteKernel + ?Sized>(kernel: &K, path: &WalkPath) -> f64 {
    let mut state = PosteriorState::at(kernel, path.start);
    let mut total = 0.0;
    for &step in &path.increments {
        let (right, left) = kernel.log_step_pair(state.counts_at(state.position));
        total += match step {
            Step::Right => right,
            Step::Left => left,
        };
        state.advance_mut(step);
    }
    total
}
