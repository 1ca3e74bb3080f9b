//! Quenched and averaged walks: samplers and exact finite-n distributions.

use alloc::vec;
use alloc::vec::Vec;
use libm::{exp, log};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::hash::site_uniform;
use crate::law::{CountVector, EnvironmentLaw, JumpDistribution};
use crate::numeric::{log_add_exp, log_sum_exp, KahanSum};
use crate::posterior::{SiteKernel, Step, WalkPath};

pub use crate::posterior::local_time_counts;

/// Largest `n` accepted by [`averaged_distribution`].
pub const ENUMERATION_MAX_STEPS: usize = 24;

/// A realized product environment ω.
///
/// Site laws are never stored: site `x` draws its jump law by inverse
/// transform from a uniform hashed out of `(seed, x + offset)`, so one seed
/// describes the whole lattice. `offset` realizes the shift τ.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    law: EnvironmentLaw,
    seed: u64,
    offset: i64,
}

impl Environment {
    pub fn new(law: EnvironmentLaw, seed: u64) -> Self {
        Self { law, seed, offset: 0 }
    }

    pub fn law(&self) -> &EnvironmentLaw {
        &self.law
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// Jump law at site `x`.
    pub fn env_at(&self, x: i64) -> JumpDistribution {
        self.law.quantile(site_uniform(self.seed, x.wrapping_add(self.offset)))
    }

    /// The environment seen from site `by`: `τ_by ω`.
    #[must_use]
    pub fn shifted(&self, by: i64) -> Self {
        Self { law: self.law.clone(), seed: self.seed, offset: self.offset + by }
    }
}

/// Lazily filled right-jump probabilities on `[-n, n]`.
struct SiteCache<'a> {
    env: &'a Environment,
    radius: i64,
    p_right: Vec<f64>,
}

impl<'a> SiteCache<'a> {
    fn new(env: &'a Environment, n: usize) -> Self {
        Self { env, radius: n as i64, p_right: vec![f64::NAN; 2 * n + 1] }
    }

    #[inline]
    fn p_right(&mut self, x: i64) -> f64 {
        let slot = &mut self.p_right[(x + self.radius) as usize];
        if slot.is_nan() {
            *slot = self.env.env_at(x).p_right();
        }
        *slot
    }
}

fn quenched_steps<F: FnMut(Step)>(env: &Environment, n: usize, rng_seed: u64, mut visit: F) -> i64 {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut cache = SiteCache::new(env, n);
    let mut x = 0i64;
    for _ in 0..n {
        let step = if rng.gen::<f64>() < cache.p_right(x) { Step::Right } else { Step::Left };
        visit(step);
        x += step.value();
    }
    x
}

/// One walk of `n` steps under `Q^ω`, started at 0.
pub fn simulate_quenched(env: &Environment, n: usize, rng_seed: u64) -> WalkPath {
    let mut increments = Vec::with_capacity(n);
    quenched_steps(env, n, rng_seed, |s| increments.push(s));
    WalkPath::new(increments)
}

/// Endpoint `S_n` of [`simulate_quenched`] without storing the path.
pub fn quenched_endpoint(env: &Environment, n: usize, rng_seed: u64) -> i64 {
    quenched_steps(env, n, rng_seed, |_| {})
}

/// Memo of `(ln q(+1|k), ln q(-1|k))` indexed by the counts `k`.
#[derive(Debug, Default, Clone)]
pub(crate) struct StepMemo {
    table: Vec<Vec<Option<(f64, f64)>>>,
}

impl StepMemo {
    pub(crate) fn log_steps<K: SiteKernel + ?Sized>(&mut self, kernel: &K, counts: CountVector) -> (f64, f64) {
        let (r, l) = (counts.right as usize, counts.left as usize);
        if self.table.len() <= r {
            self.table.resize_with(r + 1, Vec::new);
        }
        let row = &mut self.table[r];
        if row.len() <= l {
            row.resize(l + 1, None);
        }
        *row[l].get_or_insert_with(|| kernel.log_step_pair(counts))
    }
}

/// Precomputed `(ln q(+1|k), ln q(-1|k))` for all counts with
/// `k+ + k- <= max_total`, shared read-only between replicas.
#[derive(Debug, Clone)]
pub(crate) struct StepTable {
    max_total: usize,
    entries: Vec<(f64, f64)>,
}

impl StepTable {
    pub(crate) fn new<K: SiteKernel + ?Sized>(kernel: &K, max_total: usize) -> Self {
        let mut entries = Vec::with_capacity((max_total + 1) * (max_total + 2) / 2);
        for total in 0..=max_total {
            for right in 0..=total {
                entries.push(kernel.log_step_pair(CountVector::new(right as u32, (total - right) as u32)));
            }
        }
        Self { max_total, entries }
    }

    #[inline]
    pub(crate) fn get<K: SiteKernel + ?Sized>(&self, kernel: &K, counts: CountVector) -> (f64, f64) {
        let total = counts.total() as usize;
        if total <= self.max_total {
            self.entries[total * (total + 1) / 2 + counts.right as usize]
        } else {
            kernel.log_step_pair(counts)
        }
    }
}

/// Per-site counts on `[-n, n]` for walks of at most `n` steps.
pub(crate) struct DenseCounts {
    radius: i64,
    counts: Vec<CountVector>,
}

impl DenseCounts {
    pub(crate) fn new(n: usize) -> Self {
        Self { radius: n as i64, counts: vec![CountVector::ZERO; 2 * n + 1] }
    }

    #[inline]
    pub(crate) fn get(&self, x: i64) -> CountVector {
        self.counts[(x + self.radius) as usize]
    }

    #[inline]
    pub(crate) fn record(&mut self, x: i64, step: Step) {
        let slot = &mut self.counts[(x + self.radius) as usize];
        *slot = slot.incremented(step);
    }

    #[inline]
    fn forget(&mut self, x: i64, step: Step) {
        let slot = &mut self.counts[(x + self.radius) as usize];
        match step {
            Step::Right => slot.right -= 1,
            Step::Left => slot.left -= 1,
        }
    }
}

/// One walk of `n` steps under the averaged measure `Q̄`, generated by
/// sampling each step from the posterior kernel.
pub fn simulate_averaged<K: SiteKernel + ?Sized>(kernel: &K, n: usize, rng_seed: u64) -> WalkPath {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut memo = StepMemo::default();
    let mut counts = DenseCounts::new(n);
    let mut increments = Vec::with_capacity(n);
    let mut x = 0i64;
    for _ in 0..n {
        let (ln_right, _) = memo.log_steps(kernel, counts.get(x));
        let step = if rng.gen::<f64>() < exp(ln_right) { Step::Right } else { Step::Left };
        counts.record(x, step);
        increments.push(step);
        x += step.value();
    }
    WalkPath::new(increments)
}

/// One walk under `Q̄` generated the other way round: draw each site's
/// jump law from β on first visit, then walk quenched in it.
pub fn simulate_averaged_lazy_env(law: &EnvironmentLaw, n: usize, rng_seed: u64) -> WalkPath {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut sites = vec![f64::NAN; 2 * n + 1];
    let mut increments = Vec::with_capacity(n);
    let mut x = 0i64;
    for _ in 0..n {
        let slot = &mut sites[(x + n as i64) as usize];
        if slot.is_nan() {
            let u: f64 = rng.gen();
            *slot = law.quantile(u).p_right();
        }
        let step = if rng.gen::<f64>() < *slot { Step::Right } else { Step::Left };
        increments.push(step);
        x += step.value();
    }
    WalkPath::new(increments)
}

/// Law of `S_n` on the lattice, stored in log-space on the sites with the
/// parity of `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDistribution {
    steps: usize,
    lowest: i64,
    log_probs: Vec<f64>,
    lost_mass: f64,
}

impl LatticeDistribution {
    pub(crate) fn from_log_probs(steps: usize, lowest: i64, log_probs: Vec<f64>, lost_mass: f64) -> Self {
        debug_assert!((lowest - steps as i64).rem_euclid(2) == 0);
        Self { steps, lowest, log_probs, lost_mass }
    }

    /// Empirical law of sampled endpoints of `steps`-step walks.
    pub fn from_samples(steps: usize, endpoints: &[i64]) -> Result<Self, Error> {
        let n = steps as i64;
        if let Some(&bad) = endpoints.iter().find(|&&x| x.abs() > n || (x - n).rem_euclid(2) != 0) {
            return Err(Error::InvalidArgument(alloc::format!("endpoint {bad} is unreachable in {steps} steps")));
        }
        let (Some(&lowest), Some(&highest)) = (endpoints.iter().min(), endpoints.iter().max()) else {
            return Err(Error::InvalidArgument("no samples".into()));
        };
        let mut counts = vec![0u64; ((highest - lowest) / 2 + 1) as usize];
        for &x in endpoints {
            counts[((x - lowest) / 2) as usize] += 1;
        }
        let total = log(endpoints.len() as f64);
        let log_probs = counts.iter().map(|&c| if c == 0 { f64::NEG_INFINITY } else { log(c as f64) - total }).collect();
        Ok(Self::from_log_probs(steps, lowest, log_probs, 0.0))
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Probability that escaped a truncated computation (zero otherwise).
    pub fn lost_mass(&self) -> f64 {
        self.lost_mass
    }

    pub fn log_prob(&self, x: i64) -> f64 {
        let d = x - self.lowest;
        if d < 0 || d % 2 != 0 {
            return f64::NEG_INFINITY;
        }
        self.log_probs.get((d / 2) as usize).copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn prob(&self, x: i64) -> f64 {
        exp(self.log_prob(x))
    }

    /// `(position, log-probability)` over the parity-compatible support.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.log_probs.iter().enumerate().map(move |(i, &lp)| (self.lowest + 2 * i as i64, lp))
    }

    pub fn total_mass(&self) -> f64 {
        let mut acc = KahanSum::default();
        for (_, lp) in self.iter() {
            acc.add(exp(lp));
        }
        acc.total()
    }

    /// `ln P[lo <= S_n <= hi]`.
    pub fn log_prob_between(&self, lo: i64, hi: i64) -> f64 {
        log_sum_exp(self.iter().filter(|&(x, _)| x >= lo && x <= hi).map(|(_, lp)| lp))
    }

    pub fn mean(&self) -> f64 {
        let mut acc = KahanSum::default();
        for (x, lp) in self.iter() {
            acc.add(x as f64 * exp(lp));
        }
        acc.total()
    }
}

/// Exact law of `S_n` under `Q^ω` by forward dynamic programming over sites
/// `[-radius, radius]`. Mass that would leave the window is accumulated in
/// [`LatticeDistribution::lost_mass`]; with `radius >= n` nothing is lost.
pub fn quenched_distribution(env: &Environment, n: usize, radius: usize) -> LatticeDistribution {
    let r = radius.min(n) as i64;
    let width = (2 * r + 1) as usize;
    let idx = |x: i64| (x + r) as usize;
    let mut ln_p = Vec::with_capacity(width);
    let mut ln_q = Vec::with_capacity(width);
    for x in -r..=r {
        let jump = env.env_at(x);
        ln_p.push(log(jump.p_right()));
        ln_q.push(log(jump.p_left()));
    }
    let mut current = vec![f64::NEG_INFINITY; width];
    let mut next = vec![f64::NEG_INFINITY; width];
    current[idx(0)] = 0.0;
    let mut lost = f64::NEG_INFINITY;
    for t in 0..n as i64 {
        let reach = t.min(r);
        // Sites with the parity of t; at t >= r the extreme site may have
        // the wrong parity, in which case it is skipped by the step of 2.
        let first = if (reach - t).rem_euclid(2) == 0 { -reach } else { -reach + 1 };
        for v in next.iter_mut() {
            *v = f64::NEG_INFINITY;
        }
        let mut x = first;
        while x <= reach {
            let lp = current[idx(x)];
            if lp > f64::NEG_INFINITY {
                let right = lp + ln_p[idx(x)];
                let left = lp + ln_q[idx(x)];
                if x + 1 > r {
                    lost = log_add_exp(lost, right);
                } else {
                    next[idx(x + 1)] = log_add_exp(next[idx(x + 1)], right);
                }
                if x - 1 < -r {
                    lost = log_add_exp(lost, left);
                } else {
                    next[idx(x - 1)] = log_add_exp(next[idx(x - 1)], left);
                }
            }
            x += 2;
        }
        core::mem::swap(&mut current, &mut next);
    }
    let reach = (n as i64).min(r);
    let lowest = if (reach - n as i64).rem_euclid(2) == 0 { -reach } else { -reach + 1 };
    let mut log_probs = Vec::new();
    let mut x = lowest;
    while x <= reach {
        log_probs.push(current[idx(x)]);
        x += 2;
    }
    LatticeDistribution::from_log_probs(n, lowest, log_probs, exp(lost))
}

/// Exact law of `S_n` under `Q̄`: the sum of path weights over all `2^n`
/// paths, grouped by endpoint. Paths are enumerated depth-first with the
/// chain rule so shared prefixes are evaluated once.
pub fn averaged_distribution<K: SiteKernel + ?Sized>(kernel: &K, n: usize) -> Result<LatticeDistribution, Error> {
    if n > ENUMERATION_MAX_STEPS {
        return Err(Error::EnumerationBudget { n, max: ENUMERATION_MAX_STEPS });
    }
    // No site can emit more than n jumps, so the table is complete.
    let mut table = vec![vec![(0.0, 0.0); n + 1]; n + 1];
    for (r, row) in table.iter_mut().enumerate() {
        for (l, cell) in row.iter_mut().enumerate() {
            if r + l <= n {
                let (lr, ll) = kernel.log_step_pair(CountVector::new(r as u32, l as u32));
                *cell = (exp(lr), exp(ll));
            }
        }
    }
    let mut sums = vec![KahanSum::default(); n + 1];
    let mut counts = DenseCounts::new(n);
    enumerate_paths(&table, &mut counts, &mut sums, 0, n, 1.0);
    let log_probs = sums.iter().map(|s| log(s.total())).collect();
    Ok(LatticeDistribution::from_log_probs(n, -(n as i64), log_probs, 0.0))
}

fn enumerate_paths(
    table: &[Vec<(f64, f64)>],
    counts: &mut DenseCounts,
    sums: &mut [KahanSum],
    x: i64,
    remaining: usize,
    weight: f64,
) {
    if remaining == 0 {
        let n = sums.len() - 1;
        sums[((x + n as i64) / 2) as usize].add(weight);
        return;
    }
    let here = counts.get(x);
    let (right, left) = table[here.right as usize][here.left as usize];
    for (step, prob) in [(Step::Right, right), (Step::Left, left)] {
        counts.record(x, step);
        enumerate_paths(table, counts, sums, x + step.value(), remaining - 1, weight * prob);
        counts.forget(x, step);
    }
}
