//! Averaged rate function: exact enumeration on small `n`, exponentially
//! tilted importance sampling of the posterior kernel above.

use alloc::vec::Vec;
use libm::{exp, log, sqrt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hash::derive_seed;
use crate::ldp::{validate_grid, validate_ladder, window_sites, FiniteRate, Flavor, RatePoint, RateProfile};
use crate::numeric::{log_add_exp, KahanSum};
use crate::posterior::{SiteKernel, Step};
use crate::replicas::ReplicaMap;
use crate::walker::{averaged_distribution, DenseCounts, StepTable, ENUMERATION_MAX_STEPS};

/// Counts up to this total are tabulated once per estimator call.
const TABLE_TOTAL: usize = 64;

/// Tuning of the tilted sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImportanceSettings {
    /// Replicas per (velocity, n) point.
    pub replicas: u64,
    /// Replicas used to measure the tilted drift while searching for θ.
    pub pilot_replicas: u64,
    /// The search stops once the pilot drift is this close to the target.
    pub drift_tolerance: f64,
    pub max_bisection_steps: u32,
    /// θ is searched in `[-theta_bound, theta_bound]`.
    pub theta_bound: f64,
    /// Points with a smaller effective sample size are reported unreliable.
    pub min_ess: f64,
    /// Rungs with `n` at or below this are enumerated exactly (at most 24).
    pub enumeration_max: usize,
}

impl Default for ImportanceSettings {
    fn default() -> Self {
        Self {
            replicas: 20_000,
            pilot_replicas: 256,
            drift_tolerance: 0.005,
            max_bisection_steps: 40,
            theta_bound: 8.0,
            min_ess: 100.0,
            enumeration_max: ENUMERATION_MAX_STEPS,
        }
    }
}

/// Walk of `n` steps under the tilted kernel `q_θ(z|w) ∝ q(z|w) e^{θz}`.
/// Returns the endpoint and `ln dQ̄/dQ_θ` of the path.
fn tilted_walk<K: SiteKernel + ?Sized>(kernel: &K, table: &StepTable, n: usize, theta: f64, seed: u64) -> (i64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = DenseCounts::new(n);
    let mut x = 0i64;
    let mut log_ratio = 0.0;
    for _ in 0..n {
        let (ln_right, ln_left) = table.get(kernel, counts.get(x));
        let up = ln_right + theta;
        let down = ln_left - theta;
        let ln_norm = log_add_exp(up, down);
        let step = if rng.gen::<f64>() < exp(up - ln_norm) { Step::Right } else { Step::Left };
        // ln q(z) - ln q_θ(z) = -θz + ln Z.
        log_ratio += ln_norm - theta * step.value() as f64;
        counts.record(x, step);
        x += step.value();
    }
    (x, log_ratio)
}

/// Bisection on θ until the pilot drift matches `target`. Pilot replicas
/// reuse the same seeds at every θ.
fn search_tilt<K, R>(
    kernel: &K,
    table: &StepTable,
    n: usize,
    target: f64,
    settings: &ImportanceSettings,
    seed: u64,
    runner: &R,
) -> f64
where
    K: SiteKernel + Sync + ?Sized,
    R: ReplicaMap,
{
    let drift = |theta: f64| -> f64 {
        let ends = runner.map_replicas(settings.pilot_replicas, |r| tilted_walk(kernel, table, n, theta, derive_seed(seed, r)).0);
        let mut acc = KahanSum::default();
        for e in &ends {
            acc.add(*e as f64);
        }
        acc.total() / (ends.len() as f64 * n as f64)
    };
    let (mut lo, mut hi) = (-settings.theta_bound, settings.theta_bound);
    let mut theta = 0.0;
    for _ in 0..settings.max_bisection_steps {
        let d = drift(theta);
        if (d - target).abs() < settings.drift_tolerance {
            break;
        }
        if d < target {
            lo = theta;
        } else {
            hi = theta;
        }
        theta = 0.5 * (lo + hi);
    }
    theta
}

/// Importance-sampled `-(1/n) ln Q̄[S_n ∈ [lo, hi]]` under tilt θ.
#[allow(clippy::too_many_arguments)]
fn sampled_rung<K, R>(
    kernel: &K,
    table: &StepTable,
    n: usize,
    window: (i64, i64),
    theta: f64,
    settings: &ImportanceSettings,
    seed: u64,
    runner: &R,
) -> FiniteRate
where
    K: SiteKernel + Sync + ?Sized,
    R: ReplicaMap,
{
    let runs = runner.map_replicas(settings.replicas, |r| tilted_walk(kernel, table, n, theta, derive_seed(seed, r)));
    let hits: Vec<f64> = runs.iter().filter(|(x, _)| *x >= window.0 && *x <= window.1).map(|&(_, lw)| lw).collect();
    let unreliable = |ess: f64| FiniteRate { n, rate: None, stderr: f64::NAN, exact: false, ess: Some(ess), theta: Some(theta) };
    if hits.is_empty() {
        return unreliable(0.0);
    }
    let max = hits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = hits.iter().map(|lw| exp(lw - max)).collect();
    let total = runs.len() as f64;
    let mut sum = KahanSum::default();
    let mut sum_sq = KahanSum::default();
    for s in &scaled {
        sum.add(*s);
        sum_sq.add(s * s);
    }
    let (sum, sum_sq) = (sum.total(), sum_sq.total());
    let ess = sum * sum / sum_sq;
    if ess < settings.min_ess {
        return unreliable(ess);
    }
    let mean = sum / total;
    // Misses contribute zeros to the variance.
    let variance = (sum_sq - total * mean * mean) / (total - 1.0);
    let relative_se = sqrt(variance.max(0.0) / total) / mean;
    let log_p = max + log(mean);
    FiniteRate {
        n,
        rate: Some(-log_p / n as f64),
        stderr: relative_se / n as f64,
        exact: false,
        ess: Some(ess),
        theta: Some(theta),
    }
}

/// `-(1/n) ln Q̄[S_n/n ≃ a]` on a grid of velocities and a ladder of `n`,
/// extrapolated to `n -> ∞`. Rungs with `n <= settings.enumeration_max` are
/// exact; larger rungs are sampled under the tilted kernel with θ tuned per
/// velocity.
#[allow(clippy::too_many_arguments)]
pub fn estimate_averaged_rate<K, R>(
    kernel: &K,
    grid: &[f64],
    ladder: &[usize],
    window: u32,
    settings: &ImportanceSettings,
    seed: u64,
    runner: &R,
) -> Result<RateProfile, Error>
where
    K: SiteKernel + Sync + ?Sized,
    R: ReplicaMap,
{
    validate_grid(grid, true)?;
    validate_ladder(ladder, window)?;
    if settings.enumeration_max > ENUMERATION_MAX_STEPS {
        return Err(Error::EnumerationBudget { n: settings.enumeration_max, max: ENUMERATION_MAX_STEPS });
    }
    let sampled = ladder.iter().any(|&n| n > settings.enumeration_max);
    if sampled && (settings.replicas < 2 || settings.pilot_replicas < 1) {
        return Err(Error::InvalidArgument("importance sampling needs at least 2 replicas".into()));
    }
    let table = StepTable::new(kernel, if sampled { TABLE_TOTAL } else { 0 });
    let mut rungs: Vec<Vec<FiniteRate>> = grid.iter().map(|_| Vec::with_capacity(ladder.len())).collect();
    for (j, &n) in ladder.iter().enumerate() {
        if n <= settings.enumeration_max {
            let dist = averaged_distribution(kernel, n)?;
            for (a, rungs) in grid.iter().zip(rungs.iter_mut()) {
                let (lo, hi) = window_sites(n, *a, window);
                rungs.push(FiniteRate {
                    n,
                    rate: Some(-dist.log_prob_between(lo, hi) / n as f64),
                    stderr: 0.0,
                    exact: true,
                    ess: None,
                    theta: None,
                });
            }
            continue;
        }
        for (i, (a, rungs)) in grid.iter().zip(rungs.iter_mut()).enumerate() {
            let stream = derive_seed(derive_seed(seed, i as u64), j as u64);
            let theta = search_tilt(kernel, &table, n, *a, settings, derive_seed(stream, 0), runner);
            let sites = window_sites(n, *a, window);
            rungs.push(sampled_rung(kernel, &table, n, sites, theta, settings, derive_seed(stream, 1), runner));
        }
    }
    let points = grid.iter().zip(rungs).map(|(&a, finite)| RatePoint::from_rungs(a, finite)).collect();
    Ok(RateProfile { flavor: Flavor::Averaged, window, points })
}
