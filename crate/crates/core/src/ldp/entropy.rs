//! Relative-entropy rate of i.i.d. increment strategies against the
//! posterior kernel. Minimizing over strategies with mean `a` gives `Ī(a)`;
//! the i.i.d. family alone gives an upper bound.

use alloc::vec::Vec;
use libm::log;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hash::derive_seed;
use crate::numeric::{mean_and_stderr, KahanSum};
use crate::posterior::{SiteKernel, Step};
use crate::replicas::ReplicaMap;
use crate::walker::{DenseCounts, StepMemo};
use crate::Estimate;

/// I.i.d. increments, `+1` with probability `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyLaw {
    pub rho: f64,
}

impl StrategyLaw {
    pub fn new(rho: f64) -> Result<Self, Error> {
        if rho > 0.0 && rho < 1.0 {
            Ok(Self { rho })
        } else {
            Err(Error::ProbabilityOutOfRange(rho))
        }
    }

    /// The strategy with mean increment `a`.
    pub fn with_mean(a: f64) -> Result<Self, Error> {
        if !(a > -1.0 && a < 1.0) {
            return Err(Error::VelocityOutOfRange(a));
        }
        Self::new(0.5 * (1.0 + a))
    }

    pub fn drift(&self) -> f64 {
        2.0 * self.rho - 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EntropyBudget {
    pub horizon: usize,
    pub replicas: u64,
    pub seed: u64,
}

impl Default for EntropyBudget {
    fn default() -> Self {
        Self { horizon: 2000, replicas: 200, seed: 0 }
    }
}

/// Per-step relative entropy `Σ_z r(z) ln(r(z) / q(z|w))` along paths of
/// the strategy, averaged over steps after a 10% burn-in and then over
/// replicas.
pub fn entropy_rate_iid<K, R>(
    kernel: &K,
    strategy: StrategyLaw,
    horizon: usize,
    replicas: u64,
    seed: u64,
    runner: &R,
) -> Result<Estimate, Error>
where
    K: SiteKernel + Sync + ?Sized,
    R: ReplicaMap,
{
    let strategy = StrategyLaw::new(strategy.rho)?;
    if strategy.drift() == 0.0 {
        return Err(Error::ZeroDrift);
    }
    let burn_in = horizon / 10;
    if horizon <= burn_in || horizon < 2 {
        return Err(Error::InvalidArgument("entropy horizon must be at least 2".into()));
    }
    if replicas < 2 {
        return Err(Error::InvalidArgument("entropy estimation needs at least 2 replicas".into()));
    }
    let rho = strategy.rho;
    let (ln_rho, ln_sigma) = (log(rho), log(1.0 - rho));
    let rates: Vec<f64> = runner.map_replicas(replicas, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, r));
        let mut memo = StepMemo::default();
        let mut counts = DenseCounts::new(horizon);
        let mut acc = KahanSum::default();
        let mut x = 0i64;
        for t in 0..horizon {
            let here = counts.get(x);
            if t >= burn_in {
                let (ln_right, ln_left) = memo.log_steps(kernel, here);
                acc.add(rho * (ln_rho - ln_right) + (1.0 - rho) * (ln_sigma - ln_left));
            }
            let step = if rng.gen::<f64>() < rho { Step::Right } else { Step::Left };
            counts.record(x, step);
            x += step.value();
        }
        acc.total() / (horizon - burn_in) as f64
    });
    let (value, stderr) = mean_and_stderr(&rates);
    Ok(Estimate { value, stderr })
}

/// Upper bound on `Ī(a)` from the unique i.i.d. strategy with mean `a`.
pub fn averaged_rate_upper_bound<K, R>(kernel: &K, a: f64, budget: &EntropyBudget, runner: &R) -> Result<Estimate, Error>
where
    K: SiteKernel + Sync + ?Sized,
    R: ReplicaMap,
{
    if a == 0.0 {
        return Err(Error::ZeroDrift);
    }
    let strategy = StrategyLaw::with_mean(a)?;
    entropy_rate_iid(kernel, strategy, budget.horizon, budget.replicas, budget.seed, runner)
}

/// `KL(Bernoulli(rho) ‖ Bernoulli(p))`.
#[cfg(test)]
fn bernoulli_kl(rho: f64, p: f64) -> f64 {
    rho * log(rho / p) + (1.0 - rho) * log((1.0 - rho) / (1.0 - p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::EnvironmentLaw;
    use crate::ldp::cramer_rate;
    use crate::replicas::Sequential;

    #[test]
    fn matching_strategy_has_zero_entropy() {
        let law = EnvironmentLaw::point(0.7).unwrap();
        let est = entropy_rate_iid(&law, StrategyLaw::new(0.7).unwrap(), 500, 10, 1, &Sequential).unwrap();
        assert!(est.value.abs() < 1e-15, "{}", est.value);
    }

    #[test]
    fn point_mass_reduces_to_bernoulli_kl() {
        let law = EnvironmentLaw::point(0.7).unwrap();
        let est = entropy_rate_iid(&law, StrategyLaw::new(0.55).unwrap(), 500, 20, 2, &Sequential).unwrap();
        let kl = bernoulli_kl(0.55, 0.7);
        // History-free kernel: the summand is constant.
        assert!((est.value - kl).abs() < 1e-12 + 3.0 * est.stderr);
    }

    #[test]
    fn bound_equals_cramer_for_point_mass() {
        let law = EnvironmentLaw::point(0.7).unwrap();
        let budget = EntropyBudget { horizon: 400, replicas: 20, seed: 5 };
        let bound = averaged_rate_upper_bound(&law, 0.5, &budget, &Sequential).unwrap();
        let exact = cramer_rate(&law.quantile(0.5), 0.5).unwrap();
        assert!((bound.value - exact).abs() <= 1e-12 + 3.0 * bound.stderr);
    }

    #[test]
    fn clipped_beta_entropy_is_positive_and_shrinks() {
        let law = EnvironmentLaw::beta(2.0, 2.0, Some((0.05, 0.95))).unwrap();
        let strategy = StrategyLaw::new(0.75).unwrap();
        let small = entropy_rate_iid(&law, strategy, 400, 16, 3, &Sequential).unwrap();
        let large = entropy_rate_iid(&law, strategy, 400, 256, 3, &Sequential).unwrap();
        assert!(small.value > 0.0 && small.value.is_finite());
        assert!(large.value > 0.0);
        // 16x the replicas: about a quarter of the error.
        assert!(large.stderr < 0.5 * small.stderr, "{} vs {}", large.stderr, small.stderr);
    }

    #[test]
    fn zero_drift_is_rejected() {
        let law = EnvironmentLaw::point(0.7).unwrap();
        let budget = EntropyBudget::default();
        assert!(matches!(averaged_rate_upper_bound(&law, 0.0, &budget, &Sequential), Err(Error::ZeroDrift)));
        assert!(matches!(
            entropy_rate_iid(&law, StrategyLaw { rho: 0.5 }, 100, 4, 0, &Sequential),
            Err(Error::ZeroDrift)
        ));
        assert!(averaged_rate_upper_bound(&law, 1.0, &budget, &Sequential).is_err());
    }

    #[test]
    fn bound_at_speed_is_small_and_nonnegative() {
        let law = EnvironmentLaw::mixture(&[(0.7, 0.5), (0.6, 0.5)]).unwrap();
        let speed = crate::asymptotics::lln_speed(&law).unwrap();
        let budget = EntropyBudget { horizon: 2000, replicas: 20, seed: 9 };
        let bound = averaged_rate_upper_bound(&law, speed, &budget, &Sequential).unwrap();
        assert!(bound.value.is_finite() && bound.value >= 0.0);
    }
}
