//! Quenched rate function from exact dynamic programming.

use alloc::vec::Vec;

use crate::error::Error;
use crate::ldp::{validate_grid, validate_ladder, window_sites, FiniteRate, Flavor, RatePoint, RateProfile};
use crate::walker::{quenched_distribution, Environment};

/// `-(1/n) ln Q^ω[S_n/n ≃ a]` for every `a` in `grid` and `n` in `ladder`,
/// computed exactly, then extrapolated to `n -> ∞`. Fully deterministic.
pub fn estimate_quenched_rate(
    env: &Environment,
    grid: &[f64],
    ladder: &[usize],
    window: u32,
) -> Result<RateProfile, Error> {
    validate_grid(grid, false)?;
    validate_ladder(ladder, window)?;
    let mut rungs: Vec<Vec<FiniteRate>> = grid.iter().map(|_| Vec::with_capacity(ladder.len())).collect();
    for &n in ladder {
        let dist = quenched_distribution(env, n, n);
        for (a, rungs) in grid.iter().zip(rungs.iter_mut()) {
            let (lo, hi) = window_sites(n, *a, window);
            let log_p = dist.log_prob_between(lo, hi);
            rungs.push(FiniteRate {
                n,
                rate: Some(-log_p / n as f64),
                stderr: 0.0,
                exact: true,
                ess: None,
                theta: None,
            });
        }
    }
    let points = grid.iter().zip(rungs).map(|(&a, finite)| RatePoint::from_rungs(a, finite)).collect();
    Ok(RateProfile { flavor: Flavor::Quenched, window, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::EnvironmentLaw;
    use crate::ldp::cramer_rate;

    #[test]
    fn degenerate_environment_reproduces_cramer() {
        let law = EnvironmentLaw::point(0.7).unwrap();
        let jump = law.quantile(0.5);
        let env = Environment::new(law, 0);
        let grid = [-0.4, 0.0, 0.2, 0.5, 0.6, 0.9];
        let profile = estimate_quenched_rate(&env, &grid, &[200, 400, 800], 2).unwrap();
        for point in &profile.points {
            let exact = cramer_rate(&jump, point.velocity).unwrap();
            let got = point.extrapolated.unwrap();
            assert!((got - exact).abs() < 0.02, "a={} {got} vs {exact}", point.velocity);
        }
    }

    #[test]
    fn finite_n_rates_decrease_along_ladder_for_constant_environment() {
        let env = Environment::new(EnvironmentLaw::point(0.7).unwrap(), 0);
        let profile = estimate_quenched_rate(&env, &[0.0, 0.2, 0.6], &[50, 100, 200, 400], 2).unwrap();
        for point in &profile.points {
            for w in point.finite.windows(2) {
                assert!(w[1].rate.unwrap() <= w[0].rate.unwrap() + 1e-6);
            }
        }
    }

    #[test]
    fn deterministic_and_validated() {
        let env = Environment::new(EnvironmentLaw::beta(2.0, 2.0, Some((0.05, 0.95))).unwrap(), 5);
        let a = estimate_quenched_rate(&env, &[0.1, 0.3], &[20, 40], 2).unwrap();
        let b = estimate_quenched_rate(&env, &[0.1, 0.3], &[20, 40], 2).unwrap();
        assert_eq!(a, b);
        assert!(estimate_quenched_rate(&env, &[1.2], &[20], 2).is_err());
        assert!(estimate_quenched_rate(&env, &[0.1], &[40, 20], 2).is_err());
        assert!(estimate_quenched_rate(&env, &[0.1], &[20], 0).is_err());
    }
}
