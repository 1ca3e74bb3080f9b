//! Exact check of `Q^ω[S_{k+l} ≃ (k+l)a] ≥ Q^ω[S_k ≃ ka] · Q^{τ_x ω}[S_l ≃ la]`
//! where `x` is the lattice site nearest `ka`.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::ldp::nearest_site;
use crate::walker::{quenched_distribution, Environment};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperadditivityMargin {
    pub k: usize,
    pub l: usize,
    /// `log_lhs - log_first - log_second`; nonnegative when the inequality holds.
    pub margin: f64,
    pub log_lhs: f64,
    pub log_first: f64,
    pub log_second: f64,
}

/// Log-margins of the superadditivity inequality for each `(k, l)`.
///
/// With `x = nearest_site(k, ka)` and `c = nearest_site(l, la)` the factors
/// are taken over `[x - w, x + w]` at time `k` and `[c - w, c + w]` at time
/// `l` in the environment shifted by `x`. The left side uses
/// `[x + c - 2w, x + c + 2w]` at time `k + l`, wide enough to contain every
/// sum of the two component windows.
pub fn check_superadditivity(
    env: &Environment,
    a: f64,
    pairs: &[(usize, usize)],
    window: u32,
) -> Result<Vec<SuperadditivityMargin>, Error> {
    if !(-1.0..=1.0).contains(&a) {
        return Err(Error::VelocityOutOfRange(a));
    }
    if window == 0 {
        return Err(Error::InvalidArgument("window must be at least one lattice site".into()));
    }
    let w = i64::from(window);
    pairs
        .iter()
        .map(|&(k, l)| {
            if k == 0 || l == 0 {
                return Err(Error::InvalidArgument("superadditivity pairs need k, l >= 1".into()));
            }
            let x = nearest_site(k, k as f64 * a);
            let c = nearest_site(l, l as f64 * a);
            let log_first = quenched_distribution(env, k, k).log_prob_between(x - w, x + w);
            let log_second = quenched_distribution(&env.shifted(x), l, l).log_prob_between(c - w, c + w);
            let log_lhs = quenched_distribution(env, k + l, k + l).log_prob_between(x + c - 2 * w, x + c + 2 * w);
            Ok(SuperadditivityMargin { k, l, margin: log_lhs - log_first - log_second, log_lhs, log_first, log_second })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::EnvironmentLaw;

    #[test]
    fn constant_environment_satisfies_inequality() {
        let env = Environment::new(EnvironmentLaw::point(0.7).unwrap(), 0);
        let margins = check_superadditivity(&env, 0.4, &[(50, 50), (25, 75), (7, 13)], 2).unwrap();
        for m in &margins {
            assert!(m.margin >= -1e-12, "{m:?}");
        }
    }

    #[test]
    fn zero_velocity_smoke() {
        let law = EnvironmentLaw::beta(2.0, 2.0, Some((0.05, 0.95))).unwrap();
        let env = Environment::new(law, 4);
        let margins = check_superadditivity(&env, 0.0, &[(10, 10), (20, 30)], 1).unwrap();
        assert_eq!(margins.len(), 2);
        assert!(margins.iter().all(|m| m.margin.is_finite()));
    }

    #[test]
    fn invalid_input_is_rejected() {
        let env = Environment::new(EnvironmentLaw::point(0.7).unwrap(), 0);
        assert!(check_superadditivity(&env, 1.5, &[(5, 5)], 2).is_err());
        assert!(check_superadditivity(&env, 0.4, &[(0, 5)], 2).is_err());
        assert!(check_superadditivity(&env, 0.4, &[(5, 5)], 0).is_err());
    }
}
