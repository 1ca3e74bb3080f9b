//! Large-deviation rate functions for `S_n / n`.
//!
//! * [`cramer`]: the classical Legendre-transform rate of a single jump law,
//!   and the explicit rate at zero velocity.
//! * [`quenched`]: `I(a)` in a fixed environment from exact dynamic
//!   programming on a ladder of `n`, extrapolated in `1/n`.
//! * [`averaged`]: `Ī(a)` from exact enumeration on small `n` and
//!   exponentially tilted importance sampling of the posterior kernel above.
//! * [`entropy`]: relative-entropy upper bounds on `Ī(a)` from i.i.d.
//!   strategies.
//! * [`superadd`]: exact check of the superadditivity of quenched
//!   log-probabilities.
//!
//! "`S_n/n ≃ a`" always means `S_n ∈ [na - w, na + w]` for an integer
//! half-width `w >= 1` (sites of the wrong parity carry no mass).

use alloc::vec::Vec;
use libm::sqrt;
use serde::{Deserialize, Serialize};

use crate::error::Error;

pub mod averaged;
pub mod cramer;
pub mod entropy;
pub mod quenched;
pub mod superadd;

pub use averaged::{estimate_averaged_rate, ImportanceSettings};
pub use cramer::{cramer_rate, legendre_pair, log_mgf, rate_at_zero, LegendrePair};
pub use entropy::{averaged_rate_upper_bound, entropy_rate_iid, EntropyBudget, StrategyLaw};
pub use quenched::estimate_quenched_rate;
pub use superadd::{check_superadditivity, SuperadditivityMargin};

/// Default window half-width in lattice sites.
pub const DEFAULT_WINDOW: u32 = 2;

/// Lattice sites `[lo, hi]` with the parity of `n` inside `[na - w, na + w]`.
pub fn window_sites(n: usize, a: f64, half_width: u32) -> (i64, i64) {
    let n_i = n as i64;
    let center = n as f64 * a;
    let w = f64::from(half_width);
    let mut lo = libm::ceil(center - w) as i64;
    let mut hi = libm::floor(center + w) as i64;
    if (lo - n_i).rem_euclid(2) != 0 {
        lo += 1;
    }
    if (hi - n_i).rem_euclid(2) != 0 {
        hi -= 1;
    }
    (lo.max(-n_i), hi.min(n_i))
}

/// Lattice site of parity `n` nearest to `target`, clamped to `[-n, n]`.
pub fn nearest_site(n: usize, target: f64) -> i64 {
    let n_i = n as i64;
    let shifted = (target - n as f64) / 2.0;
    let site = 2 * (libm::round(shifted) as i64) + n_i;
    site.clamp(-n_i, n_i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Quenched,
    Averaged,
}

/// `-(1/n) ln P[S_n/n ≃ a]` at one rung of the ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteRate {
    pub n: usize,
    /// `None` when the sampled estimate was unreliable.
    pub rate: Option<f64>,
    /// Statistical standard error of `rate` (zero for exact rungs).
    pub stderr: f64,
    pub exact: bool,
    /// Effective sample size of a sampled rung.
    pub ess: Option<f64>,
    /// Tilt used by a sampled rung.
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub velocity: f64,
    pub finite: Vec<FiniteRate>,
    /// `n -> ∞` limit of the affine-in-`1/n` fit, when every rung is reliable.
    pub extrapolated: Option<f64>,
    /// Residual scale of the fit.
    pub extrapolation_error: f64,
    /// Sampling error propagated through the fit.
    pub statistical_error: f64,
}

impl RatePoint {
    pub fn reliable(&self) -> bool {
        self.extrapolated.is_some()
    }

    /// Total error bar: fit residual plus propagated sampling error.
    pub fn error(&self) -> f64 {
        self.extrapolation_error + self.statistical_error
    }

    fn from_rungs(velocity: f64, finite: Vec<FiniteRate>) -> Self {
        let rungs: Option<Vec<(usize, f64, f64)>> =
            finite.iter().map(|f| f.rate.map(|r| (f.n, r, f.stderr))).collect();
        match rungs.as_deref().map(extrapolate) {
            Some(fit) => Self {
                velocity,
                finite,
                extrapolated: Some(fit.intercept),
                extrapolation_error: fit.residual,
                statistical_error: fit.stat_error,
            },
            None => Self {
                velocity,
                finite,
                extrapolated: None,
                extrapolation_error: f64::NAN,
                statistical_error: f64::NAN,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateProfile {
    pub flavor: Flavor,
    pub window: u32,
    pub points: Vec<RatePoint>,
}

impl RateProfile {
    pub fn point_at(&self, velocity: f64) -> Option<&RatePoint> {
        self.points.iter().find(|p| (p.velocity - velocity).abs() < 1e-12)
    }
}

/// Result of fitting `rate(n) ≈ intercept + slope / n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation {
    pub intercept: f64,
    pub slope: f64,
    pub residual: f64,
    pub stat_error: f64,
}

/// Least-squares fit of `rate = intercept + slope / n` over the top half of
/// the ladder (at least two rungs when available). Input is
/// `(n, rate, stderr)` sorted by `n`.
pub fn extrapolate(rungs: &[(usize, f64, f64)]) -> Extrapolation {
    match rungs.len() {
        0 => Extrapolation { intercept: f64::NAN, slope: f64::NAN, residual: f64::NAN, stat_error: f64::NAN },
        1 => Extrapolation { intercept: rungs[0].1, slope: 0.0, residual: 0.0, stat_error: rungs[0].2 },
        len => {
            let keep = len.div_ceil(2).max(2);
            let used = &rungs[len - keep..];
            let m = used.len() as f64;
            let xs: Vec<f64> = used.iter().map(|r| 1.0 / r.0 as f64).collect();
            let sx: f64 = xs.iter().sum();
            let sxx: f64 = xs.iter().map(|x| x * x).sum();
            let det = m * sxx - sx * sx;
            // Intercept and slope as linear combinations of the rates.
            let c_int: Vec<f64> = xs.iter().map(|x| (sxx - x * sx) / det).collect();
            let c_slope: Vec<f64> = xs.iter().map(|x| (m * x - sx) / det).collect();
            let intercept: f64 = c_int.iter().zip(used).map(|(c, r)| c * r.1).sum();
            let slope: f64 = c_slope.iter().zip(used).map(|(c, r)| c * r.1).sum();
            let ss: f64 = xs
                .iter()
                .zip(used)
                .map(|(x, r)| {
                    let e = r.1 - intercept - slope * x;
                    e * e
                })
                .sum();
            let residual = if used.len() > 2 { sqrt(ss / (m - 2.0)) } else { 0.0 };
            let stat_error = sqrt(c_int.iter().zip(used).map(|(c, r)| c * c * r.2 * r.2).sum::<f64>());
            Extrapolation { intercept, slope, residual, stat_error }
        }
    }
}

pub(crate) fn validate_grid(grid: &[f64], open: bool) -> Result<(), Error> {
    for &a in grid {
        let ok = if open { a > -1.0 && a < 1.0 } else { (-1.0..=1.0).contains(&a) };
        if !ok {
            return Err(Error::VelocityOutOfRange(a));
        }
    }
    Ok(())
}

pub(crate) fn validate_ladder(ladder: &[usize], window: u32) -> Result<(), Error> {
    if ladder.is_empty() || ladder[0] == 0 || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n ladder must be non-empty, positive and strictly increasing".into()));
    }
    if window == 0 {
        return Err(Error::InvalidArgument("window must be at least one lattice site".into()));
    }
    Ok(())
}
