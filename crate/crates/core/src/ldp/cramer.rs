//! Rate functions of a single jump law.

use libm::{exp, log, log1p};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::law::{EnvironmentLaw, JumpDistribution};

/// A velocity and its conjugate tilt under the Legendre transform of
/// `Λ(θ) = ln(p e^θ + q e^{-θ})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegendrePair {
    /// Maximizer of `θa - Λ(θ)`; infinite at `|a| = 1`.
    pub theta: f64,
    /// `Λ(theta)`.
    pub log_mgf: f64,
    pub rate: f64,
    pub velocity: f64,
}

/// `Λ(θ) = ln(p e^θ + q e^{-θ})`, evaluated without overflow.
pub fn log_mgf(jump: &JumpDistribution, theta: f64) -> f64 {
    let (p, q) = (jump.p_right(), jump.p_left());
    if theta >= 0.0 {
        theta + log(p + q * exp(-2.0 * theta))
    } else {
        -theta + log(q + p * exp(2.0 * theta))
    }
}

/// `x ln(x / y)` with the convention `0 ln 0 = 0`.
fn xlogx_over(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * log(x / y)
    }
}

/// `sup_θ [θa - Λ(θ)]`: the relative entropy of a jump law with mean `a`
/// with respect to `jump`.
pub fn cramer_rate(jump: &JumpDistribution, a: f64) -> Result<f64, Error> {
    if !(-1.0..=1.0).contains(&a) {
        return Err(Error::VelocityOutOfRange(a));
    }
    if a == 1.0 {
        return Ok(-log(jump.p_right()));
    }
    if a == -1.0 {
        return Ok(-log(jump.p_left()));
    }
    let up = 0.5 * (1.0 + a);
    let down = 0.5 * (1.0 - a);
    let rate = xlogx_over(up, jump.p_right()) + xlogx_over(down, jump.p_left());
    Ok(rate.max(0.0))
}

pub fn legendre_pair(jump: &JumpDistribution, a: f64) -> Result<LegendrePair, Error> {
    let rate = cramer_rate(jump, a)?;
    let theta = if a == 1.0 {
        f64::INFINITY
    } else if a == -1.0 {
        f64::NEG_INFINITY
    } else {
        0.5 * (log1p(a) - log1p(-a) + log(jump.p_left()) - log(jump.p_right()))
    };
    let log_mgf = if theta.is_finite() { log_mgf(jump, theta) } else { f64::INFINITY };
    Ok(LegendrePair { theta, log_mgf, rate, velocity: a })
}

/// Explicit rate at zero velocity, common to the quenched and averaged
/// measures: `-inf_{p in hull} inf_θ ln(p e^θ + q e^{-θ})`.
///
/// The inner infimum is `ln(2 sqrt(pq))`; its negative decreases towards
/// `p = 1/2`, so the outer infimum sits at the hull point nearest `1/2`.
pub fn rate_at_zero(law: &EnvironmentLaw) -> f64 {
    let (lo, hi) = law.hull_jumps();
    let nearest = if hi.p_right() < 0.5 {
        hi
    } else if lo.p_right() > 0.5 {
        lo
    } else {
        return 0.0;
    };
    -0.5 * log(4.0 * nearest.p_right() * nearest.p_left())
}
