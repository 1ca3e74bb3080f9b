//! Closed-form one-dimensional asymptotics: direction of transience,
//! law-of-large-numbers speed and regime classification, with a Monte Carlo
//! harness for the speed.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hash::derive_seed;
use crate::law::{EnvironmentLaw, Functional};
use crate::numeric::mean_and_stderr;
use crate::replicas::ReplicaMap;
use crate::walker::{quenched_endpoint, Environment};

/// `|E[log p/q]|` at or below this is treated as zero.
pub const RECURRENCE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    TransientRight,
    TransientLeft,
    Recurrent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    BallisticRight,
    BallisticLeft,
    TransientRightZeroSpeed,
    TransientLeftZeroSpeed,
    Recurrent,
}

impl Regime {
    pub fn direction(self) -> Direction {
        match self {
            Regime::BallisticRight | Regime::TransientRightZeroSpeed => Direction::TransientRight,
            Regime::BallisticLeft | Regime::TransientLeftZeroSpeed => Direction::TransientLeft,
            Regime::Recurrent => Direction::Recurrent,
        }
    }

    pub fn is_ballistic(self) -> bool {
        matches!(self, Regime::BallisticRight | Regime::BallisticLeft)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    /// `E[log p/q]`.
    pub criterion_value: f64,
    /// `E[q/p]`.
    pub q_over_p_mean: f64,
    /// `E[p/q]`.
    pub p_over_q_mean: f64,
    pub speed: f64,
    pub regime: Regime,
}

fn direction_of(criterion: f64) -> Direction {
    if criterion > RECURRENCE_TOLERANCE {
        Direction::TransientRight
    } else if criterion < -RECURRENCE_TOLERANCE {
        Direction::TransientLeft
    } else {
        Direction::Recurrent
    }
}

/// Direction of transience from the sign of `E[log p/q]`.
pub fn solomon_criterion(law: &EnvironmentLaw) -> Result<Direction, Error> {
    law.expectation(Functional::LogRatio).map(direction_of)
}

/// `(1 - r) / (1 + r)` for a mean ratio `r < 1`, zero otherwise.
fn speed_from_ratio(ratio: f64) -> f64 {
    if ratio < 1.0 {
        (1.0 - ratio) / (1.0 + ratio)
    } else {
        0.0
    }
}

/// Limiting velocity `lim S_n / n`. Left-transient laws are handled by
/// reflecting, applying the right-transient formula and negating.
pub fn lln_speed(law: &EnvironmentLaw) -> Result<f64, Error> {
    classify_regime(law).map(|r| r.speed)
}

pub fn classify_regime(law: &EnvironmentLaw) -> Result<RegimeReport, Error> {
    let criterion_value = law.expectation(Functional::LogRatio)?;
    let q_over_p_mean = law.expectation(Functional::QOverP)?;
    let p_over_q_mean = law.mirror().expectation(Functional::QOverP)?;
    let point = law.atoms().filter(|a| a.len() == 1).map(|a| a[0].0);
    let (regime, speed) = match direction_of(criterion_value) {
        Direction::TransientRight if q_over_p_mean < 1.0 => {
            let speed = match point {
                Some(jump) => jump.p_right() - jump.p_left(),
                None => speed_from_ratio(q_over_p_mean),
            };
            (Regime::BallisticRight, speed)
        }
        Direction::TransientRight => (Regime::TransientRightZeroSpeed, 0.0),
        Direction::TransientLeft if p_over_q_mean < 1.0 => {
            let speed = match point {
                Some(jump) => jump.p_right() - jump.p_left(),
                None => -speed_from_ratio(p_over_q_mean),
            };
            (Regime::BallisticLeft, speed)
        }
        Direction::TransientLeft => (Regime::TransientLeftZeroSpeed, 0.0),
        Direction::Recurrent => (Regime::Recurrent, 0.0),
    };
    Ok(RegimeReport { criterion_value, q_over_p_mean, p_over_q_mean, speed, regime })
}

/// One replica of [`estimate_speed_mc`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedReplica {
    pub replica: u64,
    pub seed: u64,
    pub endpoint: i64,
    pub velocity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub steps: usize,
    pub mean: f64,
    pub stderr: f64,
    pub replicas: Vec<SpeedReplica>,
}

impl SpeedEstimate {
    pub fn median_velocity(&self) -> f64 {
        median(self.replicas.iter().map(|r| r.velocity).collect())
    }

    /// Fraction of replicas with `S_n > 0`.
    pub fn fraction_positive(&self) -> f64 {
        let hits = self.replicas.iter().filter(|r| r.endpoint > 0).count();
        hits as f64 / self.replicas.len() as f64
    }
}

pub fn median(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Replica-averaged `S_n / n`, each replica walking quenched in its own
/// freshly drawn environment.
pub fn estimate_speed_mc<R: ReplicaMap>(
    law: &EnvironmentLaw,
    n: usize,
    replicas: u64,
    seed: u64,
    runner: &R,
) -> Result<SpeedEstimate, Error> {
    if n == 0 {
        return Err(Error::InvalidArgument("speed estimation needs n >= 1".into()));
    }
    if replicas < 2 {
        return Err(Error::InvalidArgument("speed estimation needs at least 2 replicas".into()));
    }
    let runs = runner.map_replicas(replicas, |replica| {
        let replica_seed = derive_seed(seed, replica);
        let env = Environment::new(law.clone(), derive_seed(replica_seed, 0));
        let endpoint = quenched_endpoint(&env, n, derive_seed(replica_seed, 1));
        SpeedReplica { replica, seed: replica_seed, endpoint, velocity: endpoint as f64 / n as f64 }
    });
    let velocities: Vec<f64> = runs.iter().map(|r| r.velocity).collect();
    let (mean, stderr) = mean_and_stderr(&velocities);
    Ok(SpeedEstimate { steps: n, mean, stderr, replicas: runs })
}
