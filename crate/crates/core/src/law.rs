//! Laws of a single site's jump probabilities and their moments.
//!
//! In a product environment every site `x` carries an independent draw
//! `p(x)` from one law; the walk steps right with probability `p(x)` and left
//! with `q(x) = 1 - p(x)`. Three families are supported: a point mass (the
//! classical walk), finite mixtures, and Beta laws optionally truncated to a
//! closed subinterval of (0, 1).

use alloc::vec::Vec;
use libm::{exp, log};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::numeric::{self, BetaSegment, KahanSum};
use crate::posterior::Step;

const WEIGHT_TOLERANCE: f64 = 1e-12;

/// One site's jump law: right with `p_right`, left with `p_left`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpDistribution {
    p_right: f64,
    p_left: f64,
}

impl JumpDistribution {
    pub fn new(p_right: f64) -> Result<Self, Error> {
        let p_left = 1.0 - p_right;
        if !(p_right > 0.0 && p_right < 1.0 && p_left > 0.0 && p_left < 1.0) {
            return Err(Error::ProbabilityOutOfRange(p_right));
        }
        Ok(Self { p_right, p_left })
    }

    #[inline]
    pub fn p_right(&self) -> f64 {
        self.p_right
    }

    #[inline]
    pub fn p_left(&self) -> f64 {
        self.p_left
    }

    #[inline]
    pub fn probability(&self, step: Step) -> f64 {
        match step {
            Step::Right => self.p_right,
            Step::Left => self.p_left,
        }
    }

    /// Mean displacement `p - q`.
    pub fn drift(&self) -> f64 {
        self.p_right - self.p_left
    }

    /// Reflection `p <-> q`. Swaps the stored values, so it is an exact
    /// involution.
    pub fn mirror(&self) -> Self {
        Self { p_right: self.p_left, p_left: self.p_right }
    }
}

/// Jump counts out of one site, split by direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CountVector {
    pub right: u32,
    pub left: u32,
}

impl CountVector {
    pub const ZERO: Self = Self { right: 0, left: 0 };

    pub fn new(right: u32, left: u32) -> Self {
        Self { right, left }
    }

    pub fn get(&self, step: Step) -> u32 {
        match step {
            Step::Right => self.right,
            Step::Left => self.left,
        }
    }

    /// The vector with one more jump in direction `step`.
    pub fn incremented(self, step: Step) -> Self {
        match step {
            Step::Right => Self { right: self.right + 1, ..self },
            Step::Left => Self { left: self.left + 1, ..self },
        }
    }

    pub fn total(&self) -> u64 {
        u64::from(self.right) + u64::from(self.left)
    }

    pub fn is_zero(&self) -> bool {
        self.right == 0 && self.left == 0
    }
}

/// Serializable description of an [`EnvironmentLaw`].
///
/// ```json
/// {"kind":"point","p":0.7}
/// {"kind":"mixture","atoms":[{"p":0.7,"w":0.5},{"p":0.6,"w":0.5}]}
/// {"kind":"beta","alpha":2,"beta":2,"clip":[0.05,0.95]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LawSpec {
    Point {
        p: f64,
    },
    Mixture {
        atoms: Vec<AtomSpec>,
    },
    Beta {
        alpha: f64,
        beta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        clip: Option<[f64; 2]>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub p: f64,
    pub w: f64,
}

/// Functionals of `p` whose β-expectations drive the one-dimensional criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    /// `log(p / q)`.
    LogRatio,
    /// `q / p`.
    QOverP,
}

impl Functional {
    fn name(self) -> &'static str {
        match self {
            Functional::LogRatio => "log(p/q)",
            Functional::QOverP => "q/p",
        }
    }

    fn eval(self, p: f64) -> f64 {
        match self {
            Functional::LogRatio => log(p) - log(1.0 - p),
            Functional::QOverP => (1.0 - p) / p,
        }
    }

    fn eval_jump(self, jump: &JumpDistribution) -> f64 {
        match self {
            Functional::LogRatio => log(jump.p_right) - log(jump.p_left),
            Functional::QOverP => jump.p_left / jump.p_right,
        }
    }
}

/// Closed interval `[lo, hi]` of mean drifts `2p - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftInterval {
    pub lo: f64,
    pub hi: f64,
}

impl DriftInterval {
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Zero drift is attainable inside the convex hull of the support.
    pub fn is_nestling(&self) -> bool {
        self.contains(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Atom {
    jump: JumpDistribution,
    weight: f64,
    ln_weight: f64,
    ln_p: f64,
    ln_q: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct BetaLaw {
    alpha: f64,
    beta: f64,
    ln_beta: f64,
    /// `None` when unclipped.
    segment: Option<BetaSegment>,
    /// Inverse-transform sampler over the support.
    sampler: BetaSegment,
}

impl BetaLaw {
    fn new(alpha: f64, beta: f64, segment: Option<BetaSegment>) -> Self {
        let sampler = segment.unwrap_or_else(|| BetaSegment::new(alpha, beta, 0.0, 1.0));
        Self { alpha, beta, ln_beta: numeric::ln_beta(alpha, beta), segment, sampler }
    }

    /// `ln` of the truncated mass of Beta(a, b) on the clip interval
    /// (zero when unclipped).
    fn ln_clip_mass(&self, a: f64, b: f64) -> f64 {
        match &self.segment {
            None => 0.0,
            Some(seg) if a == self.alpha && b == self.beta => seg.ln_mass,
            Some(seg) => BetaSegment::new(a, b, seg.lo, seg.hi).ln_mass,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Point { jump: JumpDistribution, ln_p: f64, ln_q: f64 },
    Mixture(Vec<Atom>),
    Beta(BetaLaw),
}

/// Validated, immutable law β of a single site's right-jump probability.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentLaw {
    kind: Kind,
}

impl EnvironmentLaw {
    pub fn point(p: f64) -> Result<Self, Error> {
        Self::from_spec(&LawSpec::Point { p })
    }

    pub fn mixture(atoms: &[(f64, f64)]) -> Result<Self, Error> {
        Self::from_spec(&LawSpec::Mixture {
            atoms: atoms.iter().map(|&(p, w)| AtomSpec { p, w }).collect(),
        })
    }

    pub fn beta(alpha: f64, beta: f64, clip: Option<(f64, f64)>) -> Result<Self, Error> {
        Self::from_spec(&LawSpec::Beta { alpha, beta, clip: clip.map(|(lo, hi)| [lo, hi]) })
    }

    /// Validates a description and builds the law.
    pub fn from_spec(spec: &LawSpec) -> Result<Self, Error> {
        let kind = match spec {
            LawSpec::Point { p } => Self::point_kind(JumpDistribution::new(*p)?),
            LawSpec::Mixture { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::EmptyMixture);
                }
                let mut total = KahanSum::default();
                let mut built = Vec::with_capacity(atoms.len());
                for atom in atoms {
                    let jump = JumpDistribution::new(atom.p)?;
                    if !(atom.w > 0.0 && atom.w.is_finite()) {
                        return Err(Error::NonPositiveWeight(atom.w));
                    }
                    total.add(atom.w);
                    built.push(Atom::new(jump, atom.w));
                }
                let total = total.total();
                if (total - 1.0).abs() > WEIGHT_TOLERANCE {
                    return Err(Error::WeightsNotNormalized(total));
                }
                Kind::Mixture(built)
            }
            LawSpec::Beta { alpha, beta, clip } => {
                let (alpha, beta) = (*alpha, *beta);
                if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
                    return Err(Error::InvalidShape { alpha, beta });
                }
                let segment = match clip {
                    None => None,
                    Some([lo, hi]) => {
                        let (lo, hi) = (*lo, *hi);
                        if !(lo > 0.0 && lo <= hi && hi < 1.0) {
                            return Err(Error::InvalidClip { lo, hi });
                        }
                        Some(BetaSegment::new(alpha, beta, lo, hi))
                    }
                };
                Kind::Beta(BetaLaw::new(alpha, beta, segment))
            }
        };
        Ok(Self { kind })
    }

    fn point_kind(jump: JumpDistribution) -> Kind {
        Kind::Point { jump, ln_p: log(jump.p_right), ln_q: log(jump.p_left) }
    }

    /// Serializable description of this law.
    pub fn spec(&self) -> LawSpec {
        match &self.kind {
            Kind::Point { jump, .. } => LawSpec::Point { p: jump.p_right },
            Kind::Mixture(atoms) => LawSpec::Mixture {
                atoms: atoms.iter().map(|a| AtomSpec { p: a.jump.p_right, w: a.weight }).collect(),
            },
            Kind::Beta(b) => LawSpec::Beta {
                alpha: b.alpha,
                beta: b.beta,
                clip: b.segment.as_ref().map(|s| [s.lo, s.hi]),
            },
        }
    }

    /// Whether the law is a single atom.
    pub fn is_degenerate(&self) -> bool {
        match &self.kind {
            Kind::Point { .. } => true,
            Kind::Mixture(atoms) => atoms.len() == 1,
            Kind::Beta(b) => b.segment.as_ref().is_some_and(|s| s.lo == s.hi),
        }
    }

    /// The atoms and weights of a point or mixture law.
    pub fn atoms(&self) -> Option<Vec<(JumpDistribution, f64)>> {
        match &self.kind {
            Kind::Point { jump, .. } => Some(alloc::vec![(*jump, 1.0)]),
            Kind::Mixture(atoms) => Some(atoms.iter().map(|a| (a.jump, a.weight)).collect()),
            Kind::Beta(_) => None,
        }
    }

    /// Image of the law under the reflection `p <-> 1 - p`.
    pub fn mirror(&self) -> Self {
        let kind = match &self.kind {
            Kind::Point { jump, .. } => Self::point_kind(jump.mirror()),
            Kind::Mixture(atoms) => {
                Kind::Mixture(atoms.iter().map(|a| Atom::new(a.jump.mirror(), a.weight)).collect())
            }
            Kind::Beta(b) => Kind::Beta(BetaLaw::new(
                b.beta,
                b.alpha,
                b.segment.as_ref().map(|s| BetaSegment::new(b.beta, b.alpha, 1.0 - s.hi, 1.0 - s.lo)),
            )),
        };
        Self { kind }
    }

    /// `ln E_β[p^{k+} q^{k-}]`.
    pub fn log_moment(&self, counts: CountVector) -> f64 {
        if counts.is_zero() {
            return 0.0;
        }
        let (kr, kl) = (f64::from(counts.right), f64::from(counts.left));
        match &self.kind {
            Kind::Point { ln_p, ln_q, .. } => power_log(kr, *ln_p) + power_log(kl, *ln_q),
            Kind::Mixture(atoms) => numeric::log_sum_exp(
                atoms.iter().map(|a| a.ln_weight + (power_log(kr, a.ln_p) + power_log(kl, a.ln_q))),
            ),
            Kind::Beta(b) => {
                if let Some(seg) = b.segment.as_ref().filter(|s| s.lo == s.hi) {
                    return kr * log(seg.lo) + kl * log(1.0 - seg.lo);
                }
                let (a1, b1) = (b.alpha + kr, b.beta + kl);
                numeric::ln_beta(a1, b1) - b.ln_beta + b.ln_clip_mass(a1, b1)
                    - b.ln_clip_mass(b.alpha, b.beta)
            }
        }
    }

    /// `E_β[p^{k+} q^{k-}]`, in (0, 1].
    pub fn moment(&self, counts: CountVector) -> f64 {
        if counts.is_zero() {
            return 1.0;
        }
        exp(self.log_moment(counts))
    }

    /// Posterior predictive log-probabilities `(ln q(+1|k), ln q(-1|k))` of
    /// the next jump out of a site that has already emitted `counts`.
    pub fn log_step_pair(&self, counts: CountVector) -> (f64, f64) {
        let (kr, kl) = (f64::from(counts.right), f64::from(counts.left));
        match &self.kind {
            Kind::Point { ln_p, ln_q, .. } => (*ln_p, *ln_q),
            Kind::Mixture(atoms) => {
                let posterior: Vec<f64> = atoms
                    .iter()
                    .map(|a| a.ln_weight + (power_log(kr, a.ln_p) + power_log(kl, a.ln_q)))
                    .collect();
                let norm = numeric::log_sum_exp(posterior.iter().copied());
                let right = numeric::log_sum_exp(posterior.iter().zip(atoms).map(|(w, a)| w + a.ln_p));
                let left = numeric::log_sum_exp(posterior.iter().zip(atoms).map(|(w, a)| w + a.ln_q));
                (right - norm, left - norm)
            }
            Kind::Beta(b) => {
                if let Some(seg) = b.segment.as_ref().filter(|s| s.lo == s.hi) {
                    return (log(seg.lo), log(1.0 - seg.lo));
                }
                let (a1, b1) = (b.alpha + kr, b.beta + kl);
                let total = a1 + b1;
                let mut right = log(a1 / total);
                let mut left = log(b1 / total);
                if b.segment.is_some() {
                    let base = b.ln_clip_mass(a1, b1);
                    right += b.ln_clip_mass(a1 + 1.0, b1) - base;
                    left += b.ln_clip_mass(a1, b1 + 1.0) - base;
                }
                (right, left)
            }
        }
    }

    /// Posterior predictive probability of a jump `step` given `counts`:
    /// `moment(counts + e_step) / moment(counts)`.
    pub fn step_probability(&self, counts: CountVector, step: Step) -> f64 {
        if let Kind::Beta(b) = &self.kind {
            if b.segment.is_none() {
                // Conjugate update in closed form.
                let (a1, b1) = (b.alpha + f64::from(counts.right), b.beta + f64::from(counts.left));
                return match step {
                    Step::Right => a1 / (a1 + b1),
                    Step::Left => b1 / (a1 + b1),
                };
            }
        }
        if let Kind::Point { jump, .. } = &self.kind {
            return jump.probability(step);
        }
        let (right, left) = self.log_step_pair(counts);
        match step {
            Step::Right => exp(right),
            Step::Left => exp(left),
        }
    }

    /// `{2p - 1 : p in the convex hull of the support}`.
    pub fn mean_drift_range(&self) -> DriftInterval {
        let (lo, hi) = self.support_hull();
        DriftInterval { lo: 2.0 * lo - 1.0, hi: 2.0 * hi - 1.0 }
    }

    /// Jump laws at the two ends of the support hull. Atoms are returned as
    /// stored, so the result commutes exactly with [`Self::mirror`].
    pub fn hull_jumps(&self) -> (JumpDistribution, JumpDistribution) {
        let end = |p: f64| JumpDistribution { p_right: p, p_left: 1.0 - p };
        match &self.kind {
            Kind::Point { jump, .. } => (*jump, *jump),
            Kind::Mixture(atoms) => {
                let lo = atoms.iter().map(|a| a.jump).min_by(|a, b| a.p_right.total_cmp(&b.p_right));
                let hi = atoms.iter().map(|a| a.jump).max_by(|a, b| a.p_right.total_cmp(&b.p_right));
                (lo.expect("non-empty mixture"), hi.expect("non-empty mixture"))
            }
            Kind::Beta(_) => {
                let (lo, hi) = self.support_hull();
                (end(lo), end(hi))
            }
        }
    }

    /// Convex hull `[min p, max p]` of the support.
    pub fn support_hull(&self) -> (f64, f64) {
        match &self.kind {
            Kind::Point { jump, .. } => (jump.p_right, jump.p_right),
            Kind::Mixture(atoms) => atoms.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
                (lo.min(a.jump.p_right), hi.max(a.jump.p_right))
            }),
            Kind::Beta(b) => match &b.segment {
                Some(seg) => (seg.lo, seg.hi),
                None => (0.0, 1.0),
            },
        }
    }

    /// `E_β[f(p)]` for one of the criteria functionals.
    pub fn expectation(&self, functional: Functional) -> Result<f64, Error> {
        match &self.kind {
            Kind::Point { jump, .. } => Ok(functional.eval_jump(jump)),
            Kind::Mixture(atoms) => {
                let mut acc = KahanSum::default();
                for a in atoms {
                    acc.add(a.weight * functional.eval_jump(&a.jump));
                }
                Ok(acc.total())
            }
            Kind::Beta(b) => {
                let seg = b.segment.as_ref().ok_or(Error::NonIntegrable(functional.name()))?;
                if seg.lo == seg.hi {
                    return Ok(functional.eval(seg.lo));
                }
                Ok(beta_expectation(b.alpha, b.beta, seg.lo, seg.hi, |p| functional.eval(p)))
            }
        }
    }

    /// Inverse distribution function: maps a uniform `u` in (0, 1) to a
    /// site law distributed as β.
    pub fn quantile(&self, u: f64) -> JumpDistribution {
        match &self.kind {
            Kind::Point { jump, .. } => *jump,
            Kind::Mixture(atoms) => {
                let mut cumulative = 0.0;
                for a in atoms {
                    cumulative += a.weight;
                    if u < cumulative {
                        return a.jump;
                    }
                }
                atoms[atoms.len() - 1].jump
            }
            Kind::Beta(b) => {
                let p = b.sampler.quantile(u);
                // Clamp into the representable open interval.
                let p = p.clamp(f64::EPSILON, 1.0 - f64::EPSILON);
                JumpDistribution::new(p).expect("quantile lies in (0, 1)")
            }
        }
    }
}

impl Atom {
    fn new(jump: JumpDistribution, weight: f64) -> Self {
        Self { jump, weight, ln_weight: log(weight), ln_p: log(jump.p_right), ln_q: log(jump.p_left) }
    }
}

/// `k * ln x`, with `0 * ln x = 0`.
#[inline]
fn power_log(k: f64, ln_x: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * ln_x
    }
}

fn beta_expectation<F: Fn(f64) -> f64>(alpha: f64, beta: f64, lo: f64, hi: f64, f: F) -> f64 {
    let ln_density = |p: f64| (alpha - 1.0) * log(p) + (beta - 1.0) * libm::log1p(-p);
    let mut scale = ln_density(lo).max(ln_density(hi));
    if alpha > 1.0 && beta > 1.0 {
        let mode = (alpha - 1.0) / (alpha + beta - 2.0);
        if mode > lo && mode < hi {
            scale = scale.max(ln_density(mode));
        }
    }
    let weight = |p: f64| exp(ln_density(p) - scale);
    let norm = numeric::integrate(weight, lo, hi, 1e-14, 0.0);
    let numerator = numeric::integrate(|p| f(p) * weight(p), lo, hi, 1e-14, 1e-15 * norm);
    numerator / norm
}
