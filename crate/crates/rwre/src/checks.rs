//! Oracle checks run by `rwre validate`.
//!
//! Checks that exercise the posterior kernel obtain it from a
//! [`KernelFactory`], so a deliberately broken kernel can be substituted
//! to confirm that the suite notices.

use std::time::{Duration, Instant};

use rwre_core::hash::site_uniform;
use rwre_core::ldp::{cramer_rate, estimate_quenched_rate, rate_at_zero};
use rwre_core::posterior::{log_chain_weight, log_path_weight};
use rwre_core::walker::{averaged_distribution, quenched_distribution};
use rwre_core::{CountVector, Environment, EnvironmentLaw, SiteKernel, Step, WalkPath};
use serde::Serialize;

pub type KernelFactory<'a> = dyn Fn(&EnvironmentLaw) -> Box<dyn SiteKernel + Sync> + 'a;

/// The law itself as its kernel.
pub fn law_kernel(law: &EnvironmentLaw) -> Box<dyn SiteKernel + Sync> {
    Box::new(law.clone())
}

pub const GROUPS: [&str; 5] = ["chain_rule", "normalization", "degenerate", "conjugacy", "rate_zero"];

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub group: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    #[serde(serialize_with = "millis")]
    pub elapsed: Duration,
}

fn millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

impl CheckOutcome {
    pub fn label(&self) -> String {
        format!("{}/{}", self.group, self.name)
    }
}

type CheckResult = Result<String, String>;

fn ensure(ok: bool, detail: String) -> CheckResult {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn laws() -> Vec<(&'static str, EnvironmentLaw)> {
    vec![
        ("beta22", EnvironmentLaw::beta(2.0, 2.0, None).unwrap()),
        ("beta22_clipped", EnvironmentLaw::beta(2.0, 2.0, Some((0.05, 0.95))).unwrap()),
        ("beta_skewed", EnvironmentLaw::beta(0.7, 1.6, Some((0.1, 0.8))).unwrap()),
        ("mixture_83", EnvironmentLaw::mixture(&[(0.8, 0.5), (0.3, 0.5)]).unwrap()),
        ("point_07", EnvironmentLaw::point(0.7).unwrap()),
    ]
}

fn all_paths(n: usize) -> impl Iterator<Item = WalkPath> {
    (0u32..1 << n).map(move |bits| {
        WalkPath::new((0..n).map(|i| if bits >> i & 1 == 1 { Step::Right } else { Step::Left }).collect())
    })
}

/// Largest relative gap between the chain-rule and moment-product weights
/// over all paths of length `n`, and the total moment-product mass.
fn path_sweep(kernel: &dyn SiteKernel, n: usize) -> (f64, f64) {
    let mut worst = 0.0f64;
    let mut mass = 0.0;
    for path in all_paths(n) {
        let product = log_path_weight(kernel, &path);
        let chain = log_chain_weight(kernel, &path);
        worst = worst.max((chain - product).exp_m1().abs());
        mass += product.exp();
    }
    (worst, mass)
}

fn chain_rule(law: &EnvironmentLaw, factory: &KernelFactory) -> CheckResult {
    let kernel = factory(law);
    let (worst, _) = path_sweep(kernel.as_ref(), 10);
    ensure(worst <= 1e-10, format!("max relative error {worst:.3e} over 1024 paths"))
}

fn step_normalization(law: &EnvironmentLaw, factory: &KernelFactory) -> CheckResult {
    let kernel = factory(law);
    let mut worst = 0.0f64;
    for right in 0..=30 {
        for left in 0..=30 {
            let k = CountVector::new(right, left);
            let total = kernel.step_probability(k, Step::Right) + kernel.step_probability(k, Step::Left);
            worst = worst.max((total - 1.0).abs());
        }
    }
    ensure(worst <= 1e-12, format!("max |q(+1)+q(-1)-1| = {worst:.3e}"))
}

fn path_mass(law: &EnvironmentLaw, factory: &KernelFactory) -> CheckResult {
    let kernel = factory(law);
    let (_, mass) = path_sweep(kernel.as_ref(), 12);
    let dist = averaged_distribution(kernel.as_ref(), 16).map_err(|e| e.to_string())?;
    let enumerated = dist.total_mass();
    ensure(
        (mass - 1.0).abs() <= 1e-10 && (enumerated - 1.0).abs() <= 1e-10,
        format!("mass over 4096 paths {mass:.15}, enumerated n=16 mass {enumerated:.15}"),
    )
}

fn degenerate_distributions(factory: &KernelFactory) -> CheckResult {
    let law = EnvironmentLaw::point(0.7).unwrap();
    let kernel = factory(&law);
    let env = Environment::new(law, 11);
    let mut worst = 0.0f64;
    for n in 1..=16 {
        let q = quenched_distribution(&env, n, n);
        let a = averaged_distribution(kernel.as_ref(), n).map_err(|e| e.to_string())?;
        for (x, _) in q.iter() {
            let (pq, pa) = (q.prob(x), a.prob(x));
            worst = worst.max((pq - pa).abs() / pq);
        }
    }
    ensure(worst <= 1e-12, format!("max relative gap quenched vs averaged {worst:.3e}, n <= 16"))
}

fn degenerate_history(factory: &KernelFactory) -> CheckResult {
    let law = EnvironmentLaw::point(0.7).unwrap();
    let kernel = factory(&law);
    let mut worst = 0.0f64;
    for right in 0..20 {
        for left in 0..20 {
            worst = worst.max((kernel.step_probability(CountVector::new(right, left), Step::Right) - 0.7).abs());
        }
    }
    let path = WalkPath::from_values(&[1, 1, -1]).unwrap();
    let weight = log_path_weight(kernel.as_ref(), &path).exp();
    ensure(
        worst <= 1e-15 && (weight - 0.147).abs() <= 1e-15,
        format!("max |q(+1)-p| {worst:.3e}; weight(+1,+1,-1) = {weight}"),
    )
}

fn degenerate_cramer() -> CheckResult {
    let law = EnvironmentLaw::point(0.7).unwrap();
    let jump = law.quantile(0.5);
    let env = Environment::new(law, 0);
    let grid = [-0.6, -0.2, 0.0, 0.2, 0.4, 0.6, 0.9];
    let profile = estimate_quenched_rate(&env, &grid, &[250, 500, 1000, 2000], 2).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for point in &profile.points {
        let exact = cramer_rate(&jump, point.velocity).map_err(|e| e.to_string())?;
        worst = worst.max((point.extrapolated.unwrap_or(f64::NAN) - exact).abs());
    }
    ensure(worst <= 0.02, format!("max |quenched - cramer| = {worst:.3e}"))
}

fn conjugacy_spot(factory: &KernelFactory) -> CheckResult {
    let law = EnvironmentLaw::beta(2.0, 2.0, None).unwrap();
    let kernel = factory(&law);
    let q = kernel.step_probability(CountVector::new(3, 1), Step::Right);
    let empty = kernel.step_probability(CountVector::ZERO, Step::Right);
    ensure(
        (q - 0.625).abs() <= 1e-12 && (empty - 0.5).abs() <= 1e-12,
        format!("q(+1 | 3 right, 1 left) = {q}, q(+1 | empty) = {empty}"),
    )
}

fn conjugacy_recursion(factory: &KernelFactory) -> CheckResult {
    let mut worst = 0.0f64;
    for &(a, b) in &[(2.0, 2.0), (0.5, 0.5), (3.5, 1.25), (1.0, 7.0)] {
        let law = EnvironmentLaw::beta(a, b, None).unwrap();
        let kernel = factory(&law);
        for right in 0..=20u32 {
            for left in 0..=20u32 {
                let ratio = (kernel.log_moment(CountVector::new(right + 1, left))
                    - kernel.log_moment(CountVector::new(right, left)))
                .exp();
                let exact = (a + f64::from(right)) / (a + b + f64::from(right + left));
                worst = worst.max((ratio - exact).abs() / exact);
            }
        }
    }
    ensure(worst <= 1e-12, format!("max relative error of moment ratio {worst:.3e}"))
}

fn conjugacy_paths(factory: &KernelFactory) -> CheckResult {
    let law = EnvironmentLaw::beta(2.0, 2.0, None).unwrap();
    let kernel = factory(&law);
    let w1 = log_path_weight(kernel.as_ref(), &WalkPath::from_values(&[1, -1, 1]).unwrap()).exp();
    let w2 = log_path_weight(kernel.as_ref(), &WalkPath::from_values(&[1, -1]).unwrap()).exp();
    let two = averaged_distribution(kernel.as_ref(), 2).map_err(|e| e.to_string())?;
    let ok = (w1 - 0.15).abs() <= 1e-12
        && (w2 - 0.25).abs() <= 1e-12
        && (two.prob(0) - 0.5).abs() <= 1e-12
        && (two.prob(2) - 0.25).abs() <= 1e-12;
    ensure(ok, format!("weight(+1,-1,+1) = {w1}, weight(+1,-1) = {w2}, P(S_2 = 0) = {}", two.prob(0)))
}

fn rate_zero_values() -> CheckResult {
    let point = rate_at_zero(&EnvironmentLaw::point(0.7).unwrap());
    let nestling = rate_at_zero(&EnvironmentLaw::mixture(&[(0.4, 0.5), (0.7, 0.5)]).unwrap());
    let outside = rate_at_zero(&EnvironmentLaw::mixture(&[(0.6, 0.5), (0.7, 0.5)]).unwrap());
    let fair = rate_at_zero(&EnvironmentLaw::point(0.5).unwrap());
    let ok = (point - 0.087_176_3).abs() <= 1e-6
        && nestling.abs() <= 1e-9
        && (outside - 0.020_410_8).abs() <= 1e-6
        && fair == 0.0;
    ensure(ok, format!("point {point:.9}, nestling {nestling}, non-nestling {outside:.9}, fair {fair}"))
}

fn rate_zero_equivalence() -> CheckResult {
    let mut mismatches = 0;
    let mut positive = 0;
    for law in random_mixtures(100, 17) {
        let rate = rate_at_zero(&law);
        positive += usize::from(rate > 0.0);
        if (rate > 0.0) == law.mean_drift_range().is_nestling() || rate != rate_at_zero(&law.mirror()) {
            mismatches += 1;
        }
    }
    ensure(mismatches == 0, format!("{mismatches} mismatches over 100 mixtures ({positive} non-nestling)"))
}

/// Deterministic corpus of mixtures with 1 to 4 atoms, roughly half of
/// them nestling.
pub fn random_mixtures(count: u64, seed: u64) -> Vec<EnvironmentLaw> {
    (0..count)
        .map(|i| {
            let u = |j: i64| site_uniform(seed ^ i.wrapping_mul(0x9e37_79b9), j);
            let atoms = 1 + (u(0) * 4.0) as usize;
            let raw: Vec<(f64, f64)> =
                (0..atoms).map(|j| (0.02 + 0.96 * u(2 * j as i64 + 1), 0.1 + u(2 * j as i64 + 2))).collect();
            let total: f64 = raw.iter().map(|a| a.1).sum();
            let atoms: Vec<(f64, f64)> = raw.iter().map(|&(p, w)| (p, w / total)).collect();
            EnvironmentLaw::mixture(&atoms).expect("valid mixture")
        })
        .collect()
}

type Check<'a> = (&'static str, String, Box<dyn Fn() -> CheckResult + 'a>);

fn registry<'a>(factory: &'a KernelFactory<'a>) -> Vec<Check<'a>> {
    let mut checks: Vec<Check<'a>> = Vec::new();
    for (name, law) in laws() {
        let l = law.clone();
        checks.push(("chain_rule", name.into(), Box::new(move || chain_rule(&l, factory))));
    }
    for (name, law) in laws() {
        let l = law.clone();
        checks.push(("normalization", format!("{name}_steps"), Box::new(move || step_normalization(&l, factory))));
        checks.push(("normalization", format!("{name}_mass"), Box::new(move || path_mass(&law, factory))));
    }
    checks.push(("degenerate", "distributions".into(), Box::new(move || degenerate_distributions(factory))));
    checks.push(("degenerate", "history_free".into(), Box::new(move || degenerate_history(factory))));
    checks.push(("degenerate", "quenched_cramer".into(), Box::new(degenerate_cramer)));
    checks.push(("conjugacy", "spot_value".into(), Box::new(move || conjugacy_spot(factory))));
    checks.push(("conjugacy", "moment_recursion".into(), Box::new(move || conjugacy_recursion(factory))));
    checks.push(("conjugacy", "path_weights".into(), Box::new(move || conjugacy_paths(factory))));
    checks.push(("rate_zero", "closed_forms".into(), Box::new(rate_zero_values)));
    checks.push(("rate_zero", "nestling_equivalence".into(), Box::new(rate_zero_equivalence)));
    checks
}

/// Runs every check whose group or `group/name` label matches `filter`
/// (all checks when `None`).
pub fn run_checks(filter: Option<&str>, factory: &KernelFactory) -> Vec<CheckOutcome> {
    registry(factory)
        .into_iter()
        .filter(|(group, name, _)| match filter {
            None => true,
            Some(f) => *group == f || format!("{group}/{name}").contains(f),
        })
        .map(|(group, name, check)| {
            let start = Instant::now();
            let result = check();
            let elapsed = start.elapsed();
            let (passed, detail) = match result {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckOutcome { group, name, passed, detail, elapsed }
        })
        .collect()
}
