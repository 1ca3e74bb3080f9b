//! The check suite must notice a broken posterior kernel.

use rwre::checks::{law_kernel, run_checks};
use rwre::core::{CountVector, EnvironmentLaw, SiteKernel};

/// Moments inflated by a factor growing with the visit count, while the
/// step probabilities stay correct.
struct CorruptedMoments(EnvironmentLaw);

impl SiteKernel for CorruptedMoments {
    fn log_moment(&self, counts: CountVector) -> f64 {
        self.0.log_moment(counts) + 1e-6 * counts.total() as f64
    }

    fn log_step_pair(&self, counts: CountVector) -> (f64, f64) {
        self.0.log_step_pair(counts)
    }
}

#[test]
fn corrupted_moments_fail_the_chain_rule_check() {
    let corrupt = |law: &EnvironmentLaw| -> Box<dyn SiteKernel + Sync> { Box::new(CorruptedMoments(law.clone())) };
    let outcomes = run_checks(Some("chain_rule"), &corrupt);
    assert!(!outcomes.is_empty());
    assert!(outcomes.iter().all(|o| !o.passed), "{outcomes:?}");
    let clean = run_checks(Some("chain_rule"), &law_kernel);
    assert!(clean.iter().all(|o| o.passed));
}

#[test]
fn full_suite_passes_with_the_real_kernel() {
    let outcomes = run_checks(None, &law_kernel);
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed).map(|o| o.label()).collect();
    assert!(failed.is_empty(), "{failed:?}");
    for group in rwre::checks::GROUPS {
        assert!(outcomes.iter().any(|o| o.group == group), "{group} has no checks");
    }
}
