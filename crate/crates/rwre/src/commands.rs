//! The analyses behind each subcommand. Every command validates the config,
//! writes its outputs plus the resolved config into the output directory
//! and returns a short human-readable summary.

use std::fmt::Write as _;

use rwre_core::asymptotics::{classify_regime, estimate_speed_mc, Regime};
use rwre_core::ldp::{
    averaged_rate_upper_bound, check_superadditivity, estimate_averaged_rate, estimate_quenched_rate, rate_at_zero,
    EntropyBudget, Flavor, ImportanceSettings, StrategyLaw,
};
use rwre_core::posterior::{log_chain_weight, log_path_weight};
use rwre_core::walker::{averaged_distribution, simulate_averaged, ENUMERATION_MAX_STEPS};
use rwre_core::{Environment, LatticeDistribution, PosteriorState, ReplicaMap, Step, WalkPath};
use serde_json::json;

use crate::checks::{run_checks, KernelFactory};
use crate::config::{ConfigError, ExperimentConfig, Method};
use crate::exit;
use crate::io::{distribution_csv, rate_profile_csv, OutputSink};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Input(#[from] rwre_core::Error),
    #[error("output failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Input(_) => exit::CONFIG,
            RunError::Io(_) | RunError::ChecksFailed { .. } => exit::FAILURE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Direction of transience, limiting speed and regime of the law.
    Classify,
    /// Monte Carlo estimate of the limiting speed.
    Speed,
    /// Quenched or averaged large-deviation rate profile.
    Rate,
    /// Closed-form rate at zero velocity.
    RateZero,
    /// Relative-entropy upper bound on the averaged rate.
    EntropyBound,
    /// Exact superadditivity margins of quenched log-probabilities.
    Superadd,
    /// Step-by-step posterior kernel along a path, and the law of S_n.
    PosteriorDemo,
    /// Oracle identity checks.
    Validate,
}

pub struct Context<'a, R: ReplicaMap> {
    pub config: &'a ExperimentConfig,
    pub runner: &'a R,
    pub filter: Option<&'a str>,
    pub kernels: &'a KernelFactory<'a>,
}

pub fn run<R: ReplicaMap>(command: Command, ctx: &Context<'_, R>) -> Result<String, RunError> {
    ctx.config.validate()?;
    let sink = OutputSink::new(ctx.config);
    sink.write_config(ctx.config)?;
    match command {
        Command::Classify => classify(ctx.config, &sink),
        Command::Speed => speed(ctx.config, &sink, ctx.runner),
        Command::Rate => rate(ctx.config, &sink, ctx.runner),
        Command::RateZero => rate_zero(ctx.config, &sink),
        Command::EntropyBound => entropy_bound(ctx.config, &sink, ctx.runner),
        Command::Superadd => superadd(ctx.config, &sink),
        Command::PosteriorDemo => posterior_demo(ctx.config, &sink, ctx.runner),
        Command::Validate => validate(ctx, &sink),
    }
}

fn regime_name(regime: Regime) -> String {
    serde_json::to_value(regime).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn classify(config: &ExperimentConfig, sink: &OutputSink) -> Result<String, RunError> {
    let law = config.environment_law()?;
    let report = classify_regime(&law)?;
    let direction = report.regime.direction();
    sink.write_json("classify.json", &json!({ "law": config.law, "report": report, "direction": direction }))?;
    Ok(format!(
        "regime {} speed {} (E[log p/q] = {}, E[q/p] = {}, E[p/q] = {})",
        regime_name(report.regime),
        report.speed,
        report.criterion_value,
        report.q_over_p_mean,
        report.p_over_q_mean
    ))
}

fn speed<R: ReplicaMap>(config: &ExperimentConfig, sink: &OutputSink, runner: &R) -> Result<String, RunError> {
    let law = config.environment_law()?;
    let est = estimate_speed_mc(&law, config.n, config.replicas, config.seed, runner)?;
    let (median, positive) = (est.median_velocity(), est.fraction_positive());
    if config.format.csv() {
        let mut body = String::from("replica,seed,S_n,velocity\n");
        for r in &est.replicas {
            let _ = writeln!(body, "{},{},{},{}", r.replica, r.seed, r.endpoint, r.velocity);
        }
        sink.write_csv("speed.csv", &body)?;
    }
    if config.format.json() {
        sink.write_json(
            "speed.json",
            &json!({
                "n": est.steps,
                "mean": est.mean,
                "stderr": est.stderr,
                "median": median,
                "fraction_positive": positive,
                "replicas": est.replicas,
            }),
        )?;
    }
    Ok(format!(
        "S_n/n at n = {}: mean {} ± {} (median {median}, {:.1}% positive) over {} replicas",
        config.n,
        est.mean,
        est.stderr,
        100.0 * positive,
        config.replicas
    ))
}

fn rate<R: ReplicaMap>(config: &ExperimentConfig, sink: &OutputSink, runner: &R) -> Result<String, RunError> {
    let law = config.environment_law()?;
    let profile = match config.flavor {
        Flavor::Quenched => {
            let env = Environment::new(law, config.seed);
            estimate_quenched_rate(&env, &config.grid, &config.ladder, config.window)?
        }
        Flavor::Averaged => {
            let settings = ImportanceSettings {
                enumeration_max: match config.method {
                    Method::Enumeration => ENUMERATION_MAX_STEPS,
                    Method::Auto => config.importance.enumeration_max,
                },
                ..config.importance
            };
            estimate_averaged_rate(&law, &config.grid, &config.ladder, config.window, &settings, config.seed, runner)?
        }
    };
    if config.format.csv() {
        sink.write_csv("rate.csv", &rate_profile_csv(&profile))?;
    }
    if config.format.json() {
        sink.write_json("rate.json", &profile)?;
    }
    let mut summary = String::new();
    for point in &profile.points {
        match point.extrapolated {
            Some(r) => {
                let _ = writeln!(summary, "a = {:>6}: rate {r:.6} ± {:.2e}", point.velocity, point.error());
            }
            None => {
                let _ = writeln!(summary, "a = {:>6}: unreliable", point.velocity);
            }
        }
    }
    Ok(summary.trim_end().to_string())
}

fn rate_zero(config: &ExperimentConfig, sink: &OutputSink) -> Result<String, RunError> {
    let law = config.environment_law()?;
    let value = rate_at_zero(&law);
    let hull = law.support_hull();
    let drift = law.mean_drift_range();
    sink.write_json(
        "rate_zero.json",
        &json!({ "rate_at_zero": value, "support_hull": hull, "drift_range": drift, "nestling": drift.is_nestling() }),
    )?;
    Ok(format!("I(0) = {value} (support hull [{}, {}], nestling: {})", hull.0, hull.1, drift.is_nestling()))
}

fn entropy_bound<R: ReplicaMap>(config: &ExperimentConfig, sink: &OutputSink, runner: &R) -> Result<String, RunError> {
    let law = config.environment_law()?;
    let budget = EntropyBudget { horizon: config.horizon, replicas: config.replicas, seed: config.seed };
    let mut rows = Vec::new();
    for &a in &config.grid {
        let bound = averaged_rate_upper_bound(&law, a, &budget, runner)?;
        rows.push((a, StrategyLaw::with_mean(a)?.rho, bound));
    }
    if config.format.csv() {
        let mut body = String::from("a,rho,bound,stderr\n");
        for (a, rho, b) in &rows {
            let _ = writeln!(body, "{a},{rho},{},{}", b.value, b.stderr);
        }
        sink.write_csv("entropy_bound.csv", &body)?;
    }
    if config.format.json() {
        let points: Vec<_> =
            rows.iter().map(|(a, rho, b)| json!({"a": a, "rho": rho, "bound": b.value, "stderr": b.stderr})).collect();
        sink.write_json("entropy_bound.json", &json!({ "horizon": config.horizon, "points": points }))?;
    }
    let mut summary = String::new();
    for (a, _, b) in &rows {
        let _ = writeln!(summary, "a = {a:>6}: bound {:.6} ± {:.2e}", b.value, b.stderr);
    }
    Ok(summary.trim_end().to_string())
}

fn superadd(config: &ExperimentConfig, sink: &OutputSink) -> Result<String, RunError> {
    let law = config.environment_law()?;
    let env = Environment::new(law, config.seed);
    let margins = check_superadditivity(&env, config.velocity, &config.pairs, config.window)?;
    if config.format.csv() {
        let mut body = String::from("k,l,margin,log_lhs,log_first,log_second\n");
        for m in &margins {
            let _ = writeln!(body, "{},{},{},{},{},{}", m.k, m.l, m.margin, m.log_lhs, m.log_first, m.log_second);
        }
        sink.write_csv("superadd.csv", &body)?;
    }
    if config.format.json() {
        sink.write_json("superadd.json", &json!({ "velocity": config.velocity, "margins": margins }))?;
    }
    let negative = margins.iter().filter(|m| m.margin < 0.0).count();
    let worst = margins.iter().map(|m| m.margin).fold(f64::INFINITY, f64::min);
    Ok(format!("{} pairs, {negative} negative margins, smallest margin {worst}", margins.len()))
}

/// Law of `S_n` under the averaged measure: exact when affordable,
/// otherwise a histogram of `replicas` sampled walks.
fn averaged_law_of_endpoint<R: ReplicaMap>(
    config: &ExperimentConfig,
    law: &rwre_core::EnvironmentLaw,
    runner: &R,
) -> Result<(LatticeDistribution, bool), RunError> {
    let n = config.n;
    if n <= ENUMERATION_MAX_STEPS {
        return Ok((averaged_distribution(law, n)?, true));
    }
    if config.method == Method::Enumeration {
        return Err(rwre_core::Error::EnumerationBudget { n, max: ENUMERATION_MAX_STEPS }.into());
    }
    let ends = runner.map_replicas(config.replicas, |r| {
        simulate_averaged(law, n, rwre_core::hash::derive_seed(config.seed, r)).endpoint()
    });
    Ok((LatticeDistribution::from_samples(n, &ends)?, false))
}

fn posterior_demo<R: ReplicaMap>(config: &ExperimentConfig, sink: &OutputSink, runner: &R) -> Result<String, RunError> {
    let law = config.environment_law()?;
    let path = WalkPath::from_values(&config.path)?;
    let mut state = PosteriorState::new(&law);
    let mut steps = Vec::new();
    let mut log_weight = 0.0;
    for (t, &z) in path.increments.iter().enumerate() {
        let counts = state.counts_at(state.position());
        let q_right = state.step_probability(Step::Right);
        log_weight += state.step_probability(z).ln();
        steps.push(json!({
            "t": t,
            "position": state.position(),
            "right": counts.right,
            "left": counts.left,
            "q_right": q_right,
            "z": z.value(),
            "log_weight": log_weight,
        }));
        state.advance_mut(z);
    }
    let product = log_path_weight(&law, &path);
    let chain = log_chain_weight(&law, &path);
    let (dist, exact) = averaged_law_of_endpoint(config, &law, runner)?;
    if config.format.csv() {
        let mut body = String::from("t,position,right,left,q_right,z,log_weight\n");
        for s in &steps {
            let _ = writeln!(
                body,
                "{},{},{},{},{},{},{}",
                s["t"], s["position"], s["right"], s["left"], s["q_right"], s["z"], s["log_weight"]
            );
        }
        sink.write_csv("posterior.csv", &body)?;
        sink.write_csv("distribution.csv", &distribution_csv(&dist))?;
    }
    if config.format.json() {
        sink.write_json(
            "posterior.json",
            &json!({ "path": path, "log_weight": product, "log_chain_weight": chain, "steps": steps }),
        )?;
        let points: Vec<_> = dist.iter().map(|(x, lp)| json!({"position": x, "log_probability": lp})).collect();
        sink.write_json("distribution.json", &json!({ "n": config.n, "exact": exact, "points": points }))?;
    }
    Ok(format!(
        "path of {} steps: log weight {product} (chain rule {chain}); law of S_{} {}",
        path.len(),
        config.n,
        if exact { "enumerated exactly" } else { "sampled" }
    ))
}

fn validate<R: ReplicaMap>(ctx: &Context<'_, R>, sink: &OutputSink) -> Result<String, RunError> {
    let outcomes = run_checks(ctx.filter, ctx.kernels);
    let mut summary = String::new();
    for o in &outcomes {
        let _ = writeln!(
            summary,
            "{} {:<40} {:>9.1} ms  {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.label(),
            o.elapsed.as_secs_f64() * 1e3,
            o.detail
        );
    }
    sink.write_json("validate.json", &json!({ "filter": ctx.filter, "checks": outcomes }))?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        eprint!("{summary}");
        return Err(RunError::ChecksFailed { failed, total: outcomes.len() });
    }
    let _ = write!(summary, "{} checks passed", outcomes.len());
    Ok(summary)
}
