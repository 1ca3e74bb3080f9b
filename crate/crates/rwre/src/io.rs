//! Output files. Every file carries the SHA-256 of the resolved config and
//! the seed; CSV files as `#` comment lines, JSON files as top-level fields.
//! Files are written to a temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rwre_core::ldp::{Flavor, RateProfile};
use rwre_core::LatticeDistribution;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

/// SHA-256 of the canonical JSON of [`ExperimentConfig::hashed_view`].
pub fn config_hash(config: &ExperimentConfig) -> String {
    let bytes = serde_json::to_vec(&config.hashed_view()).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("output");
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Where and how a run writes, with the provenance stamped on every file.
#[derive(Debug, Clone)]
pub struct OutputSink {
    pub dir: PathBuf,
    pub hash: String,
    pub seed: u64,
}

impl OutputSink {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self { dir: config.out.clone(), hash: config_hash(config), seed: config.seed }
    }

    /// `# config_sha256=...` and `# seed=...` lines followed by `body`.
    pub fn csv(&self, body: &str) -> String {
        format!("# config_sha256={}\n# seed={}\n{body}", self.hash, self.seed)
    }

    /// `payload`'s fields behind `config_sha256` and `seed`.
    pub fn json<T: Serialize>(&self, payload: &T) -> String {
        let mut doc = serde_json::Map::new();
        doc.insert("config_sha256".into(), json!(self.hash));
        doc.insert("seed".into(), json!(self.seed));
        match serde_json::to_value(payload).expect("payload serializes") {
            Value::Object(fields) => doc.extend(fields),
            other => {
                doc.insert("result".into(), other);
            }
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("json");
        text.push('\n');
        text
    }

    pub fn write_csv(&self, name: &str, body: &str) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, self.csv(body).as_bytes())?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, payload: &T) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, self.json(payload).as_bytes())?;
        Ok(path)
    }

    /// Echoes the resolved config (defaults filled, flags applied).
    pub fn write_config(&self, config: &ExperimentConfig) -> std::io::Result<PathBuf> {
        self.write_json("config.json", &json!({ "config": config }))
    }
}

/// Formats a float for CSV; absent values are left empty.
fn cell(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// `position,probability,log_probability`.
pub fn distribution_csv(dist: &LatticeDistribution) -> String {
    let mut out = String::from("position,probability,log_probability\n");
    for (x, lp) in dist.iter() {
        let _ = writeln!(out, "{x},{},{lp}", lp.exp());
    }
    out
}

fn flavor_name(flavor: Flavor) -> &'static str {
    match flavor {
        Flavor::Quenched => "quenched",
        Flavor::Averaged => "averaged",
    }
}

/// One row per (velocity, rung):
/// `a,n,finite_n_rate,extrapolated_rate,error,flavor,stderr,ess,reliable`.
/// Unreliable rungs keep their row with an empty rate.
pub fn rate_profile_csv(profile: &RateProfile) -> String {
    let mut out = String::from("a,n,finite_n_rate,extrapolated_rate,error,flavor,stderr,ess,reliable\n");
    let flavor = flavor_name(profile.flavor);
    for point in &profile.points {
        let error = point.extrapolated.map(|_| point.error());
        for rung in &point.finite {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{flavor},{},{},{}",
                point.velocity,
                rung.n,
                cell(rung.rate),
                cell(point.extrapolated),
                cell(error),
                cell(rung.rate.map(|_| rung.stderr)),
                cell(rung.ess),
                rung.rate.is_some(),
            );
        }
    }
    out
}
