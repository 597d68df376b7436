//! Run manifests: what was run, with which inputs, and which files it
//! produced. The manifest is written after every output, via a rename, so
//! its presence marks a completed run.

use crate::experiment::SummaryStats;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Inputs as parsed (flags or config file keys).
    pub config: serde_json::Value,
    /// SHA-256 of the config file bytes, when there is one.
    pub config_sha256: Option<String>,
    pub seed: u64,
    pub seed_rule: String,
    pub outputs: Vec<String>,
    pub wall_seconds: f64,
    pub adjudication: Vec<Adjudication>,
}

/// How well each normalization convention explains the same measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adjudication {
    pub functional: String,
    pub scores: Vec<ConventionScore>,
    /// Convention with the smallest mean `|z|`.
    pub preferred: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConventionScore {
    pub convention: String,
    pub max_abs_z: f64,
    pub mean_abs_z: f64,
}

/// Label of the adopted predictions (two-sided perimeter, CDF volume).
pub const ADOPTED: &str = "adopted";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn score(convention: &str, zs: &[f64]) -> ConventionScore {
    let abs: Vec<f64> = zs.iter().map(|z| z.abs()).collect();
    ConventionScore {
        convention: convention.into(),
        max_abs_z: abs.iter().copied().fold(0.0, f64::max),
        mean_abs_z: abs.iter().sum::<f64>() / abs.len().max(1) as f64,
    }
}

/// Scores the adopted predictions against each alternative, per functional.
pub fn adjudicate(stats: &SummaryStats) -> Vec<Adjudication> {
    let mut by_functional: BTreeMap<&str, BTreeMap<&str, Vec<f64>>> = BTreeMap::new();
    for alt in &stats.alternatives {
        by_functional
            .entry(&alt.functional)
            .or_default()
            .entry(&alt.convention)
            .or_default()
            .push(alt.z);
    }
    by_functional
        .into_iter()
        .map(|(functional, alts)| {
            let adopted: Vec<f64> = stats
                .rows
                .iter()
                .filter(|r| r.functional == functional)
                .map(|r| r.z)
                .collect();
            let mut scores = vec![score(ADOPTED, &adopted)];
            scores.extend(alts.iter().map(|(c, zs)| score(c, zs)));
            let preferred = scores
                .iter()
                .min_by(|a, b| a.mean_abs_z.total_cmp(&b.mean_abs_z))
                .map(|s| s.convention.clone())
                .unwrap_or_default();
            Adjudication {
                functional: functional.into(),
                scores,
                preferred,
            }
        })
        .collect()
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seed: u64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            config_sha256: None,
            seed,
            seed_rule: "replicate r uses field seed splitmix64(seed ^ splitmix64(r + 0x5851f42d4c957f2d)); streams are ChaCha8 keyed by SplitMix64 expansion".into(),
            outputs: Vec::new(),
            wall_seconds: 0.0,
            adjudication: Vec::new(),
        }
    }

    /// Writes `manifest.json` into `dir` after checking every listed output
    /// exists. Output paths are relative to `dir`.
    pub fn write_last(&self, dir: &Path) -> std::io::Result<PathBuf> {
        for out in &self.outputs {
            if !dir.join(out).is_file() {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("manifest output {out} was not written"),
                ));
            }
        }
        let path = dir.join(MANIFEST_FILE);
        let tmp = dir.join(format!(".{MANIFEST_FILE}.tmp"));
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, &path)?;
        Ok(path)
    }
}
