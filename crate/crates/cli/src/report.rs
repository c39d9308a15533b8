use std::collections::BTreeMap;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    HypothesisUnmet,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::HypothesisUnmet => 2,
            Verdict::Fail => 3,
        }
    }
}

pub const EXIT_INPUT: i32 = 4;

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub inputs_digest: String,
    pub verdict: Verdict,
    pub evidence: Value,
    #[serde(skip)]
    pub runtime: Duration,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceReport {
    pub id: String,
    pub seed: Option<u64>,
    pub input_digest: String,
    pub verdict: Verdict,
    pub checks: Vec<CheckRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: Value,
    pub verdict: Verdict,
    pub instances: Vec<InstanceReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub total_ms: f64,
    /// instance id -> check name -> milliseconds
    pub checks: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Output {
    pub report: VerificationReport,
    pub timings: Timings,
}

impl VerificationReport {
    pub fn timings(&self, total: Duration) -> Timings {
        let checks = self
            .instances
            .iter()
            .map(|i| {
                let per = i.checks.iter().map(|c| (c.name.clone(), c.runtime.as_secs_f64() * 1e3)).collect();
                (i.id.clone(), per)
            })
            .collect();
        Timings { total_ms: total.as_secs_f64() * 1e3, checks }
    }

    /// One line per instance.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for i in &self.instances {
            let bad: Vec<&str> =
                i.checks.iter().filter(|c| c.verdict != Verdict::Pass).map(|c| c.name.as_str()).collect();
            s.push_str(&format!("{}: {:?}", i.id, i.verdict));
            if !bad.is_empty() {
                s.push_str(&format!(" [{}]", bad.join(", ")));
            }
            s.push('\n');
        }
        s.push_str(&format!("{}: {} instance(s), overall {:?}\n", self.command, self.instances.len(), self.verdict));
        s
    }
}

pub fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects checks for one instance, timing each.
pub struct CheckList {
    pub digest: String,
    pub checks: Vec<CheckRecord>,
}

impl CheckList {
    pub fn new(digest: String) -> Self {
        CheckList { digest, checks: Vec::new() }
    }

    pub fn push(&mut self, name: &str, verdict: Verdict, evidence: Value, runtime: Duration) {
        self.checks.push(CheckRecord {
            name: name.to_string(),
            inputs_digest: self.digest.clone(),
            verdict,
            evidence,
            runtime,
        });
    }

    pub fn verdict(&self) -> Verdict {
        self.checks.iter().map(|c| c.verdict).max().unwrap_or(Verdict::Pass)
    }
}
