//! Expectation profiles and conformance evaluation.
//!
//! A profile maps each probe to the outcomes acceptable in a given
//! deployment. Two profiles ship with the build: `dyff-hardened`, describing
//! a locked-down container (egress blocked, privilege changes refused,
//! recon largely visible but namespace-confined), and `unconfined`, which
//! accepts any determinate outcome. Deployments should fork a bundled
//! profile rather than treat it as normative.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use thiserror::Error;

use crate::model::{Outcome, Policy, ProbeId, RunReport, Verdict, VerdictStatus};
use crate::registry::Registry;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("profile is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("profile name is empty")]
    EmptyName,
    #[error("profile lists unknown probe id `{0}`")]
    UnknownProbe(String),
    #[error("profile id `{0}` is malformed: {1}")]
    InvalidId(String, String),
    #[error("acceptable-outcome set for `{0}` is empty")]
    EmptyExpectation(String),
    #[error("default acceptable-outcome set is empty")]
    EmptyDefault,
}

#[derive(Deserialize)]
struct ProfileDocument {
    name: String,
    #[serde(default)]
    registry_hash: Option<String>,
    default: Vec<Outcome>,
    #[serde(default)]
    expectations: BTreeMap<String, Vec<Outcome>>,
}

/// A parsed profile plus non-fatal findings from loading it.
#[derive(Debug)]
pub struct LoadedPolicy {
    pub policy: Policy,
    pub warnings: Vec<String>,
}

/// Names of the profiles compiled into the binary.
pub const BUNDLED_PROFILE_NAMES: [&str; 2] = ["dyff-hardened", "unconfined"];

/// Returns the JSON text of a bundled profile.
pub fn bundled_profile(name: &str) -> Option<&'static str> {
    match name {
        "dyff-hardened" => Some(include_str!("profiles/dyff-hardened.json")),
        "unconfined" => Some(include_str!("profiles/unconfined.json")),
        _ => None,
    }
}

/// Parses and validates a profile document against the probe catalog.
/// Unknown probe ids and empty outcome sets are errors; a registry-hash
/// mismatch is a warning (the profile may predate a catalog change).
pub fn load_profile(text: &str, registry: &Registry) -> Result<LoadedPolicy, PolicyError> {
    let document: ProfileDocument = serde_json::from_str(text)?;
    if document.name.trim().is_empty() {
        return Err(PolicyError::EmptyName);
    }
    if document.default.is_empty() {
        return Err(PolicyError::EmptyDefault);
    }
    let mut warnings = Vec::new();
    if let Some(hash) = &document.registry_hash {
        let current = registry.catalog_hash();
        if hash != &current {
            warnings.push(format!(
                "profile `{}` was written against catalog {} but this build is {}",
                document.name,
                &hash[..12.min(hash.len())],
                &current[..12]
            ));
        }
    }
    let mut expectations = BTreeMap::new();
    for (raw_id, outcomes) in document.expectations {
        let id = ProbeId::new(raw_id.clone())
            .map_err(|e| PolicyError::InvalidId(raw_id.clone(), e.to_string()))?;
        if registry.get(&id).is_none() {
            return Err(PolicyError::UnknownProbe(raw_id));
        }
        if outcomes.is_empty() {
            return Err(PolicyError::EmptyExpectation(raw_id));
        }
        expectations.insert(id, outcomes.into_iter().collect::<BTreeSet<Outcome>>());
    }
    Ok(LoadedPolicy {
        policy: Policy {
            name: document.name,
            registry_hash: document.registry_hash,
            default_expectation: document.default.into_iter().collect(),
            expectations,
        },
        warnings,
    })
}

/// Result of judging one run against one policy.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub verdicts: Vec<Verdict>,
    pub violations: usize,
    pub indeterminate: usize,
}

impl Evaluation {
    /// Overall conformance: no violations and nothing indeterminate.
    pub fn conform(&self) -> bool {
        self.violations == 0 && self.indeterminate == 0
    }
}

/// Pure judgment of every result in the report against the policy.
pub fn evaluate(report: &RunReport, policy: &Policy) -> Evaluation {
    let mut verdicts = Vec::with_capacity(report.results.len());
    let mut violations = 0;
    let mut indeterminate = 0;
    for result in &report.results {
        let expected = policy.expected_for(&result.probe).clone();
        let verdict = Verdict::judge(result.probe.clone(), result.outcome, expected);
        match verdict.status {
            VerdictStatus::Violation => violations += 1,
            VerdictStatus::Indeterminate => indeterminate += 1,
            VerdictStatus::Conform => {}
        }
        verdicts.push(verdict);
    }
    Evaluation { verdicts, violations, indeterminate }
}
