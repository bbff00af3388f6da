//! Stable serialization of run reports plus the human-readable category
//! table. Redaction is applied at render time; the in-memory report keeps
//! raw evidence.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    Category, Evidence, ModelError, Outcome, OutcomeCounts, ProbeResult, RedactionLevel, RunReport,
};
use crate::registry::Registry;

/// Version embedded in every structured report.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unsupported schema version {found} (this build reads version {supported})")]
    SchemaVersion { found: u64, supported: u32 },
    #[error("malformed report: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("report violates model invariants: {0}")]
    Integrity(#[from] ModelError),
}

#[derive(Serialize, Deserialize)]
struct ReportWire {
    schema_version: u32,
    run_id: String,
    started_at: chrono::DateTime<chrono::Utc>,
    config_digest: String,
    environment: Evidence,
    results: Vec<ProbeResult>,
    summary: BTreeMap<Category, OutcomeCounts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    safety_violation: Option<String>,
}

/// Serializes a report with stable field order. `redact` scrubs secret
/// patterns from every evidence payload in the output; the report value
/// itself is left untouched.
pub fn render_structured(report: &RunReport, redact: RedactionLevel) -> Vec<u8> {
    let results = report
        .results
        .iter()
        .map(|r| ProbeResult { evidence: r.evidence.redact(redact), ..r.clone() })
        .collect();
    let wire = ReportWire {
        schema_version: SCHEMA_VERSION,
        run_id: report.run_id.clone(),
        started_at: report.started_at,
        config_digest: report.config_digest.clone(),
        environment: report.environment.redact(redact),
        results,
        summary: report.summary.clone(),
        safety_violation: report.safety_violation.clone(),
    };
    let mut bytes = serde_json::to_vec_pretty(&wire).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

/// Parses a structured report, enforcing the schema version and every model
/// invariant (duplicate ids, summary recount, unknown-outcome details).
pub fn parse_structured(bytes: &[u8]) -> Result<RunReport, ReportError> {
    let value: serde_json::Value = serde_json::from_slice(bytes)?;
    let found = value.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0);
    if found != SCHEMA_VERSION as u64 {
        return Err(ReportError::SchemaVersion { found, supported: SCHEMA_VERSION });
    }
    let wire: ReportWire = serde_json::from_value(value)?;
    let report = RunReport {
        run_id: wire.run_id,
        started_at: wire.started_at,
        config_digest: wire.config_digest,
        environment: wire.environment,
        results: wire.results,
        summary: wire.summary,
        safety_violation: wire.safety_violation,
    };
    report.validate()?;
    Ok(report)
}

/// Renders the per-category status table: one section per category, probes
/// grouped by outcome, then summary counts.
pub fn render_table(report: &RunReport) -> String {
    let registry = Registry::all_probes();
    let mut out = String::new();
    out.push_str(&format!("sandboxeval run {}\n", report.run_id));
    out.push_str(&format!("started: {}\n", report.started_at.to_rfc3339()));
    if let Some(violation) = &report.safety_violation {
        out.push_str(&format!("!! RUN INVALID: {violation}\n"));
    }
    if report.results.is_empty() {
        out.push_str("no probes run\n");
        return out;
    }
    out.push('\n');
    for category in Category::ALL {
        let in_category: Vec<&ProbeResult> = report
            .results
            .iter()
            .filter(|r| Category::for_probe(&r.probe).ok() == Some(category))
            .collect();
        if in_category.is_empty() {
            continue;
        }
        out.push_str(&format!("{}\n", category.display_name()));
        for outcome in [Outcome::Accessed, Outcome::Denied, Outcome::Unknown] {
            let names: Vec<String> = in_category
                .iter()
                .filter(|r| r.outcome == outcome)
                .map(|r| {
                    registry
                        .get(&r.probe)
                        .map(|spec| spec.action.to_string())
                        .unwrap_or_else(|| r.probe.to_string())
                })
                .collect();
            if !names.is_empty() {
                let label = match outcome {
                    Outcome::Accessed => "Accessed",
                    Outcome::Denied => "Denied",
                    Outcome::Unknown => "Unknown",
                };
                out.push_str(&format!("  {label}: {}\n", names.join(", ")));
            }
        }
    }
    out.push('\n');
    out.push_str("Summary\n");
    for (category, counts) in &report.summary {
        out.push_str(&format!(
            "  {}: accessed={} denied={} unknown={}\n",
            category.display_name(),
            counts.accessed,
            counts.denied,
            counts.unknown
        ));
    }
    out
}
