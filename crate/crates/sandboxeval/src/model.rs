//! Domain types shared by the probe families, executor, policy engine, and
//! report emitter.
//!
//! Everything here is an immutable value after construction and safe to share
//! read-only across threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::net::IpAddr;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Largest payload value (in bytes) stored in [`Evidence`]; longer values are
/// truncated at insertion and noted in `truncation_note`.
pub const MAX_PAYLOAD_VALUE_BYTES: usize = 4096;

/// Errors raised while building or validating model values.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid probe id `{0}`: expected lowercase dotted form like `family.action`")]
    InvalidProbeId(String),
    #[error("duplicate probe id `{0}` in results")]
    DuplicateProbe(ProbeId),
    #[error("probe id `{0}` does not belong to a known family")]
    UnknownFamily(ProbeId),
    #[error("result for `{0}` has outcome `unknown` but no error detail")]
    MissingErrorDetail(ProbeId),
    #[error("stored summary does not match recomputed counts for category `{0}`")]
    SummaryMismatch(Category),
}

// ---------------------------------------------------------------------------
// Enumerations
// ---------------------------------------------------------------------------

/// The eight probe categories, one per table section of the catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    ExposeSystem,
    ExposeDirectory,
    ExposeMetadata,
    ManipulateStructure,
    ManipulateContent,
    ManipulatePrivilege,
    ExternalCommunication,
    DangerousOperation,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::ExposeSystem,
        Category::ExposeDirectory,
        Category::ExposeMetadata,
        Category::ManipulateStructure,
        Category::ManipulateContent,
        Category::ManipulatePrivilege,
        Category::ExternalCommunication,
        Category::DangerousOperation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::ExposeSystem => "expose-system",
            Category::ExposeDirectory => "expose-directory",
            Category::ExposeMetadata => "expose-metadata",
            Category::ManipulateStructure => "manipulate-structure",
            Category::ManipulateContent => "manipulate-content",
            Category::ManipulatePrivilege => "manipulate-privilege",
            Category::ExternalCommunication => "external-communication",
            Category::DangerousOperation => "dangerous-operation",
        }
    }

    /// Human heading used by the table renderer.
    pub fn display_name(self) -> &'static str {
        match self {
            Category::ExposeSystem => "Expose System",
            Category::ExposeDirectory => "Expose Directory",
            Category::ExposeMetadata => "Expose Metadata",
            Category::ManipulateStructure => "Manipulate Structure",
            Category::ManipulateContent => "Manipulate Content",
            Category::ManipulatePrivilege => "Manipulate Privilege",
            Category::ExternalCommunication => "External Communication",
            Category::DangerousOperation => "Dangerous Operation",
        }
    }

    /// Maps a probe id onto its category via the id's family segments.
    ///
    /// The id scheme encodes the category: `sysinfo.*` is system exposure,
    /// `fs.structure.*` is structure manipulation, and so on.
    pub fn for_probe(id: &ProbeId) -> Result<Category, ModelError> {
        let value = id.as_str();
        let family = value.split('.').next().unwrap_or("");
        let category = match family {
            "sysinfo" => Category::ExposeSystem,
            "dir" => Category::ExposeDirectory,
            "meta" => Category::ExposeMetadata,
            "net" => Category::ExternalCommunication,
            "danger" => Category::DangerousOperation,
            "fs" => match value.split('.').nth(1) {
                Some("structure") => Category::ManipulateStructure,
                Some("content") => Category::ManipulateContent,
                Some("privilege") => Category::ManipulatePrivilege,
                _ => return Err(ModelError::UnknownFamily(id.clone())),
            },
            _ => return Err(ModelError::UnknownFamily(id.clone())),
        };
        Ok(category)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

/// Discipline used to run a probe.
///
/// `Direct` performs the real action. For the filesystem-manipulation family
/// a `Direct` override means scratch-active execution: the real operation is
/// performed on fixtures confined to the scratch root. `InferOnly` predicts
/// the outcome from access rights without acting. `Proxy` performs a bounded
/// surrogate action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExecutionMode {
    Direct,
    InferOnly,
    Proxy,
}

impl ExecutionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ExecutionMode::Direct => "direct",
            ExecutionMode::InferOnly => "infer-only",
            ExecutionMode::Proxy => "proxy",
        }
    }
}

impl fmt::Display for ExecutionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExecutionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(ExecutionMode::Direct),
            "infer-only" => Ok(ExecutionMode::InferOnly),
            "proxy" => Ok(ExecutionMode::Proxy),
            other => Err(format!("unknown execution mode `{other}`")),
        }
    }
}

/// Classification of a single probe execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Accessed,
    Denied,
    Unknown,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Accessed => "accessed",
            Outcome::Denied => "denied",
            Outcome::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a probe is allowed to touch when it runs in its default mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SafetyClass {
    /// Reads state only; never mutates anything.
    ReadOnly,
    /// May mutate, but only fixtures under the scratch root.
    ScratchMutating,
    /// Consumes budgeted CPU or disk.
    BoundedResource,
    /// Opens outbound network connections.
    NetworkEgress,
}

// ---------------------------------------------------------------------------
// Probe identity and static description
// ---------------------------------------------------------------------------

/// Stable dotted identifier for one catalog probe, e.g. `sysinfo.environment`
/// or `fs.content.write`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct ProbeId(String);

impl ProbeId {
    /// Accepts only the dotted lowercase form: two or more segments of
    /// `[a-z_]`, the first segment without underscores.
    pub fn new(value: impl Into<String>) -> Result<ProbeId, ModelError> {
        let value = value.into();
        if Self::is_valid(&value) {
            Ok(ProbeId(value))
        } else {
            Err(ModelError::InvalidProbeId(value))
        }
    }

    fn is_valid(value: &str) -> bool {
        let segments: Vec<&str> = value.split('.').collect();
        if segments.len() < 2 {
            return false;
        }
        segments.iter().enumerate().all(|(i, seg)| {
            !seg.is_empty()
                && seg.chars().all(|c| {
                    c.is_ascii_lowercase() || (i > 0 && c == '_')
                })
        })
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Leading family segment (`sysinfo`, `dir`, `meta`, `fs`, `net`, `danger`).
    pub fn family(&self) -> &str {
        self.0.split('.').next().unwrap_or("")
    }
}

impl fmt::Display for ProbeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for ProbeId {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let value = String::deserialize(deserializer)?;
        ProbeId::new(value).map_err(serde::de::Error::custom)
    }
}

/// Static description of one of the catalog scenarios.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeSpec {
    pub id: ProbeId,
    pub category: Category,
    /// Short action name as it appears in the catalog tables.
    pub action: &'static str,
    /// Sentence describing the scenario the probe exercises.
    pub description: &'static str,
    pub default_mode: ExecutionMode,
    pub safety_class: SafetyClass,
    /// Resource-consuming probes run strictly alone.
    pub requires_exclusive: bool,
}

// ---------------------------------------------------------------------------
// Evidence
// ---------------------------------------------------------------------------

/// One value in an evidence payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PayloadValue {
    Flag(bool),
    Integer(i64),
    Text(String),
    TextList(Vec<String>),
}

/// Raw facts collected by a probe: a stable key→value map plus redaction
/// state. Values are size-capped at insertion so reports stay bounded no
/// matter how deep an enumeration went.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    /// Tag mirroring the probe family (`sysinfo`, `dir`, `fs`, `net`, ...).
    pub kind: String,
    pub payload: BTreeMap<String, PayloadValue>,
    pub redacted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_note: Option<String>,
}

impl Evidence {
    pub fn new(kind: impl Into<String>) -> Evidence {
        Evidence {
            kind: kind.into(),
            payload: BTreeMap::new(),
            redacted: false,
            truncation_note: None,
        }
    }

    pub fn insert_flag(&mut self, key: impl Into<String>, value: bool) {
        self.payload.insert(key.into(), PayloadValue::Flag(value));
    }

    pub fn insert_int(&mut self, key: impl Into<String>, value: i64) {
        self.payload.insert(key.into(), PayloadValue::Integer(value));
    }

    /// Inserts a text value, truncating it to [`MAX_PAYLOAD_VALUE_BYTES`].
    pub fn insert_text(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let key = key.into();
        let mut value = value.into();
        if value.len() > MAX_PAYLOAD_VALUE_BYTES {
            let mut cut = MAX_PAYLOAD_VALUE_BYTES;
            while !value.is_char_boundary(cut) {
                cut -= 1;
            }
            value.truncate(cut);
            self.note_truncation(&key);
        }
        self.payload.insert(key, PayloadValue::Text(value));
    }

    /// Inserts a list value, keeping elements until the accumulated size
    /// reaches [`MAX_PAYLOAD_VALUE_BYTES`] and noting how many were dropped.
    pub fn insert_list(&mut self, key: impl Into<String>, values: Vec<String>) {
        let key = key.into();
        let mut kept = Vec::new();
        let mut total = 0usize;
        let mut dropped = 0usize;
        for value in values {
            if total + value.len() > MAX_PAYLOAD_VALUE_BYTES {
                dropped += 1;
                continue;
            }
            total += value.len();
            kept.push(value);
        }
        if dropped > 0 {
            self.note_truncation(&format!("{key} ({dropped} entries omitted)"));
        }
        self.payload.insert(key, PayloadValue::TextList(kept));
    }

    fn note_truncation(&mut self, what: &str) {
        let note = match self.truncation_note.take() {
            Some(existing) => format!("{existing}; {what}"),
            None => format!("truncated: {what}"),
        };
        self.truncation_note = Some(note);
    }

    /// Returns a copy with secret-pattern values replaced by their digests.
    ///
    /// Redacting already-redacted evidence is a no-op, as is `Off`.
    pub fn redact(&self, level: RedactionLevel) -> Evidence {
        if level == RedactionLevel::Off || self.redacted {
            return self.clone();
        }
        let mut out = self.clone();
        for (key, value) in out.payload.iter_mut() {
            match value {
                PayloadValue::Text(text) => {
                    *text = redact_value(key, text, level);
                }
                PayloadValue::TextList(items) => {
                    for item in items.iter_mut() {
                        *item = redact_value(key, item, level);
                    }
                }
                PayloadValue::Flag(_) | PayloadValue::Integer(_) => {}
            }
        }
        out.redacted = true;
        out
    }
}

/// How aggressively report output scrubs sensitive values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RedactionLevel {
    Off,
    #[default]
    Standard,
    Strict,
}

impl FromStr for RedactionLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(RedactionLevel::Off),
            "standard" => Ok(RedactionLevel::Standard),
            "strict" => Ok(RedactionLevel::Strict),
            other => Err(format!("unknown redaction level `{other}`")),
        }
    }
}

const SECRET_KEY_MARKERS: [&str; 6] = ["key", "token", "secret", "password", "credential", "sha"];

fn key_looks_secret(key: &str) -> bool {
    let lower = key.to_ascii_lowercase();
    SECRET_KEY_MARKERS.iter().any(|marker| lower.contains(marker))
}

fn is_hex_digest(value: &str) -> bool {
    value.len() == 64 && value.bytes().all(|b| b.is_ascii_hexdigit())
}

fn already_redacted(value: &str) -> bool {
    value
        .strip_prefix("sha256:")
        .map(is_hex_digest)
        .unwrap_or(false)
}

/// `sha256:<hex>` replacement form for a secret value.
pub fn digest_placeholder(value: &str) -> String {
    let digest = Sha256::digest(value.as_bytes());
    format!("sha256:{}", hex::encode(digest))
}

fn redact_value(key: &str, value: &str, level: RedactionLevel) -> String {
    if already_redacted(value) {
        return value.to_string();
    }
    if key_looks_secret(key) || is_hex_digest(value) {
        return digest_placeholder(value);
    }
    // env-style "NAME=VALUE" entries inside payload values carry their own
    // name; scrub those the same way named keys are scrubbed
    if let Some((name, rest)) = value.split_once('=') {
        if key_looks_secret(name) && !rest.is_empty() && !already_redacted(rest) {
            return format!("{name}={}", digest_placeholder(rest));
        }
    }
    if level == RedactionLevel::Strict {
        // Token-wise scan so addresses embedded in listings get caught too.
        if value.parse::<IpAddr>().is_ok() {
            return digest_placeholder(value);
        }
        let mut changed = false;
        let redone: Vec<String> = value
            .split(' ')
            .map(|token| {
                if token.parse::<IpAddr>().is_ok() {
                    changed = true;
                    digest_placeholder(token)
                } else {
                    token.to_string()
                }
            })
            .collect();
        if changed {
            return redone.join(" ");
        }
    }
    value.to_string()
}

// ---------------------------------------------------------------------------
// Results and reports
// ---------------------------------------------------------------------------

/// Outcome of one probe execution plus everything needed to audit it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub probe: ProbeId,
    pub mode_used: ExecutionMode,
    pub outcome: Outcome,
    pub evidence: Evidence,
    pub duration_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_detail: Option<String>,
}

impl ProbeResult {
    fn check_invariants(&self) -> Result<(), ModelError> {
        if self.outcome == Outcome::Unknown
            && self.error_detail.as_deref().unwrap_or("").is_empty()
        {
            return Err(ModelError::MissingErrorDetail(self.probe.clone()));
        }
        Ok(())
    }
}

/// Per-category outcome tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub accessed: u32,
    pub denied: u32,
    pub unknown: u32,
}

impl OutcomeCounts {
    pub fn total(&self) -> u32 {
        self.accessed + self.denied + self.unknown
    }

    fn bump(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::Accessed => self.accessed += 1,
            Outcome::Denied => self.denied += 1,
            Outcome::Unknown => self.unknown += 1,
        }
    }
}

/// Tallies results per category. Categories with no results are omitted.
/// Duplicate probe ids are a construction error.
pub fn summarize(
    results: &[ProbeResult],
) -> Result<BTreeMap<Category, OutcomeCounts>, ModelError> {
    let mut seen = BTreeSet::new();
    let mut summary: BTreeMap<Category, OutcomeCounts> = BTreeMap::new();
    for result in results {
        if !seen.insert(result.probe.clone()) {
            return Err(ModelError::DuplicateProbe(result.probe.clone()));
        }
        let category = Category::for_probe(&result.probe)?;
        summary.entry(category).or_default().bump(result.outcome);
    }
    Ok(summary)
}

/// Everything one suite run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub run_id: String,
    pub started_at: chrono::DateTime<chrono::Utc>,
    pub config_digest: String,
    /// Redactable snapshot of the host the run executed on.
    pub environment: Evidence,
    pub results: Vec<ProbeResult>,
    pub summary: BTreeMap<Category, OutcomeCounts>,
    /// Set when the sentinel digest changed during the run; the run is then
    /// invalid and the partial results are preserved for inspection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safety_violation: Option<String>,
}

impl RunReport {
    pub fn new(
        run_id: String,
        started_at: chrono::DateTime<chrono::Utc>,
        config_digest: String,
        environment: Evidence,
        results: Vec<ProbeResult>,
    ) -> Result<RunReport, ModelError> {
        let summary = summarize(&results)?;
        for result in &results {
            result.check_invariants()?;
        }
        Ok(RunReport {
            run_id,
            started_at,
            config_digest,
            environment,
            results,
            summary,
            safety_violation: None,
        })
    }

    /// Re-checks every model invariant; used after deserializing.
    pub fn validate(&self) -> Result<(), ModelError> {
        for result in &self.results {
            result.check_invariants()?;
        }
        let recount = summarize(&self.results)?;
        if recount != self.summary {
            let bad = Category::ALL
                .iter()
                .copied()
                .find(|c| recount.get(c) != self.summary.get(c))
                .unwrap_or(Category::ExposeSystem);
            return Err(ModelError::SummaryMismatch(bad));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Policy and verdicts
// ---------------------------------------------------------------------------

/// Expected outcomes per probe for one deployment flavor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub name: String,
    /// Catalog hash the profile was written against; a mismatch is a
    /// warning, not an error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registry_hash: Option<String>,
    /// Acceptable outcomes for probes not listed in `expectations`.
    pub default_expectation: BTreeSet<Outcome>,
    pub expectations: BTreeMap<ProbeId, BTreeSet<Outcome>>,
}

impl Policy {
    pub fn expected_for(&self, probe: &ProbeId) -> &BTreeSet<Outcome> {
        self.expectations.get(probe).unwrap_or(&self.default_expectation)
    }
}

/// Judgment of one observed outcome against a policy expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictStatus {
    Conform,
    Violation,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub probe: ProbeId,
    pub observed: Outcome,
    pub expected: BTreeSet<Outcome>,
    pub status: VerdictStatus,
}

impl Verdict {
    /// `Unknown` is always indeterminate; anything else conforms exactly when
    /// the expectation set contains it.
    pub fn judge(probe: ProbeId, observed: Outcome, expected: BTreeSet<Outcome>) -> Verdict {
        let status = if observed == Outcome::Unknown {
            VerdictStatus::Indeterminate
        } else if expected.contains(&observed) {
            VerdictStatus::Conform
        } else {
            VerdictStatus::Violation
        };
        Verdict {
            probe,
            observed,
            expected,
            status,
        }
    }
}
