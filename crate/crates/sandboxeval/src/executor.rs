//! Runs selected probes under timeouts and isolation, classifies their
//! dispositions into outcomes, and assembles the run report.
//!
//! Execution is sequential in a fixed safety order: read-only probes first,
//! then inference-mode filesystem probes, then network egress, with the
//! resource-consuming exclusive probes last. Sequential scheduling trivially
//! satisfies the exclusivity contract; the recorded trace lets tests assert
//! it. A sentinel digest over protected regions is taken before and after
//! every run; a mismatch marks the run invalid.
//!
//! Default isolation is one subprocess per probe, so a crashing or hanging
//! probe body cannot take the suite down. In-process isolation exists for
//! tests and debugging; a probe that ignores its deadline there leaks a
//! worker thread, which is another reason subprocess is the default.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Stdio;
use std::sync::mpsc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use walkdir::WalkDir;

use crate::model::{
    Evidence, ExecutionMode, Outcome, ProbeId, ProbeResult, ProbeSpec, RedactionLevel, RunReport,
    SafetyClass,
};
use crate::probes::comm_danger::{Budget, EndpointTable};
use crate::probes::{body_for, recon, ProbeBody, ProbeContext, ProbeDisposition};
use crate::registry::{ProbeFilter, Registry, RegistryError};

/// Environment variable consulted for the scratch root when neither flag nor
/// config file provides one.
pub const SCRATCH_ENV_VAR: &str = "SANDBOXEVAL_SCRATCH";

/// Grace allowed past the per-probe timeout before a result is suspect.
pub const TIMEOUT_GRACE: Duration = Duration::from_secs(2);

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("per-probe timeout must be at least 1 second")]
    InvalidTimeout,
    #[error("max depth must be at least 1")]
    InvalidDepth,
    #[error("budget: {0}")]
    Budget(String),
    #[error("endpoints: {0}")]
    Endpoint(String),
    #[error("scratch root {scratch} overlaps critical path {critical}")]
    ScratchOverlap { scratch: PathBuf, critical: PathBuf },
    #[error("cannot prepare scratch root {path}: {source}")]
    Scratch {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("report assembly failed: {0}")]
    Model(#[from] crate::model::ModelError),
}

/// Where probe bodies execute.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Isolation {
    InProcess,
    #[default]
    Subprocess,
}

/// Effective configuration for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub selection: ProbeFilter,
    #[serde(default)]
    pub mode_overrides: BTreeMap<ProbeId, ExecutionMode>,
    /// The only location probes may mutate. Defaults to a fresh directory
    /// under the system temporary directory (or `SANDBOXEVAL_SCRATCH`).
    #[serde(default)]
    pub scratch_root: Option<PathBuf>,
    #[serde(default = "default_timeout_secs")]
    pub per_probe_timeout_secs: u64,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default)]
    pub endpoints: EndpointTable,
    /// Restricted locations the manipulation probes target with inference.
    #[serde(default = "default_critical_paths")]
    pub critical_paths: Vec<PathBuf>,
    /// Roots the content-listing probes scan.
    #[serde(default = "default_content_roots")]
    pub content_roots: Vec<PathBuf>,
    /// Candidate files for the read probe; first readable one wins.
    #[serde(default = "default_read_exemplars")]
    pub read_exemplars: Vec<PathBuf>,
    /// Candidate binaries for the execute probe.
    #[serde(default = "default_exec_exemplars")]
    pub exec_exemplars: Vec<PathBuf>,
    /// Scope the metadata probes walk.
    #[serde(default = "default_metadata_root")]
    pub metadata_root: PathBuf,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    #[serde(default)]
    pub redact: RedactionLevel,
    #[serde(default)]
    pub isolation: Isolation,
    /// Regions the sentinel digest covers. `None` means the critical paths
    /// plus the working directory; an empty list disables the sentinel.
    #[serde(default)]
    pub sentinel_roots: Option<Vec<PathBuf>>,
    /// Binary implementing the probe-worker protocol for subprocess
    /// isolation; defaults to the current executable.
    #[serde(default)]
    pub probe_worker: Option<PathBuf>,
}

fn default_timeout_secs() -> u64 {
    30
}
fn default_max_depth() -> usize {
    10
}
fn default_metadata_root() -> PathBuf {
    PathBuf::from("/")
}
fn default_critical_paths() -> Vec<PathBuf> {
    ["/etc/passwd", "/etc/shadow", "/root", "/usr/bin", "/boot", "/var/log"]
        .iter()
        .map(PathBuf::from)
        .collect()
}
fn default_content_roots() -> Vec<PathBuf> {
    ["/usr", "/etc", "/opt", "/var", "/proc", "/tmp"].iter().map(PathBuf::from).collect()
}
fn default_read_exemplars() -> Vec<PathBuf> {
    ["/etc/os-release", "/proc/version", "/etc/hostname"].iter().map(PathBuf::from).collect()
}
fn default_exec_exemplars() -> Vec<PathBuf> {
    ["/bin/sh", "/bin/true", "/usr/bin/env"].iter().map(PathBuf::from).collect()
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            selection: ProbeFilter::default(),
            mode_overrides: BTreeMap::new(),
            scratch_root: None,
            per_probe_timeout_secs: default_timeout_secs(),
            budget: Budget::default(),
            endpoints: EndpointTable::default(),
            critical_paths: default_critical_paths(),
            content_roots: default_content_roots(),
            read_exemplars: default_read_exemplars(),
            exec_exemplars: default_exec_exemplars(),
            metadata_root: default_metadata_root(),
            max_depth: default_max_depth(),
            redact: RedactionLevel::default(),
            isolation: Isolation::default(),
            sentinel_roots: None,
            probe_worker: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.per_probe_timeout_secs < 1 {
            return Err(ConfigError::InvalidTimeout);
        }
        if self.max_depth < 1 {
            return Err(ConfigError::InvalidDepth);
        }
        self.budget.validate().map_err(ConfigError::Budget)?;
        self.endpoints.validate().map_err(ConfigError::Endpoint)?;
        Ok(())
    }

    /// Digest of the effective configuration, pinned into the report.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.per_probe_timeout_secs)
    }

    /// Picks, checks, and creates the scratch root. The overlap check runs
    /// before anything is created so a misconfigured run cannot leave a
    /// directory inside a protected region.
    pub fn resolve_scratch(&self) -> Result<PathBuf, ConfigError> {
        let candidate = self
            .scratch_root
            .clone()
            .or_else(|| std::env::var_os(SCRATCH_ENV_VAR).map(PathBuf::from))
            .unwrap_or_else(|| {
                let tag: u32 = rand::random();
                std::env::temp_dir().join(format!("sandboxeval-{}-{tag:08x}", std::process::id()))
            });
        let lexical = lexical_canonical(&candidate);
        for critical in &self.critical_paths {
            let critical_canonical = lexical_canonical(critical);
            if lexical.starts_with(&critical_canonical) || critical_canonical.starts_with(&lexical) {
                return Err(ConfigError::ScratchOverlap {
                    scratch: candidate,
                    critical: critical.clone(),
                });
            }
        }
        std::fs::create_dir_all(&candidate)
            .map_err(|e| ConfigError::Scratch { path: candidate.clone(), source: e })?;
        candidate
            .canonicalize()
            .map_err(|e| ConfigError::Scratch { path: candidate, source: e })
    }
}

/// Canonicalizes the longest existing prefix and re-appends the rest, so
/// paths that do not exist yet can still be compared.
fn lexical_canonical(path: &Path) -> PathBuf {
    let mut existing = path.to_path_buf();
    let mut tail = Vec::new();
    while !existing.exists() {
        match (existing.parent(), existing.file_name()) {
            (Some(parent), Some(name)) => {
                tail.push(name.to_os_string());
                existing = parent.to_path_buf();
            }
            _ => break,
        }
    }
    let mut out = existing.canonicalize().unwrap_or(existing);
    for segment in tail.into_iter().rev() {
        out.push(segment);
    }
    out
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

enum RawOutcome {
    Disposition(ProbeDisposition),
    TimedOut,
    Crashed(String),
}

fn classify(spec: &ProbeSpec, mode: ExecutionMode, raw: RawOutcome, duration: Duration) -> ProbeResult {
    let family = spec.id.family().to_string();
    let (outcome, evidence, error_detail) = match raw {
        RawOutcome::Disposition(ProbeDisposition::Accessed { evidence }) => {
            (Outcome::Accessed, evidence, None)
        }
        RawOutcome::Disposition(ProbeDisposition::Denied { evidence, detail }) => {
            (Outcome::Denied, evidence, Some(detail))
        }
        RawOutcome::Disposition(ProbeDisposition::Failed { detail }) => {
            (Outcome::Unknown, Evidence::new(family), Some(detail))
        }
        RawOutcome::TimedOut => {
            let detail = format!("timed out after {:.1}s", duration.as_secs_f64());
            if spec.safety_class == SafetyClass::NetworkEgress {
                // black-holed egress presents as a timeout
                (Outcome::Denied, Evidence::new(family), Some(detail))
            } else {
                (Outcome::Unknown, Evidence::new(family), Some(detail))
            }
        }
        RawOutcome::Crashed(detail) => (Outcome::Unknown, Evidence::new(family), Some(detail)),
    };
    ProbeResult {
        probe: spec.id.clone(),
        mode_used: mode,
        outcome,
        evidence,
        duration_ms: duration.as_millis() as u64,
        error_detail,
    }
}

// ---------------------------------------------------------------------------
// Probe execution
// ---------------------------------------------------------------------------

fn run_in_process(
    spec: &ProbeSpec,
    mode: ExecutionMode,
    config: &RunConfig,
    scratch: &Path,
    body: ProbeBody,
    timeout: Duration,
) -> RawOutcome {
    let (tx, rx) = mpsc::channel();
    let spec_owned = spec.clone();
    let config_owned = config.clone();
    let scratch_owned = scratch.to_path_buf();
    let spawned = std::thread::Builder::new()
        .name(format!("probe-{}", spec.id))
        .spawn(move || {
            let ctx = ProbeContext {
                spec: &spec_owned,
                mode,
                config: &config_owned,
                scratch_root: &scratch_owned,
            };
            let disposition = catch_unwind(AssertUnwindSafe(|| (body)(&ctx))).unwrap_or_else(|panic| {
                let text = panic
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| panic.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "opaque panic".into());
                ProbeDisposition::failed(format!("probe panicked: {text}"))
            });
            let _ = tx.send(disposition);
        });
    if spawned.is_err() {
        return RawOutcome::Crashed("could not spawn probe thread".into());
    }
    match rx.recv_timeout(timeout) {
        Ok(disposition) => RawOutcome::Disposition(disposition),
        // the worker thread is leaked; subprocess isolation avoids this
        Err(_) => RawOutcome::TimedOut,
    }
}

#[derive(Serialize, Deserialize)]
struct WorkerInput {
    probe: ProbeId,
    mode: ExecutionMode,
    config: RunConfig,
}

#[derive(Serialize, Deserialize)]
struct WorkerOutput {
    disposition: ProbeDisposition,
}

fn run_in_subprocess(
    spec: &ProbeSpec,
    mode: ExecutionMode,
    config: &RunConfig,
    timeout: Duration,
) -> RawOutcome {
    let worker = match config.probe_worker.clone().or_else(|| std::env::current_exe().ok()) {
        Some(path) => path,
        None => return RawOutcome::Crashed("no probe worker binary available".into()),
    };
    let mut child = match std::process::Command::new(&worker)
        .arg("__probe")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
    {
        Ok(child) => child,
        Err(e) => return RawOutcome::Crashed(format!("cannot spawn probe worker: {e}")),
    };

    let input = WorkerInput { probe: spec.id.clone(), mode, config: config.clone() };
    if let Some(mut stdin) = child.stdin.take() {
        let payload = serde_json::to_vec(&input).expect("worker input serializes");
        if stdin.write_all(&payload).is_err() {
            // child may have died immediately; fall through to wait
        }
    }
    let mut stdout = child.stdout.take();
    let reader = std::thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(out) = stdout.as_mut() {
            let _ = out.read_to_end(&mut buf);
        }
        buf
    });

    let deadline = Instant::now() + timeout;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) => {
                if Instant::now() >= deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    break None;
                }
                std::thread::sleep(Duration::from_millis(10));
            }
            Err(e) => {
                let _ = child.kill();
                let _ = child.wait();
                return RawOutcome::Crashed(format!("wait on probe worker failed: {e}"));
            }
        }
    };
    let output = reader.join().unwrap_or_default();
    match status {
        None => RawOutcome::TimedOut,
        Some(status) if !status.success() => {
            RawOutcome::Crashed(format!("probe worker exited abnormally: {status}"))
        }
        Some(_) => match serde_json::from_slice::<WorkerOutput>(&output) {
            Ok(wire) => RawOutcome::Disposition(wire.disposition),
            Err(e) => RawOutcome::Crashed(format!("probe worker produced no result: {e}")),
        },
    }
}

fn run_one(
    spec: &ProbeSpec,
    mode: ExecutionMode,
    config: &RunConfig,
    scratch: &Path,
) -> ProbeResult {
    let timeout = config.timeout();
    let started = Instant::now();
    let raw = match body_for(&spec.id) {
        None => RawOutcome::Crashed(format!("no implementation registered for {}", spec.id)),
        Some(body) => match config.isolation {
            Isolation::InProcess => run_in_process(spec, mode, config, scratch, body, timeout),
            Isolation::Subprocess => run_in_subprocess(spec, mode, config, timeout),
        },
    };
    classify(spec, mode, raw, started.elapsed())
}

/// Runs a single catalog probe under the configured isolation and timeout.
/// Every disposition folds into the result; this does not fail.
pub fn run_probe(spec: &ProbeSpec, config: &RunConfig) -> Result<ProbeResult, RunError> {
    config.validate()?;
    let scratch = config.resolve_scratch()?;
    let mut effective = config.clone();
    effective.scratch_root = Some(scratch.clone());
    let mode = effective.mode_overrides.get(&spec.id).copied().unwrap_or(spec.default_mode);
    Ok(run_one(spec, mode, &effective, &scratch))
}

/// Classification seam for tests: runs an arbitrary body in process under
/// the standard timeout and classification rules.
pub fn run_probe_with_body(
    spec: &ProbeSpec,
    mode: ExecutionMode,
    config: &RunConfig,
    scratch: &Path,
    body: ProbeBody,
) -> ProbeResult {
    let timeout = config.timeout();
    let started = Instant::now();
    let raw = run_in_process(spec, mode, config, scratch, body, timeout);
    classify(spec, mode, raw, started.elapsed())
}

/// Entry point for the hidden worker subcommand: reads a probe id and config
/// from stdin, runs the body in-process, and writes the disposition to
/// stdout. Always exits 0 when the protocol itself worked.
pub fn probe_worker_main() -> i32 {
    let mut input = String::new();
    if std::io::stdin().read_to_string(&mut input).is_err() {
        return 3;
    }
    let input: WorkerInput = match serde_json::from_str(&input) {
        Ok(parsed) => parsed,
        Err(_) => return 3,
    };
    let registry = Registry::all_probes();
    let Some(spec) = registry.get(&input.probe) else { return 3 };
    let Some(body) = body_for(&input.probe) else { return 3 };
    let scratch = match input.config.scratch_root.clone() {
        Some(path) => path,
        None => match input.config.resolve_scratch() {
            Ok(path) => path,
            Err(_) => return 3,
        },
    };
    let ctx = ProbeContext { spec, mode: input.mode, config: &input.config, scratch_root: &scratch };
    let disposition = catch_unwind(AssertUnwindSafe(|| (body)(&ctx))).unwrap_or_else(|panic| {
        let text = panic
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| panic.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "opaque panic".into());
        ProbeDisposition::failed(format!("probe panicked: {text}"))
    });
    let output = WorkerOutput { disposition };
    match serde_json::to_string(&output) {
        Ok(json) => {
            println!("{json}");
            0
        }
        Err(_) => 3,
    }
}

// ---------------------------------------------------------------------------
// Suite runs
// ---------------------------------------------------------------------------

/// Safety phase a probe executes in; lower runs earlier.
fn phase(spec: &ProbeSpec) -> u8 {
    if spec.requires_exclusive {
        3
    } else {
        match spec.safety_class {
            SafetyClass::ReadOnly => 0,
            SafetyClass::ScratchMutating => 1,
            SafetyClass::NetworkEgress => 2,
            SafetyClass::BoundedResource => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TraceEvent {
    pub probe: ProbeId,
    pub phase: u8,
    pub exclusive: bool,
    pub start_seq: u64,
    pub end_seq: u64,
}

/// Start/end sequence numbers for every probe execution, in order.
#[derive(Debug, Clone, Default)]
pub struct ExecutionTrace {
    pub events: Vec<TraceEvent>,
}

impl ExecutionTrace {
    /// True when no two events' [start, end] intervals interleave.
    pub fn is_serial(&self) -> bool {
        let mut last_end = 0;
        for event in &self.events {
            if event.start_seq < last_end {
                return false;
            }
            last_end = event.end_seq;
        }
        true
    }
}

pub fn run_suite(config: &RunConfig) -> Result<RunReport, RunError> {
    run_suite_traced(config).map(|(report, _)| report)
}

pub fn run_suite_traced(config: &RunConfig) -> Result<(RunReport, ExecutionTrace), RunError> {
    config.validate()?;
    let scratch = config.resolve_scratch()?;
    let mut effective = config.clone();
    effective.scratch_root = Some(scratch.clone());
    let config_digest = effective.digest();

    let registry = Registry::all_probes();
    let mut selected = registry.filter(&effective.selection)?;
    selected.sort_by_key(|spec| phase(spec)); // stable: catalog order within phases

    let sentinel_roots = sentinel_roots_for(&effective);
    let before = sentinel_hash(&sentinel_roots, std::slice::from_ref(&scratch));

    let started_at = chrono::Utc::now();
    let run_id = uuid::Uuid::new_v4().to_string();
    let mut results = Vec::with_capacity(selected.len());
    let mut trace = ExecutionTrace::default();
    let mut seq: u64 = 0;
    for spec in &selected {
        let mode = effective.mode_overrides.get(&spec.id).copied().unwrap_or(spec.default_mode);
        let start_seq = seq;
        seq += 1;
        results.push(run_one(spec, mode, &effective, &scratch));
        trace.events.push(TraceEvent {
            probe: spec.id.clone(),
            phase: phase(spec),
            exclusive: spec.requires_exclusive,
            start_seq,
            end_seq: seq,
        });
        seq += 1;
    }

    let after = sentinel_hash(&sentinel_roots, std::slice::from_ref(&scratch));
    let environment = recon::environment_fingerprint();
    let mut report = RunReport::new(run_id, started_at, config_digest, environment, results)?;
    if before.digest != after.digest {
        report.safety_violation = Some(format!(
            "sentinel digest changed during the run ({} -> {}); protected regions were modified",
            &before.digest[..12.min(before.digest.len())],
            &after.digest[..12.min(after.digest.len())],
        ));
    }
    Ok((report, trace))
}

fn sentinel_roots_for(config: &RunConfig) -> Vec<PathBuf> {
    match &config.sentinel_roots {
        Some(roots) => roots.clone(),
        None => {
            let mut roots = config.critical_paths.clone();
            if let Ok(cwd) = std::env::current_dir() {
                roots.push(cwd);
            }
            roots
        }
    }
}

// ---------------------------------------------------------------------------
// Sentinel hashing
// ---------------------------------------------------------------------------

/// Filesystem types whose contents change on their own and are excluded from
/// sentinel digests.
const VOLATILE_FSTYPES: [&str; 14] = [
    "proc", "sysfs", "devtmpfs", "devpts", "cgroup", "cgroup2", "mqueue", "securityfs", "debugfs",
    "tracefs", "bpf", "pstore", "autofs", "binfmt_misc",
];

const SENTINEL_CONTENT_LIMIT: u64 = 1024 * 1024;

#[derive(Debug, Clone)]
pub struct SentinelReport {
    pub digest: String,
    pub entries: usize,
    pub skipped: Vec<String>,
}

/// Order-independent digest over (path, type, size, mode, owner, content)
/// of everything under `roots`, excluding `exclude` subtrees and volatile
/// pseudo-filesystems. Content is hashed only for files up to 1 MiB.
pub fn sentinel_hash(roots: &[PathBuf], exclude: &[PathBuf]) -> SentinelReport {
    use std::os::unix::fs::MetadataExt;

    let volatile: Vec<PathBuf> = recon::mounts()
        .into_iter()
        .filter(|(_, fstype)| VOLATILE_FSTYPES.contains(&fstype.as_str()))
        .map(|(point, _)| point)
        .collect();
    let excluded = |path: &Path| {
        exclude.iter().any(|e| path.starts_with(e))
            || volatile.iter().any(|v| path.starts_with(v) && v != Path::new("/"))
    };

    let mut lines = Vec::new();
    let mut skipped = Vec::new();
    for root in roots {
        if !root.exists() {
            skipped.push(format!("{}: absent", root.display()));
            continue;
        }
        let walker = WalkDir::new(root).follow_links(false).into_iter();
        for entry in walker.filter_entry(|e| !excluded(e.path())) {
            let entry = match entry {
                Ok(e) => e,
                Err(e) => {
                    skipped.push(format!("{e}"));
                    continue;
                }
            };
            let path = entry.path();
            let meta = match entry.metadata() {
                Ok(m) => m,
                Err(e) => {
                    skipped.push(format!("{}: {e}", path.display()));
                    continue;
                }
            };
            let file_type = entry.file_type();
            let content = if file_type.is_file() && meta.len() <= SENTINEL_CONTENT_LIMIT {
                match std::fs::read(path) {
                    Ok(bytes) => hex::encode(Sha256::digest(&bytes)),
                    Err(_) => {
                        skipped.push(format!("{}: content unreadable", path.display()));
                        "unreadable".into()
                    }
                }
            } else if file_type.is_symlink() {
                std::fs::read_link(path)
                    .map(|t| t.display().to_string())
                    .unwrap_or_else(|_| "unreadable-link".into())
            } else {
                "-".into()
            };
            lines.push(format!(
                "{}|{:?}|{}|{:o}|{}|{}|{content}",
                path.display(),
                file_type,
                meta.len(),
                meta.mode(),
                meta.uid(),
                meta.gid(),
            ));
        }
    }
    lines.sort();
    let mut hasher = Sha256::new();
    for line in &lines {
        hasher.update(line.as_bytes());
        hasher.update(b"\n");
    }
    SentinelReport { digest: hex::encode(hasher.finalize()), entries: lines.len(), skipped }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Category;

    fn stub_spec(id: &str, safety: SafetyClass) -> ProbeSpec {
        ProbeSpec {
            id: ProbeId::new(id).unwrap(),
            category: Category::for_probe(&ProbeId::new(id).unwrap()).unwrap(),
            action: "Stub",
            description: "synthetic probe for classification tests",
            default_mode: ExecutionMode::Direct,
            safety_class: safety,
            requires_exclusive: false,
        }
    }

    fn quick_config(timeout: u64) -> RunConfig {
        RunConfig { per_probe_timeout_secs: timeout, isolation: Isolation::InProcess, ..RunConfig::default() }
    }

    #[test]
    fn payload_maps_to_accessed() {
        let dir = tempfile::tempdir().unwrap();
        let spec = stub_spec("sysinfo.stub_payload", SafetyClass::ReadOnly);
        let result = run_probe_with_body(
            &spec,
            ExecutionMode::Direct,
            &quick_config(5),
            dir.path(),
            |_| {
                let mut ev = Evidence::new("sysinfo");
                ev.insert_text("value", "payload");
                ProbeDisposition::Accessed { evidence: ev }
            },
        );
        assert_eq!(result.outcome, Outcome::Accessed);
        assert!(result.error_detail.is_none());
    }

    #[test]
    fn permission_error_maps_to_denied() {
        let dir = tempfile::tempdir().unwrap();
        let spec = stub_spec("sysinfo.stub_denied", SafetyClass::ReadOnly);
        let result = run_probe_with_body(
            &spec,
            ExecutionMode::Direct,
            &quick_config(5),
            dir.path(),
            |_| ProbeDisposition::denied("sysinfo", "permission denied reading facet"),
        );
        assert_eq!(result.outcome, Outcome::Denied);
        assert!(result.error_detail.as_deref().unwrap().contains("permission"));
    }

    #[test]
    fn hang_maps_to_unknown_for_non_network() {
        let dir = tempfile::tempdir().unwrap();
        let spec = stub_spec("sysinfo.stub_hang", SafetyClass::ReadOnly);
        let started = Instant::now();
        let result = run_probe_with_body(
            &spec,
            ExecutionMode::Direct,
            &quick_config(1),
            dir.path(),
            |_| {
                std::thread::sleep(Duration::from_secs(60));
                ProbeDisposition::failed("unreachable")
            },
        );
        assert_eq!(result.outcome, Outcome::Unknown);
        // duration is about the timeout, not the sleep
        assert!(started.elapsed() < Duration::from_secs(5));
        assert!(result.duration_ms >= 900 && result.duration_ms < 3000, "{}", result.duration_ms);
    }

    #[test]
    fn hang_maps_to_denied_for_network_egress() {
        let dir = tempfile::tempdir().unwrap();
        let spec = stub_spec("net.stub_hang", SafetyClass::NetworkEgress);
        let result = run_probe_with_body(
            &spec,
            ExecutionMode::Proxy,
            &quick_config(1),
            dir.path(),
            |_| {
                std::thread::sleep(Duration::from_secs(60));
                ProbeDisposition::failed("unreachable")
            },
        );
        assert_eq!(result.outcome, Outcome::Denied);
        assert!(result.error_detail.as_deref().unwrap().contains("timed out"));
    }

    #[test]
    fn panic_maps_to_unknown_and_is_contained() {
        let dir = tempfile::tempdir().unwrap();
        let spec = stub_spec("sysinfo.stub_panic", SafetyClass::ReadOnly);
        let result = run_probe_with_body(
            &spec,
            ExecutionMode::Direct,
            &quick_config(5),
            dir.path(),
            |_| panic!("boom"),
        );
        assert_eq!(result.outcome, Outcome::Unknown);
        assert!(result.error_detail.as_deref().unwrap().contains("boom"));
    }

    #[test]
    fn worker_crash_maps_to_unknown() {
        let spec = Registry::all_probes().get(&ProbeId::new("sysinfo.platform").unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig {
            isolation: Isolation::Subprocess,
            probe_worker: Some(PathBuf::from("/bin/false")),
            scratch_root: Some(dir.path().to_path_buf()),
            per_probe_timeout_secs: 5,
            ..RunConfig::default()
        };
        let result = run_one(spec, ExecutionMode::Direct, &config, dir.path());
        assert_eq!(result.outcome, Outcome::Unknown);
    }

    #[test]
    fn scratch_overlap_is_a_config_error() {
        let config = RunConfig {
            scratch_root: Some(PathBuf::from("/usr/bin/sandboxeval-scratch")),
            ..RunConfig::default()
        };
        match config.resolve_scratch() {
            Err(ConfigError::ScratchOverlap { .. }) => {}
            other => panic!("expected overlap error, got {other:?}"),
        }
        // and the other direction: scratch that contains a critical path
        let config = RunConfig {
            scratch_root: Some(PathBuf::from("/etc")),
            critical_paths: vec![PathBuf::from("/etc/passwd")],
            ..RunConfig::default()
        };
        assert!(matches!(config.resolve_scratch(), Err(ConfigError::ScratchOverlap { .. })));
    }

    #[test]
    fn sentinel_detects_single_byte_change() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a"), b"hello").unwrap();
        let roots = vec![dir.path().to_path_buf()];
        let before = sentinel_hash(&roots, &[]);
        let unchanged = sentinel_hash(&roots, &[]);
        assert_eq!(before.digest, unchanged.digest);
        std::fs::OpenOptions::new()
            .append(true)
            .open(dir.path().join("a"))
            .unwrap()
            .write_all(b"!")
            .unwrap();
        let after = sentinel_hash(&roots, &[]);
        assert_ne!(before.digest, after.digest);
    }

    #[test]
    fn sentinel_ignores_excluded_scratch() {
        let dir = tempfile::tempdir().unwrap();
        let scratch = dir.path().join("scratch");
        std::fs::create_dir(&scratch).unwrap();
        std::fs::write(dir.path().join("keep"), b"stable").unwrap();
        let roots = vec![dir.path().to_path_buf()];
        let exclude = vec![scratch.clone()];
        let before = sentinel_hash(&roots, &exclude);
        std::fs::write(scratch.join("junk"), b"mutation inside scratch").unwrap();
        let after = sentinel_hash(&roots, &exclude);
        assert_eq!(before.digest, after.digest);
    }

    #[test]
    fn phases_follow_safety_order() {
        let registry = Registry::all_probes();
        let by_id = |id: &str| {
            phase(registry.get(&ProbeId::new(id).unwrap()).unwrap())
        };
        assert_eq!(by_id("sysinfo.platform"), 0);
        assert_eq!(by_id("fs.structure.delete"), 1);
        assert_eq!(by_id("net.ping"), 2);
        assert_eq!(by_id("danger.occupy_resources"), 3);
        assert_eq!(by_id("danger.network_congestion"), 3);
        assert_eq!(by_id("danger.disk_exhaustion"), 3);
    }
}
