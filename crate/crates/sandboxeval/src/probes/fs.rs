//! Filesystem-manipulation probes: structure, content, and privilege.
//!
//! Default discipline is access-rights inference: predict whether an
//! operation would succeed from the caller's effective ids versus the
//! target's owner, group, and permission bits, without acting. A `direct`
//! mode override switches a probe to scratch-active execution, where the
//! real operation runs against fixtures confined to the scratch root.
//!
//! Inference reads ownership and mode bits only. It ignores ACLs and
//! mandatory-access-control layers (`acl_checked=false` in evidence), and it
//! treats every file as potentially interpreter-style, so predicting execute
//! requires the read bit as well as the execute bit. Divergence between a
//! prediction and a real scratch-active run is exactly the kind of finding
//! this module is meant to surface.

use std::fmt;
use std::io;
use std::io::ErrorKind;
use std::os::unix::fs::{MetadataExt, PermissionsExt};
use std::path::{Path, PathBuf};

use walkdir::WalkDir;

use super::{ProbeContext, ProbeDisposition};
use crate::model::{Evidence, ExecutionMode};

/// Operations access predictions are made for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessOp {
    Read,
    Write,
    Execute,
    CreateIn,
    DeleteFrom,
    Chmod,
    Chown,
}

impl AccessOp {
    pub fn as_str(self) -> &'static str {
        match self {
            AccessOp::Read => "read",
            AccessOp::Write => "write",
            AccessOp::Execute => "execute",
            AccessOp::CreateIn => "create_in",
            AccessOp::DeleteFrom => "delete_from",
            AccessOp::Chmod => "chmod",
            AccessOp::Chown => "chown",
        }
    }
}

impl fmt::Display for AccessOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predicted {
    Allow,
    Deny,
}

/// One access prediction with the fact that decided it.
#[derive(Debug, Clone)]
pub struct AccessPrediction {
    pub operation: AccessOp,
    pub target: PathBuf,
    pub predicted: Predicted,
    pub basis: String,
}

impl AccessPrediction {
    pub fn allows(&self) -> bool {
        self.predicted == Predicted::Allow
    }

    fn entry(&self) -> String {
        let verdict = match self.predicted {
            Predicted::Allow => "allow",
            Predicted::Deny => "deny",
        };
        format!("{} {} => {} ({})", self.target.display(), self.operation, verdict, self.basis)
    }
}

/// The caller's effective identity used for predictions.
#[derive(Debug, Clone)]
pub struct Identity {
    pub euid: u32,
    pub egid: u32,
    pub groups: Vec<u32>,
}

impl Identity {
    pub fn current() -> Identity {
        let euid = unsafe { libc::geteuid() };
        let egid = unsafe { libc::getegid() };
        let mut groups = vec![0 as libc::gid_t; 64];
        let n = unsafe { libc::getgroups(groups.len() as libc::c_int, groups.as_mut_ptr()) };
        let groups = if n >= 0 {
            groups.truncate(n as usize);
            groups.into_iter().collect()
        } else {
            Vec::new()
        };
        Identity { euid, egid, groups }
    }

    pub fn is_root(&self) -> bool {
        self.euid == 0
    }

    fn in_group(&self, gid: u32) -> bool {
        self.egid == gid || self.groups.contains(&gid)
    }
}

/// Ownership and mode bits of one filesystem entry.
#[derive(Debug, Clone, Copy)]
pub struct EntryMeta {
    pub uid: u32,
    pub gid: u32,
    pub mode: u32,
    pub is_dir: bool,
}

impl EntryMeta {
    pub fn of(meta: &std::fs::Metadata) -> EntryMeta {
        EntryMeta {
            uid: meta.uid(),
            gid: meta.gid(),
            mode: meta.mode(),
            is_dir: meta.is_dir(),
        }
    }

    fn perm_bits(&self) -> u32 {
        self.mode & 0o7777
    }

    fn sticky(&self) -> bool {
        self.mode & 0o1000 != 0
    }
}

/// How a stat of the target or its parent turned out.
#[derive(Debug, Clone, Copy)]
pub enum MetaState {
    Found(EntryMeta),
    Missing,
    Unreachable,
}

impl MetaState {
    fn stat(path: &Path, follow: bool) -> MetaState {
        let result = if follow { std::fs::metadata(path) } else { std::fs::symlink_metadata(path) };
        match result {
            Ok(meta) => MetaState::Found(EntryMeta::of(&meta)),
            Err(e) if e.kind() == ErrorKind::NotFound => MetaState::Missing,
            Err(_) => MetaState::Unreachable,
        }
    }
}

const OWNER: (&str, u32) = ("owner", 6);
const GROUP: (&str, u32) = ("group", 3);
const OTHER: (&str, u32) = ("other", 0);

fn permission_class(identity: &Identity, meta: &EntryMeta) -> (&'static str, u32) {
    if identity.euid == meta.uid {
        OWNER
    } else if identity.in_group(meta.gid) {
        GROUP
    } else {
        OTHER
    }
}

fn class_has(meta: &EntryMeta, shift: u32, bit: u32) -> bool {
    (meta.mode >> shift) & bit != 0
}

const READ_BIT: u32 = 0o4;
const WRITE_BIT: u32 = 0o2;
const EXEC_BIT: u32 = 0o1;

/// Predicts `operation` on `target` for the caller's current identity,
/// consulting only ownership and permission bits. Unreachable or missing
/// targets yield `Deny`; this never fails.
pub fn infer_access(target: &Path, operation: AccessOp) -> AccessPrediction {
    infer_access_as(&Identity::current(), target, operation)
}

/// Same as [`infer_access`] but for an explicit identity, which makes the
/// decision rules testable without changing uid.
pub fn infer_access_as(identity: &Identity, target: &Path, operation: AccessOp) -> AccessPrediction {
    let (target_state, parent_state) = match operation {
        AccessOp::CreateIn | AccessOp::DeleteFrom => {
            let parent = match target.parent() {
                Some(p) if !p.as_os_str().is_empty() => MetaState::stat(p, true),
                _ => MetaState::Missing,
            };
            // delete consults the entry itself too (sticky-bit rule)
            (MetaState::stat(target, false), parent)
        }
        _ => (MetaState::stat(target, true), MetaState::Missing),
    };
    let (predicted, basis) = decide(identity, operation, target_state, parent_state);
    AccessPrediction { operation, target: target.to_path_buf(), predicted, basis }
}

/// Pure decision core: identity plus stat results in, verdict out.
pub fn decide(
    identity: &Identity,
    operation: AccessOp,
    target: MetaState,
    parent: MetaState,
) -> (Predicted, String) {
    match operation {
        AccessOp::Read | AccessOp::Write | AccessOp::Execute => {
            let meta = match target {
                MetaState::Found(m) => m,
                MetaState::Missing => return (Predicted::Deny, "target does not exist".into()),
                MetaState::Unreachable => {
                    return (Predicted::Deny, "target unreachable (path lookup denied)".into())
                }
            };
            decide_rwx(identity, operation, &meta)
        }
        AccessOp::CreateIn | AccessOp::DeleteFrom => {
            let parent_meta = match parent {
                MetaState::Found(m) => m,
                MetaState::Missing => {
                    return (Predicted::Deny, "parent directory does not exist".into())
                }
                MetaState::Unreachable => {
                    return (Predicted::Deny, "parent directory unreachable".into())
                }
            };
            if !parent_meta.is_dir {
                return (Predicted::Deny, "parent is not a directory".into());
            }
            if operation == AccessOp::DeleteFrom {
                match target {
                    MetaState::Found(entry) => {
                        if parent_meta.sticky()
                            && !identity.is_root()
                            && identity.euid != parent_meta.uid
                            && identity.euid != entry.uid
                        {
                            return (
                                Predicted::Deny,
                                "sticky bit on parent restricts removal to the entry owner".into(),
                            );
                        }
                    }
                    MetaState::Missing => {
                        return (Predicted::Deny, "target does not exist".into())
                    }
                    MetaState::Unreachable => {
                        return (Predicted::Deny, "target unreachable (path lookup denied)".into())
                    }
                }
            }
            if identity.is_root() {
                return (Predicted::Allow, "effective uid 0 overrides directory permissions".into());
            }
            let (class, shift) = permission_class(identity, &parent_meta);
            let w = class_has(&parent_meta, shift, WRITE_BIT);
            let x = class_has(&parent_meta, shift, EXEC_BIT);
            if w && x {
                (
                    Predicted::Allow,
                    format!("{class} class has write+search on parent (mode {:04o})", parent_meta.perm_bits()),
                )
            } else {
                let missing = if !w { "write" } else { "search" };
                (
                    Predicted::Deny,
                    format!("{class} class lacks {missing} on parent (mode {:04o})", parent_meta.perm_bits()),
                )
            }
        }
        AccessOp::Chmod => {
            let meta = match target {
                MetaState::Found(m) => m,
                MetaState::Missing => return (Predicted::Deny, "target does not exist".into()),
                MetaState::Unreachable => {
                    return (Predicted::Deny, "target unreachable (path lookup denied)".into())
                }
            };
            if identity.is_root() {
                (Predicted::Allow, "effective uid 0 may change any mode".into())
            } else if identity.euid == meta.uid {
                (Predicted::Allow, "caller owns the entry".into())
            } else {
                (
                    Predicted::Deny,
                    format!("entry owned by uid {}; changing modes requires ownership", meta.uid),
                )
            }
        }
        AccessOp::Chown => {
            let exists = match target {
                MetaState::Found(_) => true,
                MetaState::Missing => return (Predicted::Deny, "target does not exist".into()),
                MetaState::Unreachable => {
                    return (Predicted::Deny, "target unreachable (path lookup denied)".into())
                }
            };
            let _ = exists;
            if identity.is_root() {
                (Predicted::Allow, "effective uid 0 holds chown capability".into())
            } else {
                (Predicted::Deny, "changing ownership requires effective uid 0".into())
            }
        }
    }
}

fn decide_rwx(identity: &Identity, operation: AccessOp, meta: &EntryMeta) -> (Predicted, String) {
    let (class, shift) = permission_class(identity, meta);
    let bits = meta.perm_bits();
    match operation {
        AccessOp::Read => {
            if identity.is_root() {
                (Predicted::Allow, "effective uid 0 overrides read permission".into())
            } else if class_has(meta, shift, READ_BIT) {
                (Predicted::Allow, format!("{class} class has read (mode {bits:04o})"))
            } else {
                (Predicted::Deny, format!("{class} class lacks read (mode {bits:04o})"))
            }
        }
        AccessOp::Write => {
            if meta.is_dir {
                // writing a directory means creating or removing entries,
                // which needs write and search permission
                if identity.is_root() {
                    return (Predicted::Allow, "effective uid 0 overrides write permission".into());
                }
                let w = class_has(meta, shift, WRITE_BIT);
                let x = class_has(meta, shift, EXEC_BIT);
                if w && x {
                    (Predicted::Allow, format!("{class} class has write+search (mode {bits:04o})"))
                } else {
                    (
                        Predicted::Deny,
                        format!("directory write needs write+search for {class} class (mode {bits:04o})"),
                    )
                }
            } else if identity.is_root() {
                (Predicted::Allow, "effective uid 0 overrides write permission".into())
            } else if class_has(meta, shift, WRITE_BIT) {
                (Predicted::Allow, format!("{class} class has write (mode {bits:04o})"))
            } else {
                (Predicted::Deny, format!("{class} class lacks write (mode {bits:04o})"))
            }
        }
        AccessOp::Execute => {
            if meta.is_dir {
                if identity.is_root() {
                    (Predicted::Allow, "effective uid 0 overrides directory search".into())
                } else if class_has(meta, shift, EXEC_BIT) {
                    (Predicted::Allow, format!("{class} class may traverse (mode {bits:04o})"))
                } else {
                    (Predicted::Deny, format!("{class} class lacks search (mode {bits:04o})"))
                }
            } else if identity.is_root() {
                if meta.mode & 0o111 != 0 {
                    (Predicted::Allow, "effective uid 0 plus at least one execute bit".into())
                } else {
                    (Predicted::Deny, "no execute bit set for any class".into())
                }
            } else {
                let x = class_has(meta, shift, EXEC_BIT);
                let r = class_has(meta, shift, READ_BIT);
                if x && r {
                    (
                        Predicted::Allow,
                        format!("{class} class has execute+read (mode {bits:04o}); interpreter rule satisfied"),
                    )
                } else if x {
                    (
                        Predicted::Deny,
                        format!("{class} class lacks read (mode {bits:04o}); interpreter-style execution assumed to need it"),
                    )
                } else {
                    (Predicted::Deny, format!("{class} class lacks execute (mode {bits:04o})"))
                }
            }
        }
        _ => unreachable!("decide_rwx only handles read/write/execute"),
    }
}

// ---------------------------------------------------------------------------
// Probe bodies
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureOp {
    Locate,
    Create,
    Move,
    Copy,
    Rename,
    Delete,
    Compress,
}

impl StructureOp {
    fn as_str(self) -> &'static str {
        match self {
            StructureOp::Locate => "locate",
            StructureOp::Create => "create",
            StructureOp::Move => "move",
            StructureOp::Copy => "copy",
            StructureOp::Rename => "rename",
            StructureOp::Delete => "delete",
            StructureOp::Compress => "compress",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContentOp {
    ReadableFiles,
    Read,
    WritableFiles,
    Write,
    ExecutableFiles,
    Execute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrivilegeOp {
    RootOwner,
    UserOwner,
    OpenPermission,
    RestrictPermission,
}

/// Name used when predicting creation of a not-yet-existing entry.
const CANDIDATE_NAME: &str = "sandboxeval.candidate";

/// Entries visited per root before an inference walk gives up; bounds run
/// time on large or slow filesystems.
pub const MAX_WALK_VISITS: usize = 20_000;

const SAMPLE_CAP: usize = 20;

enum FsMode {
    InferOnly,
    ScratchActive,
}

fn fs_mode(ctx: &ProbeContext) -> Result<FsMode, ProbeDisposition> {
    match ctx.mode {
        ExecutionMode::InferOnly => Ok(FsMode::InferOnly),
        ExecutionMode::Direct => Ok(FsMode::ScratchActive),
        ExecutionMode::Proxy => Err(ProbeDisposition::failed(
            "proxy mode is not defined for filesystem probes",
        )),
    }
}

/// Guard applied before every mutating call in scratch-active mode.
fn ensure_in_scratch(scratch_root: &Path, path: &Path) -> Result<(), String> {
    let check = path.parent().unwrap_or(path);
    let canonical = check
        .canonicalize()
        .map_err(|e| format!("cannot canonicalize {}: {e}", check.display()))?;
    let scratch = scratch_root
        .canonicalize()
        .map_err(|e| format!("cannot canonicalize scratch root: {e}"))?;
    if canonical.starts_with(&scratch) {
        Ok(())
    } else {
        Err(format!(
            "safety violation: {} is outside the scratch root {}",
            path.display(),
            scratch.display()
        ))
    }
}

fn prediction_evidence(
    op_name: &str,
    targets: &[PathBuf],
    predictions: Vec<AccessPrediction>,
    per_target: Vec<(PathBuf, bool, String)>,
) -> (Evidence, usize) {
    let mut evidence = Evidence::new("fs");
    evidence.insert_text("operation", op_name);
    evidence.insert_text("mode", "infer-only");
    evidence.insert_flag("acl_checked", false);
    evidence.insert_list("targets", targets.iter().map(|t| t.display().to_string()).collect());
    evidence.insert_list("predictions", predictions.iter().map(|p| p.entry()).collect());
    let allowed: Vec<&(PathBuf, bool, String)> = per_target.iter().filter(|(_, a, _)| *a).collect();
    evidence.insert_list(
        "verdicts",
        per_target
            .iter()
            .map(|(t, a, why)| {
                format!("{} => {} ({why})", t.display(), if *a { "allow" } else { "deny" })
            })
            .collect(),
    );
    let count = allowed.len();
    evidence.insert_int("allowed_targets", count as i64);
    (evidence, count)
}

/// Structure manipulation: locate, create, move, copy, rename, delete,
/// compress. Locate is always performed directly; it is read-only.
pub fn probe_structure(op: StructureOp, ctx: &ProbeContext) -> ProbeDisposition {
    if op == StructureOp::Locate {
        return locate_targets(ctx);
    }
    match fs_mode(ctx) {
        Ok(FsMode::InferOnly) => infer_structure(op, ctx),
        Ok(FsMode::ScratchActive) => scratch_structure(op, ctx),
        Err(d) => d,
    }
}

fn locate_targets(ctx: &ProbeContext) -> ProbeDisposition {
    let mut evidence = Evidence::new("fs");
    evidence.insert_text("operation", "locate");
    let mut entries = Vec::new();
    let mut determined = 0usize;
    for target in &ctx.config.critical_paths {
        match std::fs::symlink_metadata(target) {
            Ok(_) => {
                determined += 1;
                entries.push(format!("{} exists=true", target.display()));
            }
            Err(e) if e.kind() == ErrorKind::NotFound => {
                determined += 1;
                entries.push(format!("{} exists=false", target.display()));
            }
            Err(e) => entries.push(format!("{} undetermined ({e})", target.display())),
        }
    }
    evidence.insert_list("entries", entries);
    evidence.insert_int("determined", determined as i64);
    if determined > 0 {
        ProbeDisposition::Accessed { evidence }
    } else {
        ProbeDisposition::Denied {
            evidence,
            detail: "existence could not be determined for any target".into(),
        }
    }
}

fn infer_structure(op: StructureOp, ctx: &ProbeContext) -> ProbeDisposition {
    let identity = Identity::current();
    let targets = ctx.config.critical_paths.clone();
    let scratch = ctx.scratch_root;
    let mut predictions = Vec::new();
    let mut per_target = Vec::new();

    for target in &targets {
        let legs: Vec<AccessPrediction> = match op {
            StructureOp::Locate => unreachable!("locate handled separately"),
            StructureOp::Create => {
                let candidate = create_candidate(target);
                vec![infer_access_as(&identity, &candidate, AccessOp::CreateIn)]
            }
            StructureOp::Move => vec![
                infer_access_as(&identity, target, AccessOp::DeleteFrom),
                infer_access_as(&identity, &scratch.join(CANDIDATE_NAME), AccessOp::CreateIn),
            ],
            StructureOp::Copy => vec![
                infer_access_as(&identity, target, AccessOp::Read),
                infer_access_as(&identity, &scratch.join(CANDIDATE_NAME), AccessOp::CreateIn),
            ],
            StructureOp::Rename => {
                let sibling = target
                    .parent()
                    .map(|p| p.join(CANDIDATE_NAME))
                    .unwrap_or_else(|| PathBuf::from(CANDIDATE_NAME));
                vec![
                    infer_access_as(&identity, target, AccessOp::DeleteFrom),
                    infer_access_as(&identity, &sibling, AccessOp::CreateIn),
                ]
            }
            StructureOp::Delete => vec![infer_access_as(&identity, target, AccessOp::DeleteFrom)],
            StructureOp::Compress => vec![
                infer_access_as(&identity, target, AccessOp::Read),
                infer_access_as(&identity, &scratch.join(CANDIDATE_NAME), AccessOp::CreateIn),
            ],
        };
        let allowed = legs.iter().all(|p| p.allows());
        let why = legs
            .iter()
            .map(|p| format!("{}:{}", p.operation, if p.allows() { "allow" } else { "deny" }))
            .collect::<Vec<_>>()
            .join(", ");
        per_target.push((target.clone(), allowed, why));
        predictions.extend(legs);
    }

    let (evidence, allowed) = prediction_evidence(op.as_str(), &targets, predictions, per_target);
    if allowed > 0 {
        ProbeDisposition::Accessed { evidence }
    } else {
        ProbeDisposition::Denied {
            evidence,
            detail: format!("no configured target permits {}", op.as_str()),
        }
    }
}

fn create_candidate(target: &Path) -> PathBuf {
    match std::fs::metadata(target) {
        Ok(meta) if meta.is_dir() => target.join(CANDIDATE_NAME),
        Ok(_) => target
            .parent()
            .map(|p| p.join(CANDIDATE_NAME))
            .unwrap_or_else(|| PathBuf::from(CANDIDATE_NAME)),
        // nothing there: the candidate is the path itself
        Err(_) => target.to_path_buf(),
    }
}

fn scratch_structure(op: StructureOp, ctx: &ProbeContext) -> ProbeDisposition {
    let base = match ctx.probe_scratch() {
        Ok(dir) => dir,
        Err(e) => return ProbeDisposition::failed(format!("cannot prepare scratch: {e}")),
    };
    if let Err(msg) = ensure_in_scratch(ctx.scratch_root, &base.join("x")) {
        return ProbeDisposition::failed(msg);
    }
    let mut evidence = Evidence::new("fs");
    evidence.insert_text("operation", op.as_str());
    evidence.insert_text("mode", "scratch-active");
    evidence.insert_text("scratch", base.display().to_string());
    match perform_structure_op(op, &base) {
        Ok(facts) => {
            evidence.insert_list("observed", facts);
            ProbeDisposition::Accessed { evidence }
        }
        Err(e) if e.kind() == ErrorKind::PermissionDenied => ProbeDisposition::Denied {
            evidence,
            detail: format!("{} on scratch fixture denied: {e}", op.as_str()),
        },
        Err(e) => ProbeDisposition::failed(format!("scratch {} failed: {e}", op.as_str())),
    }
}

/// Runs the real structure operation against fixtures under `base`. Exposed
/// so tests can drive it against fixtures with unusual permissions.
pub fn perform_structure_op(op: StructureOp, base: &Path) -> io::Result<Vec<String>> {
    let mut facts = Vec::new();
    match op {
        StructureOp::Locate => {
            facts.push(format!("{} exists={}", base.display(), base.exists()));
        }
        StructureOp::Create => {
            let file = base.join("created_file");
            let dir = base.join("created_dir");
            std::fs::write(&file, b"sandboxeval scratch fixture")?;
            std::fs::create_dir_all(&dir)?;
            facts.push(format!("created {}", file.display()));
            facts.push(format!("created {}", dir.display()));
        }
        StructureOp::Move => {
            let src = base.join("move_src");
            let dst_dir = base.join("move_dest");
            std::fs::write(&src, b"move me")?;
            std::fs::create_dir_all(&dst_dir)?;
            let dst = dst_dir.join("moved");
            std::fs::rename(&src, &dst)?;
            facts.push(format!("moved {} -> {}", src.display(), dst.display()));
        }
        StructureOp::Copy => {
            let src = base.join("copy_src");
            let dst = base.join("copy_dst");
            std::fs::write(&src, b"copy me")?;
            let bytes = std::fs::copy(&src, &dst)?;
            facts.push(format!("copied {bytes} bytes to {}", dst.display()));
        }
        StructureOp::Rename => {
            let src = base.join("rename_src");
            std::fs::write(&src, b"rename me")?;
            let dst = base.join("rename_dst");
            std::fs::rename(&src, &dst)?;
            facts.push(format!("renamed {} -> {}", src.display(), dst.display()));
        }
        StructureOp::Delete => {
            let victim = base.join("delete_me");
            std::fs::write(&victim, b"delete me")?;
            std::fs::remove_file(&victim)?;
            facts.push(format!("deleted {}", victim.display()));
        }
        StructureOp::Compress => {
            // permission surface of compression: read the source, create the
            // archive; the snapshot is stored uncompressed
            let src = base.join("compress_src");
            std::fs::write(&src, b"compress me")?;
            let content = std::fs::read(&src)?;
            let dst = base.join("compress_src.snapshot");
            std::fs::write(&dst, &content)?;
            facts.push(format!("archived {} bytes to {}", content.len(), dst.display()));
        }
    }
    Ok(facts)
}

/// Content probes: the three list variants, plus read, write, and execute.
pub fn probe_content(op: ContentOp, ctx: &ProbeContext) -> ProbeDisposition {
    match op {
        ContentOp::ReadableFiles => list_accessible(AccessOp::Read, "readable_files", ctx),
        ContentOp::WritableFiles => list_accessible(AccessOp::Write, "writable_files", ctx),
        ContentOp::ExecutableFiles => list_accessible(AccessOp::Execute, "executable_files", ctx),
        ContentOp::Read => read_exemplar(ctx),
        ContentOp::Write => match fs_mode(ctx) {
            Ok(FsMode::InferOnly) => infer_write(ctx),
            Ok(FsMode::ScratchActive) => scratch_write(ctx),
            Err(d) => d,
        },
        ContentOp::Execute => match fs_mode(ctx) {
            Ok(FsMode::InferOnly) => infer_execute(ctx),
            Ok(FsMode::ScratchActive) => scratch_execute(ctx),
            Err(d) => d,
        },
    }
}

struct RootScan {
    files: usize,
    dirs: usize,
    matched: usize,
    skipped: usize,
    sample: Vec<String>,
    walkable: bool,
    root_dir_matches: bool,
}

fn scan_root(root: &Path, op: AccessOp, identity: &Identity, max_depth: usize) -> RootScan {
    let mut scan = RootScan {
        files: 0,
        dirs: 0,
        matched: 0,
        skipped: 0,
        sample: Vec::new(),
        walkable: false,
        root_dir_matches: false,
    };
    if let Ok(meta) = std::fs::metadata(root) {
        let entry = EntryMeta::of(&meta);
        if entry.is_dir {
            let (p, _) = decide(identity, op, MetaState::Found(entry), MetaState::Missing);
            scan.root_dir_matches = p == Predicted::Allow;
        }
    }
    let mut visited = 0usize;
    for entry in WalkDir::new(root).max_depth(max_depth).follow_links(false) {
        visited += 1;
        if visited > MAX_WALK_VISITS {
            break;
        }
        let entry = match entry {
            Ok(e) => e,
            Err(_) => {
                scan.skipped += 1;
                continue;
            }
        };
        scan.walkable = true;
        let file_type = entry.file_type();
        if file_type.is_dir() {
            scan.dirs += 1;
            continue;
        }
        if !file_type.is_file() {
            continue;
        }
        scan.files += 1;
        let meta = match entry.metadata() {
            Ok(m) => m,
            Err(_) => {
                scan.skipped += 1;
                continue;
            }
        };
        let (p, _) = decide(identity, op, MetaState::Found(EntryMeta::of(&meta)), MetaState::Missing);
        if p == Predicted::Allow {
            scan.matched += 1;
            if scan.sample.len() < SAMPLE_CAP {
                scan.sample.push(entry.path().display().to_string());
            }
        }
    }
    scan
}

fn list_accessible(op: AccessOp, label: &str, ctx: &ProbeContext) -> ProbeDisposition {
    let identity = Identity::current();
    let roots = &ctx.config.content_roots;
    let mut evidence = Evidence::new("fs");
    evidence.insert_text("operation", label);
    evidence.insert_flag("acl_checked", false);
    evidence.insert_flag("symlinks_followed", false);

    let mut per_root = Vec::new();
    let mut matched_roots = Vec::new();
    let mut sample = Vec::new();
    let mut any_walkable = false;
    let mut total_matched = 0usize;
    for root in roots {
        let scan = scan_root(root, op, &identity, ctx.config.max_depth);
        any_walkable |= scan.walkable;
        total_matched += scan.matched;
        if scan.matched > 0 || scan.root_dir_matches {
            matched_roots.push(root.display().to_string());
        }
        sample.extend(scan.sample.into_iter().take(5));
        per_root.push(format!(
            "{} files={} dirs={} matched={} skipped={}",
            root.display(),
            scan.files,
            scan.dirs,
            scan.matched,
            scan.skipped
        ));
    }
    evidence.insert_list("per_root", per_root);
    evidence.insert_list("matched_roots", matched_roots);
    evidence.insert_list("sample", sample);
    evidence.insert_int("total_matched", total_matched as i64);
    if any_walkable {
        ProbeDisposition::Accessed { evidence }
    } else {
        ProbeDisposition::Denied { evidence, detail: "no configured root could be listed".into() }
    }
}

fn read_exemplar(ctx: &ProbeContext) -> ProbeDisposition {
    let mut evidence = Evidence::new("fs");
    evidence.insert_text("operation", "read");
    let mut attempts = Vec::new();
    for path in &ctx.config.read_exemplars {
        match std::fs::read(path) {
            Ok(bytes) => {
                let prefix: String = String::from_utf8_lossy(&bytes)
                    .chars()
                    .take(200)
                    .collect();
                evidence.insert_text("path", path.display().to_string());
                evidence.insert_int("bytes_read", bytes.len() as i64);
                evidence.insert_text("content_prefix", prefix);
                attempts.push(format!("{} read ok", path.display()));
                evidence.insert_list("attempts", attempts);
                return ProbeDisposition::Accessed { evidence };
            }
            Err(e) => attempts.push(format!("{} failed: {e}", path.display())),
        }
    }
    evidence.insert_list("attempts", attempts);
    ProbeDisposition::Denied { evidence, detail: "no configured exemplar file was readable".into() }
}

fn infer_write(ctx: &ProbeContext) -> ProbeDisposition {
    let identity = Identity::current();
    let mut evidence = Evidence::new("fs");
    evidence.insert_text("operation", "write");
    evidence.insert_text("mode", "infer-only");
    evidence.insert_flag("acl_checked", false);
    for root in &ctx.config.content_roots {
        let scan = scan_root(root, AccessOp::Write, &identity, ctx.config.max_depth);
        if scan.matched > 0 || scan.root_dir_matches {
            evidence.insert_text("writable_root", root.display().to_string());
            evidence.insert_list("sample", scan.sample);
            evidence.insert_int("matched", scan.matched as i64);
            return ProbeDisposition::Accessed { evidence };
        }
    }
    ProbeDisposition::Denied {
        evidence,
        detail: "no file under the configured roots is predicted writable".into(),
    }
}

fn scratch_write(ctx: &ProbeContext) -> ProbeDisposition {
    let base = match ctx.probe_scratch() {
        Ok(dir) => dir,
        Err(e) => return ProbeDisposition::failed(format!("cannot prepare scratch: {e}")),
    };
    let target = base.join("written");
    if let Err(msg) = ensure_in_scratch(ctx.scratch_root, &target) {
        return ProbeDisposition::failed(msg);
    }
    let mut evidence = Evidence::new("fs");
    evidence.insert_text("operation", "write");
    evidence.insert_text("mode", "scratch-active");
    let payload = b"sandboxeval content write";
    match std::fs::write(&target, payload).and_then(|()| std::fs::read(&target)) {
        Ok(back) if back == payload => {
            evidence.insert_text("path", target.display().to_string());
            evidence.insert_int("bytes_written", payload.len() as i64);
            ProbeDisposition::Accessed { evidence }
        }
        Ok(_) => ProbeDisposition::failed("write round-trip returned different content"),
        Err(e) if e.kind() == ErrorKind::PermissionDenied => {
            ProbeDisposition::Denied { evidence, detail: format!("scratch write denied: {e}") }
        }
        Err(e) => ProbeDisposition::failed(format!("scratch write failed: {e}")),
    }
}

fn infer_execute(ctx: &ProbeContext) -> ProbeDisposition {
    let identity = Identity::current();
    let mut evidence = Evidence::new("fs");
    evidence.insert_text("operation", "execute");
    evidence.insert_text("mode", "infer-only");
    evidence.insert_flag("acl_checked", false);
    let mut attempts = Vec::new();
    for exemplar in &ctx.config.exec_exemplars {
        if !exemplar.exists() {
            attempts.push(format!("{} absent", exemplar.display()));
            continue;
        }
        let p = infer_access_as(&identity, exemplar, AccessOp::Execute);
        attempts.push(p.entry());
        evidence.insert_list("attempts", attempts);
        evidence.insert_text("target", exemplar.display().to_string());
        evidence.insert_text("basis", p.basis.clone());
        return if p.allows() {
            ProbeDisposition::Accessed { evidence }
        } else {
            ProbeDisposition::Denied {
                evidence,
                detail: format!("execution of {} predicted to fail", exemplar.display()),
            }
        };
    }
    // no exemplar exists; fall back to scanning for any executable file
    for root in &ctx.config.content_roots {
        let scan = scan_root(root, AccessOp::Execute, &identity, ctx.config.max_depth);
        if scan.matched > 0 {
            evidence.insert_list("sample", scan.sample);
            evidence.insert_list("attempts", attempts);
            return ProbeDisposition::Accessed { evidence };
        }
    }
    evidence.insert_list("attempts", attempts);
    ProbeDisposition::Denied { evidence, detail: "no executable file is predicted runnable".into() }
}

fn scratch_execute(ctx: &ProbeContext) -> ProbeDisposition {
    let base = match ctx.probe_scratch() {
        Ok(dir) => dir,
        Err(e) => return ProbeDisposition::failed(format!("cannot prepare scratch: {e}")),
    };
    let script = base.join("probe_script.sh");
    if let Err(msg) = ensure_in_scratch(ctx.scratch_root, &script) {
        return ProbeDisposition::failed(msg);
    }
    let mut evidence = Evidence::new("fs");
    evidence.insert_text("operation", "execute");
    evidence.insert_text("mode", "scratch-active");
    evidence.insert_text("path", script.display().to_string());
    if let Err(e) = std::fs::write(&script, b"#!/bin/sh\nexit 0\n") {
        return ProbeDisposition::failed(format!("cannot write script: {e}"));
    }
    if let Err(e) = std::fs::set_permissions(&script, std::fs::Permissions::from_mode(0o755)) {
        return ProbeDisposition::failed(format!("cannot mark script executable: {e}"));
    }
    match std::process::Command::new(&script).status() {
        Ok(status) if status.success() => {
            evidence.insert_flag("exit_ok", true);
            ProbeDisposition::Accessed { evidence }
        }
        Ok(status) => ProbeDisposition::Denied {
            evidence,
            detail: format!("script did not run cleanly: {status}"),
        },
        Err(e) if e.kind() == ErrorKind::PermissionDenied => ProbeDisposition::Denied {
            evidence,
            detail: format!("script execution denied (possibly a noexec mount): {e}"),
        },
        Err(e) => ProbeDisposition::failed(format!("cannot spawn script: {e}")),
    }
}

/// Privilege probes: ownership transfer and permission changes.
pub fn probe_privilege(op: PrivilegeOp, ctx: &ProbeContext) -> ProbeDisposition {
    match fs_mode(ctx) {
        Ok(FsMode::InferOnly) => infer_privilege(op, ctx),
        Ok(FsMode::ScratchActive) => scratch_privilege(op, ctx),
        Err(d) => d,
    }
}

fn privilege_label(op: PrivilegeOp) -> &'static str {
    match op {
        PrivilegeOp::RootOwner => "root_owner",
        PrivilegeOp::UserOwner => "user_owner",
        PrivilegeOp::OpenPermission => "open_permission",
        PrivilegeOp::RestrictPermission => "restrict_permission",
    }
}

fn infer_privilege(op: PrivilegeOp, ctx: &ProbeContext) -> ProbeDisposition {
    let identity = Identity::current();
    let targets = ctx.config.critical_paths.clone();
    let mut predictions = Vec::new();
    let mut per_target = Vec::new();
    for target in &targets {
        let prediction = match op {
            PrivilegeOp::RootOwner => infer_access_as(&identity, target, AccessOp::Chown),
            PrivilegeOp::UserOwner => {
                // transferring to the current user is a no-op when the caller
                // already owns the entry, so ownership counts as allow
                let chown = infer_access_as(&identity, target, AccessOp::Chown);
                if chown.allows() {
                    chown
                } else {
                    match std::fs::metadata(target) {
                        Ok(meta) if meta.uid() == identity.euid => AccessPrediction {
                            operation: AccessOp::Chown,
                            target: target.clone(),
                            predicted: Predicted::Allow,
                            basis: "caller already owns the entry (no-op transfer)".into(),
                        },
                        _ => chown,
                    }
                }
            }
            PrivilegeOp::OpenPermission | PrivilegeOp::RestrictPermission => {
                infer_access_as(&identity, target, AccessOp::Chmod)
            }
        };
        per_target.push((target.clone(), prediction.allows(), prediction.basis.clone()));
        predictions.push(prediction);
    }
    let (evidence, allowed) =
        prediction_evidence(privilege_label(op), &targets, predictions, per_target);
    if allowed > 0 {
        ProbeDisposition::Accessed { evidence }
    } else {
        ProbeDisposition::Denied {
            evidence,
            detail: format!("no configured target permits {}", privilege_label(op)),
        }
    }
}

fn scratch_privilege(op: PrivilegeOp, ctx: &ProbeContext) -> ProbeDisposition {
    let base = match ctx.probe_scratch() {
        Ok(dir) => dir,
        Err(e) => return ProbeDisposition::failed(format!("cannot prepare scratch: {e}")),
    };
    let target = base.join("privilege_fixture");
    if let Err(msg) = ensure_in_scratch(ctx.scratch_root, &target) {
        return ProbeDisposition::failed(msg);
    }
    if let Err(e) = std::fs::write(&target, b"fixture") {
        return ProbeDisposition::failed(format!("cannot create fixture: {e}"));
    }
    let mut evidence = Evidence::new("fs");
    evidence.insert_text("operation", privilege_label(op));
    evidence.insert_text("mode", "scratch-active");
    evidence.insert_text("path", target.display().to_string());
    match perform_privilege_op(op, &target) {
        Ok(fact) => {
            evidence.insert_text("observed", fact);
            ProbeDisposition::Accessed { evidence }
        }
        Err(e) if e.kind() == ErrorKind::PermissionDenied => ProbeDisposition::Denied {
            evidence,
            detail: format!("{} denied: {e}", privilege_label(op)),
        },
        Err(e) => ProbeDisposition::failed(format!("{} failed: {e}", privilege_label(op))),
    }
}

/// Performs the real privilege change on a scratch fixture, restoring the
/// original state afterwards so repeated probes leave the fixture unchanged.
pub fn perform_privilege_op(op: PrivilegeOp, target: &Path) -> io::Result<String> {
    let meta = std::fs::metadata(target)?;
    let original_mode = meta.mode() & 0o7777;
    match op {
        PrivilegeOp::RootOwner => {
            std::os::unix::fs::chown(target, Some(0), Some(0))?;
            // restore so the fixture stays usable by the caller
            std::os::unix::fs::chown(target, Some(meta.uid()), Some(meta.gid()))?;
            Ok("ownership transferred to uid 0 and restored".into())
        }
        PrivilegeOp::UserOwner => {
            let identity = Identity::current();
            std::os::unix::fs::chown(target, Some(identity.euid), Some(identity.egid))?;
            Ok(format!("ownership set to uid {}", identity.euid))
        }
        PrivilegeOp::OpenPermission => {
            std::fs::set_permissions(target, std::fs::Permissions::from_mode(0o777))?;
            let now = std::fs::metadata(target)?.mode() & 0o7777;
            std::fs::set_permissions(target, std::fs::Permissions::from_mode(original_mode))?;
            Ok(format!("mode opened to {now:04o} and restored to {original_mode:04o}"))
        }
        PrivilegeOp::RestrictPermission => {
            std::fs::set_permissions(target, std::fs::Permissions::from_mode(0o000))?;
            let now = std::fs::metadata(target)?.mode() & 0o7777;
            std::fs::set_permissions(target, std::fs::Permissions::from_mode(original_mode))?;
            Ok(format!("mode restricted to {now:04o} and restored to {original_mode:04o}"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_file(uid: u32, gid: u32, perms: u32) -> MetaState {
        MetaState::Found(EntryMeta { uid, gid, mode: 0o100000 | perms, is_dir: false })
    }

    fn fake_dir(uid: u32, gid: u32, perms: u32) -> MetaState {
        MetaState::Found(EntryMeta { uid, gid, mode: 0o40000 | perms, is_dir: true })
    }

    fn user(euid: u32, egid: u32) -> Identity {
        Identity { euid, egid, groups: vec![egid] }
    }

    #[test]
    fn owner_class_wins_even_when_more_restrictive() {
        // POSIX class selection: owner match stops the search, so a generous
        // group grant must not rescue a stingy owner grant
        let id = user(1000, 1000);
        let (p, _) = decide(&id, AccessOp::Read, fake_file(1000, 1000, 0o044), MetaState::Missing);
        assert_eq!(p, Predicted::Deny);
        let (p, _) = decide(&id, AccessOp::Read, fake_file(1, 1000, 0o040), MetaState::Missing);
        assert_eq!(p, Predicted::Allow);
        let (p, _) = decide(&id, AccessOp::Read, fake_file(1, 1, 0o004), MetaState::Missing);
        assert_eq!(p, Predicted::Allow);
    }

    #[test]
    fn world_readable_allows_read() {
        let id = user(1000, 1000);
        let (p, _) = decide(&id, AccessOp::Read, fake_file(1, 1, 0o777), MetaState::Missing);
        assert_eq!(p, Predicted::Allow);
    }

    #[test]
    fn mode_0444_denies_write_for_every_class() {
        for identity in [user(0x7fff, 0x7fff), user(1, 1), user(500, 1)] {
            let (p, basis) =
                decide(&identity, AccessOp::Write, fake_file(1, 1, 0o444), MetaState::Missing);
            assert_eq!(p, Predicted::Deny, "basis: {basis}");
            assert!(basis.contains("lacks write"), "basis: {basis}");
        }
    }

    #[test]
    fn root_overrides_read_and_write_but_not_missing_exec_bits() {
        let root = user(0, 0);
        let (p, _) = decide(&root, AccessOp::Read, fake_file(1, 1, 0o000), MetaState::Missing);
        assert_eq!(p, Predicted::Allow);
        let (p, _) = decide(&root, AccessOp::Write, fake_file(1, 1, 0o000), MetaState::Missing);
        assert_eq!(p, Predicted::Allow);
        let (p, _) = decide(&root, AccessOp::Execute, fake_file(1, 1, 0o000), MetaState::Missing);
        assert_eq!(p, Predicted::Deny);
        let (p, _) = decide(&root, AccessOp::Execute, fake_file(1, 1, 0o010), MetaState::Missing);
        assert_eq!(p, Predicted::Allow);
    }

    #[test]
    fn execute_needs_read_for_non_root() {
        let id = user(1000, 1000);
        let (p, basis) =
            decide(&id, AccessOp::Execute, fake_file(1000, 1000, 0o100), MetaState::Missing);
        assert_eq!(p, Predicted::Deny);
        assert!(basis.contains("interpreter"), "basis: {basis}");
        let (p, _) = decide(&id, AccessOp::Execute, fake_file(1000, 1000, 0o500), MetaState::Missing);
        assert_eq!(p, Predicted::Allow);
    }

    #[test]
    fn directory_write_requires_search_too() {
        let id = user(1000, 1000);
        let (p, _) = decide(&id, AccessOp::Write, fake_dir(1000, 1000, 0o200), MetaState::Missing);
        assert_eq!(p, Predicted::Deny);
        let (p, _) = decide(&id, AccessOp::Write, fake_dir(1000, 1000, 0o300), MetaState::Missing);
        assert_eq!(p, Predicted::Allow);
    }

    #[test]
    fn create_consults_parent_bits() {
        let id = user(1000, 1000);
        let (p, _) = decide(&id, AccessOp::CreateIn, MetaState::Missing, fake_dir(1000, 1000, 0o700));
        assert_eq!(p, Predicted::Allow);
        let (p, _) = decide(&id, AccessOp::CreateIn, MetaState::Missing, fake_dir(0, 0, 0o755));
        assert_eq!(p, Predicted::Deny);
        let (p, basis) = decide(&id, AccessOp::CreateIn, MetaState::Missing, fake_file(1000, 1000, 0o777));
        assert_eq!(p, Predicted::Deny);
        assert!(basis.contains("not a directory"));
    }

    #[test]
    fn sticky_parent_blocks_removing_other_users_entries() {
        let id = user(1000, 1000);
        // /tmp-like: world-writable with sticky bit, entry owned by uid 1
        let (p, basis) =
            decide(&id, AccessOp::DeleteFrom, fake_file(1, 1, 0o644), fake_dir(0, 0, 0o1777));
        assert_eq!(p, Predicted::Deny);
        assert!(basis.contains("sticky"));
        // own entry in the same directory is fine
        let (p, _) =
            decide(&id, AccessOp::DeleteFrom, fake_file(1000, 1000, 0o644), fake_dir(0, 0, 0o1777));
        assert_eq!(p, Predicted::Allow);
    }

    #[test]
    fn unreachable_targets_deny_without_error() {
        let prediction = infer_access(Path::new("/nonexistent/deeply/nested"), AccessOp::Read);
        assert_eq!(prediction.predicted, Predicted::Deny);
        let prediction = infer_access(Path::new("/nonexistent/deeply/nested"), AccessOp::CreateIn);
        assert_eq!(prediction.predicted, Predicted::Deny);
    }

    #[test]
    fn chown_requires_root_chmod_requires_ownership() {
        let id = user(1000, 1000);
        let (p, _) = decide(&id, AccessOp::Chown, fake_file(1000, 1000, 0o644), MetaState::Missing);
        assert_eq!(p, Predicted::Deny);
        let (p, _) = decide(&id, AccessOp::Chmod, fake_file(1000, 1000, 0o644), MetaState::Missing);
        assert_eq!(p, Predicted::Allow);
        let (p, _) = decide(&id, AccessOp::Chmod, fake_file(1, 1, 0o777), MetaState::Missing);
        assert_eq!(p, Predicted::Deny);
        let root = user(0, 0);
        let (p, _) = decide(&root, AccessOp::Chown, fake_file(1, 1, 0o644), MetaState::Missing);
        assert_eq!(p, Predicted::Allow);
    }

    /// Oracle check for the 0444 case: the prediction must match a real
    /// write attempt, whichever way this test process is privileged.
    #[test]
    fn prediction_matches_real_write_on_0444_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("readonly");
        std::fs::write(&file, b"x").unwrap();
        std::fs::set_permissions(&file, std::fs::Permissions::from_mode(0o444)).unwrap();
        let predicted = infer_access(&file, AccessOp::Write).allows();
        let real = std::fs::OpenOptions::new().write(true).open(&file).is_ok();
        assert_eq!(predicted, real);
        if !Identity::current().is_root() {
            assert!(!real, "0444 file must reject writes for its unprivileged owner");
        }
    }

    #[test]
    fn rename_in_unwritable_parent_matches_prediction() {
        let dir = tempfile::tempdir().unwrap();
        let parent = dir.path().join("locked");
        std::fs::create_dir(&parent).unwrap();
        let file = parent.join("victim");
        std::fs::write(&file, b"x").unwrap();
        std::fs::set_permissions(&parent, std::fs::Permissions::from_mode(0o555)).unwrap();
        let predicted = infer_access(&file, AccessOp::DeleteFrom).allows();
        let real = std::fs::rename(&file, parent.join("renamed")).is_ok();
        assert_eq!(predicted, real);
        if !Identity::current().is_root() {
            assert!(!real);
        }
        std::fs::set_permissions(&parent, std::fs::Permissions::from_mode(0o755)).unwrap();
    }

    #[test]
    fn chown_to_root_oracle() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("fixture");
        std::fs::write(&file, b"x").unwrap();
        let predicted = infer_access(&file, AccessOp::Chown).allows();
        let real = std::os::unix::fs::chown(&file, Some(0), Some(0)).is_ok();
        assert_eq!(predicted, real);
        if Identity::current().is_root() {
            assert!(real, "root must be able to chown its own scratch fixture");
        } else {
            assert!(!real, "chown to uid 0 must fail when euid != 0");
        }
    }

    #[test]
    fn open_then_restrict_restores_original_mode() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("fixture");
        std::fs::write(&file, b"x").unwrap();
        std::fs::set_permissions(&file, std::fs::Permissions::from_mode(0o640)).unwrap();
        perform_privilege_op(PrivilegeOp::OpenPermission, &file).unwrap();
        perform_privilege_op(PrivilegeOp::RestrictPermission, &file).unwrap();
        let mode = std::fs::metadata(&file).unwrap().mode() & 0o7777;
        assert_eq!(mode, 0o640);
    }

    #[test]
    fn structure_ops_succeed_in_writable_scratch() {
        let dir = tempfile::tempdir().unwrap();
        for op in [
            StructureOp::Create,
            StructureOp::Move,
            StructureOp::Copy,
            StructureOp::Rename,
            StructureOp::Delete,
            StructureOp::Compress,
        ] {
            let base = dir.path().join(op.as_str());
            std::fs::create_dir_all(&base).unwrap();
            perform_structure_op(op, &base)
                .unwrap_or_else(|e| panic!("{} failed in scratch: {e}", op.as_str()));
        }
    }

    #[test]
    fn scratch_guard_rejects_outside_paths() {
        let dir = tempfile::tempdir().unwrap();
        assert!(ensure_in_scratch(dir.path(), &dir.path().join("inside")).is_ok());
        assert!(ensure_in_scratch(dir.path(), Path::new("/etc/passwd")).is_err());
    }

    #[test]
    fn read_probe_on_mode_0000_exemplar_follows_privilege() {
        use crate::executor::RunConfig;
        use crate::registry::Registry;

        let dir = tempfile::tempdir().unwrap();
        let sealed = dir.path().join("sealed");
        std::fs::write(&sealed, b"secret").unwrap();
        std::fs::set_permissions(&sealed, std::fs::Permissions::from_mode(0o000)).unwrap();
        let config = RunConfig { read_exemplars: vec![sealed], ..RunConfig::default() };
        let spec = Registry::all_probes().specs().first().unwrap();
        let ctx = ProbeContext {
            spec,
            mode: ExecutionMode::Direct,
            config: &config,
            scratch_root: dir.path(),
        };
        let disposition = probe_content(ContentOp::Read, &ctx);
        if Identity::current().is_root() {
            // dac override reads through cleared bits
            assert!(matches!(disposition, ProbeDisposition::Accessed { .. }));
        } else {
            assert!(matches!(disposition, ProbeDisposition::Denied { .. }));
        }
    }
}
