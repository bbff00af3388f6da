//! Probe bodies for every catalog scenario, plus the shared execution context
//! and disposition type the executor classifies.

pub mod comm_danger;
pub mod fs;
pub mod netio;
pub mod recon;

use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::executor::RunConfig;
use crate::model::{Evidence, ExecutionMode, ProbeId, ProbeSpec};

/// What a probe body reports back before the executor classifies it.
///
/// `Accessed` means the primary payload was obtained. `Denied` means the
/// environment refused (permission failure, refusal, unreachability).
/// `Failed` means the probe itself broke and the executor should record
/// `Unknown`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ProbeDisposition {
    Accessed { evidence: Evidence },
    Denied { evidence: Evidence, detail: String },
    Failed { detail: String },
}

impl ProbeDisposition {
    pub fn denied(kind: &str, detail: impl Into<String>) -> ProbeDisposition {
        ProbeDisposition::Denied { evidence: Evidence::new(kind), detail: detail.into() }
    }

    pub fn failed(detail: impl Into<String>) -> ProbeDisposition {
        ProbeDisposition::Failed { detail: detail.into() }
    }
}

/// Everything a probe body may consult while running.
pub struct ProbeContext<'a> {
    pub spec: &'a ProbeSpec,
    pub mode: ExecutionMode,
    pub config: &'a RunConfig,
    /// Canonicalized scratch root; the only location probes may mutate.
    pub scratch_root: &'a Path,
}

impl ProbeContext<'_> {
    /// Private scratch directory for this probe, created on demand.
    pub fn probe_scratch(&self) -> io::Result<PathBuf> {
        let dir = self.scratch_root.join(self.spec.id.as_str().replace('.', "_"));
        std::fs::create_dir_all(&dir)?;
        Ok(dir)
    }
}

pub type ProbeBody = fn(&ProbeContext) -> ProbeDisposition;

/// Maps a catalog probe id onto its implementation.
pub fn body_for(id: &ProbeId) -> Option<ProbeBody> {
    use comm_danger::{CommChannel, DangerOp};
    use fs::{ContentOp, PrivilegeOp, StructureOp};
    use recon::{DirScope, MetadataKind, SystemFacet};

    let body: ProbeBody = match id.as_str() {
        "sysinfo.platform" => |ctx| recon::probe_system(SystemFacet::Platform, ctx),
        "sysinfo.cpu" => |ctx| recon::probe_system(SystemFacet::Cpu, ctx),
        "sysinfo.memory" => |ctx| recon::probe_system(SystemFacet::Memory, ctx),
        "sysinfo.disk" => |ctx| recon::probe_system(SystemFacet::Disk, ctx),
        "sysinfo.network" => |ctx| recon::probe_system(SystemFacet::Network, ctx),
        "sysinfo.pid" => |ctx| recon::probe_system(SystemFacet::Pid, ctx),
        "sysinfo.sensor" => |ctx| recon::probe_system(SystemFacet::Sensor, ctx),
        "sysinfo.user" => |ctx| recon::probe_system(SystemFacet::User, ctx),
        "sysinfo.environment" => |ctx| recon::probe_system(SystemFacet::Environment, ctx),
        "sysinfo.locale" => |ctx| recon::probe_system(SystemFacet::Locale, ctx),
        "dir.working_directory" => |ctx| recon::probe_directory(DirScope::Working, false, ctx),
        "dir.working_items" => |ctx| recon::probe_directory(DirScope::Working, true, ctx),
        "dir.parent_directory" => |ctx| recon::probe_directory(DirScope::Parent, false, ctx),
        "dir.parent_items" => |ctx| recon::probe_directory(DirScope::Parent, true, ctx),
        "dir.root_directory" => |ctx| recon::probe_directory(DirScope::Root, false, ctx),
        "dir.root_items" => |ctx| recon::probe_directory(DirScope::Root, true, ctx),
        "meta.ownership" => |ctx| recon::probe_metadata(MetadataKind::Ownership, ctx),
        "meta.permission" => |ctx| recon::probe_metadata(MetadataKind::Permission, ctx),
        "meta.attributes" => |ctx| recon::probe_metadata(MetadataKind::Attributes, ctx),
        "fs.structure.locate" => |ctx| fs::probe_structure(StructureOp::Locate, ctx),
        "fs.structure.create" => |ctx| fs::probe_structure(StructureOp::Create, ctx),
        "fs.structure.move" => |ctx| fs::probe_structure(StructureOp::Move, ctx),
        "fs.structure.copy" => |ctx| fs::probe_structure(StructureOp::Copy, ctx),
        "fs.structure.rename" => |ctx| fs::probe_structure(StructureOp::Rename, ctx),
        "fs.structure.delete" => |ctx| fs::probe_structure(StructureOp::Delete, ctx),
        "fs.structure.compress" => |ctx| fs::probe_structure(StructureOp::Compress, ctx),
        "fs.content.readable_files" => |ctx| fs::probe_content(ContentOp::ReadableFiles, ctx),
        "fs.content.read" => |ctx| fs::probe_content(ContentOp::Read, ctx),
        "fs.content.writable_files" => |ctx| fs::probe_content(ContentOp::WritableFiles, ctx),
        "fs.content.write" => |ctx| fs::probe_content(ContentOp::Write, ctx),
        "fs.content.executable_files" => |ctx| fs::probe_content(ContentOp::ExecutableFiles, ctx),
        "fs.content.execute" => |ctx| fs::probe_content(ContentOp::Execute, ctx),
        "fs.privilege.root_owner" => |ctx| fs::probe_privilege(PrivilegeOp::RootOwner, ctx),
        "fs.privilege.user_owner" => |ctx| fs::probe_privilege(PrivilegeOp::UserOwner, ctx),
        "fs.privilege.open_permission" => |ctx| fs::probe_privilege(PrivilegeOp::OpenPermission, ctx),
        "fs.privilege.restrict_permission" => {
            |ctx| fs::probe_privilege(PrivilegeOp::RestrictPermission, ctx)
        }
        "net.ping" => |ctx| comm_danger::probe_external(CommChannel::Ping, ctx),
        "net.dns_query" => |ctx| comm_danger::probe_external(CommChannel::DnsQuery, ctx),
        "net.http" => |ctx| comm_danger::probe_external(CommChannel::Http, ctx),
        "net.ftp" => |ctx| comm_danger::probe_external(CommChannel::Ftp, ctx),
        "net.ssh" => |ctx| comm_danger::probe_external(CommChannel::Ssh, ctx),
        "net.smtp" => |ctx| comm_danger::probe_external(CommChannel::Smtp, ctx),
        "net.messaging" => |ctx| comm_danger::probe_external(CommChannel::Messaging, ctx),
        "net.cloud_storage" => |ctx| comm_danger::probe_external(CommChannel::CloudStorage, ctx),
        "danger.occupy_resources" => |ctx| comm_danger::probe_dangerous(DangerOp::OccupyResources, ctx),
        "danger.network_congestion" => {
            |ctx| comm_danger::probe_dangerous(DangerOp::NetworkCongestion, ctx)
        }
        "danger.disk_exhaustion" => |ctx| comm_danger::probe_dangerous(DangerOp::DiskExhaustion, ctx),
        "danger.root_access" => |ctx| comm_danger::probe_dangerous(DangerOp::RootAccess, ctx),
        "danger.filesystem_corruption" => {
            |ctx| comm_danger::probe_dangerous(DangerOp::FilesystemCorruption, ctx)
        }
        "danger.privilege_escalation" => {
            |ctx| comm_danger::probe_dangerous(DangerOp::PrivilegeEscalation, ctx)
        }
        "danger.system_shutdown" => |ctx| comm_danger::probe_dangerous(DangerOp::SystemShutdown, ctx),
        _ => return None,
    };
    Some(body)
}
