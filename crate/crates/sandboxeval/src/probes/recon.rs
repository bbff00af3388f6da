//! Read-only reconnaissance probes: system facets, directory hierarchy, and
//! filesystem metadata. These never mutate anything and always run in direct
//! mode.
//!
//! Payload keys are stable per probe. System facets document theirs on
//! [`probe_system`]; directory probes emit `path` / `entries` / counts;
//! metadata probes emit `entries` plus counts.

use std::collections::BTreeMap;
use std::ffi::CStr;
use std::io::ErrorKind;
use std::os::unix::fs::{MetadataExt, PermissionsExt};
use std::path::{Path, PathBuf};
use std::time::UNIX_EPOCH;

use walkdir::WalkDir;

use super::{ProbeContext, ProbeDisposition};
use crate::model::Evidence;

/// The ten system facets of the exposure family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemFacet {
    Platform,
    Cpu,
    Memory,
    Disk,
    Network,
    Pid,
    Sensor,
    User,
    Environment,
    Locale,
}

/// Which directory a hierarchy probe anchors on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirScope {
    Working,
    Parent,
    Root,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetadataKind {
    Ownership,
    Permission,
    Attributes,
}

/// Entries visited before an enumeration stops; keeps deep trees from
/// dominating a run.
pub const MAX_ENUM_VISITS: usize = 20_000;

const ENTRY_CAP: usize = 2_000;

// ---------------------------------------------------------------------------
// System facets
// ---------------------------------------------------------------------------

/// Collects one system facet.
///
/// Payload keys per facet: Platform → `os`, `kernel`, `kernel_version`,
/// `arch`, `distribution`; Cpu → `count`, `model`, `load_avg`, `times`;
/// Memory → `total_kb`, `available_kb`, `swap_total_kb`; Disk →
/// `total_bytes`, `free_bytes`, `available_bytes`, `mounts`; Network →
/// `hostname`, `interfaces`, `addresses`; Pid → `processes`, `visible`,
/// `distinct_uids`, `other_users_visible`; Sensor → `readings`; User →
/// `users`, `count`; Environment → one `env.<NAME>` key per variable plus
/// `count`; Locale → `timezone`, `lang`, `lc_all`.
pub fn probe_system(facet: SystemFacet, _ctx: &ProbeContext) -> ProbeDisposition {
    match facet {
        SystemFacet::Platform => platform(),
        SystemFacet::Cpu => cpu(),
        SystemFacet::Memory => memory(),
        SystemFacet::Disk => disk(),
        SystemFacet::Network => network(),
        SystemFacet::Pid => pid(),
        SystemFacet::Sensor => sensor(),
        SystemFacet::User => user(),
        SystemFacet::Environment => environment(),
        SystemFacet::Locale => locale(),
    }
}

fn cstr_field(buf: &[libc::c_char]) -> String {
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn platform() -> ProbeDisposition {
    let mut evidence = Evidence::new("sysinfo");
    let mut uts: libc::utsname = unsafe { std::mem::zeroed() };
    if unsafe { libc::uname(&mut uts) } != 0 {
        return ProbeDisposition::failed("uname call failed");
    }
    evidence.insert_text("os", cstr_field(&uts.sysname));
    evidence.insert_text("kernel", cstr_field(&uts.release));
    evidence.insert_text("kernel_version", cstr_field(&uts.version));
    evidence.insert_text("arch", cstr_field(&uts.machine));
    if let Ok(osr) = std::fs::read_to_string("/etc/os-release") {
        if let Some(line) = osr.lines().find(|l| l.starts_with("PRETTY_NAME=")) {
            evidence.insert_text("distribution", line.trim_start_matches("PRETTY_NAME=").trim_matches('"'));
        }
    }
    ProbeDisposition::Accessed { evidence }
}

fn cpu() -> ProbeDisposition {
    let mut evidence = Evidence::new("sysinfo");
    let count = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(0);
    evidence.insert_int("count", count as i64);
    match std::fs::read_to_string("/proc/cpuinfo") {
        Ok(info) => {
            if let Some(model) = info
                .lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
            {
                evidence.insert_text("model", model.trim());
            }
        }
        Err(e) if e.kind() == ErrorKind::PermissionDenied => {
            return ProbeDisposition::Denied { evidence, detail: format!("/proc/cpuinfo: {e}") }
        }
        Err(_) => {}
    }
    if let Ok(load) = std::fs::read_to_string("/proc/loadavg") {
        evidence.insert_text("load_avg", load.split_whitespace().take(3).collect::<Vec<_>>().join(" "));
    }
    if let Ok(stat) = std::fs::read_to_string("/proc/stat") {
        if let Some(line) = stat.lines().next() {
            evidence.insert_text("times", line.trim());
        }
    }
    if count == 0 && evidence.payload.len() <= 1 {
        return ProbeDisposition::Denied { evidence, detail: "cpu information sources unavailable".into() };
    }
    ProbeDisposition::Accessed { evidence }
}

fn memory() -> ProbeDisposition {
    let mut evidence = Evidence::new("sysinfo");
    let info = match std::fs::read_to_string("/proc/meminfo") {
        Ok(s) => s,
        Err(e) if e.kind() == ErrorKind::PermissionDenied => {
            return ProbeDisposition::Denied { evidence, detail: format!("/proc/meminfo: {e}") }
        }
        Err(e) => {
            return ProbeDisposition::Denied { evidence, detail: format!("source unavailable: {e}") }
        }
    };
    let mut grab = |field: &str, key: &str| {
        if let Some(kb) = info
            .lines()
            .find(|l| l.starts_with(field))
            .and_then(|l| l.split_whitespace().nth(1))
            .and_then(|v| v.parse::<i64>().ok())
        {
            evidence.insert_int(key, kb);
        }
    };
    grab("MemTotal:", "total_kb");
    grab("MemAvailable:", "available_kb");
    grab("SwapTotal:", "swap_total_kb");
    if evidence.payload.is_empty() {
        return ProbeDisposition::Denied { evidence, detail: "meminfo had no usable fields".into() };
    }
    ProbeDisposition::Accessed { evidence }
}

fn disk() -> ProbeDisposition {
    let mut evidence = Evidence::new("sysinfo");
    let root = std::ffi::CString::new("/").unwrap();
    let mut vfs: libc::statvfs = unsafe { std::mem::zeroed() };
    if unsafe { libc::statvfs(root.as_ptr(), &mut vfs) } != 0 {
        let e = std::io::Error::last_os_error();
        return ProbeDisposition::Denied { evidence, detail: format!("statvfs(/): {e}") };
    }
    let frsize = vfs.f_frsize as i64;
    evidence.insert_int("total_bytes", vfs.f_blocks as i64 * frsize);
    evidence.insert_int("free_bytes", vfs.f_bfree as i64 * frsize);
    evidence.insert_int("available_bytes", vfs.f_bavail as i64 * frsize);
    evidence.insert_list(
        "mounts",
        mounts()
            .into_iter()
            .take(50)
            .map(|(point, fstype)| format!("{} type={fstype}", point.display()))
            .collect(),
    );
    ProbeDisposition::Accessed { evidence }
}

fn network() -> ProbeDisposition {
    let mut evidence = Evidence::new("sysinfo");
    let mut buf = [0u8; 256];
    if unsafe { libc::gethostname(buf.as_mut_ptr() as *mut libc::c_char, buf.len()) } == 0 {
        let hostname = unsafe { CStr::from_ptr(buf.as_ptr() as *const libc::c_char) };
        evidence.insert_text("hostname", hostname.to_string_lossy());
    }
    let (interfaces, addresses) = interface_addresses();
    if !interfaces.is_empty() {
        evidence.insert_list("interfaces", interfaces);
    } else if let Ok(entries) = std::fs::read_dir("/sys/class/net") {
        evidence.insert_list(
            "interfaces",
            entries.filter_map(|e| e.ok()).map(|e| e.file_name().to_string_lossy().into_owned()).collect(),
        );
    }
    if !addresses.is_empty() {
        evidence.insert_list("addresses", addresses);
    }
    if evidence.payload.is_empty() {
        return ProbeDisposition::Denied { evidence, detail: "network information sources unavailable".into() };
    }
    ProbeDisposition::Accessed { evidence }
}

fn interface_addresses() -> (Vec<String>, Vec<String>) {
    let mut names = Vec::new();
    let mut addrs = Vec::new();
    let mut list: *mut libc::ifaddrs = std::ptr::null_mut();
    if unsafe { libc::getifaddrs(&mut list) } != 0 {
        return (names, addrs);
    }
    let mut cursor = list;
    while !cursor.is_null() {
        let entry = unsafe { &*cursor };
        let name = unsafe { CStr::from_ptr(entry.ifa_name) }.to_string_lossy().into_owned();
        if !names.contains(&name) {
            names.push(name.clone());
        }
        if !entry.ifa_addr.is_null() {
            let family = unsafe { (*entry.ifa_addr).sa_family } as i32;
            if family == libc::AF_INET {
                let sin = unsafe { &*(entry.ifa_addr as *const libc::sockaddr_in) };
                let ip = std::net::Ipv4Addr::from(u32::from_be(sin.sin_addr.s_addr));
                addrs.push(format!("{name} {ip}"));
            } else if family == libc::AF_INET6 {
                let sin6 = unsafe { &*(entry.ifa_addr as *const libc::sockaddr_in6) };
                let ip = std::net::Ipv6Addr::from(sin6.sin6_addr.s6_addr);
                addrs.push(format!("{name} {ip}"));
            }
        }
        cursor = entry.ifa_next;
    }
    unsafe { libc::freeifaddrs(list) };
    (names, addrs)
}

fn pid() -> ProbeDisposition {
    let mut evidence = Evidence::new("sysinfo");
    let euid = unsafe { libc::geteuid() };
    let users = user_names();
    let entries = match std::fs::read_dir("/proc") {
        Ok(entries) => entries,
        Err(e) => {
            return ProbeDisposition::Denied { evidence, detail: format!("/proc unreadable: {e}") }
        }
    };
    let mut processes = Vec::new();
    let mut distinct_uids = std::collections::BTreeSet::new();
    let mut visible = 0usize;
    for entry in entries.filter_map(|e| e.ok()) {
        let name = entry.file_name();
        let Ok(pid) = name.to_string_lossy().parse::<u32>() else { continue };
        let status = match std::fs::read_to_string(entry.path().join("status")) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let pname = status
            .lines()
            .find(|l| l.starts_with("Name:"))
            .map(|l| l.trim_start_matches("Name:").trim().to_string())
            .unwrap_or_default();
        let uid = status
            .lines()
            .find(|l| l.starts_with("Uid:"))
            .and_then(|l| l.split_whitespace().nth(1))
            .and_then(|v| v.parse::<u32>().ok())
            .unwrap_or(u32::MAX);
        visible += 1;
        distinct_uids.insert(uid);
        if processes.len() < 200 {
            let user = users.get(&uid).cloned().unwrap_or_else(|| format!("uid:{uid}"));
            processes.push(format!("{pid} {pname} {user}"));
        }
    }
    let other_users = distinct_uids.iter().any(|&uid| uid != euid);
    evidence.insert_list("processes", processes);
    evidence.insert_int("visible", visible as i64);
    evidence.insert_int("distinct_uids", distinct_uids.len() as i64);
    evidence.insert_flag("other_users_visible", other_users);
    if visible == 0 {
        ProbeDisposition::Denied { evidence, detail: "no processes visible under /proc".into() }
    } else if other_users {
        ProbeDisposition::Accessed { evidence }
    } else {
        // seeing only one's own processes is the confined case
        ProbeDisposition::Denied {
            evidence,
            detail: "only the caller's own processes are visible".into(),
        }
    }
}

fn sensor() -> ProbeDisposition {
    let mut evidence = Evidence::new("sysinfo");
    let mut readings = Vec::new();
    if let Ok(zones) = std::fs::read_dir("/sys/class/thermal") {
        for zone in zones.filter_map(|e| e.ok()) {
            if let Ok(temp) = std::fs::read_to_string(zone.path().join("temp")) {
                readings.push(format!("{} temp={}", zone.file_name().to_string_lossy(), temp.trim()));
            }
        }
    }
    if let Ok(mons) = std::fs::read_dir("/sys/class/hwmon") {
        for mon in mons.filter_map(|e| e.ok()) {
            if let Ok(value) = std::fs::read_to_string(mon.path().join("temp1_input")) {
                readings.push(format!("{} temp1={}", mon.file_name().to_string_lossy(), value.trim()));
            }
        }
    }
    if let Ok(supplies) = std::fs::read_dir("/sys/class/power_supply") {
        for supply in supplies.filter_map(|e| e.ok()) {
            if let Ok(capacity) = std::fs::read_to_string(supply.path().join("capacity")) {
                readings.push(format!("{} capacity={}", supply.file_name().to_string_lossy(), capacity.trim()));
            }
        }
    }
    if readings.is_empty() {
        // absence of sensor interfaces is the common container case
        ProbeDisposition::Denied { evidence, detail: "source unavailable".into() }
    } else {
        evidence.insert_list("readings", readings);
        ProbeDisposition::Accessed { evidence }
    }
}

fn user() -> ProbeDisposition {
    let mut evidence = Evidence::new("sysinfo");
    let passwd = match std::fs::read_to_string("/etc/passwd") {
        Ok(s) => s,
        Err(e) if e.kind() == ErrorKind::PermissionDenied => {
            return ProbeDisposition::Denied { evidence, detail: format!("/etc/passwd: {e}") }
        }
        Err(e) => {
            return ProbeDisposition::Denied { evidence, detail: format!("source unavailable: {e}") }
        }
    };
    let users: Vec<String> = passwd
        .lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| {
            let fields: Vec<&str> = l.split(':').collect();
            (fields.len() >= 7).then(|| {
                format!(
                    "{} uid={} gid={} home={} shell={}",
                    fields[0], fields[2], fields[3], fields[5], fields[6]
                )
            })
        })
        .collect();
    if users.is_empty() {
        return ProbeDisposition::Denied { evidence, detail: "no user entries readable".into() };
    }
    evidence.insert_int("count", users.len() as i64);
    evidence.insert_list("users", users);
    ProbeDisposition::Accessed { evidence }
}

fn environment() -> ProbeDisposition {
    let mut evidence = Evidence::new("sysinfo");
    let mut count = 0i64;
    for (name, value) in std::env::vars_os() {
        count += 1;
        evidence.insert_text(
            format!("env.{}", name.to_string_lossy()),
            value.to_string_lossy().into_owned(),
        );
    }
    evidence.insert_int("count", count);
    if count == 0 {
        ProbeDisposition::Denied { evidence, detail: "no environment variables visible".into() }
    } else {
        ProbeDisposition::Accessed { evidence }
    }
}

fn locale() -> ProbeDisposition {
    let mut evidence = Evidence::new("sysinfo");
    let timezone = std::env::var("TZ").ok().filter(|tz| !tz.is_empty()).or_else(|| {
        std::fs::read_to_string("/etc/timezone")
            .ok()
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
    }).or_else(|| {
        std::fs::read_link("/etc/localtime").ok().and_then(|link| {
            let s = link.to_string_lossy().into_owned();
            s.split("zoneinfo/").nth(1).map(|z| z.to_string())
        })
    });
    match timezone {
        Some(tz) => evidence.insert_text("timezone", tz),
        None => {
            return ProbeDisposition::Denied { evidence, detail: "no timezone source available".into() }
        }
    }
    if let Ok(lang) = std::env::var("LANG") {
        evidence.insert_text("lang", lang);
    }
    if let Ok(lc) = std::env::var("LC_ALL") {
        evidence.insert_text("lc_all", lc);
    }
    ProbeDisposition::Accessed { evidence }
}

fn user_names() -> BTreeMap<u32, String> {
    let mut map = BTreeMap::new();
    if let Ok(passwd) = std::fs::read_to_string("/etc/passwd") {
        for line in passwd.lines() {
            let fields: Vec<&str> = line.split(':').collect();
            if fields.len() >= 3 {
                if let Ok(uid) = fields[2].parse::<u32>() {
                    map.entry(uid).or_insert_with(|| fields[0].to_string());
                }
            }
        }
    }
    map
}

/// Mount table as (mount point, filesystem type) pairs.
pub(crate) fn mounts() -> Vec<(PathBuf, String)> {
    let mut out = Vec::new();
    if let Ok(table) = std::fs::read_to_string("/proc/mounts") {
        for line in table.lines() {
            let mut fields = line.split_whitespace();
            let _device = fields.next();
            if let (Some(point), Some(fstype)) = (fields.next(), fields.next()) {
                // octal escapes in mount points are rare; keep them verbatim
                out.push((PathBuf::from(point), fstype.to_string()));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Directory hierarchy
// ---------------------------------------------------------------------------

fn scope_base(scope: DirScope) -> std::io::Result<PathBuf> {
    let cwd = std::env::current_dir()?;
    Ok(match scope {
        DirScope::Working => cwd,
        DirScope::Parent => cwd.parent().map(Path::to_path_buf).unwrap_or(cwd),
        DirScope::Root => PathBuf::from("/"),
    })
}

/// Path retrieval or recursive enumeration of a directory scope. The
/// enumeration never follows symbolic links, skips (and counts) unreadable
/// subtrees, and stops after [`MAX_ENUM_VISITS`] entries.
pub fn probe_directory(scope: DirScope, enumerate_items: bool, ctx: &ProbeContext) -> ProbeDisposition {
    let mut evidence = Evidence::new("dir");
    let base = match scope_base(scope) {
        Ok(p) => p,
        Err(e) => {
            return ProbeDisposition::Denied { evidence, detail: format!("scope unresolvable: {e}") }
        }
    };
    evidence.insert_text("path", base.display().to_string());
    if !enumerate_items {
        return match std::fs::metadata(&base) {
            Ok(_) => ProbeDisposition::Accessed { evidence },
            Err(e) => ProbeDisposition::Denied { evidence, detail: format!("scope unreadable: {e}") },
        };
    }

    let walk = enumerate(&base, ctx.config.max_depth);
    if !walk.base_readable {
        return ProbeDisposition::Denied {
            evidence,
            detail: format!("{} cannot be listed", base.display()),
        };
    }
    evidence.insert_list("entries", walk.entries);
    evidence.insert_int("file_count", walk.files as i64);
    evidence.insert_int("dir_count", walk.dirs as i64);
    evidence.insert_int("skipped_count", walk.skipped as i64);
    evidence.insert_int("visited", walk.visited as i64);
    evidence.insert_flag("truncated", walk.truncated);
    let tags: Vec<String> = mounts()
        .into_iter()
        .filter(|(point, _)| point.starts_with(&base))
        .take(40)
        .map(|(point, fstype)| format!("{}={fstype}", point.display()))
        .collect();
    if !tags.is_empty() {
        evidence.insert_list("filesystem_types", tags);
    }
    ProbeDisposition::Accessed { evidence }
}

pub(crate) struct EnumerationResult {
    pub entries: Vec<String>,
    pub files: usize,
    pub dirs: usize,
    pub skipped: usize,
    pub visited: usize,
    pub truncated: bool,
    pub base_readable: bool,
}

pub(crate) fn enumerate(base: &Path, max_depth: usize) -> EnumerationResult {
    let mut result = EnumerationResult {
        entries: Vec::new(),
        files: 0,
        dirs: 0,
        skipped: 0,
        visited: 0,
        truncated: false,
        base_readable: false,
    };
    if std::fs::read_dir(base).is_ok() {
        result.base_readable = true;
    }
    for entry in WalkDir::new(base).min_depth(1).max_depth(max_depth).follow_links(false) {
        result.visited += 1;
        if result.visited > MAX_ENUM_VISITS {
            result.truncated = true;
            break;
        }
        match entry {
            Ok(e) => {
                if e.file_type().is_dir() {
                    result.dirs += 1;
                } else {
                    result.files += 1;
                }
                if result.entries.len() < ENTRY_CAP {
                    result.entries.push(e.path().display().to_string());
                } else {
                    result.truncated = true;
                }
            }
            Err(_) => result.skipped += 1,
        }
    }
    result
}

// ---------------------------------------------------------------------------
// Metadata
// ---------------------------------------------------------------------------

/// Ownership, permission, or attribute extraction over the configured
/// metadata root.
pub fn probe_metadata(kind: MetadataKind, ctx: &ProbeContext) -> ProbeDisposition {
    probe_metadata_at(kind, &ctx.config.metadata_root, ctx.config.max_depth)
}

pub fn probe_metadata_at(kind: MetadataKind, root: &Path, max_depth: usize) -> ProbeDisposition {
    let mut evidence = Evidence::new("meta");
    evidence.insert_text("root", root.display().to_string());
    if let Err(e) = std::fs::symlink_metadata(root) {
        return ProbeDisposition::Denied { evidence, detail: format!("root unreadable: {e}") };
    }
    let users = user_names();
    let groups = group_names();
    let mut entries = Vec::new();
    let mut skipped = 0usize;
    let mut visited = 0usize;
    for entry in WalkDir::new(root).max_depth(max_depth).follow_links(false) {
        visited += 1;
        if visited > MAX_ENUM_VISITS {
            break;
        }
        let entry = match entry {
            Ok(e) => e,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let meta = match entry.metadata() {
            Ok(m) => m,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        if entries.len() >= ENTRY_CAP {
            continue;
        }
        let path = entry.path().display();
        entries.push(match kind {
            MetadataKind::Ownership => {
                let owner = users.get(&meta.uid()).cloned().unwrap_or_else(|| format!("uid:{}", meta.uid()));
                let group = groups.get(&meta.gid()).cloned().unwrap_or_else(|| format!("gid:{}", meta.gid()));
                format!("{path} owner={owner}({}) group={group}({})", meta.uid(), meta.gid())
            }
            MetadataKind::Permission => {
                let mode = meta.permissions().mode() & 0o7777;
                format!(
                    "{path} mode={mode:04o} user={} group={} other={}",
                    rwx(mode >> 6),
                    rwx(mode >> 3),
                    rwx(mode)
                )
            }
            MetadataKind::Attributes => {
                let mtime = meta
                    .modified()
                    .ok()
                    .and_then(|t| t.duration_since(UNIX_EPOCH).ok())
                    .map(|d| d.as_secs().to_string())
                    .unwrap_or_else(|| "-".into());
                let created = meta
                    .created()
                    .ok()
                    .and_then(|t| t.duration_since(UNIX_EPOCH).ok())
                    .map(|d| d.as_secs().to_string())
                    .unwrap_or_else(|| "-".into());
                format!("{path} size={} modified={mtime} created={created}", meta.len())
            }
        });
    }
    let count = entries.len();
    evidence.insert_list("entries", entries);
    evidence.insert_int("entry_count", count as i64);
    evidence.insert_int("skipped_count", skipped as i64);
    if count > 0 {
        ProbeDisposition::Accessed { evidence }
    } else {
        ProbeDisposition::Denied { evidence, detail: "no entry metadata readable under root".into() }
    }
}

fn rwx(bits: u32) -> String {
    format!(
        "{}{}{}",
        if bits & 0o4 != 0 { 'r' } else { '-' },
        if bits & 0o2 != 0 { 'w' } else { '-' },
        if bits & 0o1 != 0 { 'x' } else { '-' }
    )
}

fn group_names() -> BTreeMap<u32, String> {
    let mut map = BTreeMap::new();
    if let Ok(group) = std::fs::read_to_string("/etc/group") {
        for line in group.lines() {
            let fields: Vec<&str> = line.split(':').collect();
            if fields.len() >= 3 {
                if let Ok(gid) = fields[2].parse::<u32>() {
                    map.entry(gid).or_insert_with(|| fields[0].to_string());
                }
            }
        }
    }
    map
}

/// Compact host snapshot recorded in every run report. Redactable like any
/// other evidence.
pub fn environment_fingerprint() -> Evidence {
    let mut evidence = Evidence::new("sysinfo");
    let mut uts: libc::utsname = unsafe { std::mem::zeroed() };
    if unsafe { libc::uname(&mut uts) } == 0 {
        evidence.insert_text("os", cstr_field(&uts.sysname));
        evidence.insert_text("kernel", cstr_field(&uts.release));
        evidence.insert_text("arch", cstr_field(&uts.machine));
        evidence.insert_text("hostname", cstr_field(&uts.nodename));
    }
    evidence.insert_int("euid", unsafe { libc::geteuid() } as i64);
    evidence
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::executor::RunConfig;
    use crate::model::ExecutionMode;
    use crate::registry::Registry;

    fn test_ctx<'a>(config: &'a RunConfig, scratch: &'a Path) -> ProbeContext<'a> {
        let spec = Registry::all_probes().specs().first().unwrap();
        ProbeContext { spec, mode: ExecutionMode::Direct, config, scratch_root: scratch }
    }

    #[test]
    fn environment_facet_sees_path() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig::default();
        let ctx = test_ctx(&config, dir.path());
        match probe_system(SystemFacet::Environment, &ctx) {
            ProbeDisposition::Accessed { evidence } => {
                assert!(evidence.payload.keys().any(|k| k == "env.PATH"));
            }
            other => panic!("expected accessed, got {other:?}"),
        }
    }

    #[test]
    fn locale_echoes_tz_variable() {
        // TZ takes precedence over every other source
        std::env::set_var("TZ", "UTC");
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig::default();
        let ctx = test_ctx(&config, dir.path());
        match probe_system(SystemFacet::Locale, &ctx) {
            ProbeDisposition::Accessed { evidence } => {
                assert_eq!(
                    evidence.payload["timezone"],
                    crate::model::PayloadValue::Text("UTC".into())
                );
            }
            other => panic!("expected accessed, got {other:?}"),
        }
        std::env::remove_var("TZ");
    }

    #[test]
    fn working_directory_path_matches_cwd() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig::default();
        let ctx = test_ctx(&config, dir.path());
        match probe_directory(DirScope::Working, false, &ctx) {
            ProbeDisposition::Accessed { evidence } => {
                let cwd = std::env::current_dir().unwrap();
                assert_eq!(
                    evidence.payload["path"],
                    crate::model::PayloadValue::Text(cwd.display().to_string())
                );
            }
            other => panic!("expected accessed, got {other:?}"),
        }
    }

    #[test]
    fn enumeration_matches_construction_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = ["a.txt", "b.txt", "c.txt"];
        for name in manifest {
            std::fs::write(dir.path().join(name), b"x").unwrap();
        }
        let result = enumerate(dir.path(), 1);
        let mut found: Vec<String> = result.entries;
        found.sort();
        let mut expected: Vec<String> =
            manifest.iter().map(|n| dir.path().join(n).display().to_string()).collect();
        expected.sort();
        assert_eq!(found, expected);
        assert_eq!(result.files, 3);
        assert_eq!(result.skipped, 0);
    }

    #[test]
    fn enumeration_respects_depth_bound() {
        let dir = tempfile::tempdir().unwrap();
        let mut path = dir.path().to_path_buf();
        for level in 0..6 {
            path = path.join(format!("level{level}"));
        }
        std::fs::create_dir_all(&path).unwrap();
        std::fs::write(path.join("deep.txt"), b"x").unwrap();
        let result = enumerate(dir.path(), 3);
        for entry in &result.entries {
            let below = Path::new(entry).strip_prefix(dir.path()).unwrap().components().count();
            assert!(below <= 3, "{entry} exceeds depth bound");
        }
        assert!(result.entries.iter().all(|e| !e.contains("deep.txt")));
    }

    #[test]
    fn metadata_ownership_reports_current_user_for_own_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("mine"), b"x").unwrap();
        let euid = unsafe { libc::geteuid() };
        match probe_metadata_at(MetadataKind::Ownership, dir.path(), 2) {
            ProbeDisposition::Accessed { evidence } => {
                let entries = match &evidence.payload["entries"] {
                    crate::model::PayloadValue::TextList(v) => v.clone(),
                    other => panic!("unexpected payload {other:?}"),
                };
                assert!(
                    entries.iter().any(|e| e.contains("mine") && e.contains(&format!("({euid})"))),
                    "entries: {entries:?}"
                );
            }
            other => panic!("expected accessed, got {other:?}"),
        }
    }

    #[test]
    fn metadata_permission_reports_mode_bits() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("ro");
        std::fs::write(&file, b"x").unwrap();
        std::fs::set_permissions(&file, std::fs::Permissions::from_mode(0o444)).unwrap();
        match probe_metadata_at(MetadataKind::Permission, dir.path(), 2) {
            ProbeDisposition::Accessed { evidence } => {
                let entries = match &evidence.payload["entries"] {
                    crate::model::PayloadValue::TextList(v) => v.clone(),
                    other => panic!("unexpected payload {other:?}"),
                };
                let row = entries
                    .iter()
                    .find(|e| e.starts_with(&file.display().to_string()))
                    .expect("row for the fixture file");
                assert!(row.contains("user=r--"), "{row}");
                assert!(row.contains("group=r--"), "{row}");
                assert!(row.contains("other=r--"), "{row}");
            }
            other => panic!("expected accessed, got {other:?}"),
        }
    }
}
