//! External-communication and dangerous-operation probes.
//!
//! Every probe here is a bounded, budgeted proxy for the real action: a
//! handshake instead of a transfer, a capped burst instead of a flood, a
//! scratch-confined write instead of a disk flood, a no-op privileged call
//! instead of a reboot. Success of the proxy indicates the real action would
//! plausibly succeed. No credentials are ever attached to anything.
//!
//! Outcome mapping for communication channels: the protocol step completing
//! is `Accessed`; refusal, unreachability, or timeout is `Denied` (a hardened
//! sandbox black-holes traffic, which manifests as timeouts); `Unknown` is
//! reserved for internal probe failure.

use std::net::{IpAddr, SocketAddr};
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::netio;
use super::{ProbeContext, ProbeDisposition};
use crate::model::{Evidence, ExecutionMode};

// ---------------------------------------------------------------------------
// Budget
// ---------------------------------------------------------------------------

/// Hard ceilings compiled into the build; configuration cannot exceed them.
pub const BUDGET_MAX_CPU_SECONDS: f64 = 10.0;
pub const BUDGET_MAX_BYTES: u64 = 16 * 1024 * 1024;
pub const BUDGET_MAX_REQUESTS: u32 = 50;
pub const BUDGET_MAX_TIMEOUT_SECONDS: f64 = 30.0;

/// Resource budget for proxy operations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Wall-clock spin time for the resource-occupation proxy.
    #[serde(default = "default_cpu_seconds")]
    pub cpu_seconds: f64,
    /// Bytes the disk-exhaustion proxy may write before cleaning up.
    #[serde(default = "default_max_bytes")]
    pub max_bytes: u64,
    /// Request cap for the congestion proxy.
    #[serde(default = "default_max_requests")]
    pub max_requests: u32,
    /// Seconds per network attempt.
    #[serde(default = "default_timeout_seconds")]
    pub timeout_seconds: f64,
}

fn default_cpu_seconds() -> f64 {
    2.0
}
fn default_max_bytes() -> u64 {
    1024 * 1024
}
fn default_max_requests() -> u32 {
    5
}
fn default_timeout_seconds() -> f64 {
    3.0
}

impl Default for Budget {
    fn default() -> Budget {
        Budget {
            cpu_seconds: default_cpu_seconds(),
            max_bytes: default_max_bytes(),
            max_requests: default_max_requests(),
            timeout_seconds: default_timeout_seconds(),
        }
    }
}

impl Budget {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.cpu_seconds > 0.0 && self.cpu_seconds <= BUDGET_MAX_CPU_SECONDS) {
            return Err(format!(
                "budget cpu_seconds must be in (0, {BUDGET_MAX_CPU_SECONDS}], got {}",
                self.cpu_seconds
            ));
        }
        if !(self.max_bytes > 0 && self.max_bytes <= BUDGET_MAX_BYTES) {
            return Err(format!(
                "budget max_bytes must be in (0, {BUDGET_MAX_BYTES}], got {}",
                self.max_bytes
            ));
        }
        if !(self.max_requests > 0 && self.max_requests <= BUDGET_MAX_REQUESTS) {
            return Err(format!(
                "budget max_requests must be in (0, {BUDGET_MAX_REQUESTS}], got {}",
                self.max_requests
            ));
        }
        if !(self.timeout_seconds > 0.0 && self.timeout_seconds <= BUDGET_MAX_TIMEOUT_SECONDS) {
            return Err(format!(
                "budget timeout_seconds must be in (0, {BUDGET_MAX_TIMEOUT_SECONDS}], got {}",
                self.timeout_seconds
            ));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_seconds)
    }
}

// ---------------------------------------------------------------------------
// Endpoints
// ---------------------------------------------------------------------------

/// One host/port target for a channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Endpoint {
    pub host: String,
    pub port: u16,
}

impl Endpoint {
    fn new(host: &str, port: u16) -> Endpoint {
        Endpoint { host: host.into(), port }
    }
}

/// Per-channel endpoint table. Defaults point at documentation-reserved
/// hostnames and are meant to be overridden in the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointTable {
    /// Ping target; `port` is the transport-connect fallback port.
    #[serde(default = "default_ping")]
    pub ping: Endpoint,
    /// Explicit DNS resolver as `ip:port`; system-configured when absent.
    #[serde(default)]
    pub dns_resolver: Option<String>,
    /// Name the DNS probe queries an address record for.
    #[serde(default = "default_dns_query_name")]
    pub dns_query_name: String,
    #[serde(default = "default_http")]
    pub http: Endpoint,
    #[serde(default = "default_http_path")]
    pub http_path: String,
    #[serde(default = "default_ftp")]
    pub ftp: Endpoint,
    #[serde(default = "default_ssh")]
    pub ssh: Endpoint,
    #[serde(default = "default_smtp")]
    pub smtp: Endpoint,
    #[serde(default = "default_messaging")]
    pub messaging: Endpoint,
    #[serde(default = "default_cloud_storage")]
    pub cloud_storage: Endpoint,
}

fn default_ping() -> Endpoint {
    Endpoint::new("example.com", 443)
}
fn default_dns_query_name() -> String {
    "example.com".into()
}
fn default_http() -> Endpoint {
    Endpoint::new("example.com", 80)
}
fn default_http_path() -> String {
    "/".into()
}
fn default_ftp() -> Endpoint {
    Endpoint::new("example.com", 21)
}
fn default_ssh() -> Endpoint {
    Endpoint::new("example.com", 22)
}
fn default_smtp() -> Endpoint {
    Endpoint::new("example.com", 25)
}
fn default_messaging() -> Endpoint {
    Endpoint::new("api.example.net", 443)
}
fn default_cloud_storage() -> Endpoint {
    Endpoint::new("storage.example.org", 443)
}

impl Default for EndpointTable {
    fn default() -> EndpointTable {
        EndpointTable {
            ping: default_ping(),
            dns_resolver: None,
            dns_query_name: default_dns_query_name(),
            http: default_http(),
            http_path: default_http_path(),
            ftp: default_ftp(),
            ssh: default_ssh(),
            smtp: default_smtp(),
            messaging: default_messaging(),
            cloud_storage: default_cloud_storage(),
        }
    }
}

impl EndpointTable {
    /// Rejects malformed endpoints before any probe runs.
    pub fn validate(&self) -> Result<(), String> {
        for (label, endpoint) in [
            ("ping", &self.ping),
            ("http", &self.http),
            ("ftp", &self.ftp),
            ("ssh", &self.ssh),
            ("smtp", &self.smtp),
            ("messaging", &self.messaging),
            ("cloud_storage", &self.cloud_storage),
        ] {
            if endpoint.host.trim().is_empty() {
                return Err(format!("{label} endpoint has an empty host"));
            }
            if endpoint.port == 0 {
                return Err(format!("{label} endpoint has port 0"));
            }
        }
        if self.dns_query_name.trim().is_empty() {
            return Err("dns query name is empty".into());
        }
        if let Some(resolver) = &self.dns_resolver {
            parse_resolver(resolver).map_err(|e| format!("dns resolver `{resolver}`: {e}"))?;
        }
        if !self.http_path.starts_with('/') {
            return Err(format!("http path `{}` must start with /", self.http_path));
        }
        Ok(())
    }
}

fn parse_resolver(value: &str) -> Result<SocketAddr, String> {
    if let Ok(addr) = value.parse::<SocketAddr>() {
        return Ok(addr);
    }
    if let Ok(ip) = value.parse::<IpAddr>() {
        return Ok(SocketAddr::new(ip, 53));
    }
    Err("expected ip or ip:port".into())
}

// ---------------------------------------------------------------------------
// Communication channels
// ---------------------------------------------------------------------------

/// The eight external-communication channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommChannel {
    Ping,
    DnsQuery,
    Http,
    Ftp,
    Ssh,
    Smtp,
    Messaging,
    CloudStorage,
}

fn require_proxy(ctx: &ProbeContext) -> Option<ProbeDisposition> {
    if ctx.mode != ExecutionMode::Proxy {
        Some(ProbeDisposition::failed(format!(
            "{} probes only support proxy mode",
            ctx.spec.id.family()
        )))
    } else {
        None
    }
}

/// Chooses the resolver used for DNS probing and for resolving ping targets
/// given by name: the explicit override when configured, else the
/// system-configured one.
fn resolver_for(ctx: &ProbeContext) -> Option<SocketAddr> {
    match &ctx.config.endpoints.dns_resolver {
        Some(value) => parse_resolver(value).ok(),
        None => netio::system_resolver(),
    }
}

/// Runs one bounded communication proxy against its configured endpoint.
pub fn probe_external(channel: CommChannel, ctx: &ProbeContext) -> ProbeDisposition {
    if let Some(d) = require_proxy(ctx) {
        return d;
    }
    let timeout = ctx.config.budget.timeout();
    match channel {
        CommChannel::Ping => ping(ctx, timeout),
        CommChannel::DnsQuery => dns(ctx, timeout),
        CommChannel::Http => http(ctx, timeout),
        CommChannel::Ftp => banner_channel("ftp", &ctx.config.endpoints.ftp, timeout),
        CommChannel::Ssh => banner_channel("ssh", &ctx.config.endpoints.ssh, timeout),
        CommChannel::Smtp => smtp(ctx, timeout),
        CommChannel::Messaging => tls_channel("messaging", &ctx.config.endpoints.messaging, timeout),
        CommChannel::CloudStorage => {
            tls_channel("cloud_storage", &ctx.config.endpoints.cloud_storage, timeout)
        }
    }
}

fn ping(ctx: &ProbeContext, timeout: Duration) -> ProbeDisposition {
    let endpoint = &ctx.config.endpoints.ping;
    let mut evidence = Evidence::new("net");
    evidence.insert_text("channel", "ping");
    evidence.insert_text("target", endpoint.host.clone());

    // pinging a website needs its address first
    let target_v4 = match endpoint.host.parse::<IpAddr>() {
        Ok(IpAddr::V4(v4)) => Some(v4),
        Ok(IpAddr::V6(_)) => None,
        Err(_) => {
            let resolved = resolver_for(ctx).and_then(|resolver| {
                netio::dns_query(resolver, &endpoint.host, timeout)
                    .ok()
                    .and_then(|answer| answer.addresses.first().copied())
            });
            match resolved {
                Some(addr) => {
                    evidence.insert_text("resolved", addr.to_string());
                    Some(addr)
                }
                None => {
                    // name resolution is itself egress; a dead resolver path
                    // means the ping cannot proceed
                    return ProbeDisposition::Denied {
                        evidence,
                        detail: format!("name resolution for {} failed", endpoint.host),
                    };
                }
            }
        }
    };

    if let Some(addr) = target_v4 {
        match netio::icmp_echo(addr, timeout) {
            Ok(echo) => {
                evidence.insert_text("method", "icmp_datagram");
                evidence.insert_int("rtt_ms", echo.rtt.as_millis() as i64);
                return ProbeDisposition::Accessed { evidence };
            }
            Err(netio::IcmpError::SocketUnavailable(e)) => {
                evidence.insert_text("icmp_socket", format!("unavailable: {e}"));
                // fall through to the transport fallback
            }
            Err(netio::IcmpError::SendRecv(e)) => {
                evidence.insert_text("method", "icmp_datagram");
                return ProbeDisposition::Denied { evidence, detail: format!("echo failed: {e}") };
            }
        }
    }

    // no icmp socket (or a v6-only literal): transport connect stands in
    evidence.insert_text("method", "tcp_fallback");
    let started = Instant::now();
    match netio::tcp_connect(&endpoint.host, endpoint.port, timeout) {
        Ok(_) => {
            evidence.insert_int("rtt_ms", started.elapsed().as_millis() as i64);
            ProbeDisposition::Accessed { evidence }
        }
        Err(e) => ProbeDisposition::Denied {
            evidence,
            detail: format!("transport connect to {}:{} failed: {e}", endpoint.host, endpoint.port),
        },
    }
}

fn dns(ctx: &ProbeContext, timeout: Duration) -> ProbeDisposition {
    let mut evidence = Evidence::new("net");
    evidence.insert_text("channel", "dns_query");
    let name = ctx.config.endpoints.dns_query_name.clone();
    evidence.insert_text("query_name", name.clone());
    let resolver = match resolver_for(ctx) {
        Some(r) => r,
        None => {
            return ProbeDisposition::Denied { evidence, detail: "no resolver configured".into() }
        }
    };
    evidence.insert_text("resolver", resolver.to_string());
    let started = Instant::now();
    match netio::dns_query(resolver, &name, timeout) {
        Ok(answer) => {
            // any well-formed response proves the resolver path is open
            evidence.insert_int("rtt_ms", started.elapsed().as_millis() as i64);
            evidence.insert_int("rcode", answer.rcode as i64);
            evidence.insert_list(
                "addresses",
                answer.addresses.iter().map(|a| a.to_string()).collect(),
            );
            ProbeDisposition::Accessed { evidence }
        }
        Err(e) => ProbeDisposition::Denied { evidence, detail: format!("dns query failed: {e}") },
    }
}

fn http(ctx: &ProbeContext, timeout: Duration) -> ProbeDisposition {
    let endpoint = &ctx.config.endpoints.http;
    let path = &ctx.config.endpoints.http_path;
    let mut evidence = Evidence::new("net");
    evidence.insert_text("channel", "http");
    evidence.insert_text("url", format!("http://{}:{}{}", endpoint.host, endpoint.port, path));
    let started = Instant::now();
    let get = netio::http_request(&endpoint.host, endpoint.port, path, "GET", None, timeout, 64 * 1024);
    match get {
        Ok(response) => {
            evidence.insert_text("get_status", response.status_line.clone());
            evidence.insert_int("get_bytes", response.bytes_read as i64);
        }
        Err(e) => {
            return ProbeDisposition::Denied { evidence, detail: format!("http get failed: {e}") }
        }
    }
    let body = vec![b'x'; 512]; // well under the 1 KiB cap
    let post = netio::http_request(&endpoint.host, endpoint.port, path, "POST", Some(&body), timeout, 64 * 1024);
    match post {
        Ok(response) => {
            evidence.insert_text("post_status", response.status_line.clone());
            evidence.insert_int("rtt_ms", started.elapsed().as_millis() as i64);
            ProbeDisposition::Accessed { evidence }
        }
        Err(e) => ProbeDisposition::Denied { evidence, detail: format!("http post failed: {e}") },
    }
}

fn banner_channel(label: &str, endpoint: &Endpoint, timeout: Duration) -> ProbeDisposition {
    let mut evidence = Evidence::new("net");
    evidence.insert_text("channel", label);
    evidence.insert_text("endpoint", format!("{}:{}", endpoint.host, endpoint.port));
    let started = Instant::now();
    match netio::read_banner(&endpoint.host, endpoint.port, timeout, 1024) {
        Ok(banner) => {
            let prefix: String = banner.chars().take(64).collect();
            evidence.insert_text("greeting", prefix);
            evidence.insert_int("rtt_ms", started.elapsed().as_millis() as i64);
            ProbeDisposition::Accessed { evidence }
        }
        Err(e) => ProbeDisposition::Denied {
            evidence,
            detail: format!("{label} greeting not received: {e}"),
        },
    }
}

fn smtp(ctx: &ProbeContext, timeout: Duration) -> ProbeDisposition {
    let endpoint = &ctx.config.endpoints.smtp;
    let first = banner_channel("smtp", endpoint, timeout);
    // submission port fallback only makes sense from the default port
    if let ProbeDisposition::Denied { .. } = &first {
        if endpoint.port == 25 {
            let alt = Endpoint { host: endpoint.host.clone(), port: 587 };
            if let ProbeDisposition::Accessed { mut evidence } =
                banner_channel("smtp", &alt, timeout)
            {
                evidence.insert_text("fallback", "port 587 after 25 was refused");
                return ProbeDisposition::Accessed { evidence };
            }
        }
    }
    first
}

fn tls_channel(label: &str, endpoint: &Endpoint, timeout: Duration) -> ProbeDisposition {
    let mut evidence = Evidence::new("net");
    evidence.insert_text("channel", label);
    evidence.insert_text("endpoint", format!("{}:{}", endpoint.host, endpoint.port));
    evidence.insert_flag("credentials_attached", false);
    let started = Instant::now();
    match netio::tls_handshake_probe(&endpoint.host, endpoint.port, timeout) {
        Ok(result) => {
            evidence.insert_int("rtt_ms", started.elapsed().as_millis() as i64);
            evidence.insert_int("first_record_type", result.record_type as i64);
            if result.record_type == netio::TLS_HANDSHAKE_RECORD {
                ProbeDisposition::Accessed { evidence }
            } else if result.record_type == netio::TLS_ALERT_RECORD {
                ProbeDisposition::Denied {
                    evidence,
                    detail: "server answered the handshake with a tls alert".into(),
                }
            } else {
                ProbeDisposition::Denied {
                    evidence,
                    detail: "listener did not speak tls".into(),
                }
            }
        }
        Err(e) => ProbeDisposition::Denied {
            evidence,
            detail: format!("secure-transport handshake failed: {e}"),
        },
    }
}

// ---------------------------------------------------------------------------
// Dangerous operations
// ---------------------------------------------------------------------------

/// The seven dangerous-operation proxies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DangerOp {
    OccupyResources,
    NetworkCongestion,
    DiskExhaustion,
    RootAccess,
    FilesystemCorruption,
    PrivilegeEscalation,
    SystemShutdown,
}

/// Runs one bounded dangerous-operation proxy.
pub fn probe_dangerous(op: DangerOp, ctx: &ProbeContext) -> ProbeDisposition {
    if let Some(d) = require_proxy(ctx) {
        return d;
    }
    match op {
        DangerOp::OccupyResources => occupy_resources(&ctx.config.budget),
        DangerOp::NetworkCongestion => network_congestion(ctx),
        DangerOp::DiskExhaustion => match ctx.probe_scratch() {
            Ok(dir) => disk_exhaustion(&ctx.config.budget, &dir),
            Err(e) => ProbeDisposition::Denied {
                evidence: Evidence::new("danger"),
                detail: format!("scratch unwritable: {e}"),
            },
        },
        DangerOp::RootAccess => root_access(),
        DangerOp::FilesystemCorruption => critical_path_inference(
            "filesystem_corruption",
            &[super::fs::AccessOp::Write, super::fs::AccessOp::DeleteFrom],
            ctx,
        ),
        DangerOp::PrivilegeEscalation => critical_path_inference(
            "privilege_escalation",
            &[super::fs::AccessOp::Chmod, super::fs::AccessOp::Chown],
            ctx,
        ),
        DangerOp::SystemShutdown => system_shutdown(),
    }
}

/// Spins one worker per core until the wall-clock budget elapses, then
/// reports the utilization achieved and any cgroup ceiling observed.
pub fn occupy_resources(budget: &Budget) -> ProbeDisposition {
    let mut evidence = Evidence::new("danger");
    evidence.insert_text("operation", "occupy_resources");
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(8);
    evidence.insert_int("workers", workers as i64);
    evidence.insert_text("budget_seconds", format!("{:.3}", budget.cpu_seconds));

    let deadline = Instant::now() + Duration::from_secs_f64(budget.cpu_seconds);
    let cpu_before = process_cpu_time();
    let started = Instant::now();
    let handles: Vec<_> = (0..workers)
        .map(|seed| {
            std::thread::spawn(move || {
                let mut acc = seed as u64;
                loop {
                    for _ in 0..10_000 {
                        acc = std::hint::black_box(acc.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407));
                    }
                    if Instant::now() >= deadline {
                        break acc;
                    }
                }
            })
        })
        .collect();
    for handle in handles {
        let _ = handle.join();
    }
    let wall = started.elapsed();
    let cpu_used = process_cpu_time().saturating_sub(cpu_before);
    let utilization = if wall.as_secs_f64() > 0.0 {
        cpu_used.as_secs_f64() / (wall.as_secs_f64() * workers as f64)
    } else {
        0.0
    };
    evidence.insert_text("wall_seconds", format!("{:.3}", wall.as_secs_f64()));
    evidence.insert_text("cpu_seconds_used", format!("{:.3}", cpu_used.as_secs_f64()));
    evidence.insert_text("utilization", format!("{utilization:.3}"));
    let ceiling = cgroup_cpu_quota();
    match ceiling {
        Some(cores) => {
            evidence.insert_text("cgroup_quota_cores", format!("{cores:.2}"));
            ProbeDisposition::Denied {
                evidence,
                detail: format!("cgroup limits this workload to {cores:.2} cores"),
            }
        }
        None if utilization >= 0.5 => {
            evidence.insert_text("ceiling", "none observed");
            ProbeDisposition::Accessed { evidence }
        }
        None => ProbeDisposition::Denied {
            evidence,
            detail: format!("workers were throttled to {utilization:.2} utilization"),
        },
    }
}

fn process_cpu_time() -> Duration {
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    if unsafe { libc::getrusage(libc::RUSAGE_SELF, &mut usage) } != 0 {
        return Duration::ZERO;
    }
    let to_duration = |tv: libc::timeval| {
        Duration::from_secs(tv.tv_sec.max(0) as u64) + Duration::from_micros(tv.tv_usec.max(0) as u64)
    };
    to_duration(usage.ru_utime) + to_duration(usage.ru_stime)
}

/// Cores allowed by the cgroup cpu controller, if a quota is set.
fn cgroup_cpu_quota() -> Option<f64> {
    if let Ok(v2) = std::fs::read_to_string("/sys/fs/cgroup/cpu.max") {
        let mut fields = v2.split_whitespace();
        let quota = fields.next()?;
        if quota != "max" {
            let quota: f64 = quota.parse().ok()?;
            let period: f64 = fields.next()?.parse().ok()?;
            if period > 0.0 {
                return Some(quota / period);
            }
        }
        return None;
    }
    let quota = std::fs::read_to_string("/sys/fs/cgroup/cpu/cpu.cfs_quota_us").ok()?;
    let quota: f64 = quota.trim().parse().ok()?;
    if quota <= 0.0 {
        return None;
    }
    let period: f64 = std::fs::read_to_string("/sys/fs/cgroup/cpu/cpu.cfs_period_us")
        .ok()?
        .trim()
        .parse()
        .ok()?;
    (period > 0.0).then(|| quota / period)
}

fn network_congestion(ctx: &ProbeContext) -> ProbeDisposition {
    let budget = &ctx.config.budget;
    let endpoint = &ctx.config.endpoints.http;
    let path = &ctx.config.endpoints.http_path;
    let mut evidence = Evidence::new("danger");
    evidence.insert_text("operation", "network_congestion");
    evidence.insert_text("target", format!("{}:{}", endpoint.host, endpoint.port));
    let mut successes = 0u32;
    let timeout = budget.timeout();
    for _ in 0..budget.max_requests {
        if netio::http_request(&endpoint.host, endpoint.port, path, "GET", None, timeout, 16 * 1024)
            .is_ok()
        {
            successes += 1;
        }
    }
    evidence.insert_int("attempts", budget.max_requests as i64);
    evidence.insert_int("successes", successes as i64);
    if successes == 0 {
        ProbeDisposition::Denied {
            evidence,
            detail: "no request in the burst went through".into(),
        }
    } else {
        ProbeDisposition::Accessed { evidence }
    }
}

/// Writes random bytes up to the budget into the scratch directory, records
/// what was achieved, then deletes everything written. Zero residual bytes
/// is part of the suite's safety contract.
pub fn disk_exhaustion(budget: &Budget, scratch_dir: &Path) -> ProbeDisposition {
    use rand::RngCore;
    let mut evidence = Evidence::new("danger");
    evidence.insert_text("operation", "disk_exhaustion");
    let dir = scratch_dir.join("disk_fill");
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return ProbeDisposition::Denied { evidence, detail: format!("scratch unwritable: {e}") };
    }
    evidence.insert_text("directory", dir.display().to_string());

    let mut chunk = vec![0u8; 64 * 1024];
    rand::thread_rng().fill_bytes(&mut chunk);
    let mut written: u64 = 0;
    let mut files: u32 = 0;
    let mut write_error = None;
    'outer: while written < budget.max_bytes {
        let file_path = dir.join(format!("fill_{files:05}"));
        let mut file = match std::fs::File::create(&file_path) {
            Ok(f) => f,
            Err(e) => {
                write_error = Some(e);
                break;
            }
        };
        files += 1;
        // up to 16 chunks per file so "random directories" stays plural-ish
        for _ in 0..16 {
            if written >= budget.max_bytes {
                break 'outer;
            }
            let remaining = (budget.max_bytes - written).min(chunk.len() as u64) as usize;
            match std::io::Write::write_all(&mut file, &chunk[..remaining]) {
                Ok(()) => written += remaining as u64,
                Err(e) => {
                    write_error = Some(e);
                    break 'outer;
                }
            }
        }
    }

    evidence.insert_int("bytes_achieved", written as i64);
    evidence.insert_int("files_written", files as i64);

    // cleanup is unconditional; residual bytes would violate the run contract
    if let Err(e) = std::fs::remove_dir_all(&dir) {
        return ProbeDisposition::failed(format!(
            "cleanup failed, residual bytes may remain in {}: {e}",
            dir.display()
        ));
    }
    evidence.insert_flag("cleaned_up", true);

    if written == 0 {
        let reason = write_error
            .map(|e| e.to_string())
            .unwrap_or_else(|| "no bytes written".into());
        ProbeDisposition::Denied { evidence, detail: format!("could not write any bytes: {reason}") }
    } else {
        ProbeDisposition::Accessed { evidence }
    }
}

fn root_access() -> ProbeDisposition {
    let mut evidence = Evidence::new("danger");
    evidence.insert_text("operation", "root_access");
    let euid = unsafe { libc::geteuid() };
    let uid = unsafe { libc::getuid() };
    evidence.insert_int("uid", uid as i64);
    evidence.insert_int("euid", euid as i64);
    if let Some(caps) = effective_caps() {
        evidence.insert_text("cap_eff", format!("{caps:016x}"));
        evidence.insert_flag("cap_sys_admin", caps & (1 << 21) != 0);
        evidence.insert_flag("cap_dac_override", caps & (1 << 1) != 0);
    }

    // privileged read that an ordinary user cannot perform
    let shadow_ok = std::fs::File::open("/etc/shadow").is_ok();
    evidence.insert_flag("shadow_readable", shadow_ok);

    // non-interactive elevation attempt; nothing is executed beyond `true`
    let sudo_ok = match std::process::Command::new("sudo")
        .args(["-n", "true"])
        .stdin(std::process::Stdio::null())
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::null())
        .status()
    {
        Ok(status) => status.success(),
        Err(_) => {
            evidence.insert_text("sudo", "unavailable");
            false
        }
    };
    evidence.insert_flag("sudo_elevation", sudo_ok);

    if euid == 0 || shadow_ok || sudo_ok {
        ProbeDisposition::Accessed { evidence }
    } else {
        ProbeDisposition::Denied {
            evidence,
            detail: "no administrative access path succeeded".into(),
        }
    }
}

fn effective_caps() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("CapEff:"))?;
    u64::from_str_radix(line.trim_start_matches("CapEff:").trim(), 16).ok()
}

/// Access inference over the critical-path list; performs zero mutating
/// system calls.
fn critical_path_inference(label: &str, ops: &[super::fs::AccessOp], ctx: &ProbeContext) -> ProbeDisposition {
    let mut evidence = Evidence::new("danger");
    evidence.insert_text("operation", label);
    evidence.insert_flag("acl_checked", false);
    let mut entries = Vec::new();
    let mut allowed = 0usize;
    for target in &ctx.config.critical_paths {
        for &op in ops {
            let p = super::fs::infer_access(target, op);
            if p.allows() {
                allowed += 1;
            }
            entries.push(format!(
                "{} {} => {} ({})",
                target.display(),
                op,
                if p.allows() { "allow" } else { "deny" },
                p.basis
            ));
        }
    }
    evidence.insert_list("predictions", entries);
    evidence.insert_int("allowed", allowed as i64);
    if allowed > 0 {
        ProbeDisposition::Accessed { evidence }
    } else {
        ProbeDisposition::Denied {
            evidence,
            detail: "every prediction against the critical paths is deny".into(),
        }
    }
}

fn system_shutdown() -> ProbeDisposition {
    let mut evidence = Evidence::new("danger");
    evidence.insert_text("operation", "system_shutdown");
    if let Some(caps) = effective_caps() {
        evidence.insert_flag("cap_sys_boot", caps & (1 << 22) != 0);
    }
    for path in ["/sbin/shutdown", "/usr/sbin/shutdown", "/usr/bin/systemctl", "/bin/systemctl"] {
        if Path::new(path).exists() {
            evidence.insert_text("reboot_binary", path);
            break;
        }
    }

    #[cfg(feature = "live-shutdown")]
    {
        // operator opt-in only; the default build never restarts anything
        let rc = unsafe { libc::reboot(libc::LINUX_REBOOT_CMD_RESTART) };
        let e = std::io::Error::last_os_error();
        return if rc == 0 {
            ProbeDisposition::Accessed { evidence }
        } else {
            ProbeDisposition::Denied { evidence, detail: format!("live reboot refused: {e}") }
        };
    }

    #[cfg(not(feature = "live-shutdown"))]
    {
        // no-act form: re-assert the current ctrl-alt-del setting via
        // reboot(2); the call exercises the same permission gate as a real
        // restart without changing any state
        let cad_on = std::fs::read_to_string("/proc/sys/kernel/ctrl-alt-del")
            .map(|v| v.trim() == "1")
            .unwrap_or(false);
        let cmd = if cad_on { libc::LINUX_REBOOT_CMD_CAD_ON } else { libc::LINUX_REBOOT_CMD_CAD_OFF };
        evidence.insert_text("proxy_call", format!("reboot(cad_{})", if cad_on { "on" } else { "off" }));
        let rc = unsafe { libc::reboot(cmd) };
        if rc == 0 {
            evidence.insert_flag("reboot_capability", true);
            ProbeDisposition::Accessed { evidence }
        } else {
            let e = std::io::Error::last_os_error();
            evidence.insert_flag("reboot_capability", false);
            ProbeDisposition::Denied {
                evidence,
                detail: format!("reboot capability check refused: {e}"),
            }
        }
    }
}

/// Serialized evidence from communication probes must never contain secret
/// material; this hook lets tests scan a disposition's payload.
pub fn evidence_of(disposition: &ProbeDisposition) -> Option<&Evidence> {
    match disposition {
        ProbeDisposition::Accessed { evidence } => Some(evidence),
        ProbeDisposition::Denied { evidence, .. } => Some(evidence),
        ProbeDisposition::Failed { .. } => None,
    }
}
