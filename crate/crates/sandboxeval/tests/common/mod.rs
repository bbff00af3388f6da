//! Shared fixtures for the integration and acceptance suites: tiny loopback
//! servers for every protocol the communication probes speak, plus helpers
//! for driving the CLI binary.

#![allow(dead_code)]

use std::io::{Read, Write};
use std::net::{TcpListener, UdpSocket};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, OnceLock};
use std::thread::JoinHandle;
use std::time::Duration;

/// Serializes tests that measure timing or run whole suites, so parallel
/// test threads cannot distort CPU utilization or trace assertions.
pub fn suite_lock() -> MutexGuard<'static, ()> {
    static LOCK: OnceLock<Mutex<()>> = OnceLock::new();
    LOCK.get_or_init(|| Mutex::new(()))
        .lock()
        .unwrap_or_else(|poisoned| poisoned.into_inner())
}

pub fn cli_bin() -> &'static str {
    env!("CARGO_BIN_EXE_sandboxeval")
}

pub struct CliOutput {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_cli(args: &[&str]) -> CliOutput {
    run_cli_with(args, &[], None)
}

pub fn run_cli_with(args: &[&str], envs: &[(&str, &str)], wrapper: Option<&str>) -> CliOutput {
    let mut command = match wrapper {
        Some(wrapper) => {
            let mut c = Command::new(wrapper);
            c.arg("-n").arg(cli_bin());
            c
        }
        None => Command::new(cli_bin()),
    };
    command.args(args);
    for (key, value) in envs {
        command.env(key, value);
    }
    let output = command.output().expect("cli binary runs");
    CliOutput {
        status: output.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&output.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
    }
}

pub fn write_config(dir: &Path, config: &serde_json::Value) -> PathBuf {
    let path = dir.join("config.json");
    let document = serde_json::json!({ "schema_version": 1, "config": config });
    std::fs::write(&path, serde_json::to_vec_pretty(&document).unwrap()).unwrap();
    path
}

// ---------------------------------------------------------------------------
// Loopback protocol fixtures
// ---------------------------------------------------------------------------

pub enum FixtureKind {
    /// Answers any HTTP request with a small 200.
    Http,
    /// Writes a greeting line on connect, then closes.
    Banner(&'static str),
    /// Reads the ClientHello, answers with a handshake-typed record.
    Tls,
}

pub struct TcpFixture {
    pub port: u16,
    pub connections: Arc<AtomicUsize>,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl TcpFixture {
    pub fn spawn(kind: FixtureKind) -> TcpFixture {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind loopback");
        let port = listener.local_addr().unwrap().port();
        listener.set_nonblocking(true).unwrap();
        let stop = Arc::new(AtomicBool::new(false));
        let connections = Arc::new(AtomicUsize::new(0));
        let stop_flag = stop.clone();
        let counter = connections.clone();
        let handle = std::thread::spawn(move || loop {
            match listener.accept() {
                Ok((mut stream, _)) => {
                    counter.fetch_add(1, Ordering::SeqCst);
                    stream.set_nonblocking(false).ok();
                    stream.set_read_timeout(Some(Duration::from_millis(500))).ok();
                    match kind {
                        FixtureKind::Http => serve_http(&mut stream),
                        FixtureKind::Banner(text) => {
                            let _ = stream.write_all(text.as_bytes());
                        }
                        FixtureKind::Tls => serve_tls(&mut stream),
                    }
                }
                Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                    if stop_flag.load(Ordering::SeqCst) {
                        break;
                    }
                    std::thread::sleep(Duration::from_millis(5));
                }
                Err(_) => break,
            }
        });
        TcpFixture { port, connections, stop, handle: Some(handle) }
    }

    /// Shuts the listener down; afterwards the port refuses connections.
    pub fn stop(mut self) -> u16 {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
        self.port
    }
}

impl Drop for TcpFixture {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn serve_http(stream: &mut std::net::TcpStream) {
    let mut buf = Vec::new();
    let mut chunk = [0u8; 2048];
    // read until the header terminator or the request stops arriving
    for _ in 0..16 {
        match stream.read(&mut chunk) {
            Ok(0) => break,
            Ok(n) => {
                buf.extend_from_slice(&chunk[..n]);
                if buf.windows(4).any(|w| w == b"\r\n\r\n") {
                    break;
                }
            }
            Err(_) => break,
        }
    }
    let _ = stream.write_all(b"HTTP/1.1 200 OK\r\nContent-Length: 2\r\nConnection: close\r\n\r\nok");
}

fn serve_tls(stream: &mut std::net::TcpStream) {
    let mut chunk = [0u8; 1024];
    let _ = stream.read(&mut chunk);
    // minimal handshake-typed record; the probe only inspects the type byte
    let record: [u8; 9] = [0x16, 0x03, 0x03, 0x00, 0x04, 0x02, 0x00, 0x00, 0x00];
    let _ = stream.write_all(&record);
}

pub struct DnsFixture {
    pub port: u16,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl DnsFixture {
    /// Answers every A query with 127.0.0.1.
    pub fn spawn() -> DnsFixture {
        let socket = UdpSocket::bind("127.0.0.1:0").expect("bind udp");
        let port = socket.local_addr().unwrap().port();
        socket.set_nonblocking(true).unwrap();
        let stop = Arc::new(AtomicBool::new(false));
        let stop_flag = stop.clone();
        let handle = std::thread::spawn(move || {
            let mut buf = [0u8; 1024];
            loop {
                match socket.recv_from(&mut buf) {
                    Ok((n, from)) if n >= 12 => {
                        let query = &buf[..n];
                        // echo the question, set QR/RA, append one A answer
                        // via a compression pointer
                        let mut response = query.to_vec();
                        response[2] = 0x81;
                        response[3] = 0x80;
                        response[6] = 0x00;
                        response[7] = 0x01;
                        response.extend_from_slice(&[0xc0, 0x0c]);
                        response.extend_from_slice(&[0x00, 0x01, 0x00, 0x01]);
                        response.extend_from_slice(&[0x00, 0x00, 0x00, 0x3c]);
                        response.extend_from_slice(&[0x00, 0x04, 127, 0, 0, 1]);
                        let _ = socket.send_to(&response, from);
                    }
                    Ok(_) => {}
                    Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                        if stop_flag.load(Ordering::SeqCst) {
                            break;
                        }
                        std::thread::sleep(Duration::from_millis(5));
                    }
                    Err(_) => break,
                }
            }
        });
        DnsFixture { port, stop, handle: Some(handle) }
    }

    pub fn stop(mut self) -> u16 {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
        self.port
    }
}

impl Drop for DnsFixture {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

/// The whole loopback environment the communication probes can succeed
/// against.
pub struct LoopbackNet {
    pub http: TcpFixture,
    pub ftp: TcpFixture,
    pub ssh: TcpFixture,
    pub smtp: TcpFixture,
    pub tls: TcpFixture,
    pub dns: DnsFixture,
}

impl LoopbackNet {
    pub fn spawn() -> LoopbackNet {
        LoopbackNet {
            http: TcpFixture::spawn(FixtureKind::Http),
            ftp: TcpFixture::spawn(FixtureKind::Banner("220 fixture ftp ready\r\n")),
            ssh: TcpFixture::spawn(FixtureKind::Banner("SSH-2.0-fixture\r\n")),
            smtp: TcpFixture::spawn(FixtureKind::Banner("220 fixture esmtp\r\n")),
            tls: TcpFixture::spawn(FixtureKind::Tls),
            dns: DnsFixture::spawn(),
        }
    }

    /// Endpoint table pointing every channel at the fixtures. The ping host
    /// is a name so it resolves through the fixture resolver.
    pub fn endpoints(&self) -> serde_json::Value {
        serde_json::json!({
            "ping": { "host": "probe.test", "port": self.tls.port },
            "dns_resolver": format!("127.0.0.1:{}", self.dns.port),
            "dns_query_name": "probe.test",
            "http": { "host": "127.0.0.1", "port": self.http.port },
            "http_path": "/",
            "ftp": { "host": "127.0.0.1", "port": self.ftp.port },
            "ssh": { "host": "127.0.0.1", "port": self.ssh.port },
            "smtp": { "host": "127.0.0.1", "port": self.smtp.port },
            "messaging": { "host": "127.0.0.1", "port": self.tls.port },
            "cloud_storage": { "host": "127.0.0.1", "port": self.tls.port }
        })
    }

    /// Tears every server down, leaving all ports closed.
    pub fn shutdown(self) {
        self.http.stop();
        self.ftp.stop();
        self.ssh.stop();
        self.smtp.stop();
        self.tls.stop();
        self.dns.stop();
    }
}

/// True when `unshare -n` can create a network-disabled context here.
pub fn unshare_available() -> bool {
    Command::new("unshare")
        .args(["-n", "true"])
        .output()
        .map(|out| out.status.success())
        .unwrap_or(false)
}
