//! Minimal wire-level clients used by the communication probes.
//!
//! Everything here is deliberately tiny: one UDP datagram for a DNS A-record
//! query, one HTTP/1.1 exchange over a plain socket, a greeting/banner read,
//! a TLS ClientHello to test for a secure-transport listener, and an
//! unprivileged ICMP echo. No credentials are ever attached anywhere.

use std::io::{ErrorKind, Read, Write};
use std::net::{IpAddr, Ipv4Addr, SocketAddr, TcpStream, ToSocketAddrs, UdpSocket};
use std::path::Path;
use std::time::{Duration, Instant};

// ---------------------------------------------------------------------------
// TCP helpers
// ---------------------------------------------------------------------------

/// Resolves `host` (IP literal or name via the system resolver) and connects
/// with the given timeout.
pub fn tcp_connect(host: &str, port: u16, timeout: Duration) -> std::io::Result<TcpStream> {
    let addrs: Vec<SocketAddr> = if let Ok(ip) = host.parse::<IpAddr>() {
        vec![SocketAddr::new(ip, port)]
    } else {
        (host, port)
            .to_socket_addrs()
            .map_err(|e| std::io::Error::other(format!("name resolution failed: {e}")))?
            .collect()
    };
    let mut last = std::io::Error::new(ErrorKind::AddrNotAvailable, "no address resolved");
    for addr in addrs {
        match TcpStream::connect_timeout(&addr, timeout) {
            Ok(stream) => {
                stream.set_read_timeout(Some(timeout))?;
                stream.set_write_timeout(Some(timeout))?;
                return Ok(stream);
            }
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Connects and reads the first greeting line (FTP/SMTP greetings, SSH
/// version banners). Returns the line without trailing newline.
pub fn read_banner(host: &str, port: u16, timeout: Duration, max_bytes: usize) -> std::io::Result<String> {
    let mut stream = tcp_connect(host, port, timeout)?;
    let mut buf = vec![0u8; max_bytes.min(1024)];
    let mut collected = Vec::new();
    let deadline = Instant::now() + timeout;
    loop {
        match stream.read(&mut buf) {
            Ok(0) => break,
            Ok(n) => {
                collected.extend_from_slice(&buf[..n]);
                if collected.contains(&b'\n') || collected.len() >= max_bytes {
                    break;
                }
            }
            Err(e) if e.kind() == ErrorKind::WouldBlock || e.kind() == ErrorKind::TimedOut => {
                return Err(std::io::Error::new(ErrorKind::TimedOut, "no greeting before timeout"))
            }
            Err(e) => return Err(e),
        }
        if Instant::now() >= deadline {
            return Err(std::io::Error::new(ErrorKind::TimedOut, "no greeting before timeout"));
        }
    }
    if collected.is_empty() {
        return Err(std::io::Error::new(ErrorKind::UnexpectedEof, "connection closed without greeting"));
    }
    let line = collected.split(|&b| b == b'\n').next().unwrap_or(&collected);
    Ok(String::from_utf8_lossy(line).trim_end_matches('\r').to_string())
}

// ---------------------------------------------------------------------------
// HTTP
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct HttpResponse {
    pub status_line: String,
    pub status: u16,
    pub bytes_read: usize,
}

/// One HTTP/1.1 exchange over a fresh connection. `body` is sent verbatim
/// for POST with a `Content-Length`; responses are read up to `max_bytes`.
pub fn http_request(
    host: &str,
    port: u16,
    path: &str,
    method: &str,
    body: Option<&[u8]>,
    timeout: Duration,
    max_bytes: usize,
) -> std::io::Result<HttpResponse> {
    let mut stream = tcp_connect(host, port, timeout)?;
    let mut request = format!(
        "{method} {path} HTTP/1.1\r\nHost: {host}\r\nUser-Agent: sandboxeval\r\nAccept: */*\r\nConnection: close\r\n"
    );
    if let Some(body) = body {
        request.push_str(&format!("Content-Type: application/octet-stream\r\nContent-Length: {}\r\n", body.len()));
    }
    request.push_str("\r\n");
    stream.write_all(request.as_bytes())?;
    if let Some(body) = body {
        stream.write_all(body)?;
    }
    let mut collected = Vec::new();
    let mut buf = [0u8; 4096];
    let deadline = Instant::now() + timeout;
    loop {
        match stream.read(&mut buf) {
            Ok(0) => break,
            Ok(n) => {
                collected.extend_from_slice(&buf[..n]);
                if collected.len() >= max_bytes {
                    break;
                }
            }
            Err(e) if e.kind() == ErrorKind::WouldBlock || e.kind() == ErrorKind::TimedOut => break,
            Err(e) => return Err(e),
        }
        if Instant::now() >= deadline {
            break;
        }
    }
    let text = String::from_utf8_lossy(&collected);
    let status_line = text.lines().next().unwrap_or("").to_string();
    let status = parse_status_line(&status_line).ok_or_else(|| {
        std::io::Error::new(ErrorKind::InvalidData, format!("no http status line in response ({} bytes)", collected.len()))
    })?;
    Ok(HttpResponse { status_line, status, bytes_read: collected.len() })
}

fn parse_status_line(line: &str) -> Option<u16> {
    let mut parts = line.split_whitespace();
    let proto = parts.next()?;
    if !proto.starts_with("HTTP/") {
        return None;
    }
    parts.next()?.parse().ok()
}

// ---------------------------------------------------------------------------
// DNS
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct DnsAnswer {
    pub rcode: u8,
    pub addresses: Vec<Ipv4Addr>,
}

/// Encodes one recursive A-record query for `name`.
pub fn encode_dns_query(txid: u16, name: &str) -> Result<Vec<u8>, String> {
    let mut packet = Vec::with_capacity(32 + name.len());
    packet.extend_from_slice(&txid.to_be_bytes());
    packet.extend_from_slice(&0x0100u16.to_be_bytes()); // RD set
    packet.extend_from_slice(&1u16.to_be_bytes()); // QDCOUNT
    packet.extend_from_slice(&[0, 0, 0, 0, 0, 0]); // AN/NS/AR
    for label in name.trim_end_matches('.').split('.') {
        if label.is_empty() || label.len() > 63 {
            return Err(format!("invalid dns label in `{name}`"));
        }
        packet.push(label.len() as u8);
        packet.extend_from_slice(label.as_bytes());
    }
    packet.push(0);
    packet.extend_from_slice(&1u16.to_be_bytes()); // QTYPE A
    packet.extend_from_slice(&1u16.to_be_bytes()); // QCLASS IN
    Ok(packet)
}

/// Extracts the A records from a response to `txid`.
pub fn parse_dns_response(packet: &[u8], txid: u16) -> Result<DnsAnswer, String> {
    if packet.len() < 12 {
        return Err("response shorter than a dns header".into());
    }
    let rid = u16::from_be_bytes([packet[0], packet[1]]);
    if rid != txid {
        return Err(format!("transaction id mismatch ({rid:#06x} != {txid:#06x})"));
    }
    let flags = u16::from_be_bytes([packet[2], packet[3]]);
    if flags & 0x8000 == 0 {
        return Err("response bit not set".into());
    }
    let rcode = (flags & 0x000f) as u8;
    let qdcount = u16::from_be_bytes([packet[4], packet[5]]) as usize;
    let ancount = u16::from_be_bytes([packet[6], packet[7]]) as usize;
    let mut pos = 12;
    for _ in 0..qdcount {
        pos = skip_name(packet, pos)?;
        pos += 4; // qtype + qclass
    }
    let mut addresses = Vec::new();
    for _ in 0..ancount {
        pos = skip_name(packet, pos)?;
        if pos + 10 > packet.len() {
            return Err("truncated answer record".into());
        }
        let rtype = u16::from_be_bytes([packet[pos], packet[pos + 1]]);
        let rdlength = u16::from_be_bytes([packet[pos + 8], packet[pos + 9]]) as usize;
        pos += 10;
        if pos + rdlength > packet.len() {
            return Err("truncated rdata".into());
        }
        if rtype == 1 && rdlength == 4 {
            addresses.push(Ipv4Addr::new(packet[pos], packet[pos + 1], packet[pos + 2], packet[pos + 3]));
        }
        pos += rdlength;
    }
    Ok(DnsAnswer { rcode, addresses })
}

fn skip_name(packet: &[u8], mut pos: usize) -> Result<usize, String> {
    loop {
        let len = *packet.get(pos).ok_or("name runs past packet end")? as usize;
        if len == 0 {
            return Ok(pos + 1);
        }
        if len & 0xc0 == 0xc0 {
            // compression pointer ends the name
            return Ok(pos + 2);
        }
        pos += 1 + len;
    }
}

/// Sends one A-record query to `resolver` and parses the reply.
pub fn dns_query(resolver: SocketAddr, name: &str, timeout: Duration) -> std::io::Result<DnsAnswer> {
    let txid: u16 = rand::random();
    let query = encode_dns_query(txid, name)
        .map_err(|e| std::io::Error::new(ErrorKind::InvalidInput, e))?;
    let bind_addr: SocketAddr = if resolver.is_ipv4() { "0.0.0.0:0".parse().unwrap() } else { "[::]:0".parse().unwrap() };
    let socket = UdpSocket::bind(bind_addr)?;
    socket.set_read_timeout(Some(timeout))?;
    // connected socket so a closed port surfaces as ECONNREFUSED
    socket.connect(resolver)?;
    socket.send(&query)?;
    let mut buf = [0u8; 2048];
    let n = socket.recv(&mut buf)?;
    parse_dns_response(&buf[..n], txid).map_err(|e| std::io::Error::new(ErrorKind::InvalidData, e))
}

/// Locates the system resolver from resolv.conf.
pub fn system_resolver() -> Option<SocketAddr> {
    system_resolver_from(Path::new("/etc/resolv.conf"))
}

pub fn system_resolver_from(path: &Path) -> Option<SocketAddr> {
    let text = std::fs::read_to_string(path).ok()?;
    for line in text.lines() {
        let line = line.trim();
        if let Some(server) = line.strip_prefix("nameserver") {
            let server = server.trim();
            if let Ok(ip) = server.parse::<IpAddr>() {
                return Some(SocketAddr::new(ip, 53));
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// TLS ClientHello
// ---------------------------------------------------------------------------

/// First byte of a TLS handshake record.
pub const TLS_HANDSHAKE_RECORD: u8 = 0x16;
/// First byte of a TLS alert record.
pub const TLS_ALERT_RECORD: u8 = 0x15;

/// Builds a TLS 1.2 ClientHello with an SNI extension for `server_name`.
/// Enough for any TLS listener to answer with a ServerHello (or an alert),
/// which is all the handshake probe needs to observe.
pub fn tls_client_hello(server_name: &str) -> Vec<u8> {
    let mut random = [0u8; 32];
    rand::Rng::fill(&mut rand::thread_rng(), &mut random[..]);

    // extensions
    let mut extensions = Vec::new();
    // server_name
    let name = server_name.as_bytes();
    let mut sni = Vec::new();
    sni.extend_from_slice(&((name.len() + 3) as u16).to_be_bytes()); // server name list length
    sni.push(0); // host_name
    sni.extend_from_slice(&(name.len() as u16).to_be_bytes());
    sni.extend_from_slice(name);
    push_extension(&mut extensions, 0x0000, &sni);
    // supported_groups: x25519, secp256r1
    push_extension(&mut extensions, 0x000a, &[0x00, 0x04, 0x00, 0x1d, 0x00, 0x17]);
    // ec_point_formats: uncompressed
    push_extension(&mut extensions, 0x000b, &[0x01, 0x00]);
    // signature_algorithms: a common spread
    push_extension(
        &mut extensions,
        0x000d,
        &[0x00, 0x08, 0x04, 0x03, 0x08, 0x04, 0x04, 0x01, 0x05, 0x01],
    );

    let cipher_suites: [u16; 5] = [0xc02f, 0xc030, 0xc02b, 0x009c, 0x002f];

    let mut hello = Vec::new();
    hello.extend_from_slice(&[0x03, 0x03]); // client_version TLS 1.2
    hello.extend_from_slice(&random);
    hello.push(0); // session id length
    hello.extend_from_slice(&((cipher_suites.len() * 2) as u16).to_be_bytes());
    for suite in cipher_suites {
        hello.extend_from_slice(&suite.to_be_bytes());
    }
    hello.extend_from_slice(&[0x01, 0x00]); // null compression only
    hello.extend_from_slice(&(extensions.len() as u16).to_be_bytes());
    hello.extend_from_slice(&extensions);

    let mut handshake = Vec::new();
    handshake.push(0x01); // client_hello
    let len = hello.len() as u32;
    handshake.extend_from_slice(&len.to_be_bytes()[1..]); // 24-bit length
    handshake.extend_from_slice(&hello);

    let mut record = Vec::new();
    record.push(TLS_HANDSHAKE_RECORD);
    record.extend_from_slice(&[0x03, 0x01]); // record version
    record.extend_from_slice(&(handshake.len() as u16).to_be_bytes());
    record.extend_from_slice(&handshake);
    record
}

fn push_extension(out: &mut Vec<u8>, kind: u16, body: &[u8]) {
    out.extend_from_slice(&kind.to_be_bytes());
    out.extend_from_slice(&(body.len() as u16).to_be_bytes());
    out.extend_from_slice(body);
}

#[derive(Debug, Clone)]
pub struct TlsProbeResult {
    /// First record byte the server answered with; `0x16` means it spoke TLS.
    pub record_type: u8,
    pub bytes_read: usize,
}

/// Connects, sends a ClientHello, and reports the first record byte the
/// server answers with.
pub fn tls_handshake_probe(host: &str, port: u16, timeout: Duration) -> std::io::Result<TlsProbeResult> {
    let mut stream = tcp_connect(host, port, timeout)?;
    stream.write_all(&tls_client_hello(host))?;
    let mut buf = [0u8; 512];
    let n = stream.read(&mut buf)?;
    if n == 0 {
        return Err(std::io::Error::new(ErrorKind::UnexpectedEof, "connection closed before any tls record"));
    }
    Ok(TlsProbeResult { record_type: buf[0], bytes_read: n })
}

// ---------------------------------------------------------------------------
// ICMP echo (unprivileged datagram socket)
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub enum IcmpError {
    /// The kernel refused a datagram ICMP socket; callers fall back to a
    /// transport connect.
    SocketUnavailable(std::io::Error),
    SendRecv(std::io::Error),
}

#[derive(Debug, Clone)]
pub struct IcmpEcho {
    pub rtt: Duration,
}

fn icmp_checksum(data: &[u8]) -> u16 {
    let mut sum = 0u32;
    let mut chunks = data.chunks_exact(2);
    for chunk in &mut chunks {
        sum += u32::from(u16::from_be_bytes([chunk[0], chunk[1]]));
    }
    if let [last] = chunks.remainder() {
        sum += u32::from(*last) << 8;
    }
    while sum >> 16 != 0 {
        sum = (sum & 0xffff) + (sum >> 16);
    }
    !(sum as u16)
}

/// Sends one echo request via an unprivileged `SOCK_DGRAM`/`IPPROTO_ICMP`
/// socket and waits for the reply.
pub fn icmp_echo(target: Ipv4Addr, timeout: Duration) -> Result<IcmpEcho, IcmpError> {
    let fd = unsafe { libc::socket(libc::AF_INET, libc::SOCK_DGRAM, libc::IPPROTO_ICMP) };
    if fd < 0 {
        return Err(IcmpError::SocketUnavailable(std::io::Error::last_os_error()));
    }
    let result = icmp_echo_on(fd, target, timeout);
    unsafe { libc::close(fd) };
    result
}

fn icmp_echo_on(fd: libc::c_int, target: Ipv4Addr, timeout: Duration) -> Result<IcmpEcho, IcmpError> {
    let tv = libc::timeval {
        tv_sec: timeout.as_secs() as libc::time_t,
        tv_usec: timeout.subsec_micros() as libc::suseconds_t,
    };
    unsafe {
        libc::setsockopt(
            fd,
            libc::SOL_SOCKET,
            libc::SO_RCVTIMEO,
            &tv as *const _ as *const libc::c_void,
            std::mem::size_of::<libc::timeval>() as libc::socklen_t,
        );
    }

    let mut packet = vec![8u8, 0, 0, 0, 0x4a, 0x3d, 0, 1];
    packet.extend_from_slice(b"sandboxeval-echo");
    let checksum = icmp_checksum(&packet);
    packet[2..4].copy_from_slice(&checksum.to_be_bytes());

    let addr = libc::sockaddr_in {
        sin_family: libc::AF_INET as libc::sa_family_t,
        sin_port: 0,
        sin_addr: libc::in_addr { s_addr: u32::from(target).to_be() },
        sin_zero: [0; 8],
    };
    let started = Instant::now();
    let sent = unsafe {
        libc::sendto(
            fd,
            packet.as_ptr() as *const libc::c_void,
            packet.len(),
            0,
            &addr as *const _ as *const libc::sockaddr,
            std::mem::size_of::<libc::sockaddr_in>() as libc::socklen_t,
        )
    };
    if sent < 0 {
        return Err(IcmpError::SendRecv(std::io::Error::last_os_error()));
    }
    let mut reply = [0u8; 512];
    let received = unsafe {
        libc::recvfrom(
            fd,
            reply.as_mut_ptr() as *mut libc::c_void,
            reply.len(),
            0,
            std::ptr::null_mut(),
            std::ptr::null_mut(),
        )
    };
    if received < 0 {
        return Err(IcmpError::SendRecv(std::io::Error::last_os_error()));
    }
    // datagram icmp sockets deliver the icmp payload directly; an echo reply
    // starts with type 0
    if received >= 1 && reply[0] != 0 {
        return Err(IcmpError::SendRecv(std::io::Error::new(
            ErrorKind::InvalidData,
            format!("unexpected icmp type {}", reply[0]),
        )));
    }
    Ok(IcmpEcho { rtt: started.elapsed() })
}
