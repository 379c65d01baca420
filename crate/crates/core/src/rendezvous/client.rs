use std::io::{Read, Write};
use std::net::{SocketAddr, SocketAddrV4, TcpStream};
use std::time::{Duration, Instant};

use socket2::{Domain, Protocol, SockAddr, Socket, Type};

use super::wire::{encode_request, Response};
use crate::error::{FmiError, Result};

/// Result of a successful pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pairing {
    /// Local port the coordinator saw us on; the punch reuses it.
    pub local_port: u16,
    /// The other party's endpoint as observed by the coordinator.
    pub peer: SocketAddrV4,
}

/// A TCP socket with address and port reuse, bound to `0.0.0.0:port`.
pub(crate) fn reusable_socket(port: u16) -> std::io::Result<Socket> {
    let sock = Socket::new(Domain::IPV4, Type::STREAM, Some(Protocol::TCP))?;
    sock.set_reuse_address(true)?;
    #[cfg(all(unix, not(any(target_os = "solaris", target_os = "illumos"))))]
    sock.set_reuse_port(true)?;
    let addr: SocketAddr = SocketAddrV4::new(std::net::Ipv4Addr::UNSPECIFIED, port).into();
    sock.bind(&SockAddr::from(addr))?;
    Ok(sock)
}

/// Asks the coordinator for the counterpart registered under `name`.
pub fn pair(coordinator: SocketAddr, name: &str, timeout: Duration) -> Result<Pairing> {
    let sock = reusable_socket(0).map_err(|e| FmiError::from_io("bind pairing socket", e))?;
    pair_from(sock, coordinator, name, timeout)
}

/// Like [`pair`] over an already bound socket.
pub fn pair_from(sock: Socket, coordinator: SocketAddr, name: &str, timeout: Duration) -> Result<Pairing> {
    let request = encode_request(name)?;
    let deadline = Instant::now() + timeout;
    let local_port = sock
        .local_addr()
        .ok()
        .and_then(|a| a.as_socket())
        .map(|a| a.port())
        .ok_or_else(|| FmiError::channel("pairing socket has no local port"))?;

    sock.connect_timeout(&coordinator.into(), timeout)
        .map_err(|e| FmiError::channel(format!("coordinator {coordinator} unreachable: {e}")))?;
    let mut stream: TcpStream = sock.into();
    stream
        .write_all(&request)
        .map_err(|e| FmiError::channel(format!("coordinator write: {e}")))?;
    let remaining = deadline.saturating_duration_since(Instant::now()).max(Duration::from_millis(1));
    stream
        .set_read_timeout(Some(remaining))
        .map_err(|e| FmiError::channel(e.to_string()))?;

    let response = match Response::read_from(&mut stream) {
        Ok(r) => r?,
        Err(e) if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {
            return Err(FmiError::timeout(format!("no counterpart for '{name}' within {timeout:?}")))
        }
        Err(e) => return Err(FmiError::channel(format!("coordinator disconnected: {e}"))),
    };
    // drain so the coordinator closes first and keeps TIME_WAIT on its side
    let _ = stream.set_read_timeout(Some(Duration::from_millis(200)));
    let _ = stream.read(&mut [0u8; 1]);
    match response {
        Response::Peer(peer) => Ok(Pairing { local_port, peer }),
        Response::Timeout => Err(FmiError::timeout(format!("coordinator gave up waiting for '{name}'"))),
        Response::Malformed => Err(FmiError::protocol(format!("coordinator rejected name '{name}'"))),
    }
}
