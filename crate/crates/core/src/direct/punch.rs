use std::io::ErrorKind as IoKind;
use std::net::{SocketAddr, SocketAddrV4, TcpListener, TcpStream};
use std::time::{Duration, Instant};

use super::connection::PeerConnection;
use crate::error::{ErrorKind, FmiError, Result};
use crate::rendezvous::{self, pairing_name};
use crate::rendezvous::reusable_socket;

pub const PUNCH_ATTEMPTS: u32 = 20;
pub const PUNCH_INTERVAL: Duration = Duration::from_millis(50);

/// Tag of the rank handshake frame that opens every punched connection.
pub const HELLO_TAG: u16 = 0xFFFE;

/// Establishes a direct connection to `peer_rank` via the coordinator.
///
/// After pairing, both sides listen on and connect from the port the
/// coordinator observed. Both peers dial the same address pair, so at most
/// one TCP connection can result: either a simultaneous open or one side's
/// SYN landing on the other's listener. Whichever local path yields it is
/// kept, then a rank handshake confirms the peer.
pub fn connect_pair(
    coordinator: SocketAddr,
    comm_name: &str,
    epoch: u64,
    self_rank: usize,
    peer_rank: usize,
    timeout: Duration,
) -> Result<PeerConnection> {
    if self_rank == peer_rank {
        return Err(FmiError::protocol("cannot connect a rank to itself"));
    }
    let deadline = Instant::now() + timeout;
    let name = pairing_name(comm_name, self_rank, peer_rank, epoch);
    let pairing = rendezvous::pair(coordinator, &name, timeout).map_err(|e| match e.kind {
        ErrorKind::Timeout => e,
        _ => FmiError::channel(format!("rendezvous for '{name}' failed: {}", e.detail)),
    })?;
    let stream = punch(pairing.local_port, pairing.peer, deadline)?;
    let mut conn = PeerConnection::new(self_rank, peer_rank, stream)?;
    handshake(&mut conn, deadline)?;
    Ok(conn)
}

fn punch(local_port: u16, peer: SocketAddrV4, deadline: Instant) -> Result<TcpStream> {
    fn io(what: &'static str) -> impl Fn(std::io::Error) -> FmiError {
        move |e| FmiError::channel(format!("{what}: {e}"))
    }
    let listener = reusable_socket(local_port).map_err(io("bind punch listener"))?;
    listener.listen(16).map_err(io("listen"))?;
    let listener: TcpListener = listener.into();
    listener.set_nonblocking(true).map_err(io("listener nonblocking"))?;
    let peer_addr = SocketAddr::V4(peer);

    let mut last_err = None;
    for _ in 0..PUNCH_ATTEMPTS {
        let started = Instant::now();
        if started >= deadline {
            break;
        }
        if let Some(s) = try_accept(&listener, peer)? {
            return Ok(s);
        }
        let sock = reusable_socket(local_port).map_err(io("bind punch socket"))?;
        match sock.connect_timeout(&peer_addr.into(), PUNCH_INTERVAL) {
            Ok(()) => {
                let s: TcpStream = sock.into();
                s.set_nonblocking(false).map_err(io("stream blocking"))?;
                return Ok(s);
            }
            Err(e) => last_err = Some(e),
        }
        // keep watching the listener for the rest of the interval
        while started.elapsed() < PUNCH_INTERVAL && Instant::now() < deadline {
            if let Some(s) = try_accept(&listener, peer)? {
                return Ok(s);
            }
            std::thread::sleep(Duration::from_millis(2));
        }
    }
    if let Some(s) = try_accept(&listener, peer)? {
        return Ok(s);
    }
    Err(FmiError::timeout(format!(
        "hole punch to {peer} failed after {PUNCH_ATTEMPTS} attempts ({})",
        last_err.map(|e| e.to_string()).unwrap_or_else(|| "deadline".into())
    )))
}

fn try_accept(listener: &TcpListener, peer: SocketAddrV4) -> Result<Option<TcpStream>> {
    loop {
        match listener.accept() {
            Ok((s, from)) => {
                if from == SocketAddr::V4(peer) {
                    s.set_nonblocking(false)
                        .map_err(|e| FmiError::channel(e.to_string()))?;
                    return Ok(Some(s));
                }
                log::debug!("dropping unexpected punch connection from {from}");
            }
            Err(e) if e.kind() == IoKind::WouldBlock => return Ok(None),
            Err(e) => return Err(FmiError::channel(format!("punch accept: {e}"))),
        }
    }
}

fn handshake(conn: &mut PeerConnection, deadline: Instant) -> Result<()> {
    let remaining = deadline
        .saturating_duration_since(Instant::now())
        .max(Duration::from_millis(200));
    conn.set_read_timeout(Some(remaining))?;
    let me = conn.local_rank() as u32;
    let them = conn.recv_after_send(HELLO_TAG, &me.to_le_bytes())?;
    conn.set_read_timeout(None)?;
    let got = <[u8; 4]>::try_from(them.as_slice())
        .map(u32::from_le_bytes)
        .map_err(|_| FmiError::protocol("malformed hello"))?;
    if got as usize != conn.remote_rank() {
        return Err(FmiError::protocol(format!(
            "expected rank {} on punched connection, got {got}",
            conn.remote_rank()
        )));
    }
    conn.reset_counters();
    Ok(())
}
