use std::io::{self, ErrorKind as IoKind};
use std::net::{SocketAddr, SocketAddrV4, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{sync_channel, RecvTimeoutError, SyncSender};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use super::wire::{read_request, Response};
use super::{Action, CoordinatorState, CoordinatorStats, PairingTicket};
use crate::service::ServiceHandle;

const REQUEST_READ_TIMEOUT: Duration = Duration::from_secs(10);
const WAIT_SLICE: Duration = Duration::from_millis(100);

struct Waiter {
    id: u64,
    tx: SyncSender<SocketAddrV4>,
}

struct Shared {
    state: Mutex<CoordinatorState<Waiter>>,
    hold: Duration,
    next_id: AtomicU64,
}

/// The coordinator service: one thread per client connection, all sharing
/// one [`CoordinatorState`].
pub struct RendezvousServer {
    listener: TcpListener,
    shared: Arc<Shared>,
}

/// Read-only view of a running coordinator.
#[derive(Clone)]
pub struct RendezvousStats(Arc<Shared>);

impl RendezvousStats {
    pub fn stats(&self) -> CoordinatorStats {
        self.0.state.lock().unwrap().stats
    }

    pub fn pending(&self) -> usize {
        self.0.state.lock().unwrap().pending_len()
    }
}

impl RendezvousServer {
    pub fn bind(addr: impl ToSocketAddrs, hold_timeout: Duration) -> io::Result<Self> {
        let listener = crate::service::bind_listener(addr)?;
        Ok(RendezvousServer {
            listener,
            shared: Arc::new(Shared {
                state: Mutex::new(CoordinatorState::new()),
                hold: hold_timeout,
                next_id: AtomicU64::new(0),
            }),
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn stats(&self) -> RendezvousStats {
        RendezvousStats(self.shared.clone())
    }

    /// Runs the accept loop on a background thread.
    pub fn spawn(self) -> io::Result<ServiceHandle> {
        let shared = self.shared;
        ServiceHandle::spawn("fmi-rendezvous", self.listener, move |stream| {
            spawn_conn(stream, shared.clone())
        })
    }

    /// Runs the accept loop on the calling thread, forever.
    pub fn run(self) -> io::Result<()> {
        for conn in self.listener.incoming() {
            match conn {
                Ok(stream) => spawn_conn(stream, self.shared.clone()),
                Err(e) => log::warn!("accept failed: {e}"),
            }
        }
        Ok(())
    }
}

/// Binds and serves until the process exits.
pub fn serve(bind: impl ToSocketAddrs, hold_timeout: Duration) -> io::Result<()> {
    let server = RendezvousServer::bind(bind, hold_timeout)?;
    log::info!("rendezvous listening on {}", server.local_addr()?);
    server.run()
}

fn spawn_conn(stream: TcpStream, shared: Arc<Shared>) {
    let spawned = std::thread::Builder::new()
        .name("rendezvous-conn".into())
        .stack_size(128 * 1024)
        .spawn(move || {
            if let Err(e) = handle(stream, &shared) {
                log::debug!("rendezvous connection ended: {e}");
            }
        });
    if let Err(e) = spawned {
        log::warn!("cannot spawn connection thread: {e}");
    }
}

fn observed_v4(addr: SocketAddr) -> Option<SocketAddrV4> {
    match addr {
        SocketAddr::V4(a) => Some(a),
        SocketAddr::V6(a) => a.ip().to_ipv4_mapped().map(|ip| SocketAddrV4::new(ip, a.port())),
    }
}

fn handle(mut stream: TcpStream, shared: &Shared) -> io::Result<()> {
    stream.set_read_timeout(Some(REQUEST_READ_TIMEOUT))?;
    let name = match read_request(&mut stream)? {
        Ok(name) => name,
        Err(_) => return Response::Malformed.write_to(&mut stream),
    };
    let Some(observed) = observed_v4(stream.peer_addr()?) else {
        return Response::Malformed.write_to(&mut stream);
    };
    let ticket = match PairingTicket::new(name.clone(), observed) {
        Ok(t) => t,
        Err(_) => return Response::Malformed.write_to(&mut stream),
    };

    let id = shared.next_id.fetch_add(1, Ordering::Relaxed);
    let (tx, rx) = sync_channel(1);
    let action = shared.state.lock().unwrap().step(ticket, Waiter { id, tx });
    match action {
        Ok(Action::Exchange { waiting, arriving }) => {
            // the parked side may already be gone; it then times out its punch
            let _ = waiting.1.tx.send(arriving.observed);
            Response::Peer(waiting.0.observed).write_to(&mut stream)
        }
        Ok(Action::Hold) => {
            let deadline = Instant::now() + shared.hold;
            loop {
                match rx.recv_timeout(WAIT_SLICE) {
                    Ok(peer) => return Response::Peer(peer).write_to(&mut stream),
                    Err(RecvTimeoutError::Disconnected) => unreachable!("waiter sender is held in the state"),
                    Err(RecvTimeoutError::Timeout) => {}
                }
                let expired = Instant::now() >= deadline;
                if !expired && !client_gone(&stream) {
                    continue;
                }
                let mut st = shared.state.lock().unwrap();
                if st.withdraw(&name, |w| w.id == id).is_some() {
                    if expired {
                        st.stats.timeouts += 1;
                        drop(st);
                        return Response::Timeout.write_to(&mut stream);
                    }
                    return Ok(());
                }
                drop(st);
                // matched between the timeout and the lock
                if let Ok(peer) = rx.recv() {
                    return Response::Peer(peer).write_to(&mut stream);
                }
            }
        }
        Err(_) => Response::Malformed.write_to(&mut stream),
    }
}

/// True once the parked client has closed its end.
fn client_gone(stream: &TcpStream) -> bool {
    if stream.set_nonblocking(true).is_err() {
        return true;
    }
    let mut b = [0u8; 1];
    let gone = match stream.peek(&mut b) {
        Ok(0) => true,
        Ok(_) => false,
        Err(e) => e.kind() != IoKind::WouldBlock,
    };
    let _ = stream.set_nonblocking(false);
    gone
}
