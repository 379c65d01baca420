//! Rendezvous coordinator for TCP hole punching.
//!
//! Two peers that want a direct connection each send the same pairing name
//! to the coordinator. The first one is parked; when the second arrives both
//! are told the other's endpoint as seen by the coordinator, i.e. after any
//! address translation. The coordinator never relays payload traffic.

mod client;
pub(crate) use client::reusable_socket;
mod server;
pub mod wire;

use std::collections::HashMap;
use std::net::SocketAddrV4;
use std::time::{Duration, Instant};

pub use client::{pair, pair_from, Pairing};
pub use server::{serve, RendezvousServer};

use crate::error::{FmiError, Result};

pub const DEFAULT_HOLD_TIMEOUT: Duration = Duration::from_secs(30);
pub const MAX_NAME_LEN: usize = 255;

/// Pairing name used by communicators: `{comm}:{lo}-{hi}:{epoch}`.
pub fn pairing_name(comm: &str, a: usize, b: usize, epoch: u64) -> String {
    format!("{comm}:{}-{}:{epoch}", a.min(b), a.max(b))
}

pub fn validate_name(name: &str) -> Result<()> {
    if name.is_empty() {
        return Err(FmiError::protocol("pairing name is empty"));
    }
    if name.len() > MAX_NAME_LEN {
        return Err(FmiError::protocol(format!(
            "pairing name is {} bytes, limit is {MAX_NAME_LEN}",
            name.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingTicket {
    pub name: String,
    pub observed: SocketAddrV4,
    pub arrival: Instant,
}

impl PairingTicket {
    pub fn new(name: impl Into<String>, observed: SocketAddrV4) -> Result<Self> {
        let name = name.into();
        validate_name(&name)?;
        if observed.port() == 0 {
            return Err(FmiError::protocol("observed port 0"));
        }
        Ok(PairingTicket {
            name,
            observed,
            arrival: Instant::now(),
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CoordinatorStats {
    pub pairings: u64,
    pub timeouts: u64,
}

/// Outcome of feeding one ticket to the coordinator.
#[derive(Debug)]
pub enum Action<W> {
    /// First arrival under this name; it waits.
    Hold,
    /// The name was pending: `waiting` is the parked ticket (with its
    /// waiter handle) and each side gets the other's endpoint.
    Exchange {
        waiting: (PairingTicket, W),
        arriving: PairingTicket,
    },
}

/// Pending tickets keyed by name, each carrying an opaque waiter handle `W`
/// used by the server to wake the parked connection.
#[derive(Debug)]
pub struct CoordinatorState<W> {
    pending: HashMap<String, (PairingTicket, W)>,
    pub stats: CoordinatorStats,
}

impl<W> Default for CoordinatorState<W> {
    fn default() -> Self {
        CoordinatorState {
            pending: HashMap::new(),
            stats: CoordinatorStats::default(),
        }
    }
}

impl<W> CoordinatorState<W> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    pub fn pending(&self, name: &str) -> Option<&PairingTicket> {
        self.pending.get(name).map(|(t, _)| t)
    }

    pub fn step(&mut self, ticket: PairingTicket, waiter: W) -> Result<Action<W>> {
        validate_name(&ticket.name)?;
        match self.pending.remove(&ticket.name) {
            Some(waiting) => {
                self.stats.pairings += 1;
                Ok(Action::Exchange {
                    waiting,
                    arriving: ticket,
                })
            }
            None => {
                self.pending.insert(ticket.name.clone(), (ticket, waiter));
                Ok(Action::Hold)
            }
        }
    }

    /// Removes the pending ticket under `name` if `pred` accepts it.
    pub fn withdraw(&mut self, name: &str, pred: impl FnOnce(&W) -> bool) -> Option<(PairingTicket, W)> {
        if self.pending.get(name).is_some_and(|(_, w)| pred(w)) {
            self.pending.remove(name)
        } else {
            None
        }
    }

    /// Drops tickets that arrived more than `hold` before `now`.
    pub fn evict_expired(&mut self, now: Instant, hold: Duration) -> Vec<(PairingTicket, W)> {
        let expired: Vec<String> = self
            .pending
            .iter()
            .filter(|(_, (t, _))| now.saturating_duration_since(t.arrival) >= hold)
            .map(|(k, _)| k.clone())
            .collect();
        self.stats.timeouts += expired.len() as u64;
        expired
            .into_iter()
            .filter_map(|k| self.pending.remove(&k))
            .collect()
    }
}
