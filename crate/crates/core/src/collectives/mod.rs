//! The seven collectives in two algorithm families.
//!
//! [`direct`] runs tree and recursive-doubling algorithms over any
//! [`PointToPoint`] transport. [`mediated`] uploads to and polls a
//! [`KvStore`](crate::mediated::KvStore).

pub mod direct;
pub mod mediated;
mod memory;
#[cfg(test)]
pub(crate) mod testkit;

use std::fmt;
use std::str::FromStr;

pub use memory::{memory_world, MemoryEndpoint};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollectiveKind {
    Bcast,
    Barrier,
    Gather,
    Scatter,
    Reduce,
    Allreduce,
    Scan,
}

impl CollectiveKind {
    pub const ALL: [CollectiveKind; 7] = [
        CollectiveKind::Bcast,
        CollectiveKind::Barrier,
        CollectiveKind::Gather,
        CollectiveKind::Scatter,
        CollectiveKind::Reduce,
        CollectiveKind::Allreduce,
        CollectiveKind::Scan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CollectiveKind::Bcast => "bcast",
            CollectiveKind::Barrier => "barrier",
            CollectiveKind::Gather => "gather",
            CollectiveKind::Scatter => "scatter",
            CollectiveKind::Reduce => "reduce",
            CollectiveKind::Allreduce => "allreduce",
            CollectiveKind::Scan => "scan",
        }
    }
}

impl fmt::Display for CollectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CollectiveKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        CollectiveKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown collective '{s}'"))
    }
}

/// Tag of a collective frame: low 9 bits of the operation sequence number,
/// then a 6-bit round. Tags at or above 0x8000 are reserved.
pub fn collective_tag(op_seq: u64, round: u32) -> u16 {
    debug_assert!(round < 64);
    (((op_seq % 512) as u16) << 6) | (round as u16 & 0x3F)
}

/// Tag used by point-to-point messages outside collectives.
pub const P2P_TAG: u16 = 0xFFFF;

/// Tagged, ordered, reliable messaging between ranks.
pub trait PointToPoint {
    fn rank(&self) -> usize;
    fn size(&self) -> usize;
    fn send(&mut self, peer: usize, tag: u16, payload: &[u8]) -> Result<()>;
    fn recv(&mut self, peer: usize, tag: u16) -> Result<Vec<u8>>;

    /// Symmetric exchange with `peer`. Transports with bounded buffers
    /// override this to send and receive concurrently.
    fn exchange(&mut self, peer: usize, tag: u16, payload: &[u8]) -> Result<Vec<u8>> {
        self.send(peer, tag, payload)?;
        self.recv(peer, tag)
    }
}
