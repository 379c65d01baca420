use std::collections::{HashMap, VecDeque};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::PointToPoint;
use crate::error::{FmiError, Result};

type Tagged = (u16, Vec<u8>);

/// One rank of an in-process world built from channels. Messages are never
/// lost and sends never block. Useful for checking algorithms without
/// sockets.
pub struct MemoryEndpoint {
    rank: usize,
    size: usize,
    tx: Vec<Sender<Tagged>>,
    rx: Vec<Option<Receiver<Tagged>>>,
    queued: HashMap<(usize, u16), VecDeque<Vec<u8>>>,
    sent: Arc<AtomicU64>,
}

/// Builds `n` connected endpoints; the shared counter tallies all sends.
pub fn memory_world(n: usize) -> (Vec<MemoryEndpoint>, Arc<AtomicU64>) {
    let sent = Arc::new(AtomicU64::new(0));
    // links[src][dst]
    let mut txs: Vec<Vec<Sender<Tagged>>> = vec![Vec::new(); n];
    let mut rxs: Vec<Vec<Option<Receiver<Tagged>>>> = (0..n).map(|_| Vec::new()).collect();
    for src in 0..n {
        for _dst in 0..n {
            let (t, r) = channel();
            txs[src].push(t);
            rxs[src].push(Some(r));
        }
    }
    let mut endpoints = Vec::with_capacity(n);
    for rank in 0..n {
        let rx = (0..n).map(|src| rxs[src][rank].take()).collect();
        endpoints.push(MemoryEndpoint {
            rank,
            size: n,
            tx: txs[rank].clone(),
            rx,
            queued: HashMap::new(),
            sent: sent.clone(),
        });
    }
    (endpoints, sent)
}

impl PointToPoint for MemoryEndpoint {
    fn rank(&self) -> usize {
        self.rank
    }

    fn size(&self) -> usize {
        self.size
    }

    fn send(&mut self, peer: usize, tag: u16, payload: &[u8]) -> Result<()> {
        self.sent.fetch_add(1, Ordering::Relaxed);
        self.tx[peer]
            .send((tag, payload.to_vec()))
            .map_err(|_| FmiError::channel(format!("rank {peer} is gone")))
    }

    fn recv(&mut self, peer: usize, tag: u16) -> Result<Vec<u8>> {
        if let Some(p) = self.queued.get_mut(&(peer, tag)).and_then(|q| q.pop_front()) {
            return Ok(p);
        }
        let rx = self.rx[peer].as_ref().expect("receiver present");
        loop {
            let (t, p) = rx
                .recv()
                .map_err(|_| FmiError::channel(format!("rank {peer} is gone")))?;
            if t == tag {
                return Ok(p);
            }
            self.queued.entry((peer, t)).or_default().push_back(p);
        }
    }
}
