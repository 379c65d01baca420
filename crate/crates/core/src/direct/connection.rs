use std::collections::{HashMap, VecDeque};
use std::io::{Read, Write};
use std::net::{Shutdown, TcpStream};
use std::time::Duration;

use super::frame::{FrameHeader, HEADER_LEN};
use crate::error::{FmiError, Result};

/// Payloads up to this size go out in the same write as their header.
const COALESCE_LIMIT: usize = 64 * 1024;

/// An established, framed duplex stream to one peer.
///
/// Frames whose tag is not the one being waited for are queued per tag in
/// arrival order, so rounds of different algorithms can interleave.
#[derive(Debug)]
pub struct PeerConnection {
    local_rank: usize,
    remote_rank: usize,
    stream: TcpStream,
    next_send_seq: u32,
    next_recv_seq: u32,
    queued: HashMap<u16, VecDeque<Vec<u8>>>,
    frames_sent: u64,
    bytes_sent: u64,
}

impl PeerConnection {
    pub fn new(local_rank: usize, remote_rank: usize, stream: TcpStream) -> Result<Self> {
        if local_rank == remote_rank {
            return Err(FmiError::protocol("connection to self"));
        }
        stream
            .set_nodelay(true)
            .map_err(|e| FmiError::from_io("set TCP_NODELAY", e))?;
        Ok(PeerConnection {
            local_rank,
            remote_rank,
            stream,
            next_send_seq: 0,
            next_recv_seq: 0,
            queued: HashMap::new(),
            frames_sent: 0,
            bytes_sent: 0,
        })
    }

    pub fn local_rank(&self) -> usize {
        self.local_rank
    }

    pub fn remote_rank(&self) -> usize {
        self.remote_rank
    }

    pub fn frames_sent(&self) -> u64 {
        self.frames_sent
    }

    pub fn bytes_sent(&self) -> u64 {
        self.bytes_sent
    }

    pub fn set_read_timeout(&self, timeout: Option<Duration>) -> Result<()> {
        self.stream
            .set_read_timeout(timeout.map(|t| t.max(Duration::from_millis(1))))
            .map_err(|e| FmiError::from_io("set read timeout", e))
    }

    fn io_err(&self, what: &str, e: std::io::Error) -> FmiError {
        FmiError::from_io(&format!("{what} rank {}", self.remote_rank), e)
    }

    pub fn send(&mut self, tag: u16, payload: &[u8]) -> Result<()> {
        let header = FrameHeader {
            seq: self.next_send_seq,
            tag,
            payload_len: payload.len() as u64,
        }
        .encode();
        let res = if payload.len() <= COALESCE_LIMIT {
            let mut buf = Vec::with_capacity(HEADER_LEN + payload.len());
            buf.extend_from_slice(&header);
            buf.extend_from_slice(payload);
            self.stream.write_all(&buf)
        } else {
            self.stream
                .write_all(&header)
                .and_then(|_| self.stream.write_all(payload))
        };
        res.map_err(|e| FmiError::channel(format!("send to rank {}: {e}", self.remote_rank)))?;
        self.next_send_seq = self.next_send_seq.wrapping_add(1);
        self.frames_sent += 1;
        self.bytes_sent += payload.len() as u64;
        Ok(())
    }

    fn read_frame(&mut self) -> Result<(u16, Vec<u8>)> {
        let mut h = [0u8; HEADER_LEN];
        self.stream.read_exact(&mut h).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                FmiError::channel(format!("rank {} closed the connection", self.remote_rank))
            } else {
                self.io_err("receive from", e)
            }
        })?;
        let header = FrameHeader::decode(&h)?;
        if header.seq != self.next_recv_seq {
            return Err(FmiError::protocol(format!(
                "rank {} sent seq {}, expected {}",
                self.remote_rank, header.seq, self.next_recv_seq
            )));
        }
        self.next_recv_seq = self.next_recv_seq.wrapping_add(1);
        let len = usize::try_from(header.payload_len)
            .map_err(|_| FmiError::too_large("frame larger than address space"))?;
        let mut payload = Vec::new();
        payload
            .try_reserve_exact(len)
            .map_err(|_| FmiError::too_large(format!("cannot buffer {len} byte frame")))?;
        (&mut self.stream)
            .take(header.payload_len)
            .read_to_end(&mut payload)
            .map_err(|e| self.io_err("receive from", e))?;
        if payload.len() != len {
            return Err(FmiError::channel(format!(
                "rank {} closed mid-frame",
                self.remote_rank
            )));
        }
        Ok((header.tag, payload))
    }

    /// Blocks until a frame tagged `expected_tag` is available.
    pub fn recv(&mut self, expected_tag: u16) -> Result<Vec<u8>> {
        if let Some(q) = self.queued.get_mut(&expected_tag) {
            if let Some(p) = q.pop_front() {
                return Ok(p);
            }
        }
        loop {
            let (tag, payload) = self.read_frame()?;
            if tag == expected_tag {
                return Ok(payload);
            }
            self.queued.entry(tag).or_default().push_back(payload);
        }
    }

    /// Sends and receives concurrently so large symmetric exchanges cannot
    /// deadlock on full socket buffers.
    pub fn send_recv(&mut self, send_tag: u16, payload: &[u8], recv_tag: u16) -> Result<Vec<u8>> {
        if payload.len() <= COALESCE_LIMIT {
            self.send(send_tag, payload)?;
            return self.recv(recv_tag);
        }
        let mut writer = self
            .stream
            .try_clone()
            .map_err(|e| self.io_err("clone stream for", e))?;
        let header = FrameHeader {
            seq: self.next_send_seq,
            tag: send_tag,
            payload_len: payload.len() as u64,
        }
        .encode();
        let remote = self.remote_rank;
        let (sent, received) = std::thread::scope(|s| {
            let w = s.spawn(move || {
                writer
                    .write_all(&header)
                    .and_then(|_| writer.write_all(payload))
                    .map_err(|e| FmiError::channel(format!("send to rank {remote}: {e}")))
            });
            let r = self.recv(recv_tag);
            (w.join().expect("writer thread panicked"), r)
        });
        sent?;
        self.next_send_seq = self.next_send_seq.wrapping_add(1);
        self.frames_sent += 1;
        self.bytes_sent += payload.len() as u64;
        received
    }

    pub(crate) fn recv_after_send(&mut self, tag: u16, payload: &[u8]) -> Result<Vec<u8>> {
        self.send(tag, payload)?;
        self.recv(tag)
    }

    pub(crate) fn reset_counters(&mut self) {
        self.frames_sent = 0;
        self.bytes_sent = 0;
    }

    pub fn close(&self) {
        let _ = self.stream.shutdown(Shutdown::Both);
    }
}

impl Drop for PeerConnection {
    fn drop(&mut self) {
        self.close();
    }
}
