//! Frame layout, little-endian:
//!
//! ```text
//! magic 0x46 0x4D ("FM") | u32 seq | u16 tag | u64 payload_len | payload
//! ```

use crate::error::{FmiError, Result};

pub const MAGIC: [u8; 2] = [0x46, 0x4D];
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameHeader {
    pub seq: u32,
    pub tag: u16,
    pub payload_len: u64,
}

impl FrameHeader {
    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[..2].copy_from_slice(&MAGIC);
        h[2..6].copy_from_slice(&self.seq.to_le_bytes());
        h[6..8].copy_from_slice(&self.tag.to_le_bytes());
        h[8..16].copy_from_slice(&self.payload_len.to_le_bytes());
        h
    }

    pub fn decode(h: &[u8; HEADER_LEN]) -> Result<Self> {
        if h[..2] != MAGIC {
            return Err(FmiError::protocol(format!("bad frame magic {:02x}{:02x}", h[0], h[1])));
        }
        Ok(FrameHeader {
            seq: u32::from_le_bytes(h[2..6].try_into().unwrap()),
            tag: u16::from_le_bytes(h[6..8].try_into().unwrap()),
            payload_len: u64::from_le_bytes(h[8..16].try_into().unwrap()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub seq: u32,
    pub tag: u16,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn header(&self) -> FrameHeader {
        FrameHeader {
            seq: self.seq,
            tag: self.tag,
            payload_len: self.payload.len() as u64,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&self.header().encode());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(FmiError::protocol("truncated frame header"));
        }
        let h = FrameHeader::decode(bytes[..HEADER_LEN].try_into().unwrap())?;
        let body = &bytes[HEADER_LEN..];
        if body.len() as u64 != h.payload_len {
            return Err(FmiError::protocol(format!(
                "frame declares {} payload bytes, has {}",
                h.payload_len,
                body.len()
            )));
        }
        Ok(Frame {
            seq: h.seq,
            tag: h.tag,
            payload: body.to_vec(),
        })
    }
}
