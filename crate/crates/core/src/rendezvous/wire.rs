//! Rendezvous wire format.
//!
//! ```text
//! request:  u8 name_len | name (UTF-8)
//! response: u8 status (0 ok, 1 timeout, 2 malformed) | ok: 4-byte IPv4 | u16 port (LE)
//! ```

use std::io::{self, Read, Write};
use std::net::{Ipv4Addr, SocketAddrV4};

use crate::error::{FmiError, Result};

pub const STATUS_OK: u8 = 0;
pub const STATUS_TIMEOUT: u8 = 1;
pub const STATUS_MALFORMED: u8 = 2;

pub fn encode_request(name: &str) -> Result<Vec<u8>> {
    super::validate_name(name)?;
    let mut out = Vec::with_capacity(1 + name.len());
    out.push(name.len() as u8);
    out.extend_from_slice(name.as_bytes());
    Ok(out)
}

/// Reads one request. An empty or non-UTF-8 name is a protocol violation;
/// transport failures come back as I/O errors.
pub fn read_request<R: Read>(r: &mut R) -> io::Result<Result<String>> {
    let mut len = [0u8; 1];
    r.read_exact(&mut len)?;
    let mut name = vec![0u8; len[0] as usize];
    r.read_exact(&mut name)?;
    if name.is_empty() {
        return Ok(Err(FmiError::protocol("empty pairing name")));
    }
    Ok(String::from_utf8(name).map_err(|_| FmiError::protocol("pairing name is not UTF-8")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Response {
    Peer(SocketAddrV4),
    Timeout,
    Malformed,
}

impl Response {
    pub fn encode(&self) -> Vec<u8> {
        match self {
            Response::Peer(addr) => {
                let mut out = Vec::with_capacity(7);
                out.push(STATUS_OK);
                out.extend_from_slice(&addr.ip().octets());
                out.extend_from_slice(&addr.port().to_le_bytes());
                out
            }
            Response::Timeout => vec![STATUS_TIMEOUT],
            Response::Malformed => vec![STATUS_MALFORMED],
        }
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(&self.encode())?;
        w.flush()
    }

    pub fn read_from<R: Read>(r: &mut R) -> io::Result<Result<Response>> {
        let mut status = [0u8; 1];
        r.read_exact(&mut status)?;
        match status[0] {
            STATUS_OK => {
                let mut body = [0u8; 6];
                r.read_exact(&mut body)?;
                let ip = Ipv4Addr::new(body[0], body[1], body[2], body[3]);
                let port = u16::from_le_bytes([body[4], body[5]]);
                Ok(Ok(Response::Peer(SocketAddrV4::new(ip, port))))
            }
            STATUS_TIMEOUT => Ok(Ok(Response::Timeout)),
            STATUS_MALFORMED => Ok(Ok(Response::Malformed)),
            other => Ok(Err(FmiError::protocol(format!("unknown rendezvous status {other}")))),
        }
    }
}
