//! Store wire format, little-endian.
//!
//! ```text
//! request:  u8 opcode (1 PUT, 2 GET, 3 DELETE, 4 LIST_COUNT) | u32 key_len | key
//!           | PUT only: u64 value_len | value
//! response: u8 status (0 ok, 1 not_found, 2 too_large)
//!           | GET ok: u64 value_len | value
//!           | LIST_COUNT: u32 count
//! ```

use std::io::{self, Read, Write};

use crate::error::{FmiError, Result};

pub const OP_PUT: u8 = 1;
pub const OP_GET: u8 = 2;
pub const OP_DELETE: u8 = 3;
pub const OP_LIST_COUNT: u8 = 4;

pub const STATUS_OK: u8 = 0;
pub const STATUS_NOT_FOUND: u8 = 1;
pub const STATUS_TOO_LARGE: u8 = 2;

/// Keys longer than this are rejected before reading them.
pub const MAX_KEY_LEN: u32 = 64 * 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Request {
    Put { key: String, value: Vec<u8> },
    Get { key: String },
    Delete { key: String },
    ListCount { prefix: String },
}

/// A decoded request, or a PUT whose value exceeded the limit and was skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Incoming {
    Request(Request),
    Oversized { key: String, len: u64 },
}

impl Request {
    pub fn opcode(&self) -> u8 {
        match self {
            Request::Put { .. } => OP_PUT,
            Request::Get { .. } => OP_GET,
            Request::Delete { .. } => OP_DELETE,
            Request::ListCount { .. } => OP_LIST_COUNT,
        }
    }

    pub fn key(&self) -> &str {
        match self {
            Request::Put { key, .. } | Request::Get { key } | Request::Delete { key } => key,
            Request::ListCount { prefix } => prefix,
        }
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let key = self.key().as_bytes();
        w.write_all(&[self.opcode()])?;
        w.write_all(&(key.len() as u32).to_le_bytes())?;
        w.write_all(key)?;
        if let Request::Put { value, .. } = self {
            w.write_all(&(value.len() as u64).to_le_bytes())?;
            w.write_all(value)?;
        }
        Ok(())
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    /// Reads one request. PUT values longer than `max_value` are consumed
    /// and discarded. Malformed requests yield `Ok(Err(_))`; transport
    /// failures and clean EOF yield `Err`.
    pub fn read_from<R: Read>(r: &mut R, max_value: u64) -> io::Result<Result<Incoming>> {
        let mut op = [0u8; 1];
        r.read_exact(&mut op)?;
        let mut len = [0u8; 4];
        r.read_exact(&mut len)?;
        let key_len = u32::from_le_bytes(len);
        if key_len > MAX_KEY_LEN {
            return Ok(Err(FmiError::protocol(format!("key of {key_len} bytes"))));
        }
        let mut key = vec![0u8; key_len as usize];
        r.read_exact(&mut key)?;
        let Ok(key) = String::from_utf8(key) else {
            return Ok(Err(FmiError::protocol("key is not UTF-8")));
        };
        let req = match op[0] {
            OP_PUT => {
                let mut vl = [0u8; 8];
                r.read_exact(&mut vl)?;
                let value_len = u64::from_le_bytes(vl);
                if value_len > max_value {
                    let skipped = io::copy(&mut r.take(value_len), &mut io::sink())?;
                    if skipped != value_len {
                        return Err(io::ErrorKind::UnexpectedEof.into());
                    }
                    return Ok(Ok(Incoming::Oversized { key, len: value_len }));
                }
                let mut value = Vec::new();
                r.take(value_len).read_to_end(&mut value)?;
                if value.len() as u64 != value_len {
                    return Err(io::ErrorKind::UnexpectedEof.into());
                }
                Request::Put { key, value }
            }
            OP_GET => Request::Get { key },
            OP_DELETE => Request::Delete { key },
            OP_LIST_COUNT => Request::ListCount { prefix: key },
            other => return Ok(Err(FmiError::protocol(format!("unknown opcode {other}")))),
        };
        Ok(Ok(Incoming::Request(req)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Response {
    Ok,
    Value(Vec<u8>),
    Count(u32),
    NotFound,
    TooLarge,
}

impl Response {
    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        match self {
            Response::Ok => w.write_all(&[STATUS_OK]),
            Response::Value(v) => {
                w.write_all(&[STATUS_OK])?;
                w.write_all(&(v.len() as u64).to_le_bytes())?;
                w.write_all(v)
            }
            Response::Count(c) => {
                w.write_all(&[STATUS_OK])?;
                w.write_all(&c.to_le_bytes())
            }
            Response::NotFound => w.write_all(&[STATUS_NOT_FOUND]),
            Response::TooLarge => w.write_all(&[STATUS_TOO_LARGE]),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    /// Reads the response to a request with `opcode`.
    pub fn read_from<R: Read>(r: &mut R, opcode: u8) -> io::Result<Result<Response>> {
        let mut status = [0u8; 1];
        r.read_exact(&mut status)?;
        Ok(Ok(match (status[0], opcode) {
            (STATUS_OK, OP_GET) => {
                let mut l = [0u8; 8];
                r.read_exact(&mut l)?;
                let len = u64::from_le_bytes(l);
                let mut v = Vec::new();
                r.take(len).read_to_end(&mut v)?;
                if v.len() as u64 != len {
                    return Err(io::ErrorKind::UnexpectedEof.into());
                }
                Response::Value(v)
            }
            (STATUS_OK, OP_LIST_COUNT) => {
                let mut c = [0u8; 4];
                r.read_exact(&mut c)?;
                Response::Count(u32::from_le_bytes(c))
            }
            (STATUS_OK, _) => Response::Ok,
            (STATUS_NOT_FOUND, _) => Response::NotFound,
            (STATUS_TOO_LARGE, _) => Response::TooLarge,
            (other, _) => return Ok(Err(FmiError::protocol(format!("unknown store status {other}")))),
        }))
    }
}
