use std::io::{BufReader, BufWriter, Write};
use std::net::{SocketAddr, TcpStream};
use std::sync::Arc;
use std::time::Duration;

use super::protocol::{Incoming, Request, Response};
use super::store::StoreCore;
use crate::error::{FmiError, Result};

/// The operations a mediated channel needs from its backing store.
///
/// Implementations must be strongly consistent: a `get` issued after a
/// `put` returned observes the value.
pub trait KvStore {
    fn put(&mut self, key: &str, value: &[u8]) -> Result<()>;
    fn get(&mut self, key: &str) -> Result<Option<Vec<u8>>>;
    /// Absent keys are not an error.
    fn delete(&mut self, key: &str) -> Result<()>;
    fn list_count(&mut self, prefix: &str) -> Result<u32>;
}

impl<S: KvStore + ?Sized> KvStore for &mut S {
    fn put(&mut self, key: &str, value: &[u8]) -> Result<()> {
        (**self).put(key, value)
    }
    fn get(&mut self, key: &str) -> Result<Option<Vec<u8>>> {
        (**self).get(key)
    }
    fn delete(&mut self, key: &str) -> Result<()> {
        (**self).delete(key)
    }
    fn list_count(&mut self, prefix: &str) -> Result<u32> {
        (**self).list_count(prefix)
    }
}

fn expect(resp: Response, key: &str, max: u64, len: usize) -> Result<Response> {
    match resp {
        Response::TooLarge => Err(FmiError::too_large(format!(
            "value of {len} bytes for '{key}' exceeds the {max} byte limit"
        ))),
        r => Ok(r),
    }
}

/// TCP client for the store service.
#[derive(Debug)]
pub struct StoreClient {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
    max_message: u64,
    peer: SocketAddr,
}

impl StoreClient {
    pub fn connect(addr: SocketAddr, timeout: Duration) -> Result<Self> {
        let stream = TcpStream::connect_timeout(&addr, timeout)
            .map_err(|e| FmiError::channel(format!("store {addr} unreachable: {e}")))?;
        stream
            .set_nodelay(true)
            .map_err(|e| FmiError::from_io("store socket", e))?;
        let reader = BufReader::new(
            stream
                .try_clone()
                .map_err(|e| FmiError::from_io("store socket", e))?,
        );
        Ok(StoreClient {
            reader,
            writer: BufWriter::new(stream),
            max_message: u64::MAX,
            peer: addr,
        })
    }

    /// Rejects oversized values locally instead of shipping them first.
    pub fn with_limit(mut self, max_message: u64) -> Self {
        self.max_message = max_message;
        self
    }

    pub fn set_read_timeout(&self, timeout: Option<Duration>) -> Result<()> {
        self.reader
            .get_ref()
            .set_read_timeout(timeout)
            .map_err(|e| FmiError::from_io("store socket", e))
    }

    pub fn close(&self) {
        let _ = self.reader.get_ref().shutdown(std::net::Shutdown::Both);
    }

    fn call(&mut self, req: &Request) -> Result<Response> {
        let io = |e: std::io::Error| FmiError::from_io(&format!("store {}", self.peer), e);
        req.write_to(&mut self.writer).map_err(io)?;
        self.writer.flush().map_err(io)?;
        Response::read_from(&mut self.reader, req.opcode()).map_err(io)?
    }
}

fn unexpected(r: Response) -> FmiError {
    FmiError::protocol(format!("unexpected store response {r:?}"))
}

impl KvStore for StoreClient {
    fn put(&mut self, key: &str, value: &[u8]) -> Result<()> {
        if value.len() as u64 > self.max_message {
            return expect(Response::TooLarge, key, self.max_message, value.len()).map(|_| ());
        }
        let resp = self.call(&Request::Put {
            key: key.to_string(),
            value: value.to_vec(),
        })?;
        match expect(resp, key, self.max_message, value.len())? {
            Response::Ok => Ok(()),
            r => Err(unexpected(r)),
        }
    }

    fn get(&mut self, key: &str) -> Result<Option<Vec<u8>>> {
        match self.call(&Request::Get { key: key.to_string() })? {
            Response::Value(v) => Ok(Some(v)),
            Response::NotFound => Ok(None),
            r => Err(unexpected(r)),
        }
    }

    fn delete(&mut self, key: &str) -> Result<()> {
        match self.call(&Request::Delete { key: key.to_string() })? {
            Response::Ok | Response::NotFound => Ok(()),
            r => Err(unexpected(r)),
        }
    }

    fn list_count(&mut self, prefix: &str) -> Result<u32> {
        match self.call(&Request::ListCount {
            prefix: prefix.to_string(),
        })? {
            Response::Count(c) => Ok(c),
            r => Err(unexpected(r)),
        }
    }
}

/// In-process store handle over a shared [`StoreCore`], with the same
/// metering and latency injection as the TCP service.
#[derive(Debug, Clone)]
pub struct LocalStore(pub Arc<StoreCore>);

impl LocalStore {
    pub fn new(core: StoreCore) -> Self {
        LocalStore(Arc::new(core))
    }

    fn call(&self, req: Request) -> Response {
        self.0.handle(Incoming::Request(req))
    }
}

impl KvStore for LocalStore {
    fn put(&mut self, key: &str, value: &[u8]) -> Result<()> {
        let max = self.0.profile().max_message;
        match expect(
            self.call(Request::Put {
                key: key.to_string(),
                value: value.to_vec(),
            }),
            key,
            max,
            value.len(),
        )? {
            Response::Ok => Ok(()),
            r => Err(unexpected(r)),
        }
    }

    fn get(&mut self, key: &str) -> Result<Option<Vec<u8>>> {
        match self.call(Request::Get { key: key.to_string() }) {
            Response::Value(v) => Ok(Some(v)),
            Response::NotFound => Ok(None),
            r => Err(unexpected(r)),
        }
    }

    fn delete(&mut self, key: &str) -> Result<()> {
        self.call(Request::Delete { key: key.to_string() });
        Ok(())
    }

    fn list_count(&mut self, prefix: &str) -> Result<u32> {
        match self.call(Request::ListCount {
            prefix: prefix.to_string(),
        }) {
            Response::Count(c) => Ok(c),
            r => Err(unexpected(r)),
        }
    }
}
