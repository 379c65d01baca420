use std::collections::BTreeMap;
use std::io::{self, BufReader, BufWriter, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::protocol::{Incoming, Request, Response};
use crate::profile::{ddb_units, ChannelKind, ChannelProfile, Dollars};
use crate::service::ServiceHandle;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreRecord {
    pub value: Vec<u8>,
    pub created_at: Instant,
}

/// Request counts and volumes, per operation kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeterLedger {
    pub puts: u64,
    pub put_bytes: u64,
    /// Every GET attempt, found or not.
    pub gets: u64,
    pub get_hits: u64,
    pub get_bytes: u64,
    pub deletes: u64,
    pub lists: u64,
    /// PUTs refused for exceeding the size limit; not billed.
    pub rejected: u64,
    pub ddb_write_units: u64,
    pub ddb_read_units: u64,
}

impl MeterLedger {
    pub fn record_put(&mut self, len: u64) {
        self.puts += 1;
        self.put_bytes += len;
        self.ddb_write_units += ddb_units(len);
    }

    pub fn record_get(&mut self, hit: Option<u64>) {
        self.gets += 1;
        if let Some(len) = hit {
            self.get_hits += 1;
            self.get_bytes += len;
        }
        self.ddb_read_units += ddb_units(hit.unwrap_or(0));
    }

    pub fn record_list(&mut self) {
        self.lists += 1;
        self.ddb_read_units += 1;
    }

    pub fn record_delete(&mut self) {
        self.deletes += 1;
    }
}

/// Bills a ledger under a profile's price book.
///
/// Object storage bills PUT and LIST at the upload rate and GET at the
/// download rate; deletes are free. The key-value store bills 1 kB units.
/// The cache and the direct channel bill wall time only.
pub fn metered_cost(ledger: &MeterLedger, profile: &ChannelProfile, elapsed: f64) -> Dollars {
    let p = &profile.price;
    match profile.kind {
        ChannelKind::S3 => p.p_s3_u * (ledger.puts + ledger.lists) + p.p_s3_d * ledger.gets,
        ChannelKind::DynamoDb => p.p_ddb_u * ledger.ddb_write_units + p.p_ddb_d * ledger.ddb_read_units,
        ChannelKind::Redis => p.p_redis.scale(elapsed),
        ChannelKind::Direct => p.p_hps.scale(elapsed),
    }
}

/// Records, metering and latency injection shared by the TCP server and
/// the in-process [`LocalStore`](super::LocalStore).
#[derive(Debug)]
pub struct StoreCore {
    records: Mutex<BTreeMap<String, StoreRecord>>,
    ledger: Mutex<MeterLedger>,
    profile: ChannelProfile,
    jitter: bool,
}

impl StoreCore {
    pub fn new(profile: ChannelProfile, jitter: bool) -> Self {
        StoreCore {
            records: Mutex::new(BTreeMap::new()),
            ledger: Mutex::new(MeterLedger::default()),
            profile,
            jitter,
        }
    }

    pub fn profile(&self) -> &ChannelProfile {
        &self.profile
    }

    pub fn ledger(&self) -> MeterLedger {
        *self.ledger.lock().unwrap()
    }

    pub fn reset_ledger(&self) -> MeterLedger {
        std::mem::take(&mut *self.ledger.lock().unwrap())
    }

    pub fn len(&self) -> usize {
        self.records.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn jitter_factor(&self) -> f64 {
        if self.jitter {
            rand::thread_rng().gen_range(0.9..=1.1)
        } else {
            1.0
        }
    }

    /// `alpha + len / beta_inv`, optionally perturbed by up to +-10%.
    pub fn service_delay(&self, len: u64) -> Duration {
        let base = self.profile.alpha + len as f64 / self.profile.beta_inv;
        Duration::from_secs_f64((base * self.jitter_factor()).max(0.0))
    }

    /// Runs `op` inside one request's injected delay. Half the latency and
    /// the `upload` transfer elapse before `op` touches the records; the
    /// other half and the download transfer `op` reports elapse after.
    fn serve<T>(&self, upload: u64, op: impl FnOnce() -> (T, u64)) -> T {
        let factor = self.jitter_factor();
        let half = self.profile.alpha / 2.0;
        let pause = |secs: f64| {
            let d = Duration::from_secs_f64((secs * factor).max(0.0));
            if !d.is_zero() {
                std::thread::sleep(d);
            }
        };
        pause(half + upload as f64 / self.profile.beta_inv);
        let (out, download) = op();
        pause(half + download as f64 / self.profile.beta_inv);
        out
    }

    pub fn handle(&self, incoming: Incoming) -> Response {
        let req = match incoming {
            Incoming::Request(r) => r,
            Incoming::Oversized { .. } => {
                self.ledger.lock().unwrap().rejected += 1;
                return self.serve(0, || (Response::TooLarge, 0));
            }
        };
        match req {
            Request::Put { key, value } => {
                let len = value.len() as u64;
                if len > self.profile.max_message {
                    self.ledger.lock().unwrap().rejected += 1;
                    return self.serve(0, || (Response::TooLarge, 0));
                }
                self.serve(len, || {
                    let record = StoreRecord {
                        value,
                        created_at: Instant::now(),
                    };
                    self.records.lock().unwrap().insert(key, record);
                    self.ledger.lock().unwrap().record_put(len);
                    (Response::Ok, 0)
                })
            }
            Request::Get { key } => self.serve(0, || {
                let value = self.records.lock().unwrap().get(&key).map(|r| r.value.clone());
                let hit = value.as_ref().map(|v| v.len() as u64);
                self.ledger.lock().unwrap().record_get(hit);
                match value {
                    Some(v) => (Response::Value(v), hit.unwrap_or(0)),
                    None => (Response::NotFound, 0),
                }
            }),
            Request::Delete { key } => self.serve(0, || {
                self.records.lock().unwrap().remove(&key);
                self.ledger.lock().unwrap().record_delete();
                (Response::Ok, 0)
            }),
            Request::ListCount { prefix } => self.serve(0, || {
                let count = self
                    .records
                    .lock()
                    .unwrap()
                    .range(prefix.clone()..)
                    .take_while(|(k, _)| k.starts_with(&prefix))
                    .count();
                self.ledger.lock().unwrap().record_list();
                (Response::Count(count as u32), 0)
            }),
        }
    }
}

/// The store service over TCP, one thread per client connection.
pub struct StoreServer {
    listener: TcpListener,
    core: Arc<StoreCore>,
}

impl StoreServer {
    pub fn bind(addr: impl ToSocketAddrs, profile: ChannelProfile, jitter: bool) -> io::Result<Self> {
        profile
            .validate()
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
        Ok(StoreServer {
            listener: crate::service::bind_listener(addr)?,
            core: Arc::new(StoreCore::new(profile, jitter)),
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn core(&self) -> Arc<StoreCore> {
        self.core.clone()
    }

    pub fn spawn(self) -> io::Result<ServiceHandle> {
        let core = self.core;
        ServiceHandle::spawn("fmi-store", self.listener, move |s| spawn_conn(s, core.clone()))
    }

    pub fn run(self) -> io::Result<()> {
        for conn in self.listener.incoming() {
            match conn {
                Ok(s) => spawn_conn(s, self.core.clone()),
                Err(e) => log::warn!("accept failed: {e}"),
            }
        }
        Ok(())
    }
}

/// Binds and serves until the process exits.
pub fn store_serve(bind: impl ToSocketAddrs, profile: ChannelProfile, jitter: bool) -> io::Result<()> {
    let server = StoreServer::bind(bind, profile, jitter)?;
    log::info!(
        "store ({}) listening on {}",
        server.core.profile().name,
        server.local_addr()?
    );
    server.run()
}

fn spawn_conn(stream: TcpStream, core: Arc<StoreCore>) {
    let spawned = std::thread::Builder::new()
        .name("store-conn".into())
        .spawn(move || {
            if let Err(e) = serve_conn(stream, &core) {
                log::debug!("store connection ended: {e}");
            }
        });
    if let Err(e) = spawned {
        log::warn!("cannot spawn connection thread: {e}");
    }
}

fn serve_conn(stream: TcpStream, core: &StoreCore) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    loop {
        let incoming = match Request::read_from(&mut reader, core.profile().max_message) {
            Ok(Ok(i)) => i,
            Ok(Err(e)) => {
                log::warn!("dropping client after malformed request: {e}");
                return Ok(());
            }
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(()),
            Err(e) => return Err(e),
        };
        core.handle(incoming).write_to(&mut writer)?;
        writer.flush()?;
    }
}
