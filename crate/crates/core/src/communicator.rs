//! Named groups of ranked workers bound to one channel.

use std::env;
use std::net::SocketAddr;
use std::time::{Duration, Instant};

use crate::buffer::{DataBuffer, Datatype, ReductionOp};
use crate::collectives::mediated::{self as med, MediatedCtx};
use crate::collectives::{direct as dir, memory_world, MemoryEndpoint, PointToPoint, P2P_TAG};
use crate::direct::{connect_pair, PeerConnection};
use crate::error::{ErrorKind, FmiError, Result};
use crate::mediated::{get_poll, KvStore, PollConfig, StoreClient};
use crate::profile::{ChannelKind, ChannelProfile};
use crate::rendezvous::{pairing_name, validate_name};
use crate::schedule::RdRole;

pub const DEFAULT_JOIN_TIMEOUT: Duration = Duration::from_secs(60);
pub const DEFAULT_OP_TIMEOUT: Duration = Duration::from_secs(300);

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelConfig {
    /// Hole-punched TCP through a rendezvous coordinator.
    Direct { coordinator: SocketAddr },
    /// A key-value store service; `profile` sets the size limit and poll floor.
    Mediated { store: SocketAddr, profile: ChannelProfile },
}

impl ChannelConfig {
    pub fn kind(&self) -> ChannelKind {
        match self {
            ChannelConfig::Direct { .. } => ChannelKind::Direct,
            ChannelConfig::Mediated { profile, .. } => profile.kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommunicatorConfig {
    pub name: String,
    pub world_size: usize,
    pub rank: usize,
    pub channel: ChannelConfig,
    /// Measured from this participant's own join start.
    pub join_timeout: Duration,
    /// Upper bound on any single blocking wait inside an operation.
    pub op_timeout: Duration,
    pub epoch: u64,
    /// Punch every pair at join instead of only the pairs the collectives use.
    pub full_mesh: bool,
}

impl CommunicatorConfig {
    pub fn new(name: impl Into<String>, world_size: usize, rank: usize, channel: ChannelConfig) -> Self {
        CommunicatorConfig {
            name: name.into(),
            world_size,
            rank,
            channel,
            join_timeout: DEFAULT_JOIN_TIMEOUT,
            op_timeout: DEFAULT_OP_TIMEOUT,
            epoch: 0,
            full_mesh: false,
        }
    }

    pub fn with_epoch(mut self, epoch: u64) -> Self {
        self.epoch = epoch;
        self
    }

    pub fn with_join_timeout(mut self, t: Duration) -> Self {
        self.join_timeout = t;
        self
    }

    pub fn with_op_timeout(mut self, t: Duration) -> Self {
        self.op_timeout = t;
        self
    }

    pub fn with_full_mesh(mut self, on: bool) -> Self {
        self.full_mesh = on;
        self
    }

    /// Reads `FMI_COMM_NAME`, `FMI_RANK`, `FMI_WORLD_SIZE`, `FMI_CHANNEL`
    /// (`direct`, `s3`, `dynamodb`, `redis` or a preset name),
    /// `FMI_COORDINATOR` or `FMI_STORE`, and optionally `FMI_EPOCH`,
    /// `FMI_JOIN_TIMEOUT_MS` and `FMI_OP_TIMEOUT_MS`.
    pub fn from_env() -> Result<Self> {
        Self::from_lookup(|k| env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self> {
        let need = |k: &str| get(k).ok_or_else(|| FmiError::protocol(format!("{k} is not set")));
        fn parse<T: std::str::FromStr>(k: &str, v: String) -> Result<T> {
            v.trim()
                .parse()
                .map_err(|_| FmiError::protocol(format!("{k}={v} is not valid")))
        }
        let name = need("FMI_COMM_NAME")?;
        let rank = parse("FMI_RANK", need("FMI_RANK")?)?;
        let world_size = parse("FMI_WORLD_SIZE", need("FMI_WORLD_SIZE")?)?;
        let channel_name = get("FMI_CHANNEL").unwrap_or_else(|| "direct".into());
        let channel = if channel_name == "direct" {
            ChannelConfig::Direct {
                coordinator: parse("FMI_COORDINATOR", need("FMI_COORDINATOR")?)?,
            }
        } else {
            let profile = ChannelProfile::by_name(&channel_name)
                .filter(|p| p.kind.is_mediated())
                .ok_or_else(|| FmiError::protocol(format!("FMI_CHANNEL={channel_name} is not a channel")))?;
            ChannelConfig::Mediated {
                store: parse("FMI_STORE", need("FMI_STORE")?)?,
                profile,
            }
        };
        let mut cfg = CommunicatorConfig::new(name, world_size, rank, channel);
        if let Some(e) = get("FMI_EPOCH") {
            cfg.epoch = parse("FMI_EPOCH", e)?;
        }
        if let Some(t) = get("FMI_JOIN_TIMEOUT_MS") {
            cfg.join_timeout = Duration::from_millis(parse("FMI_JOIN_TIMEOUT_MS", t)?);
        }
        if let Some(t) = get("FMI_OP_TIMEOUT_MS") {
            cfg.op_timeout = Duration::from_millis(parse("FMI_OP_TIMEOUT_MS", t)?);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.world_size == 0 {
            return Err(FmiError::protocol("world size must be positive"));
        }
        if self.rank >= self.world_size {
            return Err(FmiError::protocol(format!(
                "rank {} outside [0, {})",
                self.rank, self.world_size
            )));
        }
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        {
            return Err(FmiError::protocol(format!(
                "communicator name '{}' must be non-empty [A-Za-z0-9._-]",
                self.name
            )));
        }
        let widest = pairing_name(&self.name, self.world_size, self.world_size, self.epoch);
        validate_name(&widest)?;
        if let ChannelConfig::Mediated { profile, .. } = &self.channel {
            if !profile.kind.is_mediated() {
                return Err(FmiError::protocol(format!("profile {} is not a store", profile.name)));
            }
            profile.validate().map_err(FmiError::protocol)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommState {
    Active,
    Aborted,
}

/// Peers a rank punches at join: every cyclic power-of-two distance (all
/// binomial tree edges for any root) plus its recursive-doubling partners.
pub fn schedule_peers(n: usize, rank: usize) -> Vec<usize> {
    let role = RdRole::new(n, rank);
    (0..n)
        .filter(|&j| j != rank)
        .filter(|&j| {
            ((j + n - rank) % n).is_power_of_two()
                || ((rank + n - j) % n).is_power_of_two()
                || role.folds_into == Some(j)
                || role.absorbs == Some(j)
                || role.exchange.contains(&j)
        })
        .collect()
}

/// Direct-channel connections of one rank; missing pairs are punched on
/// first use.
struct TcpMesh {
    rank: usize,
    name: String,
    epoch: u64,
    coordinator: SocketAddr,
    conns: Vec<Option<PeerConnection>>,
    op_timeout: Duration,
}

impl TcpMesh {
    fn conn(&mut self, peer: usize) -> Result<&mut PeerConnection> {
        if peer >= self.conns.len() || peer == self.rank {
            return Err(FmiError::protocol(format!("no peer {peer} for rank {}", self.rank)));
        }
        if self.conns[peer].is_none() {
            let c = connect_pair(self.coordinator, &self.name, self.epoch, self.rank, peer, self.op_timeout)?;
            c.set_read_timeout(Some(self.op_timeout))?;
            self.conns[peer] = Some(c);
        }
        Ok(self.conns[peer].as_mut().expect("just connected"))
    }

    fn open(&self) -> impl Iterator<Item = &PeerConnection> {
        self.conns.iter().flatten()
    }

    fn set_timeouts(&self, t: Duration) -> Result<()> {
        self.open().try_for_each(|c| c.set_read_timeout(Some(t)))
    }

    fn close(&mut self) {
        for c in self.conns.iter_mut().filter_map(Option::take) {
            c.close();
        }
    }
}

impl PointToPoint for TcpMesh {
    fn rank(&self) -> usize {
        self.rank
    }

    fn size(&self) -> usize {
        self.conns.len()
    }

    fn send(&mut self, peer: usize, tag: u16, payload: &[u8]) -> Result<()> {
        self.conn(peer)?.send(tag, payload)
    }

    fn recv(&mut self, peer: usize, tag: u16) -> Result<Vec<u8>> {
        self.conn(peer)?.recv(tag)
    }

    fn exchange(&mut self, peer: usize, tag: u16, payload: &[u8]) -> Result<Vec<u8>> {
        self.conn(peer)?.send_recv(tag, payload, tag)
    }
}

struct StoreLink {
    client: StoreClient,
    ctx: MediatedCtx,
    op_timeout: Duration,
    sent: Vec<u64>,
    received: Vec<u64>,
    /// Point-to-point key already consumed but not yet deleted. Removal
    /// waits for the next operation so it stays off the receive path.
    consumed: Option<String>,
}

impl StoreLink {
    /// Context whose polls give up after the operation timeout.
    fn ctx(&self) -> MediatedCtx {
        let mut ctx = self.ctx.clone();
        ctx.poll.deadline = Some(Instant::now() + self.op_timeout);
        ctx
    }

    fn p2p_key(&self, src: usize, dst: usize, seq: u64) -> String {
        format!("{}/p2p/{src}>{dst}/{seq}", self.ctx.prefix)
    }

    fn flush(&mut self) -> Result<()> {
        if let Some(key) = self.consumed.take() {
            self.client.delete(&key)?;
        }
        Ok(())
    }
}

enum Backend {
    /// A single rank; collectives run without any network.
    Solo(MemoryEndpoint),
    Direct(TcpMesh),
    Mediated(StoreLink),
}

enum Route<'a> {
    P2p(&'a mut dyn PointToPoint),
    Store(&'a mut StoreClient, MediatedCtx),
}

impl Backend {
    fn route(&mut self) -> Route<'_> {
        match self {
            Backend::Solo(m) => Route::P2p(m),
            Backend::Direct(m) => Route::P2p(m),
            Backend::Mediated(s) => {
                let ctx = s.ctx();
                Route::Store(&mut s.client, ctx)
            }
        }
    }

    fn flush(&mut self) -> Result<()> {
        match self {
            Backend::Mediated(s) => s.flush(),
            _ => Ok(()),
        }
    }

    fn close(&mut self) {
        match self {
            Backend::Solo(_) => {}
            Backend::Direct(m) => m.close(),
            Backend::Mediated(s) => s.client.close(),
        }
    }
}

/// One rank's handle on a communicator.
///
/// Collectives block and must be called in the same order on every rank.
/// The first failure aborts the communicator: connections are closed and
/// every later call returns that failure.
pub struct Communicator {
    cfg: CommunicatorConfig,
    backend: Backend,
    op_seq: u64,
    cause: Option<FmiError>,
}

impl std::fmt::Debug for Communicator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Communicator")
            .field("name", &self.cfg.name)
            .field("rank", &self.cfg.rank)
            .field("size", &self.cfg.world_size)
            .field("op_seq", &self.op_seq)
            .field("state", &self.state())
            .finish()
    }
}

fn join_failed(cfg: &CommunicatorConfig, e: FmiError) -> FmiError {
    FmiError::new(
        ErrorKind::JoinFailed,
        format!("rank {} of '{}': {e}", cfg.rank, cfg.name),
    )
}

impl Communicator {
    /// Forms the group. Fails with `JoinFailed` if it is not complete within
    /// `join_timeout` of this call.
    pub fn join(cfg: CommunicatorConfig) -> Result<Self> {
        cfg.validate()?;
        let start = Instant::now();
        let deadline = start + cfg.join_timeout;
        let backend = if cfg.world_size == 1 {
            let (mut eps, _) = memory_world(1);
            Backend::Solo(eps.pop().expect("one endpoint"))
        } else {
            match &cfg.channel {
                ChannelConfig::Direct { coordinator } => {
                    Backend::Direct(join_direct(&cfg, *coordinator, deadline).map_err(|e| join_failed(&cfg, e))?)
                }
                ChannelConfig::Mediated { store, profile } => Backend::Mediated(
                    join_mediated(&cfg, *store, profile, deadline).map_err(|e| join_failed(&cfg, e))?,
                ),
            }
        };
        log::debug!(
            "rank {}/{} joined '{}' in {:?}",
            cfg.rank,
            cfg.world_size,
            cfg.name,
            start.elapsed()
        );
        Ok(Communicator {
            cfg,
            backend,
            op_seq: 0,
            cause: None,
        })
    }

    pub fn rank(&self) -> usize {
        self.cfg.rank
    }

    pub fn size(&self) -> usize {
        self.cfg.world_size
    }

    pub fn name(&self) -> &str {
        &self.cfg.name
    }

    pub fn config(&self) -> &CommunicatorConfig {
        &self.cfg
    }

    pub fn channel_kind(&self) -> ChannelKind {
        self.cfg.channel.kind()
    }

    pub fn state(&self) -> CommState {
        if self.cause.is_some() {
            CommState::Aborted
        } else {
            CommState::Active
        }
    }

    /// The failure that aborted the communicator, if any.
    pub fn abort_cause(&self) -> Option<&FmiError> {
        self.cause.as_ref()
    }

    /// Sequence number of the last collective issued (0 before the first).
    pub fn op_seq(&self) -> u64 {
        self.op_seq
    }

    /// Direct-channel frames this rank sent since join.
    pub fn frames_sent(&self) -> u64 {
        match &self.backend {
            Backend::Direct(m) => m.open().map(PeerConnection::frames_sent).sum(),
            _ => 0,
        }
    }

    /// Marks the communicator failed and closes its connections. Later
    /// calls return `cause`; an earlier cause is kept.
    pub fn abort(&mut self, cause: FmiError) {
        if self.cause.is_none() {
            log::debug!("rank {} aborting '{}': {cause}", self.cfg.rank, self.cfg.name);
            self.cause = Some(cause);
        }
        self.backend.close();
    }

    fn guarded<T>(&mut self, f: impl FnOnce(&mut Backend) -> Result<T>) -> Result<T> {
        if let Some(c) = &self.cause {
            return Err(c.clone());
        }
        match f(&mut self.backend) {
            Ok(v) => Ok(v),
            Err(e) => {
                self.abort(e.clone());
                Err(e)
            }
        }
    }

    fn collective<T>(
        &mut self,
        p2p: impl FnOnce(&mut dyn PointToPoint, u64) -> Result<T>,
        store: impl FnOnce(&mut StoreClient, &MediatedCtx, u64) -> Result<T>,
    ) -> Result<T> {
        if let Some(c) = &self.cause {
            return Err(c.clone());
        }
        self.op_seq += 1;
        let seq = self.op_seq;
        self.guarded(|b| {
            b.flush()?;
            match b.route() {
                Route::P2p(t) => p2p(t, seq),
                Route::Store(s, ctx) => store(s, &ctx, seq),
            }
        })
    }

    /// Every rank returns the root's buffer.
    pub fn bcast(&mut self, buf: &DataBuffer, root: usize) -> Result<DataBuffer> {
        self.collective(
            |t, seq| dir::bcast(t, seq, buf, root),
            |s, ctx, seq| med::bcast(s, ctx, seq, buf, root),
        )
    }

    pub fn barrier(&mut self) -> Result<()> {
        self.collective(|t, seq| dir::barrier(t, seq), med::barrier)
    }

    /// The root receives all buffers in rank order; others get an empty buffer.
    pub fn gather(&mut self, buf: &DataBuffer, root: usize) -> Result<DataBuffer> {
        self.collective(
            |t, seq| dir::gather(t, seq, buf, root),
            |s, ctx, seq| med::gather(s, ctx, seq, buf, root),
        )
    }

    /// Rank `i` receives slice `i` of the root's buffer. On other ranks
    /// `buf` only supplies the datatype.
    pub fn scatter(&mut self, buf: &DataBuffer, root: usize) -> Result<DataBuffer> {
        self.collective(
            |t, seq| dir::scatter(t, seq, buf, root),
            |s, ctx, seq| med::scatter(s, ctx, seq, buf, root),
        )
    }

    /// The root receives the element-wise reduction; others get an empty buffer.
    pub fn reduce(&mut self, buf: &DataBuffer, op: &ReductionOp, root: usize) -> Result<DataBuffer> {
        self.collective(
            |t, seq| dir::reduce(t, seq, buf, op, root),
            |s, ctx, seq| med::reduce(s, ctx, seq, buf, op, root),
        )
    }

    pub fn allreduce(&mut self, buf: &DataBuffer, op: &ReductionOp) -> Result<DataBuffer> {
        self.collective(
            |t, seq| dir::allreduce(t, seq, buf, op),
            |s, ctx, seq| med::allreduce(s, ctx, seq, buf, op),
        )
    }

    /// Inclusive prefix reduction in rank order.
    pub fn scan(&mut self, buf: &DataBuffer, op: &ReductionOp) -> Result<DataBuffer> {
        self.collective(
            |t, seq| dir::scan(t, seq, buf, op),
            |s, ctx, seq| med::scan(s, ctx, seq, buf, op),
        )
    }

    /// Point-to-point send, matched by the `recv` on `dst` with the same
    /// position in the per-pair message order.
    pub fn send(&mut self, buf: &DataBuffer, dst: usize) -> Result<()> {
        self.check_peer(dst)?;
        let me = self.cfg.rank;
        self.guarded(|b| match b {
            Backend::Mediated(s) => {
                let seq = s.sent[dst];
                s.client.put(&s.p2p_key(me, dst, seq), buf.as_bytes())?;
                s.sent[dst] += 1;
                Ok(())
            }
            Backend::Direct(m) => m.send(dst, P2P_TAG, buf.as_bytes()),
            Backend::Solo(m) => m.send(dst, P2P_TAG, buf.as_bytes()),
        })
    }

    pub fn recv(&mut self, src: usize, dtype: Datatype) -> Result<DataBuffer> {
        self.check_peer(src)?;
        let me = self.cfg.rank;
        let bytes = self.guarded(|b| match b {
            Backend::Mediated(s) => {
                s.flush()?;
                let key = s.p2p_key(src, me, s.received[src]);
                let ctx = s.ctx();
                let v = get_poll(&mut s.client, &key, &ctx.poll)?.value;
                s.received[src] += 1;
                s.consumed = Some(key);
                Ok(v)
            }
            Backend::Direct(m) => m.recv(src, P2P_TAG),
            Backend::Solo(m) => m.recv(src, P2P_TAG),
        })?;
        DataBuffer::from_bytes(dtype, bytes)
    }

    fn check_peer(&self, peer: usize) -> Result<()> {
        if peer >= self.cfg.world_size {
            return Err(FmiError::protocol(format!(
                "rank {peer} outside communicator of size {}",
                self.cfg.world_size
            )));
        }
        Ok(())
    }
}

impl Drop for Communicator {
    fn drop(&mut self) {
        if self.cause.is_none() {
            let _ = self.backend.flush();
        }
        self.backend.close();
    }
}

fn remaining(deadline: Instant) -> Result<Duration> {
    let left = deadline.saturating_duration_since(Instant::now());
    if left.is_zero() {
        return Err(FmiError::timeout("join deadline passed"));
    }
    Ok(left)
}

fn join_direct(cfg: &CommunicatorConfig, coordinator: SocketAddr, deadline: Instant) -> Result<TcpMesh> {
    let n = cfg.world_size;
    let me = cfg.rank;
    let peers: Vec<usize> = if cfg.full_mesh {
        (0..n).filter(|&j| j != me).collect()
    } else {
        schedule_peers(n, me)
    };
    let budget = remaining(deadline)?;
    let results: Vec<(usize, Result<PeerConnection>)> = std::thread::scope(|s| {
        let handles: Vec<_> = peers
            .iter()
            .map(|&p| {
                let name = cfg.name.as_str();
                let h = std::thread::Builder::new()
                    .name(format!("punch-{me}-{p}"))
                    .stack_size(256 * 1024)
                    .spawn_scoped(s, move || connect_pair(coordinator, name, cfg.epoch, me, p, budget))
                    .expect("spawn punch thread");
                (p, h)
            })
            .collect();
        handles
            .into_iter()
            .map(|(p, h)| (p, h.join().unwrap_or_else(|_| Err(FmiError::channel("punch thread panicked")))))
            .collect()
    });
    let mut mesh = TcpMesh {
        rank: me,
        name: cfg.name.clone(),
        epoch: cfg.epoch,
        coordinator,
        conns: (0..n).map(|_| None).collect(),
        op_timeout: cfg.op_timeout,
    };
    let mut first_err = None;
    for (p, r) in results {
        match r {
            Ok(c) => mesh.conns[p] = Some(c),
            Err(e) => {
                first_err.get_or_insert(FmiError::new(e.kind, format!("rank {p}: {}", e.detail)));
            }
        }
    }
    if let Some(e) = first_err {
        mesh.close();
        return Err(e);
    }
    mesh.set_timeouts(remaining(deadline)?)?;
    let joined = dir::barrier(&mut mesh, 0).and_then(|_| mesh.set_timeouts(cfg.op_timeout));
    if let Err(e) = joined {
        mesh.close();
        return Err(e);
    }
    for c in mesh.conns.iter_mut().flatten() {
        c.reset_counters();
    }
    Ok(mesh)
}

fn join_mediated(
    cfg: &CommunicatorConfig,
    store: SocketAddr,
    profile: &ChannelProfile,
    deadline: Instant,
) -> Result<StoreLink> {
    let mut client = StoreClient::connect(store, remaining(deadline)?)?.with_limit(profile.max_message);
    client.set_read_timeout(Some(cfg.op_timeout))?;
    let poll = PollConfig::with_floor(Duration::from_secs_f64(profile.poll_floor));
    let ctx = MediatedCtx::new(&cfg.name, cfg.epoch, cfg.rank, cfg.world_size, poll);
    let mut join_ctx = ctx.clone();
    join_ctx.poll.deadline = Some(deadline);
    med::join(&mut client, &join_ctx)?;
    Ok(StoreLink {
        client,
        ctx,
        op_timeout: cfg.op_timeout,
        sent: vec![0; cfg.world_size],
        received: vec![0; cfg.world_size],
        consumed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn env_config() {
        let vars: HashMap<&str, &str> = [
            ("FMI_COMM_NAME", "job"),
            ("FMI_RANK", "2"),
            ("FMI_WORLD_SIZE", "4"),
            ("FMI_CHANNEL", "s3"),
            ("FMI_STORE", "127.0.0.1:9000"),
            ("FMI_EPOCH", "7"),
            ("FMI_JOIN_TIMEOUT_MS", "1500"),
        ]
        .into_iter()
        .collect();
        let cfg = CommunicatorConfig::from_lookup(|k| vars.get(k).map(|v| v.to_string())).unwrap();
        assert_eq!(cfg.rank, 2);
        assert_eq!(cfg.world_size, 4);
        assert_eq!(cfg.epoch, 7);
        assert_eq!(cfg.join_timeout, Duration::from_millis(1500));
        assert_eq!(cfg.channel.kind(), ChannelKind::S3);

        let bad = |k: &'static str, v: &'static str| {
            let mut m = vars.clone();
            m.insert(k, v);
            CommunicatorConfig::from_lookup(|key| m.get(key).map(|v| v.to_string())).unwrap_err()
        };
        assert_eq!(bad("FMI_RANK", "4").kind, ErrorKind::ProtocolViolation);
        assert_eq!(bad("FMI_CHANNEL", "carrier-pigeon").kind, ErrorKind::ProtocolViolation);
        assert_eq!(bad("FMI_COMM_NAME", "a/b").kind, ErrorKind::ProtocolViolation);
    }

    #[test]
    fn schedule_peers_are_symmetric_and_cover_every_algorithm() {
        for n in 1..=40 {
            for r in 0..n {
                for p in schedule_peers(n, r) {
                    assert!(schedule_peers(n, p).contains(&r), "n={n} {r}->{p}");
                }
            }
            for root in 0..n {
                for step in crate::schedule::binomial_schedule(n, root).unwrap().steps {
                    assert!(schedule_peers(n, step.sender).contains(&step.receiver));
                }
            }
            for round in crate::schedule::recursive_doubling_rounds(n) {
                for (a, b) in round.pairs {
                    assert!(schedule_peers(n, a).contains(&b));
                }
            }
        }
        assert!(schedule_peers(16, 0).len() < 15);
    }

    #[test]
    fn solo_needs_no_network() {
        let unreachable: SocketAddr = "127.0.0.1:1".parse().unwrap();
        let cfg = CommunicatorConfig::new("solo", 1, 0, ChannelConfig::Direct { coordinator: unreachable });
        let mut c = Communicator::join(cfg).unwrap();
        let b = crate::buffer::buffer_of(&[5i32, 6]);
        assert_eq!(c.allreduce(&b, &ReductionOp::sum()).unwrap(), b);
        assert_eq!(c.scatter(&b, 0).unwrap(), b);
        assert_eq!(c.gather(&b, 0).unwrap(), b);
        c.barrier().unwrap();
        assert_eq!(c.op_seq(), 4);
        let err = c.bcast(&b, 1).unwrap_err();
        assert_eq!(err.kind, ErrorKind::ProtocolViolation);
        assert_eq!(c.state(), CommState::Aborted);
        assert_eq!(c.barrier().unwrap_err(), err);
        assert_eq!(c.op_seq(), 5);
    }
}
