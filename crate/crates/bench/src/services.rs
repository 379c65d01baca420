use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{Context, Result};
use fmi_core::mediated::{metered_cost, MeterLedger, StoreCore, StoreServer};
use fmi_core::rendezvous::{RendezvousServer, DEFAULT_HOLD_TIMEOUT};
use fmi_core::{ChannelProfile, ServiceHandle};

/// Coordinator and store run in this process on loopback ports chosen by
/// the OS. Dropping the value stops both.
#[derive(Default)]
pub struct Services {
    coordinator: Option<ServiceHandle>,
    store: Option<(ServiceHandle, Arc<StoreCore>)>,
}

impl Services {
    pub fn none() -> Self {
        Services::default()
    }

    /// Starts what `channel` needs: the coordinator for `direct`, a store
    /// with that preset otherwise. Without `latency` the store answers
    /// immediately but keeps the preset's size limit and metering.
    pub fn start(channel: &str, latency: bool) -> Result<Self> {
        let mut s = Services::default();
        if channel == "direct" {
            s.start_coordinator(DEFAULT_HOLD_TIMEOUT)?;
        } else {
            let mut profile = ChannelProfile::by_name(channel)
                .filter(|p| p.kind.is_mediated())
                .with_context(|| format!("unknown store channel '{channel}'"))?;
            if !latency {
                profile.alpha = 0.0;
                profile.beta_inv = f64::INFINITY;
            }
            s.start_store(profile, false)?;
        }
        Ok(s)
    }

    pub fn start_coordinator(&mut self, hold: Duration) -> Result<SocketAddr> {
        let h = RendezvousServer::bind("127.0.0.1:0", hold)
            .context("bind coordinator")?
            .spawn()
            .context("start coordinator")?;
        let addr = h.local_addr();
        self.coordinator = Some(h);
        Ok(addr)
    }

    pub fn start_store(&mut self, profile: ChannelProfile, jitter: bool) -> Result<SocketAddr> {
        let server = StoreServer::bind("127.0.0.1:0", profile, jitter).context("bind store")?;
        let core = server.core();
        let h = server.spawn().context("start store")?;
        let addr = h.local_addr();
        self.store = Some((h, core));
        Ok(addr)
    }

    pub fn coordinator(&self) -> Option<SocketAddr> {
        self.coordinator.as_ref().map(ServiceHandle::local_addr)
    }

    pub fn store(&self) -> Option<SocketAddr> {
        self.store.as_ref().map(|(h, _)| h.local_addr())
    }

    pub fn store_core(&self) -> Option<&Arc<StoreCore>> {
        self.store.as_ref().map(|(_, c)| c)
    }

    pub fn ledger(&self) -> Option<MeterLedger> {
        self.store_core().map(|c| c.ledger())
    }

    /// Store charges so far under the store's price book; `elapsed` bills
    /// instance-priced stores.
    pub fn metered_cost(&self, elapsed: f64) -> Option<f64> {
        let core = self.store_core()?;
        Some(metered_cost(&core.ledger(), core.profile(), elapsed).as_f64())
    }

    /// Ports the services listen on.
    pub fn ports(&self) -> Vec<u16> {
        self.coordinator()
            .into_iter()
            .chain(self.store())
            .map(|a| a.port())
            .collect()
    }

    pub fn shutdown(self) {
        drop(self)
    }
}
