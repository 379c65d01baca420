#![allow(dead_code)]

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use fmi_core::mediated::{StoreCore, StoreServer};
use fmi_core::rendezvous::RendezvousServer;
use fmi_core::{ChannelProfile, ServiceHandle};

pub fn coordinator(hold: Duration) -> ServiceHandle {
    RendezvousServer::bind("127.0.0.1:0", hold).unwrap().spawn().unwrap()
}

/// A store with the given profile's limits but no injected latency.
pub fn fast_store(mut profile: ChannelProfile) -> (ServiceHandle, Arc<StoreCore>) {
    profile.alpha = 0.0;
    profile.beta_inv = f64::INFINITY;
    profile.poll_floor = 0.0;
    store(profile)
}

pub fn store(profile: ChannelProfile) -> (ServiceHandle, Arc<StoreCore>) {
    let server = StoreServer::bind("127.0.0.1:0", profile, false).unwrap();
    let core = server.core();
    (server.spawn().unwrap(), core)
}

pub fn dead_addr() -> SocketAddr {
    let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    l.local_addr().unwrap()
}
