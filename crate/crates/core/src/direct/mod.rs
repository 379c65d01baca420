//! Peer-to-peer TCP channel established by hole punching.

mod connection;
pub mod frame;
mod punch;

pub use connection::PeerConnection;
pub use punch::{connect_pair, HELLO_TAG, PUNCH_ATTEMPTS, PUNCH_INTERVAL};
