//! Storage-mediated channel.
//!
//! Producers write objects under agreed keys and consumers poll for them.
//! One embedded store stands in for object storage, a key-value database
//! and an in-memory cache; a [`ChannelProfile`](crate::ChannelProfile)
//! supplies the latency, bandwidth, size limit and prices that tell them
//! apart.

mod client;
mod poll;
pub mod protocol;
mod store;

pub use client::{KvStore, LocalStore, StoreClient};
pub use poll::{get_poll, poll_count, poll_with, PollConfig, Polled};
pub use store::{metered_cost, store_serve, MeterLedger, StoreCore, StoreRecord, StoreServer};
