//! Message passing for ephemeral, NAT-isolated workers.
//!
//! Workers form a [`Communicator`] over either a direct channel (TCP
//! connections hole-punched through a rendezvous coordinator) or a
//! mediated channel (a key-value store polled with backoff). Both channel
//! families implement broadcast, barrier, gather, scatter, reduce,
//! allreduce and inclusive scan. The [`perfmodel`] module prices a
//! workload on each channel with an alpha-beta time model.
//!
//! Without the default `net` feature only the transport-free parts build:
//! buffers, schedules, backoff and the cost model.

pub mod backoff;
pub mod buffer;
pub mod error;
pub mod perfmodel;
pub mod profile;
pub mod schedule;

#[cfg(feature = "net")]
pub mod collectives;
#[cfg(feature = "net")]
pub mod communicator;
#[cfg(feature = "net")]
pub mod direct;
#[cfg(feature = "net")]
pub mod mediated;
#[cfg(feature = "net")]
pub mod rendezvous;
#[cfg(feature = "net")]
mod service;

pub use backoff::{backoff_delay, BackoffPolicy};
pub use buffer::{apply_reduce, buffer_of, DataBuffer, Datatype, Element, ReductionOp, Scalar};
pub use error::{ErrorKind, FmiError, Result};
pub use profile::{ChannelKind, ChannelProfile, Dollars, PriceComponents};

#[cfg(feature = "net")]
pub use communicator::{ChannelConfig, Communicator, CommunicatorConfig, CommState};
#[cfg(feature = "net")]
pub use service::ServiceHandle;
