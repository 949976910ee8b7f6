//! Content-centric networking carried over the DTN bundle protocol: name
//! and wire codecs, CCN and bundle node state machines, the gateway that
//! joins them, and a deterministic discrete-event simulator for running
//! scenarios over intermittently connected topologies.

pub mod ccn;
pub mod dtn;
pub mod gateway;
pub mod metrics;
pub mod names;
pub mod node;
pub mod scenario;
pub mod sim;
pub mod sweep;
pub mod trace;
pub mod wire;
