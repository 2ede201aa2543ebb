//! Page-fault covert channel.
//!
//! A trojan encodes one bit per slot by choosing which of two shared, file-backed
//! pages it brings back into the page cache after evicting both. A spy pinned to a
//! single core reads the two pages from two threads; the thread whose page is still
//! on disk takes a hard fault, gets switched out, and finishes last. The completion
//! order is the observable, no timer is read during decoding.
//!
//! * [`channel`] holds the backend-independent protocol: schedule, codec, metrics.
//! * [`sim`] is a deterministic page-cache and single-core scheduler model.
//! * [`live`] drives the channel on a real host through `mmap`, `posix_fadvise`
//!   and CPU affinity.
//! * [`harness`] runs sweeps and calibration over either backend and writes CSV.

pub mod channel;
pub mod error;
pub mod harness;
pub mod live;
pub mod sim;

pub use channel::{
    compute_metrics, decode_from_order, encode_target, page_pair_for_slot, slot_deadline, ChannelConfig, FaultKind,
    Metrics, ObservedOrder, PagePair, Payload, Residency, Role, SlotRecord, TransmissionReport,
};
pub use error::{ConfigError, Error, Result};
