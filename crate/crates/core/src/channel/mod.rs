//! Backend-independent protocol logic. Everything here is a pure function over
//! value types.

mod codec;
mod config;
mod metrics;
mod page;
mod payload;
mod report;
mod schedule;

pub use codec::{decode_from_order, encode_target, ObservedOrder};
pub use config::{ChannelConfig, DEFAULT_PAGE_SIZE, MIB, NANOS_PER_MS};
pub use metrics::{compute_metrics, hamming, Metrics};
pub use page::{FaultKind, Residency};
pub use payload::Payload;
pub use report::{SlotRecord, TransmissionReport};
pub use schedule::{page_pair_for_slot, schedule, slot_deadline, wrap_period, PagePair, Role};
