//! Deterministic model of a page cache, a FIFO disk, and a single core that
//! switches threads on hard faults.
//!
//! Time is measured in integer ticks. The trojan runs on its own core; the two
//! spy threads share one core. A hard fault blocks the faulting thread until its
//! disk fetch completes and hands the core to the next runnable thread after
//! `switch_cost` ticks. Soft faults and mapped accesses finish after
//! `mem_latency` ticks without giving up the core.

mod cache;
mod channel;
mod params;
mod state;
mod trace;

pub use cache::PageCache;
pub use channel::{run_channel_sim, simulate_channel, SimRun};
pub use params::{EvictionPolicy, SimParams};
pub use state::{Process, SimState, SpySlotOutcome, TouchOutcome};
pub use trace::{AccessRecord, AccessTrace, ThreadId};

#[cfg(test)]
mod tests;
