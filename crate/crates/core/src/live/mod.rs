//! Live backend: a real shared mapping, cache-advice eviction, and a spy pinned
//! to one core. Decoding uses only the accessors' completion order.

mod caps;
mod region;
mod spy;
pub mod sys;
mod trojan;

use std::path::Path;

pub use caps::{probe_capabilities, BackendCapabilities};
pub use region::{open_region, EvictionOutcome, SharedRegion};
pub use spy::{spy_receive, spy_receive_logged, SlotObservation, SpyRun};
pub use trojan::{trojan_send, SenderLog, SenderSlot};

use crate::channel::{ChannelConfig, Payload, TransmissionReport};
use crate::error::{Error, Result};

/// Probes the directory holding `region_file` and fails unless the host can
/// carry the channel.
pub fn require_capabilities(region_file: &Path) -> Result<BackendCapabilities> {
    let dir = region_file
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let caps = probe_capabilities(dir);
    if caps.ready() {
        Ok(caps)
    } else {
        Err(Error::Capability(caps))
    }
}

/// One live transmission inside this process: the trojan on an unpinned thread
/// with its own mapping, the spy on a pinned thread with another. The epoch is
/// `lead_ns` from now.
pub fn run_live(
    cfg: &ChannelConfig,
    region_file: &Path,
    payload: &Payload,
    lead_ns: u64,
) -> Result<TransmissionReport> {
    let sender_region = open_region(region_file, cfg)?;
    let receiver_region = open_region(region_file, cfg)?;
    let epoch = sys::realtime_ns() + lead_ns;
    std::thread::scope(|s| {
        let trojan = s.spawn(|| trojan_send(&sender_region, cfg, payload, epoch));
        let spy = s.spawn(|| spy_receive(&receiver_region, cfg, payload, epoch));
        let report = spy.join().map_err(|_| Error::Runtime("spy thread panicked".into()))??;
        trojan
            .join()
            .map_err(|_| Error::Runtime("trojan thread panicked".into()))??;
        Ok(report)
    })
}
