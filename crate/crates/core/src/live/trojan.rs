use super::{sys, EvictionOutcome, SharedRegion};
use crate::channel::{encode_target, page_pair_for_slot, slot_deadline, ChannelConfig, PagePair, Payload, Role};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SenderSlot {
    pub pair: PagePair,
    pub bit: bool,
    /// The one page read in this slot.
    pub touched: u64,
    pub eviction: EvictionOutcome,
    /// How late the slot started, in ns.
    pub lateness_ns: u64,
    /// Started after the receiver was due to probe.
    pub overrun: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SenderLog {
    pub slots: Vec<SenderSlot>,
    pub started_ns: u64,
    pub finished_ns: u64,
}

impl SenderLog {
    pub fn overruns(&self) -> usize {
        self.slots.iter().filter(|s| s.overrun).count()
    }

    pub fn unconfirmed_evictions(&self) -> usize {
        self.slots
            .iter()
            .filter(|s| s.eviction != EvictionOutcome::Confirmed)
            .count()
    }
}

/// Sends `payload` starting at `epoch` (Unix ns). In each slot the pair is
/// evicted and then only the page selected by the bit is read back.
pub fn trojan_send(region: &SharedRegion, cfg: &ChannelConfig, payload: &Payload, epoch: u64) -> Result<SenderLog> {
    cfg.validate()?;
    region.evict_all()?;
    let mut log = SenderLog {
        started_ns: sys::realtime_ns(),
        ..Default::default()
    };
    for (k, &bit) in payload.iter().enumerate() {
        let k = k as u64;
        let deadline = slot_deadline(cfg, epoch, k, Role::Sender);
        sys::sleep_until_realtime(deadline);
        let lateness_ns = sys::realtime_ns().saturating_sub(deadline);
        let overrun = lateness_ns >= cfg.guard_offset;
        if overrun {
            log::warn!("slot {k}: sender started {lateness_ns} ns late");
        }

        let pair = page_pair_for_slot(cfg, k);
        let eviction = region.evict_pair(&pair)?;
        if let EvictionOutcome::StillResident(pages) = &eviction {
            log::warn!("slot {k}: pages {pages:?} still resident after advice");
        }
        let touched = encode_target(bit, &pair);
        region.read_page(touched);
        // our own mapping would keep the page from being dropped next wrap
        region.drop_mappings(&[touched])?;

        log.slots.push(SenderSlot {
            pair,
            bit,
            touched,
            eviction,
            lateness_ns,
            overrun,
        });
    }
    log.finished_ns = sys::realtime_ns();
    Ok(log)
}
