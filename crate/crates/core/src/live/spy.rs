use std::sync::atomic::{AtomicU64, Ordering};

use super::{sys, SharedRegion};
use crate::channel::{
    page_pair_for_slot, slot_deadline, ChannelConfig, ObservedOrder, PagePair, Payload, Role, SlotRecord,
    TransmissionReport,
};
use crate::error::{Error, Result};

/// Completion sequence numbers of the two accessors in one slot. This is all
/// the spy learns about a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotObservation {
    pub slot: u64,
    pub t1_seq: u64,
    pub t2_seq: u64,
}

impl SlotObservation {
    pub fn order(&self) -> ObservedOrder {
        match self.t1_seq.cmp(&self.t2_seq) {
            std::cmp::Ordering::Greater => ObservedOrder::T1Last,
            std::cmp::Ordering::Less => ObservedOrder::T2Last,
            std::cmp::Ordering::Equal => ObservedOrder::Ambiguous,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpyRun {
    pub report: TransmissionReport,
    pub observations: Vec<SlotObservation>,
    /// `(slot, page)` for every page the accessors read.
    pub accesses: Vec<(u64, u64)>,
    pub pinned_cpu: usize,
}

/// Pins the calling thread, and the accessors it spawns, to one CPU.
fn pin_to_one_core() -> Result<usize> {
    let hint = "the spy must be allowed to set its own CPU affinity";
    let cpus = sys::allowed_cpus().map_err(|e| Error::Setup {
        msg: format!("cannot read CPU affinity: {e}"),
        hint,
    })?;
    let cpu = *cpus.first().ok_or_else(|| Error::Setup {
        msg: "empty CPU affinity mask".into(),
        hint,
    })?;
    sys::set_thread_affinity(&[cpu]).map_err(|e| Error::Setup {
        msg: format!("cannot pin to CPU {cpu}: {e}"),
        hint,
    })?;
    Ok(cpu)
}

/// Runs both accessors for one slot. t1 is started first; each reads its page
/// and then takes the next value of a shared counter.
fn observe_slot(region: &SharedRegion, pair: &PagePair) -> Result<SlotObservation> {
    let counter = AtomicU64::new(0);
    let access = |page: u64| {
        region.read_page(page);
        counter.fetch_add(1, Ordering::SeqCst)
    };
    let (t1_seq, t2_seq) = std::thread::scope(|s| -> Result<(u64, u64)> {
        let spawn_err = |e: std::io::Error| Error::Runtime(format!("cannot start accessor thread: {e}"));
        let t1 = std::thread::Builder::new()
            .name("spy-t1".into())
            .spawn_scoped(s, || access(pair.p1))
            .map_err(spawn_err)?;
        let t2 = std::thread::Builder::new()
            .name("spy-t2".into())
            .spawn_scoped(s, || access(pair.p2))
            .map_err(spawn_err)?;
        let join_err = |_| Error::Runtime("accessor thread panicked".into());
        Ok((t1.join().map_err(join_err)?, t2.join().map_err(join_err)?))
    })?;
    Ok(SlotObservation {
        slot: pair.slot,
        t1_seq,
        t2_seq,
    })
}

/// Receives `expected.len()` bits starting at `epoch` (Unix ns) and scores
/// them against `expected`. Pins the calling thread to a single CPU first.
pub fn spy_receive_logged(
    region: &SharedRegion,
    cfg: &ChannelConfig,
    expected: &Payload,
    epoch: u64,
) -> Result<SpyRun> {
    cfg.validate()?;
    let pinned_cpu = pin_to_one_core()?;
    let mut observations = Vec::with_capacity(expected.len());
    let mut records = Vec::with_capacity(expected.len());
    let mut accesses = Vec::with_capacity(2 * expected.len());
    for k in 0..expected.len() as u64 {
        sys::sleep_until_realtime(slot_deadline(cfg, epoch, k, Role::Receiver));
        let pair = page_pair_for_slot(cfg, k);
        let obs = observe_slot(region, &pair)?;
        accesses.extend([(k, pair.p1), (k, pair.p2)]);
        // the spy's own mappings would otherwise pin these pages next wrap
        region.drop_mappings(&pair.pages())?;
        records.push(SlotRecord::new(pair, obs.order()));
        observations.push(obs);
    }
    let elapsed = sys::realtime_ns().saturating_sub(epoch).max(1);
    let report = TransmissionReport::from_slots(expected.clone(), records, elapsed)?;
    Ok(SpyRun {
        report,
        observations,
        accesses,
        pinned_cpu,
    })
}

pub fn spy_receive(
    region: &SharedRegion,
    cfg: &ChannelConfig,
    expected: &Payload,
    epoch: u64,
) -> Result<TransmissionReport> {
    spy_receive_logged(region, cfg, expected, epoch).map(|run| run.report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::decode_from_order;

    #[test]
    fn order_from_sequence_numbers() {
        let obs = |t1_seq, t2_seq| SlotObservation {
            slot: 0,
            t1_seq,
            t2_seq,
        };
        assert_eq!(obs(1, 0).order(), ObservedOrder::T1Last);
        assert_eq!(obs(0, 1).order(), ObservedOrder::T2Last);
        assert_eq!(decode_from_order(obs(1, 0).order()), Some(true));
        assert_eq!(decode_from_order(obs(0, 1).order()), Some(false));
    }
}
