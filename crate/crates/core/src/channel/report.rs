use super::{compute_metrics, decode_from_order, ObservedOrder, PagePair, Payload};
use crate::error::Result;

/// Decode record of one slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotRecord {
    pub slot: u64,
    pub pair: PagePair,
    pub order: ObservedOrder,
    /// `None` when the slot was indeterminate.
    pub decoded: Option<bool>,
}

impl SlotRecord {
    pub fn new(pair: PagePair, order: ObservedOrder) -> Self {
        SlotRecord {
            slot: pair.slot,
            pair,
            order,
            decoded: decode_from_order(order),
        }
    }
}

/// Outcome of one transmission.
///
/// Indeterminate slots appear in `received` as the complement of the sent bit,
/// so they count as errors and `ber == hamming(sent, received) / len`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionReport {
    pub sent: Payload,
    pub received: Payload,
    pub per_slot: Vec<SlotRecord>,
    pub elapsed_ns: u64,
    pub ber: f64,
    pub bandwidth_bps: f64,
}

impl TransmissionReport {
    /// `per_slot` must hold one record per sent bit, in slot order.
    pub fn from_slots(sent: Payload, per_slot: Vec<SlotRecord>, elapsed_ns: u64) -> Result<Self> {
        if per_slot.len() != sent.len() {
            return Err(crate::Error::Usage(format!(
                "{} slot records for a {}-bit payload",
                per_slot.len(),
                sent.len()
            )));
        }
        let received: Payload = sent
            .iter()
            .zip(&per_slot)
            .map(|(&s, rec)| rec.decoded.unwrap_or(!s))
            .collect::<Vec<_>>()
            .into();
        let (ber, bandwidth_bps) = if sent.is_empty() {
            (0.0, 0.0)
        } else {
            let m = compute_metrics(&sent, &received, elapsed_ns)?;
            (m.ber, m.bandwidth_bps)
        };
        Ok(TransmissionReport {
            sent,
            received,
            per_slot,
            elapsed_ns,
            ber,
            bandwidth_bps,
        })
    }

    pub fn payload_bits(&self) -> usize {
        self.sent.len()
    }

    pub fn indeterminate_slots(&self) -> usize {
        self.per_slot.iter().filter(|r| r.decoded.is_none()).count()
    }

    pub fn bit_errors(&self) -> usize {
        super::hamming(&self.sent, &self.received)
    }
}
