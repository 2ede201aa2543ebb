use super::PagePair;

/// Which spy thread completed last in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObservedOrder {
    /// The thread reading the first page of the pair finished last.
    T1Last,
    /// The thread reading the second page finished last.
    T2Last,
    /// Neither or both threads hard-faulted; the order carries no information.
    Ambiguous,
}

impl ObservedOrder {
    pub fn as_str(self) -> &'static str {
        match self {
            ObservedOrder::T1Last => "t1_last",
            ObservedOrder::T2Last => "t2_last",
            ObservedOrder::Ambiguous => "ambiguous",
        }
    }
}

/// Page the trojan reads to send `bit`. The other page of the pair stays evicted.
pub fn encode_target(bit: bool, pair: &PagePair) -> u64 {
    if bit {
        pair.p2
    } else {
        pair.p1
    }
}

/// A 1 leaves the first page evicted, so its reader faults and finishes last.
/// `None` marks an indeterminate slot.
pub fn decode_from_order(order: ObservedOrder) -> Option<bool> {
    match order {
        ObservedOrder::T1Last => Some(true),
        ObservedOrder::T2Last => Some(false),
        ObservedOrder::Ambiguous => None,
    }
}
