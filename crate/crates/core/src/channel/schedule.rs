use super::ChannelConfig;

/// The two pages carrying bit `slot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PagePair {
    pub slot: u64,
    pub p1: u64,
    pub p2: u64,
}

impl PagePair {
    pub fn pages(&self) -> [u64; 2] {
        [self.p1, self.p2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Sender,
    Receiver,
}

/// Pair for slot `k`: consecutive slots advance by `page_gap` pages and wrap at
/// the end of the region. `cfg` must be valid.
pub fn page_pair_for_slot(cfg: &ChannelConfig, k: u64) -> PagePair {
    let pages = u128::from(cfg.region_pages());
    debug_assert!(pages > 0);
    let p1 = (u128::from(cfg.base_page) + u128::from(k) * u128::from(cfg.page_gap)) % pages;
    let p2 = (p1 + u128::from(cfg.pair_offset)) % pages;
    PagePair {
        slot: k,
        p1: p1 as u64,
        p2: p2 as u64,
    }
}

/// Pairs for slots `0..cfg.payload_bits`.
pub fn schedule(cfg: &ChannelConfig) -> impl Iterator<Item = PagePair> + '_ {
    (0..cfg.payload_bits as u64).map(move |k| page_pair_for_slot(cfg, k))
}

/// Number of slots after which the schedule repeats.
pub fn wrap_period(cfg: &ChannelConfig) -> u64 {
    let pages = cfg.region_pages();
    pages / gcd(pages, cfg.page_gap)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Absolute instant (ns) at which `role` acts in slot `k`.
pub fn slot_deadline(cfg: &ChannelConfig, epoch: u64, k: u64, role: Role) -> u64 {
    let start = epoch + k * cfg.sync_period;
    match role {
        Role::Sender => start,
        Role::Receiver => start + cfg.guard_offset,
    }
}
