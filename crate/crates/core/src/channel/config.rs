use crate::error::ConfigError;

pub const DEFAULT_PAGE_SIZE: u64 = 4096;
pub const MIB: u64 = 1 << 20;
pub const NANOS_PER_MS: u64 = 1_000_000;

/// Parameters shared by trojan and spy. Both sides must use identical values.
///
/// Sizes are bytes, offsets within the region are pages, times are nanoseconds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelConfig {
    pub page_size: u64,
    /// Size of the shared mapping.
    pub region_size: u64,
    /// Stride between the first pages of consecutive slots.
    pub page_gap: u64,
    /// Distance from the first to the second page of a pair.
    pub pair_offset: u64,
    /// First page of slot 0.
    pub base_page: u64,
    pub sync_period: u64,
    /// Delay of the receiver probe after the start of a slot.
    pub guard_offset: u64,
    pub payload_bits: usize,
    /// Seed for the payload generator and simulator noise.
    pub seed: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            page_size: DEFAULT_PAGE_SIZE,
            region_size: 32 * MIB,
            page_gap: 64,
            pair_offset: 32,
            base_page: 0,
            sync_period: 10 * NANOS_PER_MS,
            guard_offset: 5 * NANOS_PER_MS,
            payload_bits: 100,
            seed: 0,
        }
    }
}

impl ChannelConfig {
    pub fn region_pages(&self) -> u64 {
        self.region_size / self.page_size
    }

    /// Sets the page gap and resets the pair offset to half of it.
    pub fn with_page_gap(mut self, page_gap: u64) -> Self {
        self.page_gap = page_gap;
        self.pair_offset = page_gap / 2;
        self
    }

    /// Sets the sync period and resets the guard offset to the slot midpoint.
    pub fn with_sync_period(mut self, sync_period: u64) -> Self {
        self.sync_period = sync_period;
        self.guard_offset = sync_period / 2;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.page_size == 0 {
            return Err(ConfigError::ZeroPageSize);
        }
        if self.region_size == 0 {
            return Err(ConfigError::EmptyRegion);
        }
        if !self.region_size.is_multiple_of(self.page_size) {
            return Err(ConfigError::RegionNotPageMultiple {
                region: self.region_size,
                page: self.page_size,
            });
        }
        let region_pages = self.region_pages();
        if self.page_gap == 0 || self.page_gap > region_pages {
            return Err(ConfigError::PageGap {
                gap: self.page_gap,
                region_pages,
            });
        }
        if self.pair_offset == 0 || self.pair_offset >= self.page_gap {
            return Err(ConfigError::PairOffset {
                offset: self.pair_offset,
                gap: self.page_gap,
            });
        }
        if self.sync_period == 0 {
            return Err(ConfigError::ZeroSyncPeriod);
        }
        if self.guard_offset == 0 || self.guard_offset >= self.sync_period {
            return Err(ConfigError::GuardOffset {
                guard: self.guard_offset,
                period: self.sync_period,
            });
        }
        Ok(())
    }
}
