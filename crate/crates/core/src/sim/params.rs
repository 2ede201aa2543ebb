use std::fmt;
use std::str::FromStr;

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvictionPolicy {
    #[default]
    Lru,
}

impl fmt::Display for EvictionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvictionPolicy::Lru => f.write_str("LRU"),
        }
    }
}

impl FromStr for EvictionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("lru") {
            Ok(EvictionPolicy::Lru)
        } else {
            Err(format!("unsupported eviction policy `{s}`"))
        }
    }
}

/// Cost model of the simulated machine.
#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    /// Page-cache capacity in pages.
    pub cache_capacity: usize,
    /// Ticks to service one disk fetch.
    pub disk_latency: u64,
    /// Ticks for an access that does not go to disk.
    pub mem_latency: u64,
    /// Ticks lost when a hard fault hands the core to another thread.
    pub switch_cost: u64,
    pub eviction_policy: EvictionPolicy,
    /// Pages brought in per hard fault, the faulting page included. 0 and 1
    /// both mean no readahead.
    pub readahead: u64,
    /// Wall-clock length of one tick, used to map sync periods onto ticks.
    pub tick_ns: u64,
    /// Probability that a don't-need advice leaves a page resident when that
    /// page has been accessed before. 0 models exact eviction.
    pub warm_retention: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            cache_capacity: 1 << 16,
            disk_latency: 1000,
            mem_latency: 1,
            switch_cost: 10,
            eviction_policy: EvictionPolicy::Lru,
            readahead: 1,
            tick_ns: 1000,
            warm_retention: 0.0,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.mem_latency < 1 {
            return Err(ConfigError::SimParams("mem_latency must be at least 1"));
        }
        if self.disk_latency <= self.mem_latency {
            return Err(ConfigError::SimParams("disk_latency must exceed mem_latency"));
        }
        if self.cache_capacity < 2 {
            return Err(ConfigError::SimParams("cache_capacity must be at least 2"));
        }
        if self.tick_ns == 0 {
            return Err(ConfigError::SimParams("tick_ns must be positive"));
        }
        if !(0.0..=1.0).contains(&self.warm_retention) {
            return Err(ConfigError::SimParams("warm_retention must lie in [0, 1]"));
        }
        Ok(())
    }
}
