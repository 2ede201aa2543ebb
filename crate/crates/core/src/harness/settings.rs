use std::fs;
use std::path::Path;

use crate::channel::ChannelConfig;
use crate::error::{ConfigError, Error, Result};
use crate::sim::SimParams;

/// Channel and simulator parameters resolved from defaults, an optional
/// `key=value` file, and overrides, in that order of increasing precedence.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Settings {
    pub channel: ChannelConfig,
    pub sim: SimParams,
}

impl Settings {
    /// Reads `key=value` lines; `#` starts a comment.
    pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            pairs.push((key.trim().to_string(), value.trim().to_string()));
        }
        Ok(pairs)
    }

    pub fn read_file(path: &Path) -> Result<Vec<(String, String)>> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse_pairs(&text)?)
    }

    /// Applies `pairs` over the defaults, later pairs winning. When `page_gap`
    /// or `sync_period` is set without its companion offset, the offset is
    /// re-derived as half the new value.
    pub fn resolve<'a, I>(pairs: I) -> Result<Settings, ConfigError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut s = Settings::default();
        let (mut gap_set, mut offset_set, mut period_set, mut guard_set) = (false, false, false, false);
        for (key, value) in pairs {
            s.apply(key, value)?;
            match key {
                "page_gap" => gap_set = true,
                "pair_offset" => offset_set = true,
                "sync_period" => period_set = true,
                "guard_offset" => guard_set = true,
                _ => {}
            }
        }
        if gap_set && !offset_set {
            s.channel.pair_offset = s.channel.page_gap / 2;
        }
        if period_set && !guard_set {
            s.channel.guard_offset = s.channel.sync_period / 2;
        }
        Ok(s)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let c = &mut self.channel;
        let p = &mut self.sim;
        match key {
            "page_size" => c.page_size = parse_size(key, value)?,
            "region_size" => c.region_size = parse_size(key, value)?,
            "page_gap" => c.page_gap = parse_int(key, value)?,
            "pair_offset" => c.pair_offset = parse_int(key, value)?,
            "base_page" => c.base_page = parse_int(key, value)?,
            "sync_period" => c.sync_period = parse_duration_ns(key, value)?,
            "guard_offset" => c.guard_offset = parse_duration_ns(key, value)?,
            "payload_bits" => c.payload_bits = parse_int(key, value)? as usize,
            "seed" => c.seed = parse_int(key, value)?,
            "cache_capacity" => p.cache_capacity = parse_int(key, value)? as usize,
            "disk_latency" => p.disk_latency = parse_int(key, value)?,
            "mem_latency" => p.mem_latency = parse_int(key, value)?,
            "switch_cost" => p.switch_cost = parse_int(key, value)?,
            "readahead" => p.readahead = parse_int(key, value)?,
            "tick_ns" => p.tick_ns = parse_duration_ns(key, value)?,
            "eviction_policy" => p.eviction_policy = value.parse().map_err(|e| invalid(key, value, e))?,
            "warm_retention" => {
                p.warm_retention = value
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| invalid(key, value, e))?
            }
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.channel.validate()?;
        self.sim.validate()
    }
}

fn invalid(key: &str, value: &str, reason: impl ToString) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn parse_int(key: &str, value: &str) -> Result<u64, ConfigError> {
    value.replace('_', "").parse().map_err(|e| invalid(key, value, e))
}

fn split_suffix(value: &str) -> (&str, &str) {
    let v = value.trim();
    let at = v.find(|c: char| !c.is_ascii_digit() && c != '_').unwrap_or(v.len());
    (&v[..at], v[at..].trim())
}

/// Byte count with an optional binary suffix: `4096`, `64KiB`, `32MiB`, `1G`.
pub fn parse_size(key: &str, value: &str) -> Result<u64, ConfigError> {
    let (digits, suffix) = split_suffix(value);
    let n = parse_int(key, digits)?;
    let unit: u64 = match suffix.to_ascii_lowercase().as_str() {
        "" | "b" => 1,
        "k" | "kb" | "kib" => 1 << 10,
        "m" | "mb" | "mib" => 1 << 20,
        "g" | "gb" | "gib" => 1 << 30,
        _ => return Err(invalid(key, value, "unknown size suffix")),
    };
    n.checked_mul(unit).ok_or_else(|| invalid(key, value, "overflow"))
}

/// Duration in nanoseconds with an optional unit: `500`, `250us`, `10ms`, `1s`.
pub fn parse_duration_ns(key: &str, value: &str) -> Result<u64, ConfigError> {
    let (digits, suffix) = split_suffix(value);
    let n = parse_int(key, digits)?;
    let unit: u64 = match suffix {
        "" | "ns" => 1,
        "us" => 1_000,
        "ms" => 1_000_000,
        "s" => 1_000_000_000,
        _ => return Err(invalid(key, value, "unknown time unit")),
    };
    n.checked_mul(unit).ok_or_else(|| invalid(key, value, "overflow"))
}
