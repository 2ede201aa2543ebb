use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::{ChannelConfig, Payload, TransmissionReport, MIB, NANOS_PER_MS};
use crate::error::{ConfigError, Result};
use crate::live;
use crate::sim::{run_channel_sim, SimParams};

/// Parameter varied across a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    PayloadBits,
    PageGap,
    RegionSize,
    /// Values are sync periods in ns; the payload stays fixed.
    BitRate,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::PayloadBits => "payload_bits",
            SweepVariable::PageGap => "page_gap",
            SweepVariable::RegionSize => "region_size",
            SweepVariable::BitRate => "bit_rate",
        }
    }

    pub fn default_values(self) -> Vec<u64> {
        match self {
            SweepVariable::PayloadBits => vec![20, 50, 100, 200, 300, 400, 500],
            SweepVariable::PageGap => vec![4, 8, 16, 32, 64, 128, 256],
            SweepVariable::RegionSize => [1, 2, 4, 8, 16, 32].iter().map(|m| m * MIB).collect(),
            SweepVariable::BitRate => [1, 2, 5, 10, 20, 50, 100].iter().map(|ms| ms * NANOS_PER_MS).collect(),
        }
    }

    fn apply(self, cfg: ChannelConfig, value: u64) -> ChannelConfig {
        match self {
            SweepVariable::PayloadBits => ChannelConfig {
                payload_bits: value as usize,
                ..cfg
            },
            SweepVariable::PageGap => cfg.with_page_gap(value),
            SweepVariable::RegionSize => ChannelConfig {
                region_size: value,
                ..cfg
            },
            SweepVariable::BitRate => cfg.with_sync_period(value),
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepVariable {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "payload_bits" | "payload" => Ok(SweepVariable::PayloadBits),
            "page_gap" => Ok(SweepVariable::PageGap),
            "region_size" => Ok(SweepVariable::RegionSize),
            "bit_rate" | "sync_period" => Ok(SweepVariable::BitRate),
            other => Err(ConfigError::InvalidValue {
                key: "variable".into(),
                value: other.into(),
                reason: "expected payload_bits, page_gap, region_size or bit_rate".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    Sim,
    /// Live host; the file must hold at least the largest region swept.
    Live {
        region_file: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<u64>,
    pub repetitions: usize,
    pub fixed: ChannelConfig,
    pub sim: SimParams,
    pub backend: Backend,
    /// Repetition `r` runs with seed `seed + r` for every value.
    pub seed: u64,
}

impl SweepSpec {
    /// Default grid for `variable`, 7 repetitions on the simulator.
    pub fn new(variable: SweepVariable, fixed: ChannelConfig, sim: SimParams) -> Self {
        SweepSpec {
            variable,
            values: variable.default_values(),
            repetitions: 7,
            seed: fixed.seed,
            fixed,
            sim,
            backend: Backend::Sim,
        }
    }

    fn cells(&self) -> Result<Vec<(u64, usize, ChannelConfig)>, ConfigError> {
        if self.values.is_empty() {
            return Err(ConfigError::EmptySweep);
        }
        if self.repetitions == 0 {
            return Err(ConfigError::ZeroRepetitions);
        }
        let mut cells = Vec::with_capacity(self.values.len() * self.repetitions);
        for &value in &self.values {
            for rep in 0..self.repetitions {
                let mut cfg = self.variable.apply(self.fixed.clone(), value);
                cfg.seed = self.seed.wrapping_add(rep as u64);
                cfg.validate()?;
                cells.push((value, rep, cfg));
            }
        }
        Ok(cells)
    }
}

/// One CSV row: a single transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub variable: SweepVariable,
    pub value: u64,
    pub repetition: usize,
    pub seed: u64,
    pub payload_bits: usize,
    pub page_gap: u64,
    pub region_bytes: u64,
    pub sync_period_ns: u64,
    pub ber: f64,
    pub bandwidth_bps: f64,
    pub indeterminate_slots: usize,
}

impl SweepRow {
    fn new(
        variable: SweepVariable,
        value: u64,
        repetition: usize,
        cfg: &ChannelConfig,
        report: &TransmissionReport,
    ) -> Self {
        SweepRow {
            variable,
            value,
            repetition,
            seed: cfg.seed,
            payload_bits: report.payload_bits(),
            page_gap: cfg.page_gap,
            region_bytes: cfg.region_size,
            sync_period_ns: cfg.sync_period,
            ber: report.ber,
            bandwidth_bps: report.bandwidth_bps,
            indeterminate_slots: report.indeterminate_slots(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub value: u64,
    pub mean_ber: f64,
    pub mean_bandwidth_bps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub variable: SweepVariable,
    /// Value-major, repetition-minor.
    pub rows: Vec<SweepRow>,
    /// One per value, in sweep order.
    pub aggregates: Vec<Aggregate>,
}

fn run_cell(spec: &SweepSpec, cfg: &ChannelConfig) -> Result<TransmissionReport> {
    let payload = Payload::random(cfg.seed, cfg.payload_bits);
    match &spec.backend {
        Backend::Sim => run_channel_sim(cfg, &spec.sim, &payload),
        Backend::Live { region_file } => live::run_live(cfg, region_file, &payload, 200 * NANOS_PER_MS),
    }
}

/// Runs every (value, repetition) cell. Simulator cells run in parallel; live
/// cells strictly one after another.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.sim.validate()?;
    let cells = spec.cells()?;
    let reports: Vec<Result<TransmissionReport>> = match &spec.backend {
        Backend::Sim => cells.par_iter().map(|(_, _, cfg)| run_cell(spec, cfg)).collect(),
        Backend::Live { region_file } => {
            let caps = live::require_capabilities(region_file)?;
            log::info!("live backend: {caps}");
            cells.iter().map(|(_, _, cfg)| run_cell(spec, cfg)).collect()
        }
    };
    let rows = cells
        .iter()
        .zip(reports)
        .map(|((value, rep, cfg), report)| Ok(SweepRow::new(spec.variable, *value, *rep, cfg, &report?)))
        .collect::<Result<Vec<_>>>()?;

    let aggregates = spec
        .values
        .iter()
        .zip(rows.chunks(spec.repetitions))
        .map(|(&value, group)| {
            let n = group.len() as f64;
            Aggregate {
                value,
                mean_ber: group.iter().map(|r| r.ber).sum::<f64>() / n,
                mean_bandwidth_bps: group.iter().map(|r| r.bandwidth_bps).sum::<f64>() / n,
            }
        })
        .collect();
    Ok(SweepResult {
        variable: spec.variable,
        rows,
        aggregates,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub result: SweepResult,
    /// Gap with the lowest mean BER; ties go to the larger gap.
    pub best_gap: u64,
}

pub fn calibrate_page_gap(spec: &SweepSpec) -> Result<Calibration> {
    if spec.variable != SweepVariable::PageGap {
        return Err(ConfigError::InvalidValue {
            key: "variable".into(),
            value: spec.variable.to_string(),
            reason: "calibration sweeps page_gap".into(),
        }
        .into());
    }
    let result = run_sweep(spec)?;
    let best = result
        .aggregates
        .iter()
        .reduce(|best, a| {
            if a.mean_ber < best.mean_ber || (a.mean_ber == best.mean_ber && a.value > best.value) {
                a
            } else {
                best
            }
        })
        .expect("sweep has values");
    Ok(Calibration {
        best_gap: best.value,
        result,
    })
}
