use super::state::Plan;
use super::{AccessTrace, SimParams, SimState, SpySlotOutcome};
use crate::channel::{ChannelConfig, Payload, SlotRecord, TransmissionReport};
use crate::error::{ConfigError, Result};

/// Full record of a simulated transmission.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub report: TransmissionReport,
    pub slots: Vec<SpySlotOutcome>,
    pub trace: AccessTrace,
    pub sender_overruns: u64,
}

/// Transmits `payload` through the simulator: in each slot the trojan evicts
/// the pair and reads the page selected by the bit, and the spy runs its two
/// accessors at the receiver deadline. Slot times are `cfg.sync_period` mapped
/// onto ticks of `params.tick_ns`. The payload length overrides
/// `cfg.payload_bits`.
pub fn simulate_channel(cfg: &ChannelConfig, params: &SimParams, payload: &Payload) -> Result<SimRun> {
    cfg.validate()?;
    params.validate()?;
    let period = cfg.sync_period / params.tick_ns;
    if period == 0 {
        return Err(ConfigError::PeriodBelowTick {
            period: cfg.sync_period,
            tick: params.tick_ns,
        }
        .into());
    }
    let guard = cfg.guard_offset / params.tick_ns;

    let mut state = SimState::new(params.clone(), cfg.region_pages(), cfg.seed)?;
    state.install_plan(Plan {
        cfg: cfg.clone(),
        payload: payload.clone(),
        period,
        guard,
    });
    state.run();

    let slots = state.outcomes().to_vec();
    let records = slots.iter().map(|o| SlotRecord::new(o.pair, o.order)).collect();
    // modeled air time, not simulator wall time
    let elapsed = payload.len() as u64 * cfg.sync_period;
    let report = TransmissionReport::from_slots(payload.clone(), records, elapsed)?;
    Ok(SimRun {
        report,
        slots,
        trace: state.trace().clone(),
        sender_overruns: state.sender_overruns(),
    })
}

pub fn run_channel_sim(cfg: &ChannelConfig, params: &SimParams, payload: &Payload) -> Result<TransmissionReport> {
    simulate_channel(cfg, params, payload).map(|run| run.report)
}
