use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use super::{SweepResult, SweepRow};
use crate::channel::{ChannelConfig, TransmissionReport};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 11] = [
    "variable",
    "value",
    "repetition",
    "seed",
    "payload_bits",
    "page_gap",
    "region_bytes",
    "sync_period_ns",
    "ber",
    "bandwidth_bps",
    "indeterminate_slots",
];

fn record(row: &SweepRow) -> [String; 11] {
    [
        row.variable.to_string(),
        row.value.to_string(),
        row.repetition.to_string(),
        row.seed.to_string(),
        row.payload_bits.to_string(),
        row.page_gap.to_string(),
        row.region_bytes.to_string(),
        row.sync_period_ns.to_string(),
        row.ber.to_string(),
        row.bandwidth_bps.to_string(),
        row.indeterminate_slots.to_string(),
    ]
}

pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in &result.rows {
        w.write_record(record(row))?;
    }
    w.flush()
}

/// Header plus one row for a lone transmission. With no report (the sender
/// side, which cannot score itself) the BER and bandwidth fields are blank.
pub fn write_single<W: Write>(
    cfg: &ChannelConfig,
    bits: usize,
    report: Option<&TransmissionReport>,
    out: W,
) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let (ber, bw, indet) = match report {
        Some(r) => (
            r.ber.to_string(),
            r.bandwidth_bps.to_string(),
            r.indeterminate_slots().to_string(),
        ),
        None => Default::default(),
    };
    w.write_record([
        "single".to_string(),
        "0".into(),
        "0".into(),
        cfg.seed.to_string(),
        bits.to_string(),
        cfg.page_gap.to_string(),
        cfg.region_size.to_string(),
        cfg.sync_period.to_string(),
        ber,
        bw,
        indet,
    ])?;
    w.flush()
}

/// Per-value means as an aligned text table.
pub fn summary_table(result: &SweepResult) -> String {
    let reps = result.rows.len() / result.aggregates.len().max(1);
    let mut s = format!(
        "{:>14}  {:>10}  {:>16}  {:>4}\n",
        result.variable.as_str(),
        "mean_ber",
        "mean_bw_bps",
        "reps"
    );
    for a in &result.aggregates {
        let _ = writeln!(
            s,
            "{:>14}  {:>10.4}  {:>16.3}  {:>4}",
            a.value, a.mean_ber, a.mean_bandwidth_bps, reps
        );
    }
    s
}

/// Writes the CSV to `path` and returns the summary table.
pub fn emit_report(result: &SweepResult, path: &Path) -> Result<String> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(result, BufWriter::new(file)).map_err(|e| Error::io(path, e))?;
    Ok(summary_table(result))
}
