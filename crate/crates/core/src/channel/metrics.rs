use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Fraction of positions that differ, in `[0, 1]`.
    pub ber: f64,
    /// Payload bits per second of elapsed time.
    pub bandwidth_bps: f64,
}

pub fn hamming(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub fn compute_metrics(sent: &[bool], received: &[bool], elapsed_ns: u64) -> Result<Metrics> {
    if sent.len() != received.len() {
        return Err(Error::Usage(format!(
            "sent has {} bits but received has {}",
            sent.len(),
            received.len()
        )));
    }
    if sent.is_empty() {
        return Err(Error::Usage("metrics need at least one bit".into()));
    }
    if elapsed_ns == 0 {
        return Err(Error::Usage("elapsed time must be positive".into()));
    }
    let n = sent.len() as f64;
    Ok(Metrics {
        ber: hamming(sent, received) as f64 / n,
        bandwidth_bps: n * 1e9 / elapsed_ns as f64,
    })
}
