use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::channel::FaultKind;

/// Simulated threads: the trojan and the two spy accessors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThreadId {
    Trojan,
    T1,
    T2,
}

impl ThreadId {
    pub fn as_str(self) -> &'static str {
        match self {
            ThreadId::Trojan => "trojan",
            ThreadId::T1 => "t1",
            ThreadId::T2 => "t2",
        }
    }
}

impl fmt::Display for ThreadId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ThreadId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "trojan" => Ok(ThreadId::Trojan),
            "t1" => Ok(ThreadId::T1),
            "t2" => Ok(ThreadId::T2),
            other => Err(format!("unknown thread `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccessRecord {
    pub tick: u64,
    pub thread: ThreadId,
    pub page: u64,
    pub fault: FaultKind,
}

/// `tick,thread,page,fault_kind`
impl fmt::Display for AccessRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.tick, self.thread, self.page, self.fault)
    }
}

impl FromStr for AccessRecord {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let mut fields = line.trim().split(',');
        let mut next = || fields.next().ok_or_else(|| format!("short record `{line}`"));
        let tick = next()?.parse().map_err(|e| format!("tick: {e}"))?;
        let thread = next()?.parse()?;
        let page = next()?.parse().map_err(|e| format!("page: {e}"))?;
        let fault = next()?.parse()?;
        if fields.next().is_some() {
            return Err(format!("trailing fields in `{line}`"));
        }
        Ok(AccessRecord {
            tick,
            thread,
            page,
            fault,
        })
    }
}

/// Every access in simulation order; ticks never decrease.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AccessTrace {
    records: Vec<AccessRecord>,
}

impl AccessTrace {
    pub(crate) fn push(&mut self, record: AccessRecord) {
        debug_assert!(self.records.last().is_none_or(|r| r.tick <= record.tick));
        self.records.push(record);
    }

    pub fn records(&self) -> &[AccessRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records from index `start` on.
    pub fn since(&self, start: usize) -> AccessTrace {
        AccessTrace {
            records: self.records[start..].to_vec(),
        }
    }

    /// One line per record, no header.
    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        for r in &self.records {
            writeln!(out, "{r}")?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AccessTrace { records })
    }
}
