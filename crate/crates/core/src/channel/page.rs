use std::fmt;
use std::str::FromStr;

/// Whether a page currently lives in the page cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Residency {
    Resident,
    Evicted,
}

/// Outcome of one access from the accessor's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultKind {
    /// Page already mapped in the accessor's address space.
    NoFault,
    /// Page in the page cache, only the page table had to be filled.
    SoftFault,
    /// Page had to come from disk; the accessor blocks and is switched out.
    HardFault,
}

impl FaultKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FaultKind::NoFault => "none",
            FaultKind::SoftFault => "soft",
            FaultKind::HardFault => "hard",
        }
    }
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FaultKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(FaultKind::NoFault),
            "soft" => Ok(FaultKind::SoftFault),
            "hard" => Ok(FaultKind::HardFault),
            other => Err(format!("unknown fault kind `{other}`")),
        }
    }
}
