use std::path::PathBuf;

use crate::live::BackendCapabilities;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Invalid parameters, rejected before anything runs.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("page_size must be positive")]
    ZeroPageSize,
    #[error("region_size must be positive")]
    EmptyRegion,
    #[error("region_size {region} is not a multiple of page_size {page}")]
    RegionNotPageMultiple { region: u64, page: u64 },
    #[error("pair_offset {offset} must satisfy 0 < pair_offset < page_gap ({gap})")]
    PairOffset { offset: u64, gap: u64 },
    #[error("page_gap {gap} must satisfy 0 < page_gap <= region pages ({region_pages})")]
    PageGap { gap: u64, region_pages: u64 },
    #[error("sync_period must be positive")]
    ZeroSyncPeriod,
    #[error("guard_offset {guard} must satisfy 0 < guard_offset < sync_period ({period})")]
    GuardOffset { guard: u64, period: u64 },
    #[error("simulator parameter {0}")]
    SimParams(&'static str),
    #[error("sync_period {period} ns is shorter than one simulator tick ({tick} ns)")]
    PeriodBelowTick { period: u64, tick: u64 },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("line {line}: expected `key=value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("sweep needs at least one value")]
    EmptySweep,
    #[error("sweep needs at least one repetition")]
    ZeroRepetitions,
    #[error("payload: {0}")]
    Payload(String),
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// Caller passed inconsistent arguments (length mismatch, zero duration).
    #[error("usage: {0}")]
    Usage(String),
    /// The host does not offer what the live channel needs.
    #[error("backend capabilities missing: {0}")]
    Capability(BackendCapabilities),
    #[error("setup failed: {msg} (hint: {hint})")]
    Setup { msg: String, hint: &'static str },
    #[error("transmission aborted: {0}")]
    Runtime(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) => 1,
            Error::Capability(_) | Error::Setup { .. } => 2,
            Error::Runtime(_) | Error::Io { .. } => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
