use thiserror::Error;

/// Broad failure category, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid filter spec: {0}")]
    InvalidSpec(String),
    #[error("unsupported channel count M={m}: {reason}")]
    InvalidChannelCount { m: usize, reason: &'static str },
    #[error("remez exchange did not converge after {iterations} iterations (last ripple {ripple:.6e})")]
    NonConvergence { iterations: usize, ripple: f64 },
    #[error("specification infeasible for the requested length; estimated length {estimated_taps} taps")]
    Infeasible { estimated_taps: usize },
    #[error("3-dB edge adjustment did not converge; final |H(e^(j*pi/M))|^2 = {final_gain:.6}")]
    EdgeAdjustment { final_gain: f64 },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("channel count mismatch: expected {expected}, got {got}")]
    ChannelMismatch { expected: usize, got: usize },
    #[error("channel {channel}: branch lengths {real} and {imag} differ by more than one sample")]
    BranchLength { channel: usize, real: usize, imag: usize },
    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid merge plan: {0}")]
    InvalidPlan(String),
    #[error("plan merges aliasing channel a_M = {channel}")]
    AliasHazard { channel: usize },
    #[error("group width {width} does not divide M={m}; decimation factor must be an even integer")]
    UnsupportedDecimation { width: usize, m: usize },
    #[error("input signal has zero energy")]
    ZeroEnergy,
    #[error("filter has no nonzero taps")]
    ZeroFilter,
    #[error("degenerate probe: {0}")]
    DegenerateProbe(String),
    #[error("input too short: need at least {needed} samples, got {got}")]
    InsufficientLength { needed: usize, got: usize },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NonConvergence { .. } | Error::Infeasible { .. } | Error::EdgeAdjustment { .. } => {
                ErrorKind::Numeric
            }
            _ => ErrorKind::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
