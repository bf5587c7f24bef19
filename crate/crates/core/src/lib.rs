pub mod error;
pub mod firdesign;
pub mod mdft_runtime;
pub mod merge;
pub mod metrics;
pub mod modbank;

pub use error::{Error, ErrorKind, Result};
pub use firdesign::{adjust_edges_3db, design_prototype, freq_response, DesignRecord, FilterSpec, Prototype, TapCount};
pub use mdft_runtime::{
    dft_analyze, dft_synthesize, mdft_analyze, mdft_synthesize, Bypass, ChannelSubbands, DftBank, DftSubbands,
    RoundTrip, SignalBuffer, SubbandSet,
};
pub use merge::{
    enumerate_valid_plans, merge_bank, predict_alias_channel, validate_plan, MergePlan, NonUniformBank,
    ValidationReport,
};
pub use metrics::{
    alias_probe, distortion_nonuniform, distortion_uniform, flatness_deviation, merged_flatness, phase_linearity,
    reconstruction_snr, BankReport, SpectrumReport,
};
pub use modbank::{channel_band, modulate, UniformBank};
