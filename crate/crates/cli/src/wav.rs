//! 16-bit PCM mono WAV in and out.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{CliError, CliResult};

pub struct Audio {
    pub sample_rate: u32,
    /// Samples scaled to [-1, 1).
    pub samples: Vec<f64>,
}

pub fn read(path: &Path) -> CliResult<Audio> {
    let mut reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(e) => CliError::Io(format!("cannot read {}: {e}", path.display())),
        other => CliError::Validation(format!("{}: {other}", path.display())),
    })?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(CliError::Validation(format!(
            "{}: {} channels; only mono input is accepted",
            path.display(),
            spec.channels
        )));
    }
    if spec.bits_per_sample != 16 || spec.sample_format != SampleFormat::Int {
        return Err(CliError::Validation(format!("{}: only 16-bit PCM is accepted", path.display())));
    }
    let samples = reader
        .samples::<i16>()
        .map(|s| s.map(|v| v as f64 / 32768.0))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(Audio { sample_rate: spec.sample_rate, samples })
}

pub fn write(path: &Path, sample_rate: u32, samples: &[f64]) -> CliResult<()> {
    let spec = WavSpec { channels: 1, sample_rate, bits_per_sample: 16, sample_format: SampleFormat::Int };
    let io = |e: hound::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
    let mut w = WavWriter::create(path, spec).map_err(io)?;
    for &s in samples {
        w.write_sample((s * 32768.0).round().clamp(-32768.0, 32767.0) as i16).map_err(io)?;
    }
    w.finalize().map_err(io)
}
