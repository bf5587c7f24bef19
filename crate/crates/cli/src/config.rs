//! `key = value` design configs. Frequencies are given as fractions of pi.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use mdft_core::{FilterSpec, MergePlan, TapCount};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Probe {
    Tones(Vec<f64>),
    /// One tone a quarter channel above each centre in (0, pi).
    Sweep,
}

impl Probe {
    pub fn frequencies(&self, m: usize) -> Vec<f64> {
        match self {
            Probe::Tones(w) => w.clone(),
            Probe::Sweep => (0..m / 2).map(|k| (k as f64 + 0.25) * 2.0 * PI / m as f64).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DesignConfig {
    pub spec: FilterSpec,
    pub channels: usize,
    pub adjust_edges: bool,
    pub plan: Option<MergePlan>,
    pub probe: Option<Probe>,
    pub input: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

const KEYS: [&str; 11] = [
    "passband_edge",
    "stopband_edge",
    "passband_ripple_db",
    "stopband_atten_db",
    "num_taps",
    "channels",
    "adjust_edges",
    "plan",
    "probe",
    "input",
    "output_dir",
];

fn number(key: &str, v: &str) -> Result<f64, CliError> {
    v.parse::<f64>().map_err(|_| CliError::Validation(format!("{key}: '{v}' is not a number")))
}

impl DesignConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        // Relative paths inside the config are taken from its directory.
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(p) = cfg.input.as_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(p) = cfg.output_dir.as_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values: Vec<(&str, &str)> = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("line {}: expected key = value", no + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(CliError::Validation(format!("line {}: unknown key '{k}'", no + 1)));
            }
            if values.iter().any(|(seen, _)| *seen == k) {
                return Err(CliError::Validation(format!("line {}: duplicate key '{k}'", no + 1)));
            }
            values.push((k, v));
        }
        let get = |k: &str| values.iter().find(|(key, _)| *key == k).map(|(_, v)| *v);
        let need = |k: &str| get(k).ok_or_else(|| CliError::Validation(format!("missing key '{k}'")));

        let wp = number("passband_edge", need("passband_edge")?)? * PI;
        let ws = number("stopband_edge", need("stopband_edge")?)? * PI;
        let ripple = number("passband_ripple_db", need("passband_ripple_db")?)?;
        let atten = number("stopband_atten_db", need("stopband_atten_db")?)?;
        let taps = match get("num_taps") {
            None | Some("auto") => TapCount::Auto,
            Some(v) => TapCount::Fixed(
                v.parse().map_err(|_| CliError::Validation(format!("num_taps: '{v}' is not 'auto' or a count")))?,
            ),
        };
        let spec = FilterSpec::new(wp, ws, ripple, atten, taps)?;
        let channels = need("channels")?
            .parse::<usize>()
            .map_err(|_| CliError::Validation("channels must be a positive integer".into()))?;
        let adjust_edges = match get("adjust_edges") {
            None | Some("true") => true,
            Some("false") => false,
            Some(v) => return Err(CliError::Validation(format!("adjust_edges: '{v}' is not true or false"))),
        };
        let plan = get("plan").map(MergePlan::parse).transpose()?;
        if let Some(p) = &plan {
            if p.channels() != channels {
                return Err(CliError::Validation(format!("plan is for M={} but channels = {channels}", p.channels())));
            }
        }
        let probe = match get("probe") {
            None => None,
            Some("sweep") => Some(Probe::Sweep),
            Some(v) => Some(Probe::Tones(
                v.split(',').map(|t| number("probe", t.trim()).map(|f| f * PI)).collect::<Result<Vec<_>, _>>()?,
            )),
        };
        let input = get("input").map(PathBuf::from);
        if probe.is_some() && input.is_some() {
            return Err(CliError::Validation("set either probe or input, not both".into()));
        }
        Ok(DesignConfig {
            spec,
            channels,
            adjust_edges,
            plan,
            probe,
            input,
            output_dir: get("output_dir").map(PathBuf::from),
        })
    }
}
