//! Non-uniform banks by merging adjacent channels of a uniform bank.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mdft_runtime::{analyze_paths, synthesize_paths, ChannelPath, RoundTrip, SignalBuffer, SubbandSet};
use crate::modbank::{check_channel_count, UniformBank};

/// Largest M accepted by [`enumerate_valid_plans`].
pub const MAX_ENUMERATION_CHANNELS: usize = 20;

/// Ordered groups (start channel n_i, width p_i) over an M-channel bank.
///
/// Construction only checks that widths are positive; partition problems are
/// reported by [`validate_plan`] so that a bad plan can still be described.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MergePlan {
    m: usize,
    groups: Vec<(usize, usize)>,
}

impl MergePlan {
    pub fn new(m: usize, groups: Vec<(usize, usize)>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidPlan("plan has no groups".into()));
        }
        if let Some(&(n, _)) = groups.iter().find(|g| g.1 == 0) {
            return Err(Error::InvalidPlan(format!("group starting at channel {n} has zero width")));
        }
        Ok(MergePlan { m, groups })
    }

    /// Contiguous groups starting at channel 0.
    pub fn from_widths(m: usize, widths: &[usize]) -> Result<Self> {
        let mut start = 0;
        let mut groups = Vec::with_capacity(widths.len());
        for &p in widths {
            groups.push((start, p));
            start += p;
        }
        Self::new(m, groups)
    }

    /// Groups from decimation factors M_i = M / p_i.
    pub fn from_factors(m: usize, factors: &[usize]) -> Result<Self> {
        let mut widths = Vec::with_capacity(factors.len());
        for &f in factors {
            if f == 0 || !m.is_multiple_of(f) {
                return Err(Error::InvalidPlan(format!("decimation factor {f} does not divide M={m}")));
            }
            widths.push(m / f);
        }
        Self::from_widths(m, &widths)
    }

    /// Every channel on its own.
    pub fn singletons(m: usize) -> Result<Self> {
        Self::from_widths(m, &vec![1; m])
    }

    /// Channels `a` and `a + 1` merged, all others alone.
    pub fn pair(m: usize, a: usize) -> Result<Self> {
        if a + 1 >= m {
            return Err(Error::IndexOutOfRange { index: a + 1, len: m });
        }
        let mut widths = vec![1; a];
        widths.push(2);
        widths.extend(std::iter::repeat_n(1, m - a - 2));
        Self::from_widths(m, &widths)
    }

    /// Parses `M=8; bands=2,1,1,4` or `M=8; factors=4,8,8,2`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut m = None;
        let mut bands = None;
        let mut factors = None;
        for part in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) =
                part.split_once('=').ok_or_else(|| Error::InvalidPlan(format!("expected key=value, got '{part}'")))?;
            let value = value.trim();
            match key.trim().to_ascii_lowercase().as_str() {
                "m" => m = Some(value.parse::<usize>().map_err(|_| Error::InvalidPlan(format!("bad M '{value}'")))?),
                "bands" | "widths" => bands = Some(parse_list(value)?),
                "factors" => factors = Some(parse_list(value)?),
                other => return Err(Error::InvalidPlan(format!("unknown plan key '{other}'"))),
            }
        }
        let m = m.ok_or_else(|| Error::InvalidPlan("missing M".into()))?;
        match (bands, factors) {
            (Some(b), None) => Self::from_widths(m, &b),
            (None, Some(f)) => Self::from_factors(m, &f),
            (Some(_), Some(_)) => Err(Error::InvalidPlan("give either bands or factors, not both".into())),
            (None, None) => Err(Error::InvalidPlan("missing bands or factors".into())),
        }
    }

    pub fn channels(&self) -> usize {
        self.m
    }

    pub fn groups(&self) -> &[(usize, usize)] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn widths(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.1).collect()
    }

    /// M / p_i per group, `None` where p_i does not divide M.
    pub fn factors(&self) -> Vec<Option<usize>> {
        self.groups.iter().map(|&(_, p)| self.m.is_multiple_of(p).then(|| self.m / p)).collect()
    }

    pub fn max_width(&self) -> usize {
        self.groups.iter().map(|g| g.1).max().unwrap_or(1)
    }

    /// Canonical text form, widths only.
    pub fn to_text(&self) -> String {
        let w: Vec<String> = self.widths().iter().map(|p| p.to_string()).collect();
        format!("M={}; bands={}", self.m, w.join(","))
    }
}

impl fmt::Display for MergePlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|v| v.trim().parse::<usize>().map_err(|_| Error::InvalidPlan(format!("bad list entry '{}'", v.trim()))))
        .collect()
}

/// Channel whose merging with a neighbour aliases, from the empirical rule:
/// n = floor((M+1)/5) when M mod 10 is 4 or 6, n = floor((M+2)/5) otherwise,
/// and a_M = (M - 2n + 2)/2 - 1.
pub fn predict_alias_channel(m: usize) -> Result<usize> {
    check_channel_count(m)?;
    let n = match m % 10 {
        4 | 6 => (m + 1) / 5,
        _ => (m + 2) / 5,
    };
    Ok((m + 2 - 2 * n) / 2 - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub m: usize,
    pub plan: String,
    pub alias_channel: Option<usize>,
    /// Contiguity problems and bad channel counts.
    pub partition_violations: Vec<String>,
    /// Sum of widths when it differs from M.
    pub width_sum_mismatch: Option<usize>,
    /// Indices of groups of width >= 2 that contain a_M.
    pub alias_hazards: Vec<usize>,
    /// Informational: groups whose M / p_i is not an even integer. Such plans
    /// are valid partitions but cannot be realised by [`merge_bank`].
    pub unrealizable_groups: Vec<usize>,
    pub decimation_factors: Vec<Option<usize>>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.partition_violations.is_empty() && self.width_sum_mismatch.is_none() && self.alias_hazards.is_empty()
    }

    pub fn is_partition(&self) -> bool {
        self.partition_violations.is_empty() && self.width_sum_mismatch.is_none()
    }

    /// Maximal decimation: sum of 1/M_i, meaningful when every factor is integral.
    pub fn rate_sum(&self) -> Option<f64> {
        self.decimation_factors.iter().map(|f| f.map(|f| 1.0 / f as f64)).sum()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "plan: {}", self.plan)?;
        match self.alias_channel {
            Some(a) => writeln!(f, "alias channel a_{} = {}", self.m, a)?,
            None => writeln!(f, "alias channel: undefined for M={}", self.m)?,
        }
        let factors: Vec<String> =
            self.decimation_factors.iter().map(|v| v.map_or("-".to_string(), |v| v.to_string())).collect();
        writeln!(f, "decimation factors: {}", factors.join(","))?;
        for v in &self.partition_violations {
            writeln!(f, "partition violation: {v}")?;
        }
        if let Some(s) = self.width_sum_mismatch {
            writeln!(f, "width sum {} != M={}", s, self.m)?;
        }
        for &g in &self.alias_hazards {
            writeln!(f, "alias hazard: group {g} merges channel {}", self.alias_channel.unwrap_or(0))?;
        }
        for &g in &self.unrealizable_groups {
            writeln!(f, "note: group {g} needs a decimation factor that is not an even integer")?;
        }
        write!(f, "status: {}", if self.is_valid() { "valid" } else { "invalid" })
    }
}

pub fn validate_plan(plan: &MergePlan) -> ValidationReport {
    let m = plan.m;
    let mut partition_violations = Vec::new();
    if let Err(e) = check_channel_count(m) {
        partition_violations.push(e.to_string());
    }
    let alias_channel = predict_alias_channel(m).ok();
    let mut expect = 0;
    for (i, &(n, p)) in plan.groups.iter().enumerate() {
        if n != expect {
            partition_violations.push(format!("group {i} starts at channel {n}, expected {expect}"));
        }
        expect = n + p;
    }
    let sum: usize = plan.groups.iter().map(|g| g.1).sum();
    if sum == m && expect != m {
        partition_violations.push(format!("groups end at channel {expect}, expected {m}"));
    }
    let width_sum_mismatch = (sum != m).then_some(sum);
    let alias_hazards = match alias_channel {
        Some(a) => plan
            .groups
            .iter()
            .enumerate()
            .filter(|(_, &(n, p))| p >= 2 && n <= a && a < n + p)
            .map(|(i, _)| i)
            .collect(),
        None => Vec::new(),
    };
    let unrealizable_groups =
        plan.groups.iter().enumerate().filter(|(_, &(_, p))| !realizable(m, p)).map(|(i, _)| i).collect();
    ValidationReport {
        m,
        plan: plan.to_text(),
        alias_channel,
        partition_violations,
        width_sum_mismatch,
        alias_hazards,
        unrealizable_groups,
        decimation_factors: plan.factors(),
    }
}

/// M / p integral and even, so the two-branch stage can decimate by M_i / 2.
fn realizable(m: usize, p: usize) -> bool {
    p > 0 && m.is_multiple_of(p) && (m / p).is_multiple_of(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonUniformBank {
    source: UniformBank,
    plan: MergePlan,
    analysis: Vec<Vec<Complex64>>,
    synthesis: Vec<Vec<Complex64>>,
    decimations: Vec<usize>,
    alias_override: bool,
}

/// Sums analysis filters and averages synthesis filters over each group.
/// A plan merging a_M is refused unless `allow_alias` is set.
pub fn merge_bank(bank: &UniformBank, plan: &MergePlan, allow_alias: bool) -> Result<NonUniformBank> {
    let m = bank.channels();
    if plan.m != m {
        return Err(Error::ChannelMismatch { expected: m, got: plan.m });
    }
    let report = validate_plan(plan);
    if !report.is_partition() {
        let mut msg: Vec<String> = report.partition_violations.clone();
        if let Some(s) = report.width_sum_mismatch {
            msg.push(format!("widths sum to {s}, not {m}"));
        }
        return Err(Error::InvalidPlan(msg.join("; ")));
    }
    if !report.alias_hazards.is_empty() && !allow_alias {
        return Err(Error::AliasHazard { channel: report.alias_channel.unwrap_or(0) });
    }
    let mut analysis = Vec::with_capacity(plan.len());
    let mut synthesis = Vec::with_capacity(plan.len());
    let mut decimations = Vec::with_capacity(plan.len());
    for &(n, p) in &plan.groups {
        if !realizable(m, p) {
            return Err(Error::UnsupportedDecimation { width: p, m });
        }
        let mut h = bank.analysis(n).to_vec();
        let mut f = bank.synthesis(n).to_vec();
        for k in n + 1..n + p {
            for (a, b) in h.iter_mut().zip(bank.analysis(k)) {
                *a += b;
            }
            for (a, b) in f.iter_mut().zip(bank.synthesis(k)) {
                *a += b;
            }
        }
        let scale = p as f64;
        for v in &mut f {
            *v /= scale;
        }
        analysis.push(h);
        synthesis.push(f);
        decimations.push(m / p);
    }
    Ok(NonUniformBank {
        source: bank.clone(),
        plan: plan.clone(),
        analysis,
        synthesis,
        decimations,
        alias_override: !report.alias_hazards.is_empty(),
    })
}

impl NonUniformBank {
    pub fn source(&self) -> &UniformBank {
        &self.source
    }

    pub fn plan(&self) -> &MergePlan {
        &self.plan
    }

    /// Number of merged channels.
    pub fn channels(&self) -> usize {
        self.analysis.len()
    }

    pub fn analysis(&self, i: usize) -> &[Complex64] {
        &self.analysis[i]
    }

    pub fn synthesis(&self, i: usize) -> &[Complex64] {
        &self.synthesis[i]
    }

    pub fn decimation(&self, i: usize) -> usize {
        self.decimations[i]
    }

    pub fn decimations(&self) -> &[usize] {
        &self.decimations
    }

    /// True when the bank was built through the alias override.
    pub fn alias_override(&self) -> bool {
        self.alias_override
    }

    /// Each merged channel runs the uniform two-branch structure with
    /// decimation M_i/2 and the Re/Im phase of its first channel. Outputs are
    /// placed M/2 samples after the kept instant so every channel shares the
    /// uniform system delay.
    fn paths(&self) -> Vec<ChannelPath<'_>> {
        let m = self.source.channels();
        self.plan
            .groups
            .iter()
            .enumerate()
            .map(|(i, &(n, _))| ChannelPath {
                analysis: &self.analysis[i],
                synthesis: &self.synthesis[i],
                decimation: self.decimations[i],
                parity: n % 2,
                place: m / 2,
            })
            .collect()
    }

    pub fn analyze(&self, x: &SignalBuffer) -> Result<SubbandSet> {
        analyze_paths(&self.paths(), x)
    }

    pub fn synthesize(&self, subbands: &SubbandSet) -> Result<SignalBuffer> {
        synthesize_paths(&self.paths(), subbands)
    }
}

impl RoundTrip for NonUniformBank {
    fn source_channels(&self) -> usize {
        self.source.channels()
    }

    fn widest_group(&self) -> usize {
        self.plan.max_width()
    }

    fn nominal_delay(&self) -> usize {
        self.source.system_delay()
    }

    fn round_trip(&self, x: &SignalBuffer) -> Result<SignalBuffer> {
        self.synthesize(&self.analyze(x)?)
    }
}

/// Contiguous partitions of 0..M with even integral decimation factors and
/// no merge of a_M, in lexicographic order of the width sequence.
pub fn enumerate_valid_plans(m: usize, max_results: usize) -> Result<Vec<MergePlan>> {
    check_channel_count(m)?;
    if m > MAX_ENUMERATION_CHANNELS {
        return Err(Error::InvalidChannelCount { m, reason: "enumeration is limited to M <= 20" });
    }
    let a = predict_alias_channel(m)?;
    let mut out = Vec::new();
    let mut widths = Vec::new();
    descend(m, a, 0, &mut widths, max_results, &mut out);
    Ok(out)
}

fn descend(m: usize, a: usize, start: usize, widths: &mut Vec<usize>, max: usize, out: &mut Vec<MergePlan>) {
    if out.len() >= max {
        return;
    }
    if start == m {
        out.push(MergePlan::from_widths(m, widths).expect("widths are positive"));
        return;
    }
    for p in 1..=m - start {
        if !realizable(m, p) || (p >= 2 && start <= a && a < start + p) {
            continue;
        }
        widths.push(p);
        descend(m, a, start + p, widths, max, out);
        widths.pop();
        if out.len() >= max {
            return;
        }
    }
}
