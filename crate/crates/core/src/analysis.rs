//! Halting-time distributions, runtime classes, fractal dimension of
//! space-time diagrams and the cross-space slow-down comparison.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::boxcount::{count_run, dyadic_scales};
use crate::error::{Error, Result};
use crate::explorer::{check_same_probe, FunctionCatalog, ProbeSet, SweepRecord};
use crate::fit;
use crate::machine::{Rule, SpaceId, Status};

/// Halting times below this are binned exactly; above it, in dyadic bands.
pub const EXACT_BIN_LIMIT: u64 = 1024;

/// Half-open step interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Bin {
    pub start: u64,
    pub end: u64,
}

impl Bin {
    pub fn for_steps(steps: u64, exact_limit: u64) -> Bin {
        if steps < exact_limit {
            Bin { start: steps, end: steps + 1 }
        } else {
            let start = 1u64 << (63 - steps.leading_zeros());
            Bin { start, end: start.saturating_mul(2) }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HaltingHistogram {
    pub space: SpaceId,
    pub inputs: Vec<usize>,
    pub exact_limit: u64,
    pub bins: BTreeMap<Bin, u64>,
    pub divergent: u64,
    pub budget_exhausted: u64,
    pub machines: u64,
}

impl HaltingHistogram {
    pub fn new(space: SpaceId, probe: &ProbeSet) -> Self {
        HaltingHistogram {
            space,
            inputs: probe.inputs().to_vec(),
            exact_limit: EXACT_BIN_LIMIT,
            bins: BTreeMap::new(),
            divergent: 0,
            budget_exhausted: 0,
            machines: 0,
        }
    }

    pub fn add(&mut self, record: &SweepRecord) {
        self.machines += 1;
        for o in &record.outcomes {
            match o.status {
                Status::Halted => *self.bins.entry(Bin::for_steps(o.steps, self.exact_limit)).or_default() += 1,
                Status::BudgetExhausted => self.budget_exhausted += 1,
                Status::DivergentLeftEscape | Status::DivergentCycle => self.divergent += 1,
            }
        }
    }

    pub fn halted(&self) -> u64 {
        self.bins.values().sum()
    }

    /// Bins, divergent and exhausted runs add up to machines × inputs.
    pub fn is_conserved(&self) -> bool {
        self.halted() + self.divergent + self.budget_exhausted == self.machines * self.inputs.len() as u64
    }

    /// Halting events that took at most `steps` steps.
    pub fn halted_within(&self, steps: u64) -> u64 {
        self.bins.iter().filter(|(b, _)| b.end <= steps + 1).map(|(_, c)| c).sum()
    }

    /// Halting events per band `[2^j, 2^(j+1))`, from `j = 0` to the last
    /// occupied band.
    pub fn dyadic_bands(&self) -> Vec<(Bin, u64)> {
        let mut bands: Vec<(Bin, u64)> = Vec::new();
        for (bin, &count) in &self.bins {
            let band = Bin::for_steps(bin.start.max(1), 1);
            let j = band.start.trailing_zeros() as usize;
            while bands.len() <= j {
                let start = 1u64 << bands.len();
                bands.push((Bin { start, end: start * 2 }, 0));
            }
            bands[j].1 += count;
        }
        bands
    }

    /// Number of strict local maxima over the dyadic bands.
    pub fn dyadic_modes(&self) -> usize {
        local_maxima(&self.dyadic_bands().iter().map(|b| b.1).collect::<Vec<_>>())
    }
}

/// Counts strict local maxima, treating a flat run as one point.
pub fn local_maxima(series: &[u64]) -> usize {
    let mut runs: Vec<u64> = series.to_vec();
    runs.dedup();
    (0..runs.len())
        .filter(|&i| {
            let left = i == 0 || runs[i - 1] < runs[i];
            let right = i + 1 == runs.len() || runs[i + 1] < runs[i];
            left && right && runs[i] > 0
        })
        .count()
}

pub fn halting_histogram<'a>(
    space: SpaceId,
    probe: &ProbeSet,
    records: impl IntoIterator<Item = &'a SweepRecord>,
) -> HaltingHistogram {
    let mut h = HaltingHistogram::new(space, probe);
    for r in records {
        h.add(r);
    }
    h
}

/// Minimum fit quality a runtime class must reach.
pub const FIT_THRESHOLD: f64 = 0.98;

/// Candidates within this much of the best quality count as tied.
pub const FIT_TIE: f64 = 0.002;

/// Largest relative deviation from the mean still read as constant time.
pub const CONSTANT_SPREAD: f64 = 0.05;

pub const MIN_FIT_POINTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Growth {
    Constant,
    Linear,
    Polynomial(u8),
    Exponential,
    Unclassified,
}

impl Growth {
    fn params(self) -> usize {
        match self {
            Growth::Constant => 1,
            Growth::Linear | Growth::Exponential => 2,
            Growth::Polynomial(d) => d as usize + 1,
            Growth::Unclassified => usize::MAX,
        }
    }
}

impl fmt::Display for Growth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Growth::Constant => f.write_str("constant"),
            Growth::Linear => f.write_str("linear"),
            Growth::Polynomial(d) => write!(f, "poly{d}"),
            Growth::Exponential => f.write_str("exponential"),
            Growth::Unclassified => f.write_str("unclassified"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeClass {
    pub class: Growth,
    /// Adjusted quality of every candidate model that could be fitted.
    pub quality: Vec<(Growth, f64)>,
}

/// Picks the runtime model that best explains `(n, steps)` pairs.
///
/// Constant time is recognized by a small relative spread. The affine,
/// quadratic and cubic models are scored by adjusted R² of steps against
/// n; the exponential model by adjusted R² of ln(steps) against n.
/// Near-ties go to the model with fewer parameters.
pub fn fit_runtime_class(times: &[(usize, u64)]) -> Result<RuntimeClass> {
    if times.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints { needed: MIN_FIT_POINTS, got: times.len() });
    }
    let xs: Vec<f64> = times.iter().map(|&(n, _)| n as f64).collect();
    let ys: Vec<f64> = times.iter().map(|&(_, t)| t as f64).collect();
    let m = ys.len();
    let mean = ys.iter().sum::<f64>() / m as f64;
    let spread = ys.iter().map(|y| (y - mean).abs()).fold(0.0, f64::max) / mean.max(f64::MIN_POSITIVE);

    let mut quality = vec![(Growth::Constant, 1.0 - spread)];
    for (class, degree) in [(Growth::Linear, 1), (Growth::Polynomial(2), 2), (Growth::Polynomial(3), 3)] {
        if let Some(c) = fit::polyfit(&xs, &ys, degree) {
            let pred: Vec<f64> = xs.iter().map(|&x| fit::eval(&c, x)).collect();
            quality.push((class, fit::adjusted(fit::r_squared(&ys, &pred), m, degree + 1)));
        }
    }
    if ys.iter().all(|&y| y > 0.0) {
        let logs: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        if let Some(c) = fit::polyfit(&xs, &logs, 1) {
            let pred: Vec<f64> = xs.iter().map(|&x| fit::eval(&c, x)).collect();
            // a flat log-line is constant time, not exponential
            if c[1] > 1e-9 {
                quality.push((Growth::Exponential, fit::adjusted(fit::r_squared(&logs, &pred), m, 2)));
            }
        }
    }

    let class = if spread <= CONSTANT_SPREAD {
        Growth::Constant
    } else {
        let best = quality[1..].iter().map(|q| q.1).fold(f64::NEG_INFINITY, f64::max);
        let chosen = quality[1..]
            .iter()
            .filter(|q| q.1 >= best - FIT_TIE)
            .min_by_key(|q| q.0.params())
            .copied();
        match chosen {
            Some((class, q)) if q >= FIT_THRESHOLD => class,
            _ => Growth::Unclassified,
        }
    };
    Ok(RuntimeClass { class, quality })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trend {
    Increasing,
    Decreasing,
    Stable,
}

/// Gap between the extrapolated dimension and the last measured slope
/// below which the trend counts as stable.
pub const TREND_TOLERANCE: f64 = 0.01;

/// Diagrams need at least this many box sides for a slope.
pub const MIN_SCALES: usize = 3;

/// Inputs used for the extrapolated dimension.
pub const EXTRAPOLATION_POINTS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionEstimate {
    /// `(n, d_n)` for every input whose diagram has enough scales.
    pub per_input: Vec<(usize, f64)>,
    /// Limit of `d_n` as `1/n → 0`, from the largest inputs. `None` when
    /// the estimate is degenerate.
    pub extrapolated: Option<f64>,
    pub trend: Trend,
}

impl DimensionEstimate {
    pub fn is_degenerate(&self) -> bool {
        self.extrapolated.is_none()
    }
}

/// Slope of `ln(count)` against `ln(1/ε)`.
pub fn dimension_slope(counts: &[(usize, u64)]) -> Option<f64> {
    let usable: Vec<&(usize, u64)> = counts.iter().filter(|c| c.1 > 0).collect();
    if usable.len() < MIN_SCALES {
        return None;
    }
    let xs: Vec<f64> = usable.iter().map(|c| -(c.0 as f64).ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|c| (c.1 as f64).ln()).collect();
    fit::line(&xs, &ys).map(|(slope, _)| slope)
}

/// Box-counting dimension estimate of `rule`'s diagrams over the probe
/// inputs.
pub fn fractal_dimension(rule: &Rule, probe: &ProbeSet, budget: u64) -> Result<DimensionEstimate> {
    let mut per_input = Vec::new();
    for &n in probe.inputs() {
        let (_, counts) =
            count_run(rule, n, budget).ok_or(Error::NonHaltingProbe { rule: rule.number(), input: n })?;
        let scales = dyadic_scales(1usize << (counts.len() - 1));
        let pairs: Vec<(usize, u64)> = scales.into_iter().zip(counts).collect();
        if let Some(d) = dimension_slope(&pairs) {
            per_input.push((n, d));
        }
    }
    Ok(estimate_from(per_input))
}

/// Extrapolates and classifies the trend of per-input slopes.
pub fn estimate_from(per_input: Vec<(usize, f64)>) -> DimensionEstimate {
    let usable: Vec<&(usize, f64)> = per_input.iter().filter(|p| p.0 > 0).collect();
    if usable.len() < EXTRAPOLATION_POINTS {
        return DimensionEstimate { per_input, extrapolated: None, trend: Trend::Stable };
    }
    let tail = &usable[usable.len() - EXTRAPOLATION_POINTS..];
    let xs: Vec<f64> = tail.iter().map(|p| 1.0 / p.0 as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.1).collect();
    let extrapolated = fit::line(&xs, &ys).map(|(_, intercept)| intercept);
    let last = tail[tail.len() - 1].1;
    let trend = match extrapolated {
        Some(d) if d > last + TREND_TOLERANCE => Trend::Increasing,
        Some(d) if d < last - TREND_TOLERANCE => Trend::Decreasing,
        _ => Trend::Stable,
    };
    DimensionEstimate { per_input, extrapolated, trend }
}

/// Linear machines should sit at or above this dimension.
pub const HIGH_DIMENSION: f64 = 1.6;

/// Exponential machines should sit at or below this dimension.
pub const LOW_DIMENSION: f64 = 1.4;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceEntry {
    pub rule: u64,
    pub class: Growth,
    pub dimension: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrespondenceReport {
    pub entries: Vec<CorrespondenceEntry>,
    pub linear: usize,
    pub linear_high: usize,
    pub exponential: usize,
    pub exponential_low: usize,
    /// Linear machines below [`HIGH_DIMENSION`] and exponential machines
    /// above [`LOW_DIMENSION`].
    pub exceptions: Vec<u64>,
}

impl CorrespondenceReport {
    pub fn linear_agreement(&self) -> f64 {
        ratio(self.linear_high, self.linear)
    }

    pub fn exponential_agreement(&self) -> f64 {
        ratio(self.exponential_low, self.exponential)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        1.0
    } else {
        a as f64 / b as f64
    }
}

/// Pairs runtime class and dimension for every machine that halts on every
/// probe input, and tallies agreement on the linear and exponential ones.
pub fn correspondence_report<'a>(
    space: SpaceId,
    probe: &ProbeSet,
    records: impl IntoIterator<Item = &'a SweepRecord>,
    budget: u64,
) -> Result<CorrespondenceReport> {
    let mut report = CorrespondenceReport::default();
    for record in records.into_iter().filter(|r| r.halts_on_all()) {
        let times: Vec<(usize, u64)> =
            probe.inputs().iter().zip(&record.outcomes).map(|(&n, o)| (n, o.steps)).collect();
        let class = fit_runtime_class(&times)?.class;
        let rule = Rule::decode(record.rule, space)?;
        let estimate = fractal_dimension(&rule, probe, budget)?;
        let d = estimate.extrapolated;
        match class {
            Growth::Linear => {
                report.linear += 1;
                if d.is_some_and(|d| d >= HIGH_DIMENSION) {
                    report.linear_high += 1;
                } else {
                    report.exceptions.push(record.rule);
                }
            }
            Growth::Exponential => {
                report.exponential += 1;
                if d.is_some_and(|d| d <= LOW_DIMENSION) {
                    report.exponential_low += 1;
                } else {
                    report.exceptions.push(record.rule);
                }
            }
            _ => {}
        }
        report.entries.push(CorrespondenceEntry { rule: record.rule, class, dimension: d });
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    SlowDown,
    Tie,
    SpeedUp,
}

impl Verdict {
    fn of(small: f64, large: f64) -> Verdict {
        let tolerance = 1e-9 * small.abs().max(large.abs()).max(1.0);
        if large > small + tolerance {
            Verdict::SlowDown
        } else if small > large + tolerance {
            Verdict::SpeedUp
        } else {
            Verdict::Tie
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Aggregate {
    Mean,
    Max,
    HarmonicMean,
    /// Slope of steps over the upper half of the halting inputs.
    Asymptotic,
}

impl Aggregate {
    pub const ALL: [Aggregate; 4] = [Aggregate::Mean, Aggregate::Max, Aggregate::HarmonicMean, Aggregate::Asymptotic];

    pub fn apply(self, points: &[(usize, f64)]) -> f64 {
        let ys = points.iter().map(|p| p.1);
        match self {
            Aggregate::Mean => ys.sum::<f64>() / points.len() as f64,
            Aggregate::Max => ys.fold(0.0, f64::max),
            Aggregate::HarmonicMean => points.len() as f64 / ys.map(|y| 1.0 / y).sum::<f64>(),
            Aggregate::Asymptotic => {
                let upper = &points[points.len() / 2..];
                let xs: Vec<f64> = upper.iter().map(|p| p.0 as f64).collect();
                let ys: Vec<f64> = upper.iter().map(|p| p.1).collect();
                fit::line(&xs, &ys).map_or(0.0, |(s, _)| s)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Aggregate::Mean => "mean",
            Aggregate::Max => "max",
            Aggregate::HarmonicMean => "harmonic",
            Aggregate::Asymptotic => "asymptotic",
        }
    }
}

/// Whose steps stand for a function in a space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Representative {
    /// The member with the fewest total steps. Every (2,2) machine has an
    /// exact copy in (3,2), so this reading can only tie or speed up.
    Fastest,
    /// Per-input steps averaged over all members.
    MemberMean,
}

impl Representative {
    pub fn name(self) -> &'static str {
        match self {
            Representative::Fastest => "fastest",
            Representative::MemberMean => "member-mean",
        }
    }
}

impl std::str::FromStr for Representative {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fastest" => Ok(Representative::Fastest),
            "member-mean" => Ok(Representative::MemberMean),
            _ => Err(Error::Parse(format!("unknown representative `{s}` (fastest, member-mean)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlowdownEntry {
    pub signature: String,
    pub small_rule: u64,
    pub large_rule: u64,
    /// `(n, steps)` over the halting inputs.
    pub small_steps: Vec<(usize, f64)>,
    pub large_steps: Vec<(usize, f64)>,
    pub verdicts: Vec<(Aggregate, Verdict)>,
}

impl SlowdownEntry {
    fn ratios(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.small_steps.iter().zip(&self.large_steps).map(|(s, l)| (s.0, s.1 / l.1))
    }

    /// Largest `small / large` step ratio over the halting inputs.
    pub fn max_speedup_ratio(&self) -> f64 {
        self.ratios().map(|r| r.1).fold(0.0, f64::max)
    }

    /// The speed-up factor grows no faster than the input: over the upper
    /// half of the halting inputs, `ratio(n) / ratio(m) <= (n + 1) / (m + 1)`
    /// for every later `n` against the first such input `m`.
    pub fn speedup_at_most_linear(&self) -> bool {
        let ratios: Vec<(usize, f64)> = self.ratios().collect();
        let upper = &ratios[ratios.len() / 2..];
        let Some(&(m, base)) = upper.first() else { return true };
        upper.iter().all(|&(n, r)| r / base <= (n + 1) as f64 / (m + 1) as f64 + 1e-9)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SlowdownReport {
    pub entries: Vec<SlowdownEntry>,
    /// Functions with no halting input carry no runtime and are skipped.
    pub skipped: usize,
    pub tallies: BTreeMap<Aggregate, BTreeMap<Verdict, usize>>,
}

impl SlowdownReport {
    pub fn tally(&self, aggregate: Aggregate, verdict: Verdict) -> usize {
        self.tallies.get(&aggregate).and_then(|t| t.get(&verdict)).copied().unwrap_or(0)
    }

    /// Entries with a speed-up under any aggregate.
    pub fn speedups(&self) -> impl Iterator<Item = &SlowdownEntry> {
        self.entries.iter().filter(|e| e.verdicts.iter().any(|v| v.1 == Verdict::SpeedUp))
    }
}

/// Compares the runtimes of every function present in both catalogs.
pub fn slowdown_report(
    small: &FunctionCatalog,
    large: &FunctionCatalog,
    representative: Representative,
) -> Result<SlowdownReport> {
    check_same_probe(small, large)?;
    let inputs = small.probe.inputs();
    let mut report = SlowdownReport::default();
    for (sig, s) in &small.groups {
        let Some(l) = large.groups.get(sig) else { continue };
        let halting: Vec<usize> = sig
            .0
            .iter()
            .enumerate()
            .filter(|(_, v)| matches!(v, crate::explorer::ProbeValue::Output(_)))
            .map(|(i, _)| i)
            .collect();
        if halting.is_empty() {
            report.skipped += 1;
            continue;
        }
        let pick = |g: &crate::explorer::FunctionGroup| {
            let steps: Vec<f64> = match representative {
                Representative::Fastest => g.fastest_steps.iter().map(|&t| t as f64).collect(),
                Representative::MemberMean => g.mean_steps(),
            };
            halting.iter().map(|&i| (inputs[i], steps[i])).collect::<Vec<_>>()
        };
        let small_steps = pick(s);
        let large_steps = pick(l);
        let verdicts: Vec<(Aggregate, Verdict)> = Aggregate::ALL
            .iter()
            .map(|&a| (a, Verdict::of(a.apply(&small_steps), a.apply(&large_steps))))
            .collect();
        for &(a, v) in &verdicts {
            *report.tallies.entry(a).or_default().entry(v).or_default() += 1;
        }
        report.entries.push(SlowdownEntry {
            signature: sig.encode(),
            small_rule: s.fastest,
            large_rule: l.fastest,
            small_steps,
            large_steps,
            verdicts,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explorer::ProbeOutcome;
    use crate::machine::SpaceId;

    fn times(f: impl Fn(f64) -> f64) -> Vec<(usize, u64)> {
        (0..=20).map(|n| (n, f(n as f64).round() as u64)).collect()
    }

    #[test]
    fn constant_times() {
        assert_eq!(fit_runtime_class(&times(|_| 7.0)).unwrap().class, Growth::Constant);
    }

    #[test]
    fn linear_times() {
        assert_eq!(fit_runtime_class(&times(|n| 10.0 * n + 7.0)).unwrap().class, Growth::Linear);
    }

    #[test]
    fn quadratic_times() {
        assert_eq!(fit_runtime_class(&times(|n| n * n + 3.0 * n + 2.0)).unwrap().class, Growth::Polynomial(2));
    }

    #[test]
    fn exponential_times() {
        let t: Vec<_> = (0..=12).map(|n| (n, (1u64 << (n + 3)) - 3)).collect();
        assert_eq!(fit_runtime_class(&t).unwrap().class, Growth::Exponential);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            fit_runtime_class(&[(0, 1), (1, 2)]),
            Err(Error::TooFewPoints { needed: 6, got: 2 })
        ));
    }

    #[test]
    fn bins() {
        assert_eq!(Bin::for_steps(5, 1024), Bin { start: 5, end: 6 });
        assert_eq!(Bin::for_steps(1024, 1024), Bin { start: 1024, end: 2048 });
        assert_eq!(Bin::for_steps(3000, 1024), Bin { start: 2048, end: 4096 });
    }

    fn record(rule: u64, outcomes: &[(Status, u64)]) -> SweepRecord {
        SweepRecord {
            rule,
            outcomes: outcomes
                .iter()
                .map(|&(status, steps)| ProbeOutcome { status, steps, output: None, max_extent: 0 })
                .collect(),
        }
    }

    #[test]
    fn single_machine_histogram() {
        let probe = ProbeSet::first(21, 10).unwrap();
        let r = record(0, &[(Status::Halted, 1); 21]);
        let h = halting_histogram(SpaceId::TWO_TWO, &probe, [&r]);
        assert_eq!(h.bins.len(), 1);
        assert_eq!(h.bins[&Bin { start: 1, end: 2 }], 21);
        assert!(h.is_conserved());
    }

    #[test]
    fn histogram_conservation() {
        let probe = ProbeSet::first(3, 10).unwrap();
        let rs = [
            record(0, &[(Status::Halted, 3), (Status::DivergentCycle, 9), (Status::BudgetExhausted, 10)]),
            record(1, &[(Status::Halted, 5000), (Status::Halted, 2), (Status::DivergentLeftEscape, 1)]),
        ];
        let h = halting_histogram(SpaceId::TWO_TWO, &probe, &rs);
        assert!(h.is_conserved());
        assert_eq!((h.halted(), h.divergent, h.budget_exhausted), (3, 2, 1));
        assert_eq!(h.halted_within(1000), 2);
        assert_eq!(h.dyadic_bands().iter().map(|b| b.1).collect::<Vec<_>>()[1..3], [2, 0]);
    }

    #[test]
    fn modes() {
        assert_eq!(local_maxima(&[1, 5, 2, 0, 3, 1]), 2);
        assert_eq!(local_maxima(&[1, 5, 5, 2]), 1);
        assert_eq!(local_maxima(&[0, 0, 0]), 0);
        assert_eq!(local_maxima(&[4, 3, 2, 1]), 1);
    }

    #[test]
    fn verdicts() {
        assert_eq!(Verdict::of(1.0, 2.0), Verdict::SlowDown);
        assert_eq!(Verdict::of(2.0, 1.0), Verdict::SpeedUp);
        assert_eq!(Verdict::of(2.0, 2.0), Verdict::Tie);
    }

    fn entry(ratio: impl Fn(usize) -> f64) -> SlowdownEntry {
        let large: Vec<(usize, f64)> = (0..10).map(|n| (n, 10.0 + n as f64)).collect();
        SlowdownEntry {
            signature: String::new(),
            small_rule: 0,
            large_rule: 0,
            small_steps: large.iter().map(|&(n, t)| (n, t * ratio(n))).collect(),
            large_steps: large,
            verdicts: Vec::new(),
        }
    }

    #[test]
    fn linear_speedup_bound() {
        assert!(entry(|_| 4.0).speedup_at_most_linear());
        assert!(entry(|n| 2.0 - 1.0 / (n + 1) as f64).speedup_at_most_linear());
        assert!(entry(|n| (n + 1) as f64).speedup_at_most_linear());
        assert!(!entry(|n| ((n + 1) * (n + 1)) as f64).speedup_at_most_linear());
        assert!((entry(|_| 4.0).max_speedup_ratio() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn aggregates() {
        let pts = [(0, 1.0), (1, 2.0), (2, 4.0), (3, 8.0)];
        assert_eq!(Aggregate::Mean.apply(&pts), 3.75);
        assert_eq!(Aggregate::Max.apply(&pts), 8.0);
        assert!((Aggregate::HarmonicMean.apply(&pts) - 4.0 / 1.875).abs() < 1e-12);
        assert!((Aggregate::Asymptotic.apply(&pts) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_dimension() {
        let e = estimate_from(vec![(1, 1.0), (2, 1.5)]);
        assert!(e.is_degenerate());
    }

    #[test]
    fn extrapolation_is_exact_on_hyperbolas() {
        let pts: Vec<(usize, f64)> = (1..=10).map(|n| (n, 2.0 - 1.0 / n as f64)).collect();
        let e = estimate_from(pts);
        assert!((e.extrapolated.unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(e.trend, Trend::Increasing);
    }
}
