//! Exhaustive sweeps of a rule space and grouping of machines by the
//! function they compute on a probe set.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machine::{codec_fingerprint, MoveConvention, OutputWord, Rule, Runner, SpaceId, Status};

/// Rules per checkpoint range.
pub const RANGE_SIZE: u64 = 4096;

/// Spaces larger than this are refused unless forced.
pub const FEASIBILITY_BOUND: u64 = 1 << 32;

/// Default step budget for the (2,2) space.
pub const DEFAULT_BUDGET_TWO_TWO: u64 = 2_000_000;

/// Default step budget for the (3,2) space, before escalation.
pub const DEFAULT_BUDGET_THREE_TWO: u64 = 50_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeSet {
    inputs: Vec<usize>,
    pub budget: u64,
    /// Factors applied in turn by [`escalate_to_fixpoint`].
    #[serde(default)]
    pub escalation: Vec<u64>,
}

impl ProbeSet {
    pub fn new(inputs: Vec<usize>, budget: u64) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::InvalidProbe("no inputs".into()));
        }
        if inputs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidProbe("inputs must be strictly increasing".into()));
        }
        if budget == 0 {
            return Err(Error::InvalidProbe("budget must be positive".into()));
        }
        Ok(ProbeSet { inputs, budget, escalation: Vec::new() })
    }

    /// Inputs `0..count`.
    pub fn first(count: usize, budget: u64) -> Result<Self> {
        ProbeSet::new((0..count).collect(), budget)
    }

    pub fn with_escalation(mut self, factors: Vec<u64>) -> Self {
        self.escalation = factors;
        self
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Summary of one run, as stored in sweep results.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeOutcome {
    pub status: Status,
    pub steps: u64,
    pub output: Option<OutputWord>,
    pub max_extent: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRecord {
    pub rule: u64,
    /// One entry per probe input, in probe order.
    pub outcomes: Vec<ProbeOutcome>,
}

impl SweepRecord {
    pub fn is_classified(&self) -> bool {
        self.outcomes.iter().all(|o| o.status != Status::BudgetExhausted)
    }

    pub fn halts_on_all(&self) -> bool {
        self.outcomes.iter().all(|o| o.status == Status::Halted)
    }

    /// `None` when some probe ran out of budget.
    pub fn signature(&self) -> Option<FunctionSignature> {
        self.outcomes
            .iter()
            .map(|o| match o.status {
                Status::Halted => Some(ProbeValue::Output(o.output.clone().unwrap_or_default())),
                Status::DivergentLeftEscape | Status::DivergentCycle => Some(ProbeValue::Diverges),
                Status::BudgetExhausted => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(FunctionSignature)
    }

    /// Steps summed over halting probes.
    pub fn halting_steps(&self) -> u64 {
        self.outcomes.iter().filter(|o| o.status == Status::Halted).map(|o| o.steps).sum()
    }
}

/// Runs one rule on every probe input.
pub fn sweep_rule(rule: &Rule, probe: &ProbeSet) -> SweepRecord {
    let mut runner = Runner::new(rule);
    let outcomes = probe
        .inputs
        .iter()
        .map(|&n| {
            let out = runner.run(n, probe.budget);
            ProbeOutcome { status: out.status, steps: out.steps, output: out.output, max_extent: out.max_extent }
        })
        .collect();
    SweepRecord { rule: rule.number(), outcomes }
}

/// Sweeps a contiguous range of rule numbers, in order.
pub fn sweep_range(space: SpaceId, probe: &ProbeSet, range: Range<u64>) -> Vec<SweepRecord> {
    range
        .map(|n| {
            let rule = Rule::decode(n, space).expect("range lies inside the space");
            sweep_rule(&rule, probe)
        })
        .collect()
}

/// The checkpoint ranges covering a space.
pub fn ranges(space: SpaceId) -> impl Iterator<Item = Range<u64>> {
    let size = space.size();
    (0..size.div_ceil(RANGE_SIZE)).map(move |i| i * RANGE_SIZE..((i + 1) * RANGE_SIZE).min(size))
}

/// Where committed ranges live between runs of a sweep.
///
/// `commit` must be atomic: after a crash a range is either fully present
/// or absent.
pub trait RangeStore: Sync {
    fn is_committed(&self, range: &Range<u64>) -> Result<bool>;
    fn commit(&self, range: &Range<u64>, records: &[SweepRecord]) -> Result<()>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    pub parallelism: usize,
    /// Sweep even spaces above [`FEASIBILITY_BOUND`].
    pub force: bool,
    /// Stop after this many ranges have been committed in this call.
    pub max_ranges: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { parallelism: 1, force: false, max_ranges: None }
    }
}

/// Refuses spaces of [`FEASIBILITY_BOUND`] machines or more unless forced.
pub fn check_feasible(space: SpaceId, force: bool) -> Result<()> {
    let size = space.size();
    if size >= FEASIBILITY_BOUND && !force {
        return Err(Error::Infeasible { space, size, bound: FEASIBILITY_BOUND });
    }
    Ok(())
}

fn pool(parallelism: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::Parse(format!("thread pool: {e}")))
}

/// A complete, rule-ordered sweep held in memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepResultSet {
    pub space: SpaceId,
    pub probe: ProbeSet,
    pub fingerprint: String,
    pub records: Vec<SweepRecord>,
}

/// Sweeps every rule of `space` in memory.
pub fn sweep_space(space: SpaceId, probe: &ProbeSet, options: SweepOptions) -> Result<SweepResultSet> {
    check_feasible(space, options.force)?;
    let all: Vec<Range<u64>> = ranges(space).collect();
    let chunks: Vec<Vec<SweepRecord>> = pool(options.parallelism)?
        .install(|| all.into_par_iter().map(|r| sweep_range(space, probe, r)).collect());
    Ok(SweepResultSet {
        space,
        probe: probe.clone(),
        fingerprint: codec_fingerprint(MoveConvention::PINNED),
        records: chunks.into_iter().flatten().collect(),
    })
}

/// Sweeps every range of `space` not yet in `store`, committing each range
/// as it completes. Returns the number of ranges committed by this call.
pub fn sweep_into(
    space: SpaceId,
    probe: &ProbeSet,
    options: SweepOptions,
    store: &dyn RangeStore,
) -> Result<usize> {
    check_feasible(space, options.force)?;
    let mut pending = Vec::new();
    for r in ranges(space) {
        if !store.is_committed(&r)? {
            pending.push(r);
        }
    }
    if let Some(limit) = options.max_ranges {
        pending.truncate(limit);
    }
    let committed = pending.len();
    pool(options.parallelism)?.install(|| {
        pending.into_par_iter().try_for_each(|r| {
            let records = sweep_range(space, probe, r.clone());
            store.commit(&r, &records)
        })
    })?;
    Ok(committed)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProbeValue {
    Output(OutputWord),
    Diverges,
}

/// Outcomes on each probe input: the identity of a computed function.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FunctionSignature(pub Vec<ProbeValue>);

impl FunctionSignature {
    /// Canonical text form: probe values joined by `,`, each a 0/1 word or
    /// `D` for certified divergence.
    pub fn encode(&self) -> String {
        self.to_string()
    }

    pub fn diverges_everywhere(&self) -> bool {
        self.0.iter().all(|v| *v == ProbeValue::Diverges)
    }
}

impl fmt::Display for FunctionSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match v {
                ProbeValue::Output(w) => write!(f, "{w}")?,
                ProbeValue::Diverges => f.write_str("D")?,
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for FunctionSignature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .map(|part| match part {
                "D" => Ok(ProbeValue::Diverges),
                w => w.parse().map(ProbeValue::Output),
            })
            .collect::<Result<Vec<_>>>()
            .map(FunctionSignature)
    }
}

/// Machines computing one function, plus the fastest of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionGroup {
    /// Ascending.
    pub members: Vec<u64>,
    /// Member with the fewest total halting steps; lowest rule number on ties.
    pub fastest: u64,
    /// Per-probe steps of `fastest`, 0 where it diverges.
    pub fastest_steps: Vec<u64>,
    /// Per-probe steps summed over all members, 0 where they diverge.
    pub total_steps: Vec<u64>,
}

impl FunctionGroup {
    fn new(rule: u64, steps: Vec<u64>) -> Self {
        FunctionGroup { members: vec![rule], fastest: rule, total_steps: steps.clone(), fastest_steps: steps }
    }

    /// Per-probe steps averaged over all members.
    pub fn mean_steps(&self) -> Vec<f64> {
        let n = self.members.len() as f64;
        self.total_steps.iter().map(|&t| t as f64 / n).collect()
    }

    /// Folds `other`, a group for the same function, into this one.
    fn absorb(&mut self, other: FunctionGroup) {
        self.members.extend(other.members);
        for (t, o) in self.total_steps.iter_mut().zip(&other.total_steps) {
            *t += o;
        }
        let best: u64 = self.fastest_steps.iter().sum();
        let theirs: u64 = other.fastest_steps.iter().sum();
        if (theirs, other.fastest) < (best, self.fastest) {
            self.fastest = other.fastest;
            self.fastest_steps = other.fastest_steps;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionCatalog {
    pub space: SpaceId,
    pub probe: ProbeSet,
    pub fingerprint: String,
    pub groups: BTreeMap<FunctionSignature, FunctionGroup>,
    /// Ascending.
    pub unclassified: Vec<u64>,
}

impl FunctionCatalog {
    pub fn function_count(&self) -> usize {
        self.groups.len()
    }

    pub fn classified_count(&self) -> usize {
        self.groups.values().map(|g| g.members.len()).sum()
    }

    pub fn machine_count(&self) -> usize {
        self.classified_count() + self.unclassified.len()
    }
}

/// Incremental builder for a catalog, fed records in any order.
pub struct CatalogBuilder {
    space: SpaceId,
    probe: ProbeSet,
    fingerprint: String,
    groups: HashMap<FunctionSignature, FunctionGroup>,
    unclassified: Vec<u64>,
    seen: Vec<u64>,
}

impl CatalogBuilder {
    pub fn new(space: SpaceId, probe: ProbeSet, fingerprint: String) -> Self {
        CatalogBuilder { space, probe, fingerprint, groups: HashMap::new(), unclassified: Vec::new(), seen: Vec::new() }
    }

    pub fn add(&mut self, record: &SweepRecord) {
        self.seen.push(record.rule);
        let Some(signature) = record.signature() else {
            self.unclassified.push(record.rule);
            return;
        };
        let steps: Vec<u64> = record
            .outcomes
            .iter()
            .map(|o| if o.status == Status::Halted { o.steps } else { 0 })
            .collect();
        let group = FunctionGroup::new(record.rule, steps);
        match self.groups.get_mut(&signature) {
            Some(existing) => existing.absorb(group),
            None => {
                self.groups.insert(signature, group);
            }
        }
    }

    /// Fails if the records fed in do not cover the space exactly once.
    pub fn finish(mut self) -> Result<FunctionCatalog> {
        self.seen.sort_unstable();
        let missing = missing_ranges(&self.seen, self.space.size());
        if !missing.is_empty() {
            return Err(Error::Incomplete(missing));
        }
        if self.seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Incomplete("duplicate rule numbers in result set".into()));
        }
        let mut groups = BTreeMap::new();
        for (sig, mut group) in self.groups {
            group.members.sort_unstable();
            groups.insert(sig, group);
        }
        self.unclassified.sort_unstable();
        Ok(FunctionCatalog {
            space: self.space,
            probe: self.probe,
            fingerprint: self.fingerprint,
            groups,
            unclassified: self.unclassified,
        })
    }
}

/// Describes the gaps in a sorted list of rule numbers within `0..size`.
fn missing_ranges(sorted: &[u64], size: u64) -> String {
    let mut gaps = Vec::new();
    let mut expected = 0u64;
    for &n in sorted {
        if n > expected {
            gaps.push(format!("{}..{}", expected, n));
        }
        expected = expected.max(n + 1);
    }
    if expected < size {
        gaps.push(format!("{}..{}", expected, size));
    }
    gaps.join(", ")
}

/// Groups machines by the function they compute.
pub fn classify_functions(results: &SweepResultSet) -> Result<FunctionCatalog> {
    let mut builder = CatalogBuilder::new(results.space, results.probe.clone(), results.fingerprint.clone());
    for record in &results.records {
        builder.add(record);
    }
    builder.finish()
}

/// Re-runs unclassified machines at `budget * factor` and merges them in.
pub fn escalate_budget(catalog: &FunctionCatalog, factor: u64, parallelism: usize) -> Result<FunctionCatalog> {
    if factor <= 1 {
        return Err(Error::InvalidProbe(format!("escalation factor must exceed 1, got {factor}")));
    }
    if catalog.unclassified.is_empty() {
        return Ok(catalog.clone());
    }
    let mut probe = catalog.probe.clone();
    probe.budget = probe.budget.saturating_mul(factor);
    let space = catalog.space;
    let rerun: Vec<SweepRecord> = pool(parallelism)?.install(|| {
        catalog
            .unclassified
            .par_iter()
            .map(|&n| sweep_rule(&Rule::decode(n, space).expect("rule from catalog"), &probe))
            .collect()
    });
    Ok(merge_reruns(catalog, probe, &rerun))
}

/// Folds re-run records of previously unclassified machines into a catalog.
pub fn merge_reruns(catalog: &FunctionCatalog, probe: ProbeSet, rerun: &[SweepRecord]) -> FunctionCatalog {
    let mut merged = catalog.clone();
    merged.probe = probe;
    merged.unclassified.clear();
    let mut builder = CatalogBuilder::new(catalog.space, merged.probe.clone(), catalog.fingerprint.clone());
    for record in rerun {
        builder.add(record);
    }
    for (sig, group) in builder.groups {
        match merged.groups.get_mut(&sig) {
            Some(existing) => {
                existing.absorb(group);
                existing.members.sort_unstable();
            }
            None => {
                let mut group = group;
                group.members.sort_unstable();
                merged.groups.insert(sig, group);
            }
        }
    }
    merged.unclassified = builder.unclassified;
    merged.unclassified.sort_unstable();
    merged
}

/// Applies the probe set's escalation factors, then keeps multiplying by the
/// last one, until no machine leaves the unclassified list or the budget
/// would pass `max_budget`.
pub fn escalate_to_fixpoint(
    catalog: &FunctionCatalog,
    max_budget: u64,
    parallelism: usize,
) -> Result<FunctionCatalog> {
    let factors = if catalog.probe.escalation.is_empty() { vec![10] } else { catalog.probe.escalation.clone() };
    let mut current = catalog.clone();
    let mut i = 0;
    loop {
        let factor = factors[i.min(factors.len() - 1)];
        i += 1;
        if current.unclassified.is_empty() || current.probe.budget.saturating_mul(factor) > max_budget {
            return Ok(current);
        }
        let before = current.unclassified.len();
        current = escalate_budget(&current, factor, parallelism)?;
        if current.unclassified.len() == before && i >= factors.len() {
            return Ok(current);
        }
    }
}

/// Which functions of one catalog also occur in another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContainmentReport {
    pub checked: usize,
    pub contained: usize,
    pub violations: Vec<FunctionSignature>,
}

impl ContainmentReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_same_probe(a: &FunctionCatalog, b: &FunctionCatalog) -> Result<()> {
    if a.fingerprint != b.fingerprint {
        return Err(Error::FingerprintMismatch(a.fingerprint.clone(), b.fingerprint.clone()));
    }
    if a.probe.inputs() != b.probe.inputs() {
        return Err(Error::ProbeMismatch(format!("{:?} vs {:?}", a.probe.inputs(), b.probe.inputs())));
    }
    Ok(())
}

pub fn containment_check(small: &FunctionCatalog, large: &FunctionCatalog) -> Result<ContainmentReport> {
    check_same_probe(small, large)?;
    let violations: Vec<FunctionSignature> =
        small.groups.keys().filter(|sig| !large.groups.contains_key(*sig)).cloned().collect();
    Ok(ContainmentReport {
        checked: small.groups.len(),
        contained: small.groups.len() - violations.len(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::MoveConvention;

    fn small_probe(budget: u64) -> ProbeSet {
        ProbeSet::first(6, budget).unwrap()
    }

    #[test]
    fn probe_validation() {
        assert!(ProbeSet::new(vec![], 10).is_err());
        assert!(ProbeSet::new(vec![0, 2, 2], 10).is_err());
        assert!(ProbeSet::new(vec![3, 1], 10).is_err());
        assert!(ProbeSet::new(vec![0], 0).is_err());
        assert_eq!(ProbeSet::first(21, 5).unwrap().inputs().len(), 21);
    }

    #[test]
    fn ranges_cover_space() {
        let rs: Vec<_> = ranges(SpaceId::THREE_TWO).collect();
        assert_eq!(rs.first().unwrap().start, 0);
        assert_eq!(rs.last().unwrap().end, 2_985_984);
        assert!(rs.windows(2).all(|w| w[0].end == w[1].start));
        assert_eq!(ranges(SpaceId::TWO_TWO).count(), 1);
    }

    #[test]
    fn four_two_refused() {
        let err = sweep_space(SpaceId::FOUR_TWO, &small_probe(10), SweepOptions::default()).unwrap_err();
        assert!(err.to_string().contains("4294967296"), "{err}");
    }

    #[test]
    fn signature_text_roundtrip() {
        let sig = FunctionSignature(vec![
            ProbeValue::Output("1".parse().unwrap()),
            ProbeValue::Diverges,
            ProbeValue::Output(OutputWord::default()),
            ProbeValue::Output("1011".parse().unwrap()),
        ]);
        assert_eq!(sig.encode(), "1,D,,1011");
        assert_eq!(sig.encode().parse::<FunctionSignature>().unwrap(), sig);
    }

    #[test]
    fn budget_one_still_partitions() {
        let results = sweep_space(SpaceId::TWO_TWO, &small_probe(1), SweepOptions::default()).unwrap();
        let catalog = classify_functions(&results).unwrap();
        let mut all: Vec<u64> = catalog.groups.values().flat_map(|g| g.members.clone()).collect();
        all.extend(&catalog.unclassified);
        all.sort_unstable();
        assert_eq!(all, (0..4096).collect::<Vec<_>>());
    }

    #[test]
    fn incomplete_results_are_rejected() {
        let mut results = sweep_space(SpaceId::TWO_TWO, &small_probe(50), SweepOptions::default()).unwrap();
        results.records.retain(|r| !(100..200).contains(&r.rule) && r.rule != 4095);
        let err = classify_functions(&results).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("100..200") && text.contains("4095..4096"), "{text}");
    }

    #[test]
    fn escalation_resolves_and_fixes() {
        let results = sweep_space(SpaceId::TWO_TWO, &small_probe(4), SweepOptions::default()).unwrap();
        let catalog = classify_functions(&results).unwrap();
        assert!(!catalog.unclassified.is_empty());
        let escalated = escalate_budget(&catalog, 1000, 1).unwrap();
        assert!(escalated.unclassified.len() < catalog.unclassified.len());
        // existing groups keep their members
        for (sig, group) in &catalog.groups {
            let after = &escalated.groups[sig];
            assert!(group.members.iter().all(|m| after.members.binary_search(m).is_ok()));
        }
        assert_eq!(escalated.machine_count(), 4096);
        let full = classify_functions(
            &sweep_space(SpaceId::TWO_TWO, &small_probe(4000), SweepOptions::default()).unwrap(),
        )
        .unwrap();
        assert_eq!(escalated.groups.keys().collect::<Vec<_>>(), full.groups.keys().collect::<Vec<_>>());
        let again = escalate_budget(&full, 10, 1).unwrap();
        if full.unclassified.is_empty() {
            assert_eq!(again, full);
        }
        assert!(escalate_budget(&full, 1, 1).is_err());
    }

    #[test]
    fn containment_rules() {
        let probe = small_probe(2000);
        let a = classify_functions(&sweep_space(SpaceId::TWO_TWO, &probe, SweepOptions::default()).unwrap()).unwrap();
        let report = containment_check(&a, &a).unwrap();
        assert!(report.holds());
        assert_eq!(report.contained, a.function_count());
        let mut b = a.clone();
        b.probe = ProbeSet::first(5, 2000).unwrap();
        assert!(matches!(containment_check(&a, &b), Err(Error::ProbeMismatch(_))));
        let mut c = a.clone();
        c.fingerprint = codec_fingerprint(MoveConvention::OddIsLeft);
        assert!(matches!(containment_check(&a, &c), Err(Error::FingerprintMismatch(..))));
    }

    #[test]
    fn fastest_member_is_minimal() {
        let probe = small_probe(2000);
        let results = sweep_space(SpaceId::TWO_TWO, &probe, SweepOptions::default()).unwrap();
        let catalog = classify_functions(&results).unwrap();
        for group in catalog.groups.values() {
            let best: u64 = group.fastest_steps.iter().sum();
            for &m in &group.members {
                let total = results.records[m as usize].halting_steps();
                assert!(total > best || (total == best && m >= group.fastest));
            }
        }
    }
}
