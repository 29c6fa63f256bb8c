//! On-disk formats: sweep manifest, line-delimited result records,
//! checkpoint directories, catalogs, histograms and diagram renders.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{Bin, HaltingHistogram};
use crate::error::{Error, Result};
use crate::explorer::{
    ranges, CatalogBuilder, FunctionCatalog, FunctionGroup, FunctionSignature, ProbeOutcome, ProbeSet, RangeStore, SweepRecord,
};
use crate::machine::{codec_fingerprint, MoveConvention, SpaceId, SpaceTimeDiagram, Status, WHITE};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RANGES_DIR: &str = "ranges";
pub const CATALOG_FILE: &str = "catalog.jsonl";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub space: SpaceId,
    pub probe: ProbeSet,
    pub fingerprint: String,
    pub tool_version: String,
    /// Seconds since the Unix epoch.
    pub created: u64,
}

impl Manifest {
    pub fn new(space: SpaceId, probe: ProbeSet) -> Self {
        let created = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Manifest {
            space,
            probe,
            fingerprint: codec_fingerprint(MoveConvention::PINNED),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created,
        }
    }

    /// Same space, probe inputs, budget and codec conventions.
    pub fn compatible(&self, other: &Manifest) -> Result<()> {
        if self.fingerprint != other.fingerprint {
            return Err(Error::FingerprintMismatch(self.fingerprint.clone(), other.fingerprint.clone()));
        }
        if self.space != other.space || self.probe != other.probe {
            return Err(Error::ProbeMismatch(format!(
                "{} {:?} budget {} vs {} {:?} budget {}",
                self.space,
                self.probe.inputs(),
                self.probe.budget,
                other.space,
                other.probe.inputs(),
                other.probe.budget
            )));
        }
        Ok(())
    }
}

/// One `(rule, input)` run as a result line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub rule: u64,
    pub input: usize,
    pub status: String,
    pub steps: u64,
    pub output: String,
    pub max_extent: usize,
}

impl ResultRecord {
    fn from_outcome(rule: u64, input: usize, o: &ProbeOutcome) -> Self {
        ResultRecord {
            rule,
            input,
            status: o.status.as_str().to_string(),
            steps: o.steps,
            output: o.output.as_ref().map(|w| w.to_string()).unwrap_or_default(),
            max_extent: o.max_extent,
        }
    }

    fn to_outcome(&self) -> Result<ProbeOutcome> {
        let status: Status = self.status.parse()?;
        let output = if status == Status::Halted { Some(self.output.parse()?) } else { None };
        Ok(ProbeOutcome { status, steps: self.steps, output, max_extent: self.max_extent })
    }
}

pub fn write_records(out: &mut impl Write, probe: &ProbeSet, records: &[SweepRecord]) -> Result<()> {
    for record in records {
        for (&n, o) in probe.inputs().iter().zip(&record.outcomes) {
            serde_json::to_writer(&mut *out, &ResultRecord::from_outcome(record.rule, n, o))?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Reads result lines back into per-rule records.
pub fn read_records(input: impl BufRead, probe: &ProbeSet) -> Result<Vec<SweepRecord>> {
    let mut records: Vec<SweepRecord> = Vec::new();
    let width = probe.len();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let r: ResultRecord = serde_json::from_str(&line)?;
        let slot = i % width;
        if r.input != probe.inputs()[slot] {
            return Err(Error::Parse(format!("line {}: expected input {}, got {}", i + 1, probe.inputs()[slot], r.input)));
        }
        if slot == 0 {
            records.push(SweepRecord { rule: r.rule, outcomes: Vec::with_capacity(width) });
        }
        let current = records.last_mut().expect("pushed above");
        if current.rule != r.rule {
            return Err(Error::Parse(format!("line {}: rule {} interleaved with {}", i + 1, r.rule, current.rule)));
        }
        current.outcomes.push(r.to_outcome()?);
    }
    if records.last().is_some_and(|r| r.outcomes.len() != width) {
        return Err(Error::Parse("truncated record at end of file".into()));
    }
    Ok(records)
}

/// A sweep directory: manifest plus one committed result file per range.
pub struct CheckpointDir {
    root: PathBuf,
    manifest: Manifest,
}

impl CheckpointDir {
    /// Opens `root`, creating it with `manifest` if new. An existing
    /// directory must carry a compatible manifest.
    pub fn create_or_resume(root: impl Into<PathBuf>, manifest: Manifest) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(root.join(RANGES_DIR))?;
        let path = root.join(MANIFEST_FILE);
        if path.exists() {
            let existing = read_manifest(&path)?;
            existing.compatible(&manifest)?;
            return Ok(CheckpointDir { root, manifest: existing });
        }
        let mut text = serde_json::to_string(&manifest)?;
        text.push('\n');
        atomic_write(&path, text.as_bytes())?;
        Ok(CheckpointDir { root, manifest })
    }

    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        let manifest = read_manifest(&root.join(MANIFEST_FILE))?;
        Ok(CheckpointDir { root, manifest })
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn range_path(&self, range: &Range<u64>) -> PathBuf {
        self.root.join(RANGES_DIR).join(format!("{:010}-{:010}.jsonl", range.start, range.end))
    }

    pub fn committed_ranges(&self) -> Result<usize> {
        let mut n = 0;
        for r in ranges(self.manifest.space) {
            if self.range_path(&r).exists() {
                n += 1;
            }
        }
        Ok(n)
    }

    pub fn is_complete(&self) -> Result<bool> {
        Ok(self.committed_ranges()? == ranges(self.manifest.space).count())
    }

    pub fn read_range(&self, range: &Range<u64>) -> Result<Vec<SweepRecord>> {
        let path = self.range_path(range);
        let corrupt = |reason: String| Error::Checkpoint { path: path.clone(), reason };
        let file = File::open(&path).map_err(|e| corrupt(e.to_string()))?;
        let records =
            read_records(BufReader::new(file), &self.manifest.probe).map_err(|e| corrupt(e.to_string()))?;
        let expected: Vec<u64> = range.clone().collect();
        let got: Vec<u64> = records.iter().map(|r| r.rule).collect();
        if got != expected {
            return Err(corrupt(format!("holds {} records, expected rules {}..{}", got.len(), range.start, range.end)));
        }
        Ok(records)
    }

    /// Streams every committed range in rule order. Missing ranges are
    /// skipped; callers that need completeness check the rule numbers.
    pub fn for_each_record(&self, mut f: impl FnMut(&SweepRecord)) -> Result<()> {
        for r in ranges(self.manifest.space) {
            if !self.range_path(&r).exists() {
                continue;
            }
            for record in self.read_range(&r)? {
                f(&record);
            }
        }
        Ok(())
    }

    pub fn load_all(&self) -> Result<Vec<SweepRecord>> {
        let mut all = Vec::new();
        self.for_each_record(|r| all.push(r.clone()))?;
        Ok(all)
    }

    /// Concatenated bytes of every committed range, in order.
    pub fn canonical_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for r in ranges(self.manifest.space) {
            let path = self.range_path(&r);
            if path.exists() {
                out.extend(fs::read(path)?);
            }
        }
        Ok(out)
    }

    pub fn catalog_path(&self) -> PathBuf {
        self.root.join(CATALOG_FILE)
    }

    /// Groups every committed record. Fails if any range is missing.
    pub fn classify(&self) -> Result<FunctionCatalog> {
        let m = &self.manifest;
        let mut builder = CatalogBuilder::new(m.space, m.probe.clone(), m.fingerprint.clone());
        self.for_each_record(|r| builder.add(r))?;
        builder.finish()
    }

    pub fn histogram(&self) -> Result<HaltingHistogram> {
        let mut h = HaltingHistogram::new(self.manifest.space, &self.manifest.probe);
        self.for_each_record(|r| h.add(r))?;
        Ok(h)
    }

    /// The saved catalog if there is one, else a fresh grouping.
    pub fn load_catalog(&self) -> Result<FunctionCatalog> {
        let path = self.catalog_path();
        if path.exists() {
            return read_catalog(BufReader::new(File::open(path)?));
        }
        self.classify()
    }

    pub fn save_catalog(&self, catalog: &FunctionCatalog) -> Result<()> {
        let mut buf = Vec::new();
        write_catalog(&mut buf, catalog)?;
        atomic_write(&self.catalog_path(), &buf)
    }
}

impl RangeStore for CheckpointDir {
    fn is_committed(&self, range: &Range<u64>) -> Result<bool> {
        Ok(self.range_path(range).exists())
    }

    fn commit(&self, range: &Range<u64>, records: &[SweepRecord]) -> Result<()> {
        let mut buf = Vec::new();
        write_records(&mut buf, &self.manifest.probe, records)?;
        atomic_write(&self.range_path(range), &buf)
    }
}

fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Checkpoint { path: path.to_path_buf(), reason: e.to_string() })?;
    serde_json::from_str(text.trim())
        .map_err(|e| Error::Checkpoint { path: path.to_path_buf(), reason: format!("bad manifest: {e}") })
}

/// Writes to a sibling temp file and renames it into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = BufWriter::new(File::create(&tmp)?);
        f.write_all(bytes)?;
        f.flush()?;
        f.get_ref().sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct CatalogHeader {
    space: SpaceId,
    probe: ProbeSet,
    fingerprint: String,
    functions: usize,
    unclassified: Vec<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CatalogLine {
    signature: String,
    members: Vec<u64>,
    fastest: u64,
    fastest_steps: Vec<u64>,
    total_steps: Vec<u64>,
}

/// Header line followed by one line per function, in signature order.
pub fn write_catalog(out: &mut impl Write, catalog: &FunctionCatalog) -> Result<()> {
    let header = CatalogHeader {
        space: catalog.space,
        probe: catalog.probe.clone(),
        fingerprint: catalog.fingerprint.clone(),
        functions: catalog.groups.len(),
        unclassified: catalog.unclassified.clone(),
    };
    serde_json::to_writer(&mut *out, &header)?;
    out.write_all(b"\n")?;
    for (sig, g) in &catalog.groups {
        let line = CatalogLine {
            signature: sig.encode(),
            members: g.members.clone(),
            fastest: g.fastest,
            fastest_steps: g.fastest_steps.clone(),
            total_steps: g.total_steps.clone(),
        };
        serde_json::to_writer(&mut *out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_catalog(input: impl BufRead) -> Result<FunctionCatalog> {
    let mut lines = input.lines();
    let header: CatalogHeader =
        serde_json::from_str(&lines.next().ok_or_else(|| Error::Parse("empty catalog".into()))??)?;
    let mut groups = BTreeMap::new();
    for line in lines {
        let l: CatalogLine = serde_json::from_str(&line?)?;
        let sig: FunctionSignature = l.signature.parse()?;
        groups.insert(sig, FunctionGroup {
                members: l.members,
                fastest: l.fastest,
                fastest_steps: l.fastest_steps,
                total_steps: l.total_steps,
            });
    }
    if groups.len() != header.functions {
        return Err(Error::Parse(format!("catalog declares {} functions, holds {}", header.functions, groups.len())));
    }
    Ok(FunctionCatalog {
        space: header.space,
        probe: header.probe,
        fingerprint: header.fingerprint,
        groups,
        unclassified: header.unclassified,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Jsonl,
}

impl std::str::FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "jsonl" => Ok(TableFormat::Jsonl),
            _ => Err(Error::Parse(format!("unknown table format `{s}` (csv, jsonl)"))),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum HistogramLine {
    Meta { space: SpaceId, inputs: Vec<usize>, exact_limit: u64, machines: u64 },
    Bin { bin_start: u64, bin_end: u64, count: u64 },
    Totals { halted: u64, divergent: u64, budget_exhausted: u64 },
}

/// CSV: `#` metadata comment, `bin_start,bin_end,count` header, one row
/// per bin in step order, then a `total` row. JSONL carries the same rows
/// as tagged objects.
pub fn export_histogram(h: &HaltingHistogram, format: TableFormat) -> String {
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            let inputs: Vec<String> = h.inputs.iter().map(usize::to_string).collect();
            let _ = writeln!(
                out,
                "# space={} inputs={} exact_limit={} machines={} divergent={} budget_exhausted={}",
                h.space,
                inputs.join(";"),
                h.exact_limit,
                h.machines,
                h.divergent,
                h.budget_exhausted
            );
            out.push_str("bin_start,bin_end,count\n");
            for (b, c) in &h.bins {
                let _ = writeln!(out, "{},{},{}", b.start, b.end, c);
            }
            let _ = writeln!(out, "total,,{}", h.halted());
        }
        TableFormat::Jsonl => {
            let mut lines = vec![HistogramLine::Meta {
                space: h.space,
                inputs: h.inputs.clone(),
                exact_limit: h.exact_limit,
                machines: h.machines,
            }];
            lines.extend(h.bins.iter().map(|(b, &c)| HistogramLine::Bin { bin_start: b.start, bin_end: b.end, count: c }));
            lines.push(HistogramLine::Totals {
                halted: h.halted(),
                divergent: h.divergent,
                budget_exhausted: h.budget_exhausted,
            });
            for l in lines {
                out.push_str(&serde_json::to_string(&l).expect("plain data"));
                out.push('\n');
            }
        }
    }
    out
}

pub fn import_histogram(text: &str, format: TableFormat) -> Result<HaltingHistogram> {
    let bad = |m: &str| Error::Parse(format!("histogram: {m}"));
    let mut h = HaltingHistogram {
        space: SpaceId::TWO_TWO,
        inputs: Vec::new(),
        exact_limit: 0,
        bins: BTreeMap::new(),
        divergent: 0,
        budget_exhausted: 0,
        machines: 0,
    };
    let mut halted_total = None;
    match format {
        TableFormat::Csv => {
            let mut lines = text.lines();
            let meta = lines.next().and_then(|l| l.strip_prefix("# ")).ok_or_else(|| bad("missing metadata"))?;
            for field in meta.split_whitespace() {
                let (k, v) = field.split_once('=').ok_or_else(|| bad("metadata field"))?;
                let num = || v.parse::<u64>().map_err(|_| bad(k));
                match k {
                    "space" => h.space = v.parse()?,
                    "inputs" => {
                        h.inputs = v
                            .split(';')
                            .filter(|s| !s.is_empty())
                            .map(|s| s.parse().map_err(|_| bad("inputs")))
                            .collect::<Result<_>>()?
                    }
                    "exact_limit" => h.exact_limit = num()?,
                    "machines" => h.machines = num()?,
                    "divergent" => h.divergent = num()?,
                    "budget_exhausted" => h.budget_exhausted = num()?,
                    _ => return Err(bad(&format!("unknown field {k}"))),
                }
            }
            if lines.next() != Some("bin_start,bin_end,count") {
                return Err(bad("missing column header"));
            }
            for line in lines {
                let cols: Vec<&str> = line.split(',').collect();
                if cols.len() != 3 {
                    return Err(bad(&format!("row `{line}`")));
                }
                let count: u64 = cols[2].parse().map_err(|_| bad("count"))?;
                if cols[0] == "total" {
                    halted_total = Some(count);
                    continue;
                }
                let start = cols[0].parse().map_err(|_| bad("bin_start"))?;
                let end = cols[1].parse().map_err(|_| bad("bin_end"))?;
                h.bins.insert(Bin { start, end }, count);
            }
        }
        TableFormat::Jsonl => {
            for line in text.lines() {
                match serde_json::from_str(line)? {
                    HistogramLine::Meta { space, inputs, exact_limit, machines } => {
                        h.space = space;
                        h.inputs = inputs;
                        h.exact_limit = exact_limit;
                        h.machines = machines;
                    }
                    HistogramLine::Bin { bin_start, bin_end, count } => {
                        h.bins.insert(Bin { start: bin_start, end: bin_end }, count);
                    }
                    HistogramLine::Totals { halted, divergent, budget_exhausted } => {
                        h.divergent = divergent;
                        h.budget_exhausted = budget_exhausted;
                        halted_total = Some(halted);
                    }
                }
            }
        }
    }
    if halted_total != Some(h.halted()) {
        return Err(bad("totals row does not match the bins"));
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagramFormat {
    Ascii,
    Pbm,
    Svg,
}

impl std::str::FromStr for DiagramFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ascii" => Ok(DiagramFormat::Ascii),
            "pbm" | "portable-bitmap" => Ok(DiagramFormat::Pbm),
            "svg" | "scalable-vector" => Ok(DiagramFormat::Svg),
            _ => Err(Error::Parse(format!("unknown diagram format `{s}` (ascii, pbm, svg)"))),
        }
    }
}

pub const GLYPH_WHITE: char = '.';
pub const GLYPH_BLACK: char = '#';
pub const GLYPH_HEAD_WHITE: char = 'o';
pub const GLYPH_HEAD_BLACK: char = '@';

/// Pixel side of one cell in SVG renders.
const SVG_CELL: usize = 8;

/// Renders rows top to bottom with the right edge of the tape on the right.
pub fn render_diagram(d: &SpaceTimeDiagram, format: DiagramFormat) -> String {
    let mut out = String::new();
    // column x shows tape cell width - 1 - x
    let cell = |row: &[u8], x: usize| row[d.width - 1 - x];
    match format {
        DiagramFormat::Ascii => {
            for (row, &head) in d.rows.iter().zip(&d.head_track) {
                for x in 0..d.width {
                    let black = cell(row, x) != WHITE;
                    let on_head = d.width - 1 - x == head;
                    out.push(match (black, on_head) {
                        (false, false) => GLYPH_WHITE,
                        (true, false) => GLYPH_BLACK,
                        (false, true) => GLYPH_HEAD_WHITE,
                        (true, true) => GLYPH_HEAD_BLACK,
                    });
                }
                out.push('\n');
            }
        }
        DiagramFormat::Pbm => {
            let _ = writeln!(out, "P1\n{} {}", d.width, d.height());
            for row in &d.rows {
                let bits: Vec<&str> = (0..d.width).map(|x| if cell(row, x) != WHITE { "1" } else { "0" }).collect();
                out.push_str(&bits.join(" "));
                out.push('\n');
            }
        }
        DiagramFormat::Svg => {
            let (w, h) = (d.width * SVG_CELL, d.height() * SVG_CELL);
            let _ = writeln!(
                out,
                r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
            );
            let _ = writeln!(out, r##"<rect width="{w}" height="{h}" fill="#ffffff"/>"##);
            out.push_str("<g fill=\"#000000\">\n");
            for (y, row) in d.rows.iter().enumerate() {
                for x in 0..d.width {
                    if cell(row, x) != WHITE {
                        let _ = writeln!(
                            out,
                            r#"<rect x="{}" y="{}" width="{SVG_CELL}" height="{SVG_CELL}"/>"#,
                            x * SVG_CELL,
                            y * SVG_CELL
                        );
                    }
                }
            }
            out.push_str("</g>\n<g fill=\"none\" stroke=\"#d04040\">\n");
            for (y, &head) in d.head_track.iter().enumerate() {
                let x = d.width - 1 - head;
                let _ = writeln!(
                    out,
                    r#"<rect x="{}" y="{}" width="{SVG_CELL}" height="{SVG_CELL}"/>"#,
                    x * SVG_CELL,
                    y * SVG_CELL
                );
            }
            out.push_str("</g>\n</svg>\n");
        }
    }
    out
}

/// Parses a plain PBM back into rows of bits, top row first.
pub fn parse_pbm(text: &str) -> Result<(usize, usize, Vec<Vec<u8>>)> {
    let mut tokens = text.split_whitespace();
    if tokens.next() != Some("P1") {
        return Err(Error::Parse("not a plain PBM".into()));
    }
    let mut dim = || -> Result<usize> {
        tokens.next().and_then(|t| t.parse().ok()).ok_or_else(|| Error::Parse("bad PBM size".into()))
    };
    let (w, h) = (dim()?, dim()?);
    let bits: Vec<u8> = text
        .lines()
        .skip(2)
        .flat_map(|l| l.split_whitespace())
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad PBM pixel `{t}`"))))
        .collect::<Result<_>>()?;
    if bits.len() != w * h {
        return Err(Error::Parse(format!("PBM declares {w}x{h} but holds {} pixels", bits.len())));
    }
    Ok((w, h, bits.chunks(w.max(1)).map(<[u8]>::to_vec).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explorer::{classify_functions, sweep_space, SweepOptions};
    use crate::machine::{record_diagram, Rule};

    fn probe() -> ProbeSet {
        ProbeSet::first(4, 500).unwrap()
    }

    #[test]
    fn records_roundtrip() {
        let results = sweep_space(SpaceId::TWO_TWO, &probe(), SweepOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, &probe(), &results.records).unwrap();
        let back = read_records(buf.as_slice(), &probe()).unwrap();
        assert_eq!(back, results.records);
    }

    #[test]
    fn empty_output_is_quoted() {
        let o = ProbeOutcome { status: Status::Halted, steps: 3, output: Some(Default::default()), max_extent: 1 };
        let line = serde_json::to_string(&ResultRecord::from_outcome(7, 0, &o)).unwrap();
        assert!(line.contains(r#""output":"""#), "{line}");
    }

    #[test]
    fn truncated_records_rejected() {
        let results = sweep_space(SpaceId::TWO_TWO, &probe(), SweepOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, &probe(), &results.records[..2]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: Vec<&str> = text.lines().take(6).collect();
        assert!(read_records(cut.join("\n").as_bytes(), &probe()).is_err());
    }

    #[test]
    fn catalog_roundtrip() {
        let results = sweep_space(SpaceId::TWO_TWO, &probe(), SweepOptions::default()).unwrap();
        let catalog = classify_functions(&results).unwrap();
        let mut buf = Vec::new();
        write_catalog(&mut buf, &catalog).unwrap();
        assert_eq!(read_catalog(buf.as_slice()).unwrap(), catalog);
    }

    #[test]
    fn trivial_histogram_export() {
        let mut h = HaltingHistogram::new(SpaceId::TWO_TWO, &ProbeSet::first(21, 5).unwrap());
        h.bins.insert(Bin { start: 1, end: 2 }, 21);
        h.machines = 1;
        let csv = export_histogram(&h, TableFormat::Csv);
        let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#') && !l.starts_with("bin_")).collect();
        assert_eq!(data, vec!["1,2,21", "total,,21"]);
        for format in [TableFormat::Csv, TableFormat::Jsonl] {
            let text = export_histogram(&h, format);
            let back = import_histogram(&text, format).unwrap();
            assert_eq!(back, h);
            assert_eq!(export_histogram(&back, format), text);
        }
    }

    #[test]
    fn ascii_render() {
        let rule = Rule::decode(2205, SpaceId::TWO_TWO).unwrap();
        let d = record_diagram(&rule, 1, 100).unwrap();
        let text = render_diagram(&d, DiagramFormat::Ascii);
        assert_eq!(text.lines().count(), d.height());
        // head starts on the rightmost black cell
        assert!(text.lines().next().unwrap().ends_with(".#@"));
    }

    #[test]
    fn pbm_matches_diagram() {
        let rule = Rule::decode(1351, SpaceId::TWO_TWO).unwrap();
        let d = record_diagram(&rule, 5, 10_000).unwrap();
        let pbm = render_diagram(&d, DiagramFormat::Pbm);
        let (w, h, rows) = parse_pbm(&pbm).unwrap();
        assert_eq!((w, h), (d.width, d.height()));
        assert_eq!(rows.first(), rows.last());
        let black: usize = rows.iter().flatten().map(|&b| b as usize).sum();
        assert_eq!(black, d.black_cells());
    }

    #[test]
    fn svg_has_one_rect_per_black_cell() {
        let rule = Rule::decode(1351, SpaceId::TWO_TWO).unwrap();
        let d = record_diagram(&rule, 3, 10_000).unwrap();
        let svg = render_diagram(&d, DiagramFormat::Svg);
        let black_group = svg.split("<g fill=\"#000000\">").nth(1).unwrap().split("</g>").next().unwrap();
        assert_eq!(black_group.matches("<rect").count(), d.black_cells());
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn manifest_mismatch_refused() {
        let dir = tempfile::tempdir().unwrap();
        let m = Manifest::new(SpaceId::TWO_TWO, probe());
        CheckpointDir::create_or_resume(dir.path(), m.clone()).unwrap();
        let mut other = m.clone();
        other.fingerprint = codec_fingerprint(MoveConvention::OddIsLeft);
        assert!(matches!(
            CheckpointDir::create_or_resume(dir.path(), other),
            Err(Error::FingerprintMismatch(..))
        ));
        let other = Manifest::new(SpaceId::TWO_TWO, ProbeSet::first(5, 500).unwrap());
        assert!(matches!(CheckpointDir::create_or_resume(dir.path(), other), Err(Error::ProbeMismatch(_))));
    }

    #[test]
    fn corrupt_range_detected() {
        let dir = tempfile::tempdir().unwrap();
        let store = CheckpointDir::create_or_resume(dir.path(), Manifest::new(SpaceId::TWO_TWO, probe())).unwrap();
        crate::explorer::sweep_into(SpaceId::TWO_TWO, &probe(), SweepOptions::default(), &store).unwrap();
        let path = store.range_path(&(0..4096));
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, &text[..text.len() / 2]).unwrap();
        let err = store.load_all().unwrap_err();
        assert!(matches!(err, Error::Checkpoint { .. }), "{err}");
    }
}
