use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use tmspace::analysis::{correspondence_report, fit_runtime_class, fractal_dimension, slowdown_report, Aggregate, Representative, Verdict};
use tmspace::explorer::{
    check_feasible, containment_check, escalate_to_fixpoint, sweep_into, ProbeSet, SweepOptions, DEFAULT_BUDGET_THREE_TWO,
    DEFAULT_BUDGET_TWO_TWO,
};
use tmspace::io::{export_histogram, render_diagram, CheckpointDir, DiagramFormat, Manifest, TableFormat};
use tmspace::machine::record_diagram;
use tmspace::{run, Error, Result, Rule, SpaceId};

/// Explore small Turing machine rule spaces.
#[derive(Parser)]
#[command(name = "tmspace", version, args_override_self = true)]
struct Cli {
    /// File of `key = value` lines used as defaults for the subcommand's
    /// long options. Command-line options win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one machine on one input.
    Run(RunArgs),
    /// Sweep a rule space into a checkpoint directory. Resumes if the
    /// directory already holds part of the same sweep.
    Sweep(SweepArgs),
    /// Group a finished sweep by computed function, escalating the budget
    /// for unclassified machines, and save the catalog.
    Classify(ClassifyArgs),
    /// Export the halting-time histogram of a sweep.
    Histogram(HistogramArgs),
    /// Estimate the box-counting dimension and runtime class of one machine.
    Dimension(DimensionArgs),
    /// Compare the catalogs of a smaller and a larger space.
    Compare(CompareArgs),
    /// Render a space-time diagram.
    Render(RenderArgs),
    /// Runtime class against dimension for every machine of a sweep that
    /// halts on all inputs.
    Report(ReportArgs),
}

#[derive(Args)]
struct MachineArgs {
    #[arg(long, default_value = "2,2")]
    space: SpaceId,
    #[arg(long)]
    rule: u64,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    machine: MachineArgs,
    #[arg(long, default_value_t = 0)]
    input: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET_TWO_TWO)]
    budget: u64,
    /// Also render the space-time diagram if the run halts.
    #[arg(long, value_name = "FORMAT")]
    render: Option<DiagramFormat>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "2,2")]
    space: SpaceId,
    /// Probe inputs 0..N.
    #[arg(long, default_value_t = 21)]
    inputs: usize,
    /// Step budget per run; defaults depend on the space.
    #[arg(long)]
    budget: Option<u64>,
    /// Comma-separated budget factors for `classify`.
    #[arg(long, value_delimiter = ',')]
    escalation: Vec<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
    /// Sweep spaces above the feasibility bound.
    #[arg(long)]
    force: bool,
    /// Stop after committing this many ranges.
    #[arg(long)]
    max_ranges: Option<usize>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Sweep directory.
    #[arg(long = "in", alias = "dir", value_name = "DIR")]
    dir: PathBuf,
    /// Never escalate past this budget.
    #[arg(long, default_value_t = 100_000_000)]
    max_budget: u64,
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
}

#[derive(Args)]
struct HistogramArgs {
    /// Sweep directory.
    #[arg(long = "in", alias = "dir", value_name = "DIR")]
    dir: PathBuf,
    #[arg(long, default_value = "csv")]
    format: TableFormat,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DimensionArgs {
    #[command(flatten)]
    machine: MachineArgs,
    #[arg(long, default_value_t = 21)]
    inputs: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET_TWO_TWO)]
    budget: u64,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    small: PathBuf,
    #[arg(long)]
    large: PathBuf,
    /// Whose steps stand for a function: fastest or member-mean.
    #[arg(long, default_value = "fastest")]
    representative: Representative,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    machine: MachineArgs,
    #[arg(long, default_value_t = 0)]
    input: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET_TWO_TWO)]
    budget: u64,
    #[arg(long, default_value = "ascii")]
    format: DiagramFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Sweep directory.
    #[arg(long = "in", alias = "dir", value_name = "DIR")]
    dir: PathBuf,
    /// Step budget for the dimension runs.
    #[arg(long, default_value_t = DEFAULT_BUDGET_TWO_TWO)]
    budget: u64,
}

fn main() -> ExitCode {
    let args = match with_config(std::env::args().collect()) {
        Ok(args) => args,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::command().try_get_matches_from(args).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let mut out = String::new();
    let result = dispatch(cli.command, &mut out);
    // a closed pipe downstream is not an error
    match std::io::stdout().write_all(out.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
        _ => {}
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Splices `--key value` pairs from a `--config` file in right after the
/// subcommand name, so later command-line options override them.
fn with_config(mut args: Vec<String>) -> Result<Vec<String>> {
    let Some(pos) = args.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args);
    };
    let path = match args[pos].strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => args.get(pos + 1).cloned().ok_or_else(|| Error::Parse("--config needs a file".into()))?,
    };
    let text = fs::read_to_string(&path).map_err(|e| Error::Parse(format!("config {path}: {e}")))?;
    let mut extra = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config {path}:{}: expected key = value", i + 1)))?;
        let (key, value) = (key.trim().replace('_', "-"), value.trim());
        match value {
            "true" => extra.push(format!("--{key}")),
            "false" => {}
            _ => extra.push(format!("--{key}={value}")),
        }
    }
    let subcommand = args
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-') && *a != path)
        .map(|i| i + 2)
        .unwrap_or(args.len());
    args.splice(subcommand..subcommand, extra);
    Ok(args)
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {{
        let _ = writeln!($out, $($arg)*);
    }};
}

fn dispatch(command: Command, out: &mut String) -> Result<()> {
    match command {
        Command::Run(a) => {
            let rule = Rule::decode(a.machine.rule, a.machine.space)?;
            let outcome = run(&rule, a.input, a.budget);
            say!(out, "status: {}", outcome.status.as_str());
            say!(out, "steps: {}", outcome.steps);
            if let Some(w) = &outcome.output {
                say!(out, "output: {w}");
            }
            say!(out, "max_extent: {}", outcome.max_extent);
            if let Some(c) = &outcome.certificate {
                say!(out, "certificate: {}", serde_json::to_string(c)?);
            }
            if let (Some(format), Some(_)) = (a.render, &outcome.output) {
                out.push_str(&render_diagram(&record_diagram(&rule, a.input, a.budget)?, format));
            }
        }
        Command::Sweep(a) => {
            let budget = a.budget.unwrap_or(if a.space == SpaceId::TWO_TWO {
                DEFAULT_BUDGET_TWO_TWO
            } else {
                DEFAULT_BUDGET_THREE_TWO
            });
            check_feasible(a.space, a.force)?;
            let probe = ProbeSet::first(a.inputs, budget)?.with_escalation(a.escalation);
            let store = CheckpointDir::create_or_resume(&a.out, Manifest::new(a.space, probe.clone()))?;
            let before = store.committed_ranges()?;
            let options = SweepOptions { parallelism: a.parallelism, force: a.force, max_ranges: a.max_ranges };
            let done = sweep_into(a.space, &probe, options, &store)?;
            let total = tmspace::explorer::ranges(a.space).count();
            say!(out, "committed {done} ranges ({} of {total} resumed)", before);
            say!(out, "complete: {}", store.is_complete()?);
        }
        Command::Classify(a) => {
            let store = CheckpointDir::open(&a.dir)?;
            let catalog = escalate_to_fixpoint(&store.classify()?, a.max_budget, a.parallelism)?;
            store.save_catalog(&catalog)?;
            say!(out, "{} functions, {} unclassified", catalog.function_count(), catalog.unclassified.len());
            say!(out, "space: {}", catalog.space);
            say!(out, "classified machines: {}", catalog.classified_count());
            say!(out, "unclassified machines: {}", catalog.unclassified.len());
            say!(out, "final budget: {}", catalog.probe.budget);
            if !catalog.unclassified.is_empty() && catalog.unclassified.len() <= 20 {
                say!(out, "unclassified: {:?}", catalog.unclassified);
            }
        }
        Command::Histogram(a) => {
            let store = CheckpointDir::open(&a.dir)?;
            let text = export_histogram(&store.histogram()?, a.format);
            emit(a.out.as_deref(), &text, out)?;
        }
        Command::Dimension(a) => {
            let rule = Rule::decode(a.machine.rule, a.machine.space)?;
            let probe = ProbeSet::first(a.inputs, a.budget)?;
            let estimate = fractal_dimension(&rule, &probe, a.budget)?;
            for (n, d) in &estimate.per_input {
                say!(out, "n={n} d={d:.4}");
            }
            match estimate.extrapolated {
                Some(d) => say!(out, "extrapolated: {d:.4}"),
                None => say!(out, "extrapolated: degenerate"),
            }
            say!(out, "trend: {:?}", estimate.trend);
            let times: Vec<(usize, u64)> =
                probe.inputs().iter().map(|&n| (n, run(&rule, n, a.budget).steps)).collect();
            say!(out, "runtime: {}", fit_runtime_class(&times)?.class);
        }
        Command::Compare(a) => {
            let small = CheckpointDir::open(&a.small)?.load_catalog()?;
            let large = CheckpointDir::open(&a.large)?.load_catalog()?;
            let containment = containment_check(&small, &large)?;
            say!(out, "contained: {}/{}", containment.contained, containment.checked);
            for sig in &containment.violations {
                say!(out, "missing: {}", sig.encode());
            }
            let report = slowdown_report(&small, &large, a.representative)?;
            say!(
                out,
                "compared: {} (skipped {} never-halting, representative {})",
                report.entries.len(),
                report.skipped,
                a.representative.name()
            );
            for agg in Aggregate::ALL {
                say!(out, 
                    "{}: slowdown {} tie {} speedup {}",
                    agg.name(),
                    report.tally(agg, Verdict::SlowDown),
                    report.tally(agg, Verdict::Tie),
                    report.tally(agg, Verdict::SpeedUp)
                );
            }
            for e in report.speedups() {
                say!(out, 
                    "speedup: {} small={} large={} max_ratio={:.3} at_most_linear={}",
                    e.signature,
                    e.small_rule,
                    e.large_rule,
                    e.max_speedup_ratio(),
                    e.speedup_at_most_linear()
                );
            }
        }
        Command::Render(a) => {
            let rule = Rule::decode(a.machine.rule, a.machine.space)?;
            let diagram = record_diagram(&rule, a.input, a.budget)?;
            emit(a.out.as_deref(), &render_diagram(&diagram, a.format), out)?;
        }
        Command::Report(a) => {
            let store = CheckpointDir::open(&a.dir)?;
            let m = store.manifest();
            let records = store.load_all()?;
            let report = correspondence_report(m.space, &m.probe, &records, a.budget)?;
            say!(out, 
                "linear: {}/{} at or above high dimension ({:.3})",
                report.linear_high,
                report.linear,
                report.linear_agreement()
            );
            say!(out, 
                "exponential: {}/{} at or below low dimension ({:.3})",
                report.exponential_low,
                report.exponential,
                report.exponential_agreement()
            );
            say!(out, "exceptions: {:?}", report.exceptions);
        }
    }
    Ok(())
}

fn emit(out_path: Option<&Path>, text: &str, out: &mut String) -> Result<()> {
    match out_path {
        Some(path) => fs::write(path, text)?,
        None => out.push_str(text),
    }
    Ok(())
}
