use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tmspace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmspace")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn sweep(dir: &Path) {
    let dir = dir.to_str().unwrap();
    stdout(&tmspace(&["sweep", "--space", "2,2", "--inputs", "8", "--budget", "5000", "--escalation", "10", "--out", dir]));
}

#[test]
fn run_renders_ascii() {
    let text = stdout(&tmspace(&["run", "--space", "2,2", "--rule", "2205", "--input", "5", "--render", "ascii"]));
    assert!(text.contains("status: halted"));
    assert!(text.contains("output: 1\n"));
    let diagram: Vec<&str> = text.lines().filter(|l| l.chars().all(|c| ".#o@".contains(c))).collect();
    assert!(diagram.len() > 10);
    assert!(diagram[0].ends_with("#####@"));
}

#[test]
fn divergent_run_reports_certificate() {
    let text = stdout(&tmspace(&["run", "--rule", "0"]));
    assert!(text.contains("status: left-escape"));
    assert!(text.contains("certificate: {\"LeftEscape\""));
}

#[test]
fn sweep_classify_histogram_compare() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s");
    sweep(&path);
    let p = path.to_str().unwrap();
    let text = stdout(&tmspace(&["sweep", "--space", "2,2", "--inputs", "8", "--budget", "5000", "--escalation", "10", "--out", p]));
    assert!(text.contains("committed 0 ranges (1 of 1 resumed)"), "{text}");

    let text = stdout(&tmspace(&["classify", "--in", p]));
    assert!(text.lines().next().unwrap().ends_with("unclassified"), "{text}");
    assert!(path.join("catalog.jsonl").exists());

    let csv = stdout(&tmspace(&["histogram", "--in", p, "--format", "csv"]));
    assert!(csv.starts_with("# space=(2,2)"));
    assert!(csv.lines().nth(1) == Some("bin_start,bin_end,count"));
    assert!(csv.lines().last().unwrap().starts_with("total,,"));

    let out = dir.path().join("h.jsonl");
    stdout(&tmspace(&["histogram", "--in", p, "--format", "jsonl", "--out", out.to_str().unwrap()]));
    assert!(fs::read_to_string(out).unwrap().lines().all(|l| l.starts_with('{')));

    let text = stdout(&tmspace(&["compare", "--small", p, "--large", p]));
    let catalog = fs::read_to_string(path.join("catalog.jsonl")).unwrap();
    let functions = catalog.lines().count() - 1;
    assert!(text.contains(&format!("contained: {functions}/{functions}")), "{text}");
    assert!(text.contains("speedup 0"));
}

#[test]
fn compare_refuses_other_fingerprint() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    sweep(&a);
    sweep(&b);
    let manifest = b.join("manifest.json");
    let text = fs::read_to_string(&manifest).unwrap().replace("move=odd-right", "move=odd-left");
    fs::write(&manifest, text).unwrap();
    let out = tmspace(&["compare", "--small", a.to_str().unwrap(), "--large", b.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fingerprint"));
}

#[test]
fn render_pbm_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.pbm");
    stdout(&tmspace(&["render", "--rule", "1351", "--input", "5", "--format", "pbm", "--out", out.to_str().unwrap()]));
    let text = fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("P1"));
    let dims: Vec<usize> = lines.next().unwrap().split(' ').map(|t| t.parse().unwrap()).collect();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), dims[1]);
    assert!(rows.iter().all(|r| r.split(' ').count() == dims[0]));
    assert_eq!(rows.first(), rows.last());
}

#[test]
fn dimension_prints_estimate() {
    let text = stdout(&tmspace(&["dimension", "--rule", "1351", "--inputs", "13"]));
    assert!(text.contains("trend: "));
    assert!(text.contains("runtime: exponential"), "{text}");
}

#[test]
fn config_file_supplies_options() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    fs::write(&config, "# calibration rule\nrule = 1351\ninput = 3\nspace=2,2\n").unwrap();
    let c = config.to_str().unwrap();
    let text = stdout(&tmspace(&["--config", c, "run"]));
    assert!(text.contains("steps: 61"), "{text}");
    // the command line wins over the file
    let text = stdout(&tmspace(&["run", "--config", c, "--input", "0"]));
    assert!(text.contains("steps: 5"), "{text}");
}

#[test]
fn bad_invocations_fail() {
    assert!(!tmspace(&["run", "--rule", "1", "--bogus"]).status.success());
    assert!(!tmspace(&["frobnicate"]).status.success());
    assert!(!tmspace(&["run", "--rule", "4096"]).status.success());

    let dir = tempfile::tempdir().unwrap();
    let big = dir.path().join("big");
    let out = tmspace(&["sweep", "--space", "4,2", "--out", big.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("feasibility bound"));
    assert!(!big.exists());

    let config = dir.path().join("bad.conf");
    fs::write(&config, "rule 1351\n").unwrap();
    let out = tmspace(&["--config", config.to_str().unwrap(), "run"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("key = value"));
}
