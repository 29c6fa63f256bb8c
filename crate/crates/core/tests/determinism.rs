use std::fs;

use tmspace::explorer::{sweep_into, sweep_space, ProbeSet, SweepOptions, DEFAULT_BUDGET_TWO_TWO};
use tmspace::io::{write_records, CheckpointDir, Manifest, RANGES_DIR};
use tmspace::SpaceId;

fn options(parallelism: usize, max_ranges: Option<usize>) -> SweepOptions {
    SweepOptions { parallelism, force: false, max_ranges }
}

#[test]
fn parallelism_does_not_change_bytes() {
    let probe = ProbeSet::first(21, DEFAULT_BUDGET_TWO_TWO).unwrap();
    let mut outputs = Vec::new();
    for parallelism in [1, 8] {
        let dir = tempfile::tempdir().unwrap();
        let store = CheckpointDir::create_or_resume(dir.path(), Manifest::new(SpaceId::TWO_TWO, probe.clone())).unwrap();
        sweep_into(SpaceId::TWO_TWO, &probe, options(parallelism, None), &store).unwrap();
        assert!(store.is_complete().unwrap());
        outputs.push(store.canonical_bytes().unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);

    let in_memory = sweep_space(SpaceId::TWO_TWO, &probe, options(8, None)).unwrap();
    let mut bytes = Vec::new();
    write_records(&mut bytes, &probe, &in_memory.records).unwrap();
    assert_eq!(bytes, outputs[0]);
}

#[test]
fn resumed_sweep_equals_uninterrupted() {
    let probe = ProbeSet::first(21, 2_000).unwrap();
    let space = SpaceId::THREE_TWO;

    let whole = tempfile::tempdir().unwrap();
    let store = CheckpointDir::create_or_resume(whole.path(), Manifest::new(space, probe.clone())).unwrap();
    assert_eq!(sweep_into(space, &probe, options(8, Some(6)), &store).unwrap(), 6);
    let expected = store.canonical_bytes().unwrap();

    let parts = tempfile::tempdir().unwrap();
    let first = CheckpointDir::create_or_resume(parts.path(), Manifest::new(space, probe.clone())).unwrap();
    assert_eq!(sweep_into(space, &probe, options(1, Some(2)), &first).unwrap(), 2);
    // a crash mid-commit leaves only a temp file behind
    fs::write(parts.path().join(RANGES_DIR).join("0000008192-0000012288.tmp"), b"{\"rule\":81").unwrap();
    drop(first);

    let resumed = CheckpointDir::create_or_resume(parts.path(), Manifest::new(space, probe.clone())).unwrap();
    assert_eq!(resumed.committed_ranges().unwrap(), 2);
    assert_eq!(sweep_into(space, &probe, options(4, Some(4)), &resumed).unwrap(), 4);
    assert_eq!(resumed.canonical_bytes().unwrap(), expected);
    // nothing left to do for the first six ranges
    assert_eq!(sweep_into(space, &probe, options(1, Some(0)), &resumed).unwrap(), 0);
}

#[test]
fn resume_with_other_budget_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let probe = ProbeSet::first(21, 2_000).unwrap();
    CheckpointDir::create_or_resume(dir.path(), Manifest::new(SpaceId::TWO_TWO, probe)).unwrap();
    let other = ProbeSet::first(21, 3_000).unwrap();
    assert!(CheckpointDir::create_or_resume(dir.path(), Manifest::new(SpaceId::TWO_TWO, other)).is_err());
}
