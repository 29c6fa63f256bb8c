//! Sound, incomplete non-halting detectors.
//!
//! Every certificate produced here can be re-checked by replaying the
//! machine with [`DivergenceCertificate::verify`]. A detector that finds
//! nothing never implies anything about halting.

use serde::{Deserialize, Serialize};

use crate::machine::{Configuration, Rule, Shift, StepResult, WHITE};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DivergenceCertificate {
    /// At `step` the head sat on a never-visited cell in the first state of
    /// `states`, and each state in the closure reads white, writes white and
    /// moves left into the next one.
    LeftEscape { step: u64, states: Vec<u8> },
    /// The configuration at `second` equals the one at `first`.
    ExactCycle { first: u64, second: u64 },
    /// At both steps the head stood on a freshly visited cell in the same
    /// state, `shift` cells apart, and the `window + 1` cells from the head
    /// rightward were identical. Between the two steps the head never went
    /// more than `window` cells right of the visited extent.
    TranslatedCycle { first: u64, second: u64, shift: usize, window: usize },
}

/// Per-state answer to "does the head walk left forever from blank tape?".
#[derive(Debug, Clone)]
pub struct EscapeTable {
    closures: Vec<Option<Vec<u8>>>,
}

impl EscapeTable {
    pub fn new(rule: &Rule) -> Self {
        let closures = (0..rule.space().states()).map(|q| escape_closure(rule, q)).collect();
        EscapeTable { closures }
    }

    #[inline]
    pub fn escape_from(&self, state: u8) -> Option<&[u8]> {
        self.closures[state as usize].as_deref()
    }
}

/// States reached from `start` by white-reading transitions, if every one
/// of them writes white and moves left.
pub fn escape_closure(rule: &Rule, start: u8) -> Option<Vec<u8>> {
    let mut seen = Vec::new();
    let mut state = start;
    while !seen.contains(&state) {
        let action = rule.action(state, WHITE);
        if action.write != WHITE || action.shift != Shift::Left {
            return None;
        }
        seen.push(state);
        state = action.next_state;
    }
    Some(seen)
}

/// Checks whether the head is on blank tape and escapes.
pub fn detect_left_escape(config: &Configuration, rule: &Rule) -> Option<DivergenceCertificate> {
    if !config.in_blank_region() {
        return None;
    }
    escape_closure(rule, config.state)
        .map(|states| DivergenceCertificate::LeftEscape { step: config.steps, states })
}

struct ExactSnapshot {
    step: u64,
    head: usize,
    state: u8,
    tape: Vec<u8>,
}

struct RecordSnapshot {
    step: u64,
    head: usize,
    tape: Vec<u8>,
    max_back: usize,
}

/// Cycle detection by Brent-style snapshots.
///
/// Exact recurrences are checked against one snapshot taken at doubling
/// step counts. Translated recurrences are checked only at steps where the
/// head visits a new cell, against one snapshot per state.
pub struct CycleDetector {
    exact: Option<ExactSnapshot>,
    next_exact_save: u64,
    records: Vec<Option<RecordSnapshot>>,
    extent: usize,
}

impl CycleDetector {
    pub fn new(states: u8) -> Self {
        CycleDetector {
            exact: None,
            next_exact_save: 1,
            records: (0..states).map(|_| None).collect(),
            extent: 0,
        }
    }

    pub fn reset(&mut self, start: &Configuration) {
        self.exact = None;
        self.next_exact_save = 1;
        self.records.iter_mut().for_each(|r| *r = None);
        self.extent = start.tape.len();
    }

    /// Feeds the configuration after each step.
    #[inline]
    pub fn observe(&mut self, config: &Configuration) -> Option<DivergenceCertificate> {
        let grew = config.tape.len() > self.extent;
        self.extent = config.tape.len();
        let back = self.extent - 1 - config.head;
        for snap in self.records.iter_mut().flatten() {
            snap.max_back = snap.max_back.max(back);
        }
        if grew {
            if let Some(cert) = self.observe_record(config) {
                return Some(cert);
            }
        } else if let Some(cert) = self.observe_exact(config) {
            return Some(cert);
        }
        if config.steps >= self.next_exact_save {
            self.exact = Some(ExactSnapshot {
                step: config.steps,
                head: config.head,
                state: config.state,
                tape: trimmed(&config.tape).to_vec(),
            });
            self.next_exact_save = config.steps.saturating_mul(2);
        }
        None
    }

    fn observe_exact(&self, config: &Configuration) -> Option<DivergenceCertificate> {
        let snap = self.exact.as_ref()?;
        if snap.head != config.head || snap.state != config.state {
            return None;
        }
        if trimmed(&config.tape) != snap.tape.as_slice() {
            return None;
        }
        Some(DivergenceCertificate::ExactCycle { first: snap.step, second: config.steps })
    }

    fn observe_record(&mut self, config: &Configuration) -> Option<DivergenceCertificate> {
        let slot = &mut self.records[config.state as usize];
        if let Some(snap) = slot {
            let window = snap.max_back;
            if window <= snap.head
                && snap.tape[snap.head - window..=snap.head]
                    == config.tape[config.head - window..=config.head]
            {
                return Some(DivergenceCertificate::TranslatedCycle {
                    first: snap.step,
                    second: config.steps,
                    shift: config.head - snap.head,
                    window,
                });
            }
        }
        let replace = match slot {
            None => true,
            Some(snap) => config.steps >= snap.step.saturating_mul(2),
        };
        if replace {
            *slot = Some(RecordSnapshot {
                step: config.steps,
                head: config.head,
                tape: config.tape.clone(),
                max_back: 0,
            });
        }
        None
    }
}

fn trimmed(tape: &[u8]) -> &[u8] {
    let len = tape.iter().rposition(|&c| c != WHITE).map_or(0, |i| i + 1);
    &tape[..len]
}

impl DivergenceCertificate {
    /// Replays `rule` on input `n` and re-checks the claim.
    pub fn verify(&self, rule: &Rule, n: usize) -> bool {
        match self {
            DivergenceCertificate::LeftEscape { step, states } => {
                let Some(config) = replay(rule, n, *step) else { return false };
                config.in_blank_region()
                    && escape_closure(rule, config.state).as_deref() == Some(states.as_slice())
            }
            DivergenceCertificate::ExactCycle { first, second } => {
                if first >= second {
                    return false;
                }
                let (Some(a), Some(b)) = (replay(rule, n, *first), replay(rule, n, *second)) else {
                    return false;
                };
                a.head == b.head && a.state == b.state && trimmed(&a.tape) == trimmed(&b.tape)
            }
            DivergenceCertificate::TranslatedCycle { first, second, shift, window } => {
                verify_translated(rule, n, *first, *second, *shift, *window)
            }
        }
    }
}

/// Steps a fresh input `n` exactly `steps` times; `None` if it halts first.
fn replay(rule: &Rule, n: usize, steps: u64) -> Option<Configuration> {
    let mut config = Configuration::input(n);
    while config.steps < steps {
        if config.step(rule) == StepResult::Halted {
            return None;
        }
    }
    Some(config)
}

fn verify_translated(rule: &Rule, n: usize, first: u64, second: u64, shift: usize, window: usize) -> bool {
    if first >= second || shift == 0 {
        return false;
    }
    let Some(mut config) = replay(rule, n, first) else { return false };
    let fresh = |c: &Configuration| c.head + 1 == c.tape.len() && c.tape[c.head] == WHITE;
    if !fresh(&config) {
        return false;
    }
    let start = config.clone();
    let mut max_back = 0;
    while config.steps < second {
        if config.step(rule) == StepResult::Halted {
            return false;
        }
        max_back = max_back.max(config.tape.len() - 1 - config.head);
    }
    fresh(&config)
        && config.state == start.state
        && config.head == start.head + shift
        && max_back <= window
        && window <= start.head
        && start.tape[start.head - window..=start.head]
            == config.tape[config.head - window..=config.head]
}
