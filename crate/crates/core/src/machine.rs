//! The machine model: rule-number codec, right-bounded tape, single-step
//! semantics and the bounded run loop.
//!
//! The tape is anchored at its bounded right edge. Cell index 0 is the
//! rightmost cell and indices grow to the left without bound. A machine
//! halts when it is on cell 0 and is told to move right.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::detect::{CycleDetector, DivergenceCertificate, EscapeTable};
use crate::error::{Error, Result};

pub const WHITE: u8 = 0;
pub const BLACK: u8 = 1;

/// An `(s, k)` rule space: `s` head states, `k` tape colors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpaceId {
    states: u8,
    colors: u8,
}

impl SpaceId {
    pub const TWO_TWO: SpaceId = SpaceId { states: 2, colors: 2 };
    pub const THREE_TWO: SpaceId = SpaceId { states: 3, colors: 2 };
    pub const FOUR_TWO: SpaceId = SpaceId { states: 4, colors: 2 };

    pub fn new(states: u8, colors: u8) -> Result<Self> {
        if states < 1 || colors < 2 {
            return Err(Error::InvalidSpace { states, colors });
        }
        let space = SpaceId { states, colors };
        if space.checked_size().is_none() {
            return Err(Error::InvalidSpace { states, colors });
        }
        Ok(space)
    }

    pub fn states(&self) -> u8 {
        self.states
    }

    pub fn colors(&self) -> u8 {
        self.colors
    }

    /// Number of `(state, color)` cases in a transition table.
    pub fn cases(&self) -> usize {
        self.states as usize * self.colors as usize
    }

    /// Radix of the rule-number digits: one digit per case.
    pub fn radix(&self) -> u64 {
        2 * self.states as u64 * self.colors as u64
    }

    fn checked_size(&self) -> Option<u64> {
        self.radix().checked_pow(self.cases() as u32)
    }

    /// Number of machines in the space, `(2sk)^(sk)`.
    pub fn size(&self) -> u64 {
        self.checked_size().expect("validated at construction")
    }
}

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.states, self.colors)
    }
}

impl std::str::FromStr for SpaceId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (a, b) = trimmed
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("space must look like `s,k`, got `{s}`")))?;
        let states = a
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad state count `{a}`")))?;
        let colors = b
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad color count `{b}`")))?;
        SpaceId::new(states, colors)
    }
}

/// Head movement. `Right` is toward the bounded edge (cell 0), `Left` is
/// toward the unbounded end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shift {
    Left,
    Right,
}

/// Which parity of the move bit in a rule digit means `Left`.
///
/// The numbering scheme fixes everything about a digit except this. Both
/// readings are supported; [`MoveConvention::PINNED`] is the one under which
/// rule 2205 erases its input to a single black cell in linear time and rule
/// 1351 computes the identity in exponential time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoveConvention {
    /// Move bit 1 means left, 0 means right.
    OddIsLeft,
    /// Move bit 1 means right, 0 means left.
    OddIsRight,
}

impl MoveConvention {
    pub const PINNED: MoveConvention = MoveConvention::OddIsRight;

    pub fn shift(self, bit: u64) -> Shift {
        match (self, bit & 1) {
            (MoveConvention::OddIsLeft, 1) | (MoveConvention::OddIsRight, 0) => Shift::Left,
            _ => Shift::Right,
        }
    }

    pub fn bit(self, shift: Shift) -> u64 {
        match (self, shift) {
            (MoveConvention::OddIsLeft, Shift::Left) | (MoveConvention::OddIsRight, Shift::Right) => 1,
            _ => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MoveConvention::OddIsLeft => "odd-left",
            MoveConvention::OddIsRight => "odd-right",
        }
    }
}

/// Identifies every convention that changes what a rule number means or
/// what a run reports. Persisted results carry it; analyses refuse to mix
/// results with different fingerprints.
pub fn codec_fingerprint(convention: MoveConvention) -> String {
    format!(
        "move={};digits=state-asc/color-desc;halt-write=applied;start=state0@edge;input=unary+1",
        convention.name()
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub write: u8,
    pub shift: Shift,
    pub next_state: u8,
}

/// A decoded transition table together with its rule number.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    space: SpaceId,
    number: u64,
    convention: MoveConvention,
    // indexed by state * colors + color
    table: Vec<Action>,
}

impl Rule {
    /// Decodes `number` under the pinned move convention.
    pub fn decode(number: u64, space: SpaceId) -> Result<Rule> {
        Rule::decode_with(number, space, MoveConvention::PINNED)
    }

    /// Decodes `number` written as `s*k` base-`2sk` digits, most significant
    /// first. Digit positions run over states ascending and, within a state,
    /// colors descending.
    pub fn decode_with(number: u64, space: SpaceId, convention: MoveConvention) -> Result<Rule> {
        let size = space.size();
        if number >= size {
            return Err(Error::RuleOutOfRange { rule: number, space, size });
        }
        let radix = space.radix();
        let k = space.colors as u64;
        let mut table = vec![
            Action { write: 0, shift: Shift::Left, next_state: 0 };
            space.cases()
        ];
        let mut rest = number;
        // least significant digit belongs to the last position in canonical order
        for position in (0..space.cases()).rev() {
            let digit = rest % radix;
            rest /= radix;
            let (state, color) = case_at(space, position);
            table[state as usize * space.colors as usize + color as usize] = Action {
                next_state: (digit / (2 * k)) as u8,
                write: ((digit % (2 * k)) / 2) as u8,
                shift: convention.shift(digit % 2),
            };
        }
        Ok(Rule { space, number, convention, table })
    }

    /// Builds a rule from an explicit table indexed by `state * k + color`.
    pub fn from_table(space: SpaceId, convention: MoveConvention, table: Vec<Action>) -> Result<Rule> {
        if table.len() != space.cases() {
            return Err(Error::InvalidTable(format!(
                "expected {} entries, got {}",
                space.cases(),
                table.len()
            )));
        }
        for a in &table {
            if a.write >= space.colors || a.next_state >= space.states {
                return Err(Error::InvalidTable(format!("action {a:?} outside {space}")));
            }
        }
        let mut rule = Rule { space, number: 0, convention, table };
        rule.number = rule.encode();
        Ok(rule)
    }

    /// Recomputes the rule number from the table.
    pub fn encode(&self) -> u64 {
        let radix = self.space.radix();
        let k = self.space.colors as u64;
        (0..self.space.cases()).fold(0u64, |acc, position| {
            let (state, color) = case_at(self.space, position);
            let a = self.action(state, color);
            let digit = a.next_state as u64 * 2 * k
                + a.write as u64 * 2
                + self.convention.bit(a.shift);
            acc * radix + digit
        })
    }

    pub fn number(&self) -> u64 {
        self.number
    }

    pub fn space(&self) -> SpaceId {
        self.space
    }

    pub fn convention(&self) -> MoveConvention {
        self.convention
    }

    #[inline]
    pub fn action(&self, state: u8, color: u8) -> Action {
        self.table[state as usize * self.space.colors as usize + color as usize]
    }

    pub fn table(&self) -> &[Action] {
        &self.table
    }
}

/// `(state, color)` at a digit position, most significant first.
fn case_at(space: SpaceId, position: usize) -> (u8, u8) {
    let k = space.colors as usize;
    let state = position / k;
    let color = k - 1 - position % k;
    (state as u8, color as u8)
}

/// Tape contents, head and state of a machine mid-run.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    /// Visited cells; index 0 is the right edge. Cells past the end are white.
    pub tape: Vec<u8>,
    pub head: usize,
    pub state: u8,
    pub steps: u64,
}

/// Result of a single step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepResult {
    Moved,
    /// The head fell off the right edge. The write has been applied and the
    /// step counted.
    Halted,
}

impl Configuration {
    /// Input `n` is `n + 1` black cells at the right edge; the head starts on
    /// cell 0 in state 0.
    pub fn input(n: usize) -> Configuration {
        Configuration { tape: vec![BLACK; n + 1], head: 0, state: 0, steps: 0 }
    }

    #[inline]
    pub fn read(&self, index: usize) -> u8 {
        self.tape.get(index).copied().unwrap_or(WHITE)
    }

    #[inline]
    pub fn step(&mut self, rule: &Rule) -> StepResult {
        let action = rule.action(self.state, self.tape[self.head]);
        self.tape[self.head] = action.write;
        self.state = action.next_state;
        self.steps += 1;
        match action.shift {
            Shift::Right => {
                if self.head == 0 {
                    return StepResult::Halted;
                }
                self.head -= 1;
            }
            Shift::Left => {
                self.head += 1;
                if self.head == self.tape.len() {
                    self.tape.push(WHITE);
                }
            }
        }
        StepResult::Moved
    }

    /// True when every cell from the head leftward is white.
    pub fn in_blank_region(&self) -> bool {
        self.tape[self.head..].iter().all(|&c| c == WHITE)
    }

    pub fn output(&self) -> OutputWord {
        OutputWord::from_tape(&self.tape)
    }
}

/// Halt tape read from the leftmost black cell to the right edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct OutputWord(Vec<u8>);

impl OutputWord {
    /// `tape` is indexed from the right edge, as in [`Configuration`].
    pub fn from_tape(tape: &[u8]) -> OutputWord {
        match tape.iter().rposition(|&c| c != WHITE) {
            Some(last) => OutputWord(tape[..=last].iter().rev().copied().collect()),
            None => OutputWord(Vec::new()),
        }
    }

    /// Cells in reading order, leftmost first.
    pub fn cells(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn black_count(&self) -> usize {
        self.0.iter().filter(|&&c| c != WHITE).count()
    }

    /// The word a fresh input `n` reads as.
    pub fn unary(n: usize) -> OutputWord {
        OutputWord(vec![BLACK; n + 1])
    }
}

impl fmt::Display for OutputWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.0 {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for OutputWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let cells = s
            .bytes()
            .map(|b| match b {
                b'0' => Ok(WHITE),
                b'1' => Ok(BLACK),
                _ => Err(Error::Parse(format!("output word `{s}` is not a 0/1 string"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        if cells.first() == Some(&WHITE) {
            return Err(Error::Parse(format!("output word `{s}` has a leading white cell")));
        }
        Ok(OutputWord(cells))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Status {
    Halted,
    BudgetExhausted,
    DivergentLeftEscape,
    DivergentCycle,
}

impl Status {
    pub fn is_divergent(self) -> bool {
        matches!(self, Status::DivergentLeftEscape | Status::DivergentCycle)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Halted => "halted",
            Status::BudgetExhausted => "budget",
            Status::DivergentLeftEscape => "left-escape",
            Status::DivergentCycle => "cycle",
        }
    }
}

impl std::str::FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "halted" => Status::Halted,
            "budget" => Status::BudgetExhausted,
            "left-escape" => Status::DivergentLeftEscape,
            "cycle" => Status::DivergentCycle,
            _ => return Err(Error::Parse(format!("unknown status `{s}`"))),
        })
    }
}

/// What happened when one machine ran on one input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub status: Status,
    pub steps: u64,
    /// Present iff the run halted.
    pub output: Option<OutputWord>,
    /// Largest cell index the head ever visited.
    pub max_extent: usize,
    pub certificate: Option<DivergenceCertificate>,
}

/// Runs `rule` on input `n` for at most `budget` steps.
pub fn run(rule: &Rule, n: usize, budget: u64) -> RunOutcome {
    Runner::new(rule).run(n, budget)
}

/// Reusable run loop for one rule; keeps the detector scratch space between
/// inputs.
pub struct Runner<'r> {
    rule: &'r Rule,
    escapes: EscapeTable,
    cycles: CycleDetector,
}

impl<'r> Runner<'r> {
    pub fn new(rule: &'r Rule) -> Self {
        Runner { rule, escapes: EscapeTable::new(rule), cycles: CycleDetector::new(rule.space().states()) }
    }

    pub fn run(&mut self, n: usize, budget: u64) -> RunOutcome {
        let mut config = Configuration::input(n);
        self.cycles.reset(&config);
        let mut max_extent = 0;
        while config.steps < budget {
            let visited = config.tape.len();
            if config.step(self.rule) == StepResult::Halted {
                return RunOutcome {
                    status: Status::Halted,
                    steps: config.steps,
                    output: Some(config.output()),
                    max_extent,
                    certificate: None,
                };
            }
            max_extent = max_extent.max(config.head);
            // the tape only grows when the head steps onto a never-visited cell
            if config.tape.len() > visited {
                if let Some(cycle) = self.escapes.escape_from(config.state) {
                    return RunOutcome {
                        status: Status::DivergentLeftEscape,
                        steps: config.steps,
                        output: None,
                        max_extent,
                        certificate: Some(DivergenceCertificate::LeftEscape {
                            step: config.steps,
                            states: cycle.to_vec(),
                        }),
                    };
                }
            }
            if let Some(cert) = self.cycles.observe(&config) {
                return RunOutcome {
                    status: Status::DivergentCycle,
                    steps: config.steps,
                    output: None,
                    max_extent,
                    certificate: Some(cert),
                };
            }
        }
        RunOutcome {
            status: Status::BudgetExhausted,
            steps: config.steps,
            output: None,
            max_extent,
            certificate: None,
        }
    }
}

/// Rows of tape snapshots from the initial configuration to the halt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceTimeDiagram {
    /// Each row indexed like the tape (0 = right edge) and padded to `width`.
    pub rows: Vec<Vec<u8>>,
    /// Head cell per row. The last row's head is the cell it fell off from.
    pub head_track: Vec<usize>,
    pub width: usize,
}

impl SpaceTimeDiagram {
    pub fn height(&self) -> usize {
        self.rows.len()
    }

    pub fn black_cells(&self) -> usize {
        self.rows.iter().flatten().filter(|&&c| c != WHITE).count()
    }
}

/// Records the space-time diagram of a halting run.
pub fn record_diagram(rule: &Rule, n: usize, budget: u64) -> Result<SpaceTimeDiagram> {
    let outcome = run(rule, n, budget);
    if outcome.status != Status::Halted {
        return Err(Error::NoDiagram { rule: rule.number(), input: n, outcome: Box::new(outcome) });
    }
    let mut config = Configuration::input(n);
    let mut rows = vec![config.tape.clone()];
    let mut head_track = vec![config.head];
    loop {
        let head = config.head;
        let result = config.step(rule);
        rows.push(config.tape.clone());
        match result {
            StepResult::Halted => {
                head_track.push(head);
                break;
            }
            StepResult::Moved => head_track.push(config.head),
        }
    }
    let width = config.tape.len();
    for row in &mut rows {
        row.resize(width, WHITE);
    }
    Ok(SpaceTimeDiagram { rows, head_track, width })
}
