//! Box counting over space-time diagrams.
//!
//! A cell is occupied when it is black in that row or the head is on it.
//! Boxes are `ε × ε` for dyadic `ε`, aligned to the top row and the right
//! edge of the tape.

use crate::machine::{Configuration, Rule, SpaceTimeDiagram, StepResult, WHITE};

/// `(ε, occupied boxes)` for every requested side.
pub fn box_count(diagram: &SpaceTimeDiagram, scales: &[usize]) -> Vec<(usize, u64)> {
    let grid: Vec<Bits> = diagram
        .rows
        .iter()
        .zip(&diagram.head_track)
        .map(|(row, &head)| {
            let mut bits = Bits::default();
            for (i, &c) in row.iter().enumerate() {
                if c != WHITE || i == head {
                    bits.set(i);
                }
            }
            bits
        })
        .collect();
    box_count_grid(&grid, scales)
}

/// Box counts over rows of occupied cells.
pub fn box_count_grid(rows: &[Bits], scales: &[usize]) -> Vec<(usize, u64)> {
    let mut counter = BoxCounter::new();
    for row in rows {
        counter.push_row(row);
    }
    let counts = counter.finish();
    scales
        .iter()
        .map(|&eps| {
            assert!(eps.is_power_of_two(), "box side {eps} is not dyadic");
            let level = eps.trailing_zeros() as usize;
            (eps, counts.get(level).copied().unwrap_or_else(|| counts.last().map_or(0, |&c| c.min(1))))
        })
        .collect()
}

/// Dyadic box sides from 1 up to the first one that covers a `side × side`
/// bounding square.
pub fn dyadic_scales(side: usize) -> Vec<usize> {
    let top = side.max(1).next_power_of_two();
    (0..=top.trailing_zeros()).map(|j| 1usize << j).collect()
}

/// Growable bitset over tape cells.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bits(Vec<u64>);

impl Bits {
    pub fn set(&mut self, i: usize) {
        let w = i / 64;
        if w >= self.0.len() {
            self.0.resize(w + 1, 0);
        }
        self.0[w] |= 1 << (i % 64);
    }

    pub fn clear(&mut self, i: usize) {
        if let Some(word) = self.0.get_mut(i / 64) {
            *word &= !(1 << (i % 64));
        }
    }

    pub fn get(&self, i: usize) -> bool {
        self.0.get(i / 64).is_some_and(|w| w >> (i % 64) & 1 == 1)
    }

    pub fn count(&self) -> u64 {
        self.0.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// One past the highest set bit.
    pub fn extent(&self) -> usize {
        self.0.iter().rposition(|&w| w != 0).map_or(0, |i| i * 64 + 64 - self.0[i].leading_zeros() as usize)
    }

    fn or_assign(&mut self, other: &Bits) {
        if other.0.len() > self.0.len() {
            self.0.resize(other.0.len(), 0);
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    /// Bit `i` of the result is set iff bit `2i` or `2i + 1` is.
    fn halve(&self) -> Bits {
        let mut out = vec![0u64; self.0.len().div_ceil(2)];
        for (i, chunk) in self.0.chunks(2).enumerate() {
            let lo = squeeze(chunk[0]);
            let hi = chunk.get(1).map_or(0, |&w| squeeze(w));
            out[i] = lo | hi << 32;
        }
        Bits(out)
    }
}

/// ORs adjacent bit pairs and packs the 32 results into the low half.
fn squeeze(w: u64) -> u64 {
    let mut v = (w | w >> 1) & 0x5555_5555_5555_5555;
    v = (v | v >> 1) & 0x3333_3333_3333_3333;
    v = (v | v >> 2) & 0x0f0f_0f0f_0f0f_0f0f;
    v = (v | v >> 4) & 0x00ff_00ff_00ff_00ff;
    v = (v | v >> 8) & 0x0000_ffff_0000_ffff;
    (v | v >> 16) & 0x0000_0000_ffff_ffff
}

#[derive(Default)]
struct Level {
    acc: Bits,
    pending: u8,
    count: u64,
}

/// Streams rows top to bottom and counts occupied boxes at every dyadic
/// scale without keeping the diagram.
#[derive(Default)]
pub struct BoxCounter {
    rows: usize,
    width: usize,
    // levels[j] counts boxes of side 2^j; levels[j + 1] accumulates pairs
    // of level-j bands
    levels: Vec<Level>,
}

impl BoxCounter {
    pub fn new() -> Self {
        BoxCounter::default()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn push_row(&mut self, occupied: &Bits) {
        self.rows += 1;
        self.width = self.width.max(occupied.extent());
        if self.levels.is_empty() {
            self.levels.push(Level::default());
        }
        self.levels[0].count += occupied.count();
        self.feed(1, occupied);
    }

    fn feed(&mut self, level: usize, band: &Bits) {
        if self.levels.len() <= level {
            self.levels.push(Level::default());
        }
        let l = &mut self.levels[level];
        l.acc.or_assign(band);
        l.pending += 1;
        if l.pending == 2 {
            self.complete(level);
        }
    }

    fn complete(&mut self, level: usize) {
        let l = &mut self.levels[level];
        let boxes = std::mem::take(&mut l.acc).halve();
        l.pending = 0;
        l.count += boxes.count();
        self.feed(level + 1, &boxes);
    }

    /// Box counts indexed by `log2 ε`, ending at the first scale whose box
    /// covers the bounding square. Its side is the height, or the occupied
    /// width for runs that halt before the head crosses the input.
    pub fn finish(mut self) -> Vec<u64> {
        let top = dyadic_scales(self.rows.max(self.width)).len();
        for level in 1..top {
            if self.levels.len() <= level {
                self.levels.push(Level::default());
            }
            if self.levels[level].pending > 0 {
                self.complete(level);
            }
        }
        let mut counts: Vec<u64> = self.levels.iter().map(|l| l.count).collect();
        counts.truncate(top);
        counts
    }
}

/// Runs `rule` on input `n` and box-counts its diagram on the fly. `None`
/// if it does not halt within `budget`.
pub fn count_run(rule: &Rule, n: usize, budget: u64) -> Option<(u64, Vec<u64>)> {
    let mut config = Configuration::input(n);
    let mut black = Bits::default();
    for i in 0..config.tape.len() {
        black.set(i);
    }
    let mut counter = BoxCounter::new();
    let row = |black: &Bits, head: usize| {
        let mut bits = black.clone();
        bits.set(head);
        bits
    };
    counter.push_row(&row(&black, config.head));
    while config.steps < budget {
        let head = config.head;
        let result = config.step(rule);
        if config.tape[head] == WHITE {
            black.clear(head);
        } else {
            black.set(head);
        }
        match result {
            StepResult::Halted => {
                counter.push_row(&row(&black, head));
                return Some((config.steps, counter.finish()));
            }
            StepResult::Moved => counter.push_row(&row(&black, config.head)),
        }
    }
    None
}
