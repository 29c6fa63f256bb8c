//! A deliberately naive simulator used as an oracle. It shares nothing
//! with the library beyond the rule numbering convention.

#![allow(dead_code)]

pub struct Reference {
    states: u64,
    colors: u64,
    /// `(write, moves_right, next_state)` per `(state, color)`.
    table: Vec<(u8, bool, u64)>,
}

impl Reference {
    pub fn new(number: u64, states: u64, colors: u64) -> Self {
        let base = 2 * states * colors;
        let cases = (states * colors) as usize;
        let mut digits = vec![0; cases];
        let mut rest = number;
        // least significant digit last
        for d in digits.iter_mut().rev() {
            *d = rest % base;
            rest /= base;
        }
        assert_eq!(rest, 0, "rule out of range");
        let mut table = vec![(0, false, 0); cases];
        for (pos, &d) in digits.iter().enumerate() {
            let state = pos as u64 / colors;
            let color = colors - 1 - pos as u64 % colors;
            let entry = (((d % (2 * colors)) / 2) as u8, d % 2 == 1, d / (2 * colors));
            table[(state * colors + color) as usize] = entry;
        }
        Reference { states, colors, table }
    }

    /// Steps and output word if the machine halts within `budget` steps.
    pub fn run(&self, input: usize, budget: u64) -> Option<(u64, String)> {
        self.simulate(input, budget, &mut |_, _| {})
    }

    /// Every configuration of a halting run as `(cells, head)`, both
    /// counted from the right edge. The last row is the halting write.
    pub fn trace(&self, input: usize, budget: u64) -> Option<Vec<(Vec<u8>, usize)>> {
        let mut rows = Vec::new();
        self.simulate(input, budget, &mut |cells, head| {
            let from_edge: Vec<u8> = cells.iter().rev().copied().collect();
            rows.push((from_edge, cells.len() - 1 - head));
        })?;
        Some(rows)
    }

    fn simulate(&self, input: usize, budget: u64, visit: &mut dyn FnMut(&[u8], usize)) -> Option<(u64, String)> {
        // cells in reading order; the last cell is the right edge
        let mut cells: Vec<u8> = vec![1; input + 1];
        let mut head = cells.len() - 1;
        let mut state = 0u64;
        let mut steps = 0;
        visit(&cells, head);
        while steps < budget {
            let (write, right, next) = self.table[(state * self.colors + cells[head] as u64) as usize];
            cells[head] = write;
            steps += 1;
            state = next;
            if right {
                if head == cells.len() - 1 {
                    visit(&cells, head);
                    let first = cells.iter().position(|&c| c != 0);
                    let word = first.map_or(String::new(), |i| {
                        cells[i..].iter().map(|c| c.to_string()).collect()
                    });
                    return Some((steps, word));
                }
                head += 1;
            } else if head == 0 {
                cells.insert(0, 0);
            } else {
                head -= 1;
            }
            visit(&cells, head);
        }
        None
    }
}
