//! Exhaustive exploration of small Turing machine rule spaces.
//!
//! Machines use a tape that is bounded on the right and unbounded on the
//! left, start on the rightmost cell in state 0, and halt by falling off the
//! right edge. Input `n` is written as `n + 1` black cells.

pub mod analysis;
pub mod boxcount;
pub mod detect;
pub mod error;
pub mod explorer;
pub mod fit;
pub mod io;
pub mod machine;

pub use error::{Error, Result};
pub use machine::{run, MoveConvention, OutputWord, Rule, RunOutcome, SpaceId, Status};
