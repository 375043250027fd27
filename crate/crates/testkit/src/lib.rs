//! Fixtures with known aggregates and slow, obviously-correct oracles.
//!
//! Nothing here is used by the pipeline itself. The oracles deliberately
//! avoid the library's own helpers so that a shared bug cannot hide.

pub mod fixtures;
pub mod oracles;
pub mod random;
