//! Finite portraits of automorphisms of the edge-rooted 3-regular tree,
//! local-compatibility testing and exhaustive bounded-depth searches over
//! locally-compatible portraits, plus a colored directed gadget complex
//! over the 4-regular tree with its own automorphism searches.
//!
//! Everything is truncated to an explicit depth and fully deterministic:
//! iteration orders are canonical, searches are reproducible across thread
//! counts, and every report serializes to byte-stable JSON.

pub mod exec;
pub mod gadget;
pub mod inversions;
pub mod pk;
pub mod portrait;
pub mod report;
pub mod tree;

pub use exec::Threads;
pub use portrait::{EdgeAction, LocalMap, Portrait};
pub use tree::{Address, Side};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("ball B({center},{radius}) leaves the depth-{depth} truncation")]
    TruncationExceeded {
        center: tree::Address,
        radius: usize,
        depth: usize,
    },
    #[error("portrait depths differ: {0} vs {1}")]
    DepthMismatch(usize, usize),
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("portrait does not invert the root edge")]
    NotAnInversion,
    #[error("sphere {level} has order {got}, expected {expected}")]
    HypothesisViolated { level: usize, got: u64, expected: u64 },
    #[error("invalid portrait: {0}")]
    InvalidPortrait(String),
    #[error("invalid address: {0}")]
    InvalidAddress(String),
    #[error("no witness mapping the requested pair")]
    NoWitness,
}

pub type Result<T> = std::result::Result<T, Error>;
