//! Search agents over the Go engine: multiplayer UCT with random playouts,
//! PUCT guided by network priors and expected-score values, and best-first
//! descent to terminal states with max^n value backing.
//!
//! All searches score positions with full per-player score vectors: each
//! node's selection maximizes the component of the player to move there.
//! Searches are single-threaded over one tree; independent searches can run
//! concurrently against a shared immutable network snapshot.

pub mod descent;
mod eval;
pub mod puct;
mod result;
pub mod uct;

pub use eval::{PolicyValueEval, ScoreEval};
pub use result::{MoveEntry, SearchResult};

use mpgo_engine::ScoreVector;

/// Score vector as floats, in points units.
pub(crate) fn score_as_f64(score: &ScoreVector) -> Vec<f64> {
    score.as_slice().iter().map(|&s| f64::from(s)).collect()
}

/// Shared max^n value-vector comparison: prefer a higher component for
/// `mover`, break ties by the first differing component from player 0, then
/// by move order (smaller move wins).
pub(crate) fn better_child(
    candidate: (&[f64], mpgo_engine::Move),
    best: (&[f64], mpgo_engine::Move),
    mover: usize,
) -> bool {
    let (cv, cm) = candidate;
    let (bv, bm) = best;
    if cv[mover] != bv[mover] {
        return cv[mover] > bv[mover];
    }
    for (c, b) in cv.iter().zip(bv.iter()) {
        if c != b {
            return c > b;
        }
    }
    cm < bm
}
