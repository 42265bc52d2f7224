//! N-player Go rules on small square boards.
//!
//! The engine implements stone placement with multi-color capture, suicide
//! prohibition, positional superko over (occupancy, player-to-move), a
//! no-pass rule (passing is legal only when no placement is), single-point
//! eye protection, and Chinese area scoring without komi. States are plain
//! values: every operation either returns a new state or mutates a state the
//! caller owns, so independent games can run on any number of threads.

mod state;
mod zobrist;

pub mod record;
pub mod reference;

pub use state::{
    EngineError, GameState, IllegalMoveReason, Move, PlayerId, Point, ScoreVector, MAX_BOARD_SIZE,
    MAX_PLAYERS, MIN_BOARD_SIZE,
};
