//! Deterministic Zobrist keys for board positions.
//!
//! Keys are generated once from a fixed seed so that position hashes are
//! stable across processes and runs.

use std::sync::OnceLock;

use crate::state::{MAX_BOARD_SIZE, MAX_PLAYERS};

const N_POINTS: usize = MAX_BOARD_SIZE * MAX_BOARD_SIZE;
const SEED: u64 = 0x5113_57a7_90_60_3b1d;

struct Tables {
    stones: [[u64; N_POINTS]; MAX_PLAYERS],
    turn: [u64; MAX_PLAYERS],
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut s = SEED;
        let mut t = Tables {
            stones: [[0; N_POINTS]; MAX_PLAYERS],
            turn: [0; MAX_PLAYERS],
        };
        for player in 0..MAX_PLAYERS {
            for point in 0..N_POINTS {
                t.stones[player][point] = splitmix64(&mut s);
            }
        }
        for player in 0..MAX_PLAYERS {
            t.turn[player] = splitmix64(&mut s);
        }
        t
    })
}

/// Key for a stone of `player` at flat board index `point`.
pub(crate) fn stone_key(player: usize, point: usize) -> u64 {
    tables().stones[player][point]
}

/// Key for `player` being to move.
pub(crate) fn turn_key(player: usize) -> u64 {
    tables().turn[player]
}
