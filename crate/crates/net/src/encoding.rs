//! 6-plane board encoding for 3-player 5x5 games.

use mpgo_engine::{GameState, Point};
use ndarray::{Array2, Array3};

use crate::elem::Elem;
use crate::NetError;

pub const ENCODING_SIZE: usize = 5;
pub const ENCODING_PLAYERS: usize = 3;
pub const ENCODING_CHANNELS: usize = 2 * ENCODING_PLAYERS;

/// A `(6, 5, 5)` tensor: planes 0-2 mark each player's stones, planes 3-5
/// are constant and exactly one of them is all-ones, flagging the player to
/// move.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding(pub Array3<f32>);

/// Encode a 3-player 5x5 state. Rejects other board shapes.
pub fn encode(state: &GameState) -> Result<Encoding, NetError> {
    if state.size() != ENCODING_SIZE || state.num_players() != ENCODING_PLAYERS {
        return Err(NetError::UnsupportedBoard {
            size: state.size(),
            players: state.num_players(),
        });
    }
    let mut planes = Array3::<f32>::zeros((ENCODING_CHANNELS, ENCODING_SIZE, ENCODING_SIZE));
    for r in 0..ENCODING_SIZE {
        for c in 0..ENCODING_SIZE {
            if let Some(owner) = state.stone_at(Point::new(r, c)) {
                planes[[owner.index(), r, c]] = 1.0;
            }
        }
    }
    let turn_plane = ENCODING_PLAYERS + state.to_move().index();
    planes
        .index_axis_mut(ndarray::Axis(0), turn_plane)
        .fill(1.0);
    Ok(Encoding(planes))
}

/// Assemble encodings into the flat `(channels, batch * cells)` layout the
/// network consumes.
pub fn encodings_to_batch<T: Elem>(encodings: &[Encoding]) -> Array2<T> {
    let cells = ENCODING_SIZE * ENCODING_SIZE;
    let batch = encodings.len();
    let mut out = Array2::<T>::zeros((ENCODING_CHANNELS, batch * cells));
    for (b, enc) in encodings.iter().enumerate() {
        for c in 0..ENCODING_CHANNELS {
            for y in 0..ENCODING_SIZE {
                for x in 0..ENCODING_SIZE {
                    out[[c, b * cells + y * ENCODING_SIZE + x]] =
                        T::from_f64(enc.0[[c, y, x]] as f64);
                }
            }
        }
    }
    out
}
