//! Core rule types: players, points, moves, scores and the game state.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::zobrist;

/// Upper bound on simultaneous players supported by the fixed-width board
/// representation.
pub const MAX_PLAYERS: usize = 4;
pub const MIN_BOARD_SIZE: usize = 2;
pub const MAX_BOARD_SIZE: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IllegalMoveReason {
    /// The target point is outside the board.
    OffBoard,
    /// The target point already carries a stone.
    Occupied,
    /// The placed group would end with zero liberties and captures nothing.
    Suicide,
    /// The move would recreate a previous whole-board position.
    Superko,
    /// The point is a single-point eye of the mover.
    EyeFill,
    /// Passing while legal placements exist.
    NonForcedPass,
    /// The game is already over.
    GameOver,
}

impl fmt::Display for IllegalMoveReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            IllegalMoveReason::OffBoard => "point off the board",
            IllegalMoveReason::Occupied => "occupied",
            IllegalMoveReason::Suicide => "suicide",
            IllegalMoveReason::Superko => "repeats a previous position",
            IllegalMoveReason::EyeFill => "fills an own eye",
            IllegalMoveReason::NonForcedPass => "pass while placements exist",
            IllegalMoveReason::GameOver => "game is over",
        };
        f.write_str(msg)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("player count {0} outside supported range 2..={MAX_PLAYERS}")]
    InvalidPlayerCount(usize),
    #[error("board size {0} outside supported range {MIN_BOARD_SIZE}..={MAX_BOARD_SIZE}")]
    InvalidBoardSize(usize),
    #[error("illegal move: {0}")]
    IllegalMove(IllegalMoveReason),
    #[error("invalid position setup: {0}")]
    InvalidSetup(String),
}

/// A player, identified by seat order: 0 = Black, 1 = White, 2 = Red.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlayerId(pub u8);

impl PlayerId {
    pub const BLACK: PlayerId = PlayerId(0);
    pub const WHITE: PlayerId = PlayerId(1);
    pub const RED: PlayerId = PlayerId(2);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Next player in cyclic ascending turn order.
    pub fn next(self, num_players: usize) -> PlayerId {
        PlayerId(((self.0 as usize + 1) % num_players) as u8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub row: u8,
    pub col: u8,
}

impl Point {
    pub fn new(row: usize, col: usize) -> Point {
        Point {
            row: row as u8,
            col: col as u8,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.row, self.col)
    }
}

/// A move: placing a stone or passing. Passing is legal only when the mover
/// has no legal placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    Place(Point),
    Pass,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Place(p) => write!(f, "{},{}", p.row, p.col),
            Move::Pass => f.write_str("pass"),
        }
    }
}

impl FromStr for Move {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("pass") {
            return Ok(Move::Pass);
        }
        let (r, c) = s
            .split_once(',')
            .ok_or_else(|| format!("expected \"row,col\" or \"pass\", got {s:?}"))?;
        let row: u8 = r.trim().parse().map_err(|_| format!("bad row in {s:?}"))?;
        let col: u8 = c.trim().parse().map_err(|_| format!("bad col in {s:?}"))?;
        Ok(Move::Place(Point { row, col }))
    }
}

/// One integer score per player under Chinese area scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreVector {
    len: u8,
    scores: [u16; MAX_PLAYERS],
}

impl ScoreVector {
    pub fn zeros(num_players: usize) -> ScoreVector {
        ScoreVector {
            len: num_players as u8,
            scores: [0; MAX_PLAYERS],
        }
    }

    pub fn num_players(&self) -> usize {
        self.len as usize
    }

    pub fn get(&self, player: PlayerId) -> u16 {
        self.scores[player.index()]
    }

    pub(crate) fn set(&mut self, player: usize, score: u16) {
        self.scores[player] = score;
    }

    pub fn as_slice(&self) -> &[u16] {
        &self.scores[..self.len as usize]
    }

    pub fn sum(&self) -> u32 {
        self.as_slice().iter().map(|&s| s as u32).sum()
    }
}

impl fmt::Display for ScoreVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.as_slice().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

/// Precomputed shift masks for one board size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Geometry {
    size: usize,
    full: u128,
    not_first_col: u128,
    not_last_col: u128,
}

impl Geometry {
    fn new(size: usize) -> Geometry {
        let n = size * size;
        let full = if n == 128 { !0 } else { (1u128 << n) - 1 };
        let mut not_first_col = 0u128;
        let mut not_last_col = 0u128;
        for r in 0..size {
            for c in 0..size {
                let bit = 1u128 << (r * size + c);
                if c != 0 {
                    not_first_col |= bit;
                }
                if c != size - 1 {
                    not_last_col |= bit;
                }
            }
        }
        Geometry {
            size,
            full,
            not_first_col,
            not_last_col,
        }
    }

    fn for_size(size: usize) -> &'static Geometry {
        use std::sync::OnceLock;
        static GEOMETRIES: OnceLock<Vec<Geometry>> = OnceLock::new();
        let all = GEOMETRIES
            .get_or_init(|| (0..=MAX_BOARD_SIZE).map(|s| Geometry::new(s.max(1))).collect());
        &all[size]
    }

    #[inline]
    fn neighbors(&self, b: u128) -> u128 {
        let east = (b & self.not_last_col) << 1;
        let west = (b & self.not_first_col) >> 1;
        let north = b >> self.size;
        let south = (b << self.size) & self.full;
        east | west | north | south
    }

    /// Connected component of `seed` within `mask` (orthogonal adjacency).
    #[inline]
    fn flood(&self, seed: u128, mask: u128) -> u128 {
        let mut group = seed & mask;
        loop {
            let grown = (group | self.neighbors(group)) & mask;
            if grown == group {
                return group;
            }
            group = grown;
        }
    }
}

struct Placement {
    captured: [u128; MAX_PLAYERS],
    new_hash: u64,
}

/// Full game state. A value type: `play` returns a fresh state, `play_mut`
/// updates in place; no operation touches shared data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    size: u8,
    num_players: u8,
    to_move: PlayerId,
    consecutive_passes: u8,
    move_count: u16,
    move_cap: u16,
    stones: [u128; MAX_PLAYERS],
    hash: u64,
    history: HashSet<u64>,
}

impl GameState {
    /// Empty board, Black to move, history seeded with the initial position.
    /// The move cap defaults to `6 * size * size`.
    pub fn new(num_players: usize, size: usize) -> Result<GameState, EngineError> {
        if !(2..=MAX_PLAYERS).contains(&num_players) {
            return Err(EngineError::InvalidPlayerCount(num_players));
        }
        if !(MIN_BOARD_SIZE..=MAX_BOARD_SIZE).contains(&size) {
            return Err(EngineError::InvalidBoardSize(size));
        }
        let hash = zobrist::turn_key(0);
        let mut history = HashSet::with_capacity(64);
        history.insert(hash);
        Ok(GameState {
            size: size as u8,
            num_players: num_players as u8,
            to_move: PlayerId::BLACK,
            consecutive_passes: 0,
            move_count: 0,
            move_cap: (6 * size * size) as u16,
            stones: [0; MAX_PLAYERS],
            hash,
            history,
        })
    }

    /// Like `new` but with an explicit move cap (used for toy games).
    pub fn new_with_move_cap(
        num_players: usize,
        size: usize,
        move_cap: u16,
    ) -> Result<GameState, EngineError> {
        let mut s = GameState::new(num_players, size)?;
        s.move_cap = move_cap;
        Ok(s)
    }

    /// Replace the move cap, counting moves already played.
    pub fn with_move_cap(mut self, move_cap: usize) -> GameState {
        self.move_cap = move_cap as u16;
        self
    }

    /// Build a position directly from stone placements. The history starts
    /// at this position. Liberty invariants are not checked: callers are
    /// responsible for setups being meaningful.
    pub fn from_setup(
        num_players: usize,
        size: usize,
        stones: &[(Point, PlayerId)],
        to_move: PlayerId,
    ) -> Result<GameState, EngineError> {
        let mut s = GameState::new(num_players, size)?;
        if to_move.index() >= num_players {
            return Err(EngineError::InvalidSetup(format!(
                "to_move {} out of range",
                to_move.0
            )));
        }
        for &(p, owner) in stones {
            if p.row as usize >= size || p.col as usize >= size {
                return Err(EngineError::InvalidSetup(format!("{p} off the board")));
            }
            if owner.index() >= num_players {
                return Err(EngineError::InvalidSetup(format!(
                    "player {} out of range",
                    owner.0
                )));
            }
            let bit = s.bit(p);
            if s.occupied() & bit != 0 {
                return Err(EngineError::InvalidSetup(format!("{p} assigned twice")));
            }
            s.stones[owner.index()] |= bit;
            s.hash ^= zobrist::stone_key(owner.index(), s.index(p));
        }
        s.hash ^= zobrist::turn_key(0) ^ zobrist::turn_key(to_move.index());
        s.to_move = to_move;
        s.history.clear();
        s.history.insert(s.hash);
        Ok(s)
    }

    /// Parse a board diagram: one row per line, `X`/`O`/`R`/`#` for players
    /// 0..3 and `.` for empty. Whitespace between cells is ignored.
    pub fn from_text(
        num_players: usize,
        text: &str,
        to_move: PlayerId,
    ) -> Result<GameState, EngineError> {
        let rows: Vec<Vec<char>> = text
            .lines()
            .map(|l| l.chars().filter(|c| !c.is_whitespace()).collect())
            .filter(|l: &Vec<char>| !l.is_empty())
            .collect();
        let size = rows.len();
        let mut stones = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(EngineError::InvalidSetup(format!(
                    "row {r} has {} cells, expected {size}",
                    row.len()
                )));
            }
            for (c, ch) in row.iter().enumerate() {
                let owner = match ch {
                    '.' => continue,
                    'X' => PlayerId(0),
                    'O' => PlayerId(1),
                    'R' => PlayerId(2),
                    '#' => PlayerId(3),
                    _ => {
                        return Err(EngineError::InvalidSetup(format!(
                            "unknown cell {ch:?} at ({r},{c})"
                        )))
                    }
                };
                stones.push((Point::new(r, c), owner));
            }
        }
        GameState::from_setup(num_players, size, &stones, to_move)
    }

    pub fn size(&self) -> usize {
        self.size as usize
    }

    pub fn num_players(&self) -> usize {
        self.num_players as usize
    }

    pub fn to_move(&self) -> PlayerId {
        self.to_move
    }

    pub fn move_count(&self) -> usize {
        self.move_count as usize
    }

    pub fn move_cap(&self) -> usize {
        self.move_cap as usize
    }

    pub fn consecutive_passes(&self) -> usize {
        self.consecutive_passes as usize
    }

    /// Highest score any single player can reach: one point per intersection.
    pub fn max_score(&self) -> u32 {
        (self.size() * self.size()) as u32
    }

    pub fn stone_at(&self, p: Point) -> Option<PlayerId> {
        if p.row as usize >= self.size() || p.col as usize >= self.size() {
            return None;
        }
        let bit = self.bit(p);
        (0..self.num_players())
            .find(|&i| self.stones[i] & bit != 0)
            .map(|i| PlayerId(i as u8))
    }

    /// Bitboard of `player`'s stones (bit `row * size + col`).
    pub fn stones_mask(&self, player: PlayerId) -> u128 {
        self.stones[player.index()]
    }

    /// Hash of (occupancy, player to move), maintained incrementally.
    pub fn position_hash(&self) -> u64 {
        self.hash
    }

    pub fn is_terminal(&self) -> bool {
        self.consecutive_passes >= self.num_players || self.move_count >= self.move_cap
    }

    #[inline]
    fn geo(&self) -> &'static Geometry {
        Geometry::for_size(self.size())
    }

    #[inline]
    fn index(&self, p: Point) -> usize {
        p.row as usize * self.size() + p.col as usize
    }

    #[inline]
    fn bit(&self, p: Point) -> u128 {
        1u128 << self.index(p)
    }

    #[inline]
    fn occupied(&self) -> u128 {
        let mut occ = 0;
        for i in 0..self.num_players() {
            occ |= self.stones[i];
        }
        occ
    }

    #[inline]
    fn empty_mask(&self) -> u128 {
        self.geo().full & !self.occupied()
    }

    /// True iff `point` is empty and all its orthogonal neighbors are stones
    /// of `player` belonging to a single group. Board edges count as
    /// satisfied.
    pub fn is_eye(&self, point: Point, player: PlayerId) -> bool {
        if point.row as usize >= self.size() || point.col as usize >= self.size() {
            return false;
        }
        let geo = self.geo();
        let bit = self.bit(point);
        if bit & self.empty_mask() == 0 {
            return false;
        }
        let nbrs = geo.neighbors(bit);
        let own = self.stones[player.index()];
        if nbrs & !own != 0 {
            return false;
        }
        let first = nbrs & nbrs.wrapping_neg();
        let group = geo.flood(first, own);
        nbrs & !group == 0
    }

    /// Checks occupancy, suicide and superko for placing at `p`; returns the
    /// capture masks and the post-move hash on success. Eye fills are checked
    /// separately.
    fn resolve_placement(&self, p: Point) -> Result<Placement, IllegalMoveReason> {
        if p.row as usize >= self.size() || p.col as usize >= self.size() {
            return Err(IllegalMoveReason::OffBoard);
        }
        let geo = self.geo();
        let bit = self.bit(p);
        let empty = self.empty_mask();
        if bit & empty == 0 {
            return Err(IllegalMoveReason::Occupied);
        }
        let nbrs = geo.neighbors(bit);
        let mover = self.to_move.index();

        let mut captured = [0u128; MAX_PLAYERS];
        let mut captured_any = false;
        for p_idx in 0..self.num_players() {
            if p_idx == mover {
                continue;
            }
            let mut enemy_nbrs = nbrs & self.stones[p_idx];
            let mut seen = 0u128;
            while enemy_nbrs != 0 {
                let seed = enemy_nbrs & enemy_nbrs.wrapping_neg();
                enemy_nbrs &= enemy_nbrs - 1;
                if seed & seen != 0 {
                    continue;
                }
                let group = geo.flood(seed, self.stones[p_idx]);
                seen |= group;
                if geo.neighbors(group) & empty & !bit == 0 {
                    captured[p_idx] |= group;
                    captured_any = true;
                }
            }
        }

        if !captured_any {
            let own_group = geo.flood(bit, self.stones[mover] | bit);
            if geo.neighbors(own_group) & empty & !bit == 0 {
                return Err(IllegalMoveReason::Suicide);
            }
        }

        let mut hash = self.hash ^ zobrist::stone_key(mover, self.index(p));
        for p_idx in 0..self.num_players() {
            let mut dead = captured[p_idx];
            while dead != 0 {
                let idx = dead.trailing_zeros() as usize;
                dead &= dead - 1;
                hash ^= zobrist::stone_key(p_idx, idx);
            }
        }
        let next = self.to_move.next(self.num_players());
        hash ^= zobrist::turn_key(mover) ^ zobrist::turn_key(next.index());
        if self.history.contains(&hash) {
            return Err(IllegalMoveReason::Superko);
        }
        Ok(Placement {
            captured,
            new_hash: hash,
        })
    }

    fn placement_is_legal(&self, p: Point) -> bool {
        !self.is_eye(p, self.to_move) && self.resolve_placement(p).is_ok()
    }

    fn has_any_legal_placement(&self) -> bool {
        let mut empties = self.empty_mask();
        let size = self.size();
        while empties != 0 {
            let idx = empties.trailing_zeros() as usize;
            empties &= empties - 1;
            let p = Point::new(idx / size, idx % size);
            if self.placement_is_legal(p) {
                return true;
            }
        }
        false
    }

    /// All legal moves for the player to move. Returns every legal placement,
    /// or exactly `[Pass]` when there is none; never both.
    pub fn legal_moves(&self) -> Vec<Move> {
        let mut out = Vec::new();
        self.legal_moves_into(&mut out);
        out
    }

    /// Allocation-free variant of [`legal_moves`](Self::legal_moves) for hot
    /// loops: clears `out` and fills it.
    pub fn legal_moves_into(&self, out: &mut Vec<Move>) {
        out.clear();
        let mut empties = self.empty_mask();
        let size = self.size();
        while empties != 0 {
            let idx = empties.trailing_zeros() as usize;
            empties &= empties - 1;
            let p = Point::new(idx / size, idx % size);
            if self.placement_is_legal(p) {
                out.push(Move::Place(p));
            }
        }
        if out.is_empty() {
            out.push(Move::Pass);
        }
    }

    /// Apply a move in place. Errors leave the state untouched.
    pub fn play_mut(&mut self, mv: Move) -> Result<(), EngineError> {
        if self.is_terminal() {
            return Err(EngineError::IllegalMove(IllegalMoveReason::GameOver));
        }
        match mv {
            Move::Pass => {
                if self.has_any_legal_placement() {
                    return Err(EngineError::IllegalMove(IllegalMoveReason::NonForcedPass));
                }
                let next = self.to_move.next(self.num_players());
                self.hash ^=
                    zobrist::turn_key(self.to_move.index()) ^ zobrist::turn_key(next.index());
                self.to_move = next;
                self.consecutive_passes += 1;
            }
            Move::Place(p) => {
                if self.is_eye(p, self.to_move) {
                    return Err(EngineError::IllegalMove(IllegalMoveReason::EyeFill));
                }
                let placement = self
                    .resolve_placement(p)
                    .map_err(EngineError::IllegalMove)?;
                let mover = self.to_move.index();
                self.stones[mover] |= self.bit(p);
                for p_idx in 0..self.num_players() {
                    self.stones[p_idx] &= !placement.captured[p_idx];
                }
                self.hash = placement.new_hash;
                self.to_move = self.to_move.next(self.num_players());
                self.consecutive_passes = 0;
            }
        }
        self.move_count += 1;
        self.history.insert(self.hash);
        Ok(())
    }

    /// Pure variant of [`play_mut`](Self::play_mut): same inputs always give
    /// identical outputs, the input state is left untouched.
    pub fn play(&self, mv: Move) -> Result<GameState, EngineError> {
        let mut next = self.clone();
        next.play_mut(mv)?;
        Ok(next)
    }

    /// Chinese area score: own stones plus empty regions whose stone border
    /// is exclusively one color. No komi.
    pub fn score(&self) -> ScoreVector {
        let geo = self.geo();
        let n = self.num_players();
        let mut scores = ScoreVector::zeros(n);
        for p_idx in 0..n {
            scores.set(p_idx, self.stones[p_idx].count_ones() as u16);
        }
        let mut empties = self.empty_mask();
        while empties != 0 {
            let seed = empties & empties.wrapping_neg();
            let region = geo.flood(seed, empties);
            empties &= !region;
            let border = geo.neighbors(region);
            let mut owner: Option<usize> = None;
            for p_idx in 0..n {
                if border & self.stones[p_idx] != 0 {
                    owner = match owner {
                        None => Some(p_idx),
                        Some(_) => {
                            owner = None;
                            break;
                        }
                    };
                }
            }
            if let Some(p_idx) = owner {
                let s = scores.as_slice()[p_idx] + region.count_ones() as u16;
                scores.set(p_idx, s);
            }
        }
        scores
    }
}
