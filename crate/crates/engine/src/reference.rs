//! Naive reference implementation of the rules, kept deliberately
//! independent of the bitboard engine: plain grids, stack-based flood fill,
//! and a history of full positions compared by equality instead of hashes.
//! Used by the verification tests and the `selfcheck` command to cross-check
//! move legality, termination and scoring.

use crate::state::{GameState, Move, PlayerId, Point};

const EMPTY: u8 = u8::MAX;

/// A complete game tracked by the reference rules.
#[derive(Debug, Clone)]
pub struct RefGame {
    size: usize,
    num_players: usize,
    board: Vec<u8>,
    to_move: usize,
    consecutive_passes: usize,
    move_count: usize,
    move_cap: usize,
    history: Vec<(Vec<u8>, usize)>,
}

impl RefGame {
    pub fn new(num_players: usize, size: usize) -> RefGame {
        let board = vec![EMPTY; size * size];
        let history = vec![(board.clone(), 0)];
        RefGame {
            size,
            num_players,
            board,
            to_move: 0,
            consecutive_passes: 0,
            move_count: 0,
            move_cap: 6 * size * size,
            history,
        }
    }

    /// Start tracking from an arbitrary engine state (the history restarts
    /// at that position, mirroring `GameState::from_setup`).
    pub fn from_state(state: &GameState) -> RefGame {
        let size = state.size();
        let mut board = vec![EMPTY; size * size];
        for r in 0..size {
            for c in 0..size {
                if let Some(p) = state.stone_at(Point::new(r, c)) {
                    board[r * size + c] = p.0;
                }
            }
        }
        let to_move = state.to_move().index();
        RefGame {
            size,
            num_players: state.num_players(),
            history: vec![(board.clone(), to_move)],
            board,
            to_move,
            consecutive_passes: state.consecutive_passes(),
            move_count: state.move_count(),
            move_cap: state.move_cap(),
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.consecutive_passes >= self.num_players || self.move_count >= self.move_cap
    }

    fn neighbors(&self, idx: usize) -> Vec<usize> {
        let (r, c) = (idx / self.size, idx % self.size);
        let mut out = Vec::with_capacity(4);
        if r > 0 {
            out.push(idx - self.size);
        }
        if r + 1 < self.size {
            out.push(idx + self.size);
        }
        if c > 0 {
            out.push(idx - 1);
        }
        if c + 1 < self.size {
            out.push(idx + 1);
        }
        out
    }

    fn group_of(board: &[u8], size: usize, start: usize) -> Vec<usize> {
        let color = board[start];
        let mut member = vec![false; board.len()];
        let mut stack = vec![start];
        member[start] = true;
        let mut group = Vec::new();
        while let Some(idx) = stack.pop() {
            group.push(idx);
            let (r, c) = (idx / size, idx % size);
            let mut push = |j: usize| {
                if !member[j] && board[j] == color {
                    member[j] = true;
                    stack.push(j);
                }
            };
            if r > 0 {
                push(idx - size);
            }
            if r + 1 < size {
                push(idx + size);
            }
            if c > 0 {
                push(idx - 1);
            }
            if c + 1 < size {
                push(idx + 1);
            }
        }
        group
    }

    fn group_has_liberty(board: &[u8], size: usize, group: &[usize]) -> bool {
        for &idx in group {
            let (r, c) = (idx / size, idx % size);
            let mut found = false;
            let mut check = |j: usize| {
                if board[j] == EMPTY {
                    found = true;
                }
            };
            if r > 0 {
                check(idx - size);
            }
            if r + 1 < size {
                check(idx + size);
            }
            if c > 0 {
                check(idx - 1);
            }
            if c + 1 < size {
                check(idx + 1);
            }
            if found {
                return true;
            }
        }
        false
    }

    /// Simulate placing a stone for `player` at `idx`: returns the resulting
    /// board, or None if the move is suicide. All opposing zero-liberty
    /// groups are identified first and removed simultaneously.
    fn simulate_placement(&self, idx: usize, player: u8) -> Option<Vec<u8>> {
        let mut board = self.board.clone();
        board[idx] = player;
        let mut dead = Vec::new();
        for nbr in self.neighbors(idx) {
            let color = board[nbr];
            if color == EMPTY || color == player || dead.contains(&nbr) {
                continue;
            }
            let group = Self::group_of(&board, self.size, nbr);
            if !Self::group_has_liberty(&board, self.size, &group) {
                dead.extend(group);
            }
        }
        for &g in &dead {
            board[g] = EMPTY;
        }
        let own = Self::group_of(&board, self.size, idx);
        if Self::group_has_liberty(&board, self.size, &own) {
            Some(board)
        } else {
            None
        }
    }

    pub fn is_eye(&self, point: Point, player: PlayerId) -> bool {
        let idx = point.row as usize * self.size + point.col as usize;
        if self.board[idx] != EMPTY {
            return false;
        }
        let nbrs = self.neighbors(idx);
        if nbrs.iter().any(|&n| self.board[n] != player.0) {
            return false;
        }
        let group = Self::group_of(&self.board, self.size, nbrs[0]);
        nbrs.iter().all(|n| group.contains(n))
    }

    /// Every legal placement by direct simulation, or `[Pass]` if none.
    pub fn legal_moves(&self) -> Vec<Move> {
        let mover = self.to_move as u8;
        let next = (self.to_move + 1) % self.num_players;
        let mut out = Vec::new();
        for idx in 0..self.board.len() {
            if self.board[idx] != EMPTY {
                continue;
            }
            let point = Point::new(idx / self.size, idx % self.size);
            if self.is_eye(point, PlayerId(mover)) {
                continue;
            }
            let Some(board) = self.simulate_placement(idx, mover) else {
                continue;
            };
            if self.history.iter().any(|(b, t)| *t == next && *b == board) {
                continue;
            }
            out.push(Move::Place(point));
        }
        if out.is_empty() {
            out.push(Move::Pass);
        }
        out
    }

    pub fn play(&mut self, mv: Move) -> Result<(), String> {
        if self.is_terminal() {
            return Err("game over".into());
        }
        if !self.legal_moves().contains(&mv) {
            return Err(format!("illegal move {mv}"));
        }
        match mv {
            Move::Pass => {
                self.consecutive_passes += 1;
            }
            Move::Place(p) => {
                let idx = p.row as usize * self.size + p.col as usize;
                self.board = self
                    .simulate_placement(idx, self.to_move as u8)
                    .expect("legal move simulates");
                self.consecutive_passes = 0;
            }
        }
        self.to_move = (self.to_move + 1) % self.num_players;
        self.move_count += 1;
        self.history.push((self.board.clone(), self.to_move));
        Ok(())
    }

    /// Chinese area score by grid flood fill over empty regions.
    pub fn score(&self) -> Vec<u32> {
        let mut scores = vec![0u32; self.num_players];
        for &cell in &self.board {
            if cell != EMPTY {
                scores[cell as usize] += 1;
            }
        }
        let mut visited = vec![false; self.board.len()];
        for start in 0..self.board.len() {
            if visited[start] || self.board[start] != EMPTY {
                continue;
            }
            let mut stack = vec![start];
            visited[start] = true;
            let mut region = Vec::new();
            let mut border_colors = Vec::new();
            while let Some(idx) = stack.pop() {
                region.push(idx);
                for nbr in self.neighbors(idx) {
                    match self.board[nbr] {
                        EMPTY => {
                            if !visited[nbr] {
                                visited[nbr] = true;
                                stack.push(nbr);
                            }
                        }
                        color => {
                            if !border_colors.contains(&color) {
                                border_colors.push(color);
                            }
                        }
                    }
                }
            }
            if border_colors.len() == 1 {
                scores[border_colors[0] as usize] += region.len() as u32;
            }
        }
        scores
    }
}
