//! Root statistics shared by the bandit searches.

use mpgo_engine::{Move, PlayerId};
use rand::Rng;

/// Per-move root statistics of a finished search.
#[derive(Debug, Clone)]
pub struct MoveEntry {
    pub mv: Move,
    pub visits: u64,
    /// Mean backed-up score per player, points units; zeros when unvisited.
    pub mean_scores: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub to_move: PlayerId,
    /// Board side length, fixing the policy-target cell count.
    pub size: usize,
    pub moves: Vec<MoveEntry>,
}

impl SearchResult {
    /// Most-visited move; ties go to the higher mean score for the mover,
    /// then to the smallest move in (row, col) order.
    pub fn select_move(&self) -> Move {
        let mover = self.to_move.index();
        let mut best: Option<&MoveEntry> = None;
        for entry in &self.moves {
            let better = match best {
                None => true,
                Some(b) => {
                    if entry.visits != b.visits {
                        entry.visits > b.visits
                    } else if entry.mean_scores[mover] != b.mean_scores[mover] {
                        entry.mean_scores[mover] > b.mean_scores[mover]
                    } else {
                        entry.mv < b.mv
                    }
                }
            };
            if better {
                best = Some(entry);
            }
        }
        best.expect("search result has at least one move").mv
    }

    /// Sample a move proportionally to root visit counts. Falls back to the
    /// deterministic rule when no visits were recorded.
    pub fn sample_by_visits<R: Rng>(&self, rng: &mut R) -> Move {
        let total: u64 = self.moves.iter().map(|e| e.visits).sum();
        if total == 0 {
            return self.select_move();
        }
        let mut draw = rng.gen_range(0..total);
        for entry in &self.moves {
            if draw < entry.visits {
                return entry.mv;
            }
            draw -= entry.visits;
        }
        unreachable!("visit sampling overran the total")
    }

    /// Root visit counts normalized into a distribution over board cells;
    /// cells without a legal placement stay zero. None when the search saw
    /// no placement (forced pass).
    pub fn policy_target(&self) -> Option<Vec<f64>> {
        let mut target = vec![0.0; self.size * self.size];
        let mut total = 0u64;
        for entry in &self.moves {
            if let Move::Place(p) = entry.mv {
                target[p.row as usize * self.size + p.col as usize] = entry.visits as f64;
                total += entry.visits;
            }
        }
        if total == 0 {
            return None;
        }
        for v in &mut target {
            *v /= total as f64;
        }
        Some(target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mpgo_engine::Point;

    fn entry(mv: Move, visits: u64, mean: [f64; 3]) -> MoveEntry {
        MoveEntry {
            mv,
            visits,
            mean_scores: mean.to_vec(),
        }
    }

    #[test]
    fn select_move_prefers_visits_then_mean_then_position() {
        let a = Move::Place(Point::new(0, 1));
        let b = Move::Place(Point::new(1, 0));
        let result = SearchResult {
            to_move: PlayerId::BLACK,
            size: 5,
            moves: vec![entry(a, 100, [5.0, 0.0, 0.0]), entry(b, 80, [9.0, 0.0, 0.0])],
        };
        assert_eq!(result.select_move(), a);

        let tied_visits = SearchResult {
            to_move: PlayerId::BLACK,
            size: 5,
            moves: vec![entry(a, 90, [10.0, 0.0, 0.0]), entry(b, 90, [12.0, 0.0, 0.0])],
        };
        assert_eq!(tied_visits.select_move(), b);

        let all_tied = SearchResult {
            to_move: PlayerId::BLACK,
            size: 5,
            moves: vec![entry(b, 90, [10.0, 0.0, 0.0]), entry(a, 90, [10.0, 0.0, 0.0])],
        };
        assert_eq!(all_tied.select_move(), a);
    }

    #[test]
    fn policy_target_normalizes_and_skips_pass() {
        let result = SearchResult {
            to_move: PlayerId::BLACK,
            size: 5,
            moves: vec![
                entry(Move::Place(Point::new(0, 0)), 90, [0.0; 3]),
                entry(Move::Place(Point::new(2, 2)), 90, [0.0; 3]),
            ],
        };
        let target = result.policy_target().unwrap();
        assert_eq!(target[0], 0.5);
        assert_eq!(target[12], 0.5);
        assert!((target.iter().sum::<f64>() - 1.0).abs() < 1e-9);

        let pass_only = SearchResult {
            to_move: PlayerId::BLACK,
            size: 5,
            moves: vec![entry(Move::Pass, 10, [0.0; 3])],
        };
        assert!(pass_only.policy_target().is_none());
    }
}
