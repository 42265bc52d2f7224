//! Newline-delimited game records.
//!
//! Each line is one self-describing JSON object: {version, size,
//! num_players, moves, final_scores, per_move_stats?}. Moves are written as
//! `"pass"` or `"row,col"`. Writing a parsed record reproduces the input
//! bytes exactly.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::{Move, ScoreVector};

pub const RECORD_VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed record on line {line}: {source}")]
    Malformed {
        line: usize,
        source: serde_json::Error,
    },
    #[error("unsupported record version {found:?} on line {line} (expected {RECORD_VERSION:?})")]
    UnsupportedVersion { line: usize, found: String },
}

/// Per-move search statistics: root visit counts for bandit searches, or a
/// backed root value vector for value-only searches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MoveStats {
    Visits { visits: Vec<(String, u64)> },
    Values { values: Vec<f64> },
}

impl MoveStats {
    pub fn from_visits<I: IntoIterator<Item = (Move, u64)>>(visits: I) -> MoveStats {
        MoveStats::Visits {
            visits: visits
                .into_iter()
                .map(|(mv, n)| (mv.to_string(), n))
                .collect(),
        }
    }

    pub fn from_values(values: &[f64]) -> MoveStats {
        MoveStats::Values {
            values: values.to_vec(),
        }
    }
}

/// One finished game: the move sequence, the final score vector, and
/// optionally one statistics entry per move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub version: String,
    pub size: usize,
    pub num_players: usize,
    pub moves: Vec<String>,
    pub final_scores: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_move_stats: Option<Vec<Option<MoveStats>>>,
}

impl GameRecord {
    pub fn new(size: usize, num_players: usize, moves: &[Move], final_scores: &ScoreVector) -> GameRecord {
        GameRecord {
            version: RECORD_VERSION.to_string(),
            size,
            num_players,
            moves: moves.iter().map(|m| m.to_string()).collect(),
            final_scores: final_scores.as_slice().iter().map(|&s| s as u32).collect(),
            per_move_stats: None,
        }
    }

    pub fn parsed_moves(&self) -> Result<Vec<Move>, String> {
        self.moves.iter().map(|s| s.parse()).collect()
    }
}

/// Append one record as a single JSON line.
pub fn write_record<W: Write>(mut w: W, record: &GameRecord) -> io::Result<()> {
    serde_json::to_writer(&mut w, record)?;
    w.write_all(b"\n")
}

pub fn write_records<W: Write>(mut w: W, records: &[GameRecord]) -> io::Result<()> {
    for record in records {
        write_record(&mut w, record)?;
    }
    Ok(())
}

/// Read every record from a newline-delimited stream, checking versions.
pub fn read_records<R: BufRead>(r: R) -> Result<Vec<GameRecord>, RecordError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: GameRecord =
            serde_json::from_str(&line).map_err(|source| RecordError::Malformed {
                line: i + 1,
                source,
            })?;
        if record.version != RECORD_VERSION {
            return Err(RecordError::UnsupportedVersion {
                line: i + 1,
                found: record.version,
            });
        }
        out.push(record);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{GameState, Move, Point};

    fn sample_record() -> GameRecord {
        let mut state = GameState::new(3, 5).unwrap();
        let moves = vec![
            Move::Place(Point::new(2, 2)),
            Move::Place(Point::new(1, 1)),
            Move::Place(Point::new(3, 3)),
        ];
        for &mv in &moves {
            state.play_mut(mv).unwrap();
        }
        let mut rec = GameRecord::new(5, 3, &moves, &state.score());
        rec.per_move_stats = Some(vec![
            Some(MoveStats::from_visits([
                (Move::Place(Point::new(2, 2)), 120),
                (Move::Pass, 0),
            ])),
            None,
            Some(MoveStats::from_values(&[12.5, 6.25, 6.0])),
        ]);
        rec
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let records = vec![sample_record(), {
            let mut r = sample_record();
            r.per_move_stats = None;
            r
        }];
        let mut first = Vec::new();
        write_records(&mut first, &records).unwrap();
        let reread = read_records(first.as_slice()).unwrap();
        assert_eq!(reread, records);
        let mut second = Vec::new();
        write_records(&mut second, &reread).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn version_is_checked() {
        let mut bad = sample_record();
        bad.version = "v2".to_string();
        let mut buf = Vec::new();
        write_record(&mut buf, &bad).unwrap();
        match read_records(buf.as_slice()) {
            Err(RecordError::UnsupportedVersion { found, .. }) => assert_eq!(found, "v2"),
            other => panic!("expected version error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_line_is_reported_with_its_number() {
        let mut buf = Vec::new();
        write_record(&mut buf, &sample_record()).unwrap();
        buf.extend_from_slice(b"{not json\n");
        match read_records(buf.as_slice()) {
            Err(RecordError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed error, got {other:?}"),
        }
    }

    #[test]
    fn parsed_moves_round_trip() {
        let rec = sample_record();
        let moves = rec.parsed_moves().unwrap();
        assert_eq!(moves[0], Move::Place(Point::new(2, 2)));
    }
}
