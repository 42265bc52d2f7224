//! Evaluator abstractions between the searches and the networks, so tests
//! can substitute stubs and the toy-game solvers can run on boards the
//! 5x5 encoder rejects.

use mpgo_engine::GameState;
use mpgo_net::{encode, encodings_to_batch, expected_score, Network};

/// Leaf evaluation for PUCT: a prior over all board cells (row-major,
/// unmasked) and an estimated score per player in points.
pub trait PolicyValueEval: Sync {
    fn evaluate(&self, state: &GameState) -> (Vec<f64>, Vec<f64>);
}

/// Batched score estimation for descent expansion.
pub trait ScoreEval: Sync {
    fn evaluate_states(&self, states: &[&GameState]) -> Vec<Vec<f64>>;
}

impl PolicyValueEval for Network<f32> {
    fn evaluate(&self, state: &GameState) -> (Vec<f64>, Vec<f64>) {
        let enc = encode(state).expect("network evaluation requires a 5x5 3-player state");
        let x = encodings_to_batch::<f32>(std::slice::from_ref(&enc));
        let out = self.forward_az(&x).expect("forward pass");
        let policy = out.policy.row(0).iter().map(|&p| p as f64).collect();
        let value = out
            .value
            .iter()
            .map(|head| expected_score(head.row(0)))
            .collect();
        (policy, value)
    }
}

impl ScoreEval for Network<f32> {
    fn evaluate_states(&self, states: &[&GameState]) -> Vec<Vec<f64>> {
        let encodings: Vec<_> = states
            .iter()
            .map(|s| encode(s).expect("network evaluation requires a 5x5 3-player state"))
            .collect();
        let x = encodings_to_batch::<f32>(&encodings);
        let out = self.forward_descent(&x).expect("forward pass");
        out.outer_iter()
            .map(|row| row.iter().map(|&v| v as f64).collect())
            .collect()
    }
}
