//! Central finite differences against the analytic gradients, in double
//! precision, on a one-block network.

use mpgo_engine::GameState;
use mpgo_net::{encode, encodings_to_batch, AzBatch, DescentBatch, NetConfig, Network};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_states(n: usize, seed: u64) -> Vec<GameState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut state = GameState::new(3, 5).unwrap();
            for _ in 0..rng.gen_range(0..25) {
                if state.is_terminal() {
                    break;
                }
                let moves = state.legal_moves();
                state.play_mut(moves[rng.gen_range(0..moves.len())]).unwrap();
            }
            state
        })
        .collect()
}

fn az_batch(n: usize, seed: u64) -> AzBatch<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let encodings: Vec<_> = random_states(n, seed)
        .iter()
        .map(|s| encode(s).unwrap())
        .collect();
    let x = encodings_to_batch::<f64>(&encodings);
    let mut policy_targets = Array2::<f64>::zeros((n, 25));
    for mut row in policy_targets.outer_iter_mut() {
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = rng.gen::<f64>();
            sum += *v;
        }
        row.mapv_inplace(|v| v / sum);
    }
    let value_targets = (0..3)
        .map(|_| {
            let mut t = Array2::<f64>::zeros((n, 26));
            for mut row in t.outer_iter_mut() {
                row[rng.gen_range(0..26)] = 1.0;
            }
            t
        })
        .collect();
    AzBatch {
        x,
        policy_targets,
        policy_mask: Array1::ones(n),
        value_targets,
    }
}

fn descent_batch(n: usize, seed: u64) -> DescentBatch<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let encodings: Vec<_> = random_states(n, seed)
        .iter()
        .map(|s| encode(s).unwrap())
        .collect();
    DescentBatch {
        x: encodings_to_batch::<f64>(&encodings),
        targets: Array2::from_shape_fn((n, 3), |_| rng.gen::<f64>() * 25.0),
    }
}

/// Perturb one flat weight and measure the loss difference.
fn central_diff<F: FnMut(&Network<f64>) -> f64>(
    net: &mut Network<f64>,
    tensor: usize,
    flat: usize,
    mut loss: F,
) -> f64 {
    let h = 1e-5;
    let orig = net.params.tensor(tensor).as_slice().unwrap()[flat];
    net.params.tensor_mut(tensor).as_slice_mut().unwrap()[flat] = orig + h;
    let plus = loss(net);
    net.params.tensor_mut(tensor).as_slice_mut().unwrap()[flat] = orig - h;
    let minus = loss(net);
    net.params.tensor_mut(tensor).as_slice_mut().unwrap()[flat] = orig;
    (plus - minus) / (2.0 * h)
}

fn check<F: FnMut(&Network<f64>) -> f64>(
    net: &mut Network<f64>,
    grads: &[ndarray::ArrayD<f64>],
    samples_per_tensor: usize,
    rng: &mut ChaCha8Rng,
    mut loss: F,
) {
    for tensor in 0..net.params.len() {
        let n = net.params.tensor(tensor).len();
        for _ in 0..samples_per_tensor {
            let flat = rng.gen_range(0..n);
            let numeric = central_diff(net, tensor, flat, &mut loss);
            let analytic = grads[tensor].as_slice().unwrap()[flat];
            let denom = numeric.abs().max(analytic.abs()).max(1e-6);
            let rel = (numeric - analytic).abs() / denom;
            assert!(
                rel < 1e-3,
                "tensor {} ({}) flat {flat}: numeric {numeric:.8e} vs analytic {analytic:.8e} (rel {rel:.2e})",
                net.params.meta(tensor).name,
                tensor
            );
        }
    }
}

#[test]
fn az_gradients_match_finite_differences() {
    let mut net: Network<f64> = Network::new(NetConfig::tiny(), 101);
    let batch = az_batch(3, 102);
    let (_, grads) = net.grad_az(&batch).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    check(&mut net, &grads, 4, &mut rng, |n| n.loss_az(&batch).unwrap());
}

#[test]
fn descent_gradients_match_finite_differences() {
    let mut net: Network<f64> = Network::new(NetConfig::tiny(), 104);
    let batch = descent_batch(3, 105);
    let (_, grads) = net.grad_descent(&batch).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    check(&mut net, &grads, 4, &mut rng, |n| n.loss_descent(&batch).unwrap());
}
