//! Behavioral tests for the forward passes, losses, optimizers and
//! checkpoint round trips.

use mpgo_engine::GameState;
use mpgo_net::{
    encode, encodings_to_batch, expected_score, load_checkpoint, save_checkpoint, train_step,
    AzBatch, Batch, Checkpoint, DescentBatch, NetConfig, NetError, Network, OptState,
    OptimizerKind, TrainSettings,
};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_states(n: usize, seed: u64) -> Vec<GameState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let mut state = GameState::new(3, 5).unwrap();
        for _ in 0..rng.gen_range(0..30) {
            if state.is_terminal() {
                break;
            }
            let moves = state.legal_moves();
            state.play_mut(moves[rng.gen_range(0..moves.len())]).unwrap();
        }
        out.push(state);
    }
    out
}

fn batch_x(states: &[GameState]) -> Array2<f32> {
    let encodings: Vec<_> = states.iter().map(|s| encode(s).unwrap()).collect();
    encodings_to_batch(&encodings)
}

fn random_az_batch(n: usize, seed: u64) -> AzBatch<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let x = batch_x(&random_states(n, seed));
    let mut policy_targets = Array2::<f32>::zeros((n, 25));
    for mut row in policy_targets.outer_iter_mut() {
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = rng.gen::<f32>();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    let mut value_targets = Vec::new();
    for _ in 0..3 {
        let mut t = Array2::<f32>::zeros((n, 26));
        for mut row in t.outer_iter_mut() {
            row[rng.gen_range(0..26)] = 1.0;
        }
        value_targets.push(t);
    }
    AzBatch {
        x,
        policy_targets,
        policy_mask: Array1::ones(n),
        value_targets,
    }
}

#[test]
fn expected_score_examples() {
    let mut one_hot = Array1::<f64>::zeros(26);
    one_hot[25] = 1.0;
    assert!((expected_score(one_hot.view()) - 25.0).abs() < 1e-12);

    let uniform = Array1::<f64>::from_elem(26, 1.0 / 26.0);
    assert!((expected_score(uniform.view()) - 12.5).abs() < 1e-9);

    let mut split = Array1::<f64>::zeros(26);
    split[10] = 0.5;
    split[20] = 0.5;
    assert!((expected_score(split.view()) - 15.0).abs() < 1e-12);
}

#[test]
fn forward_az_rows_are_distributions() {
    let net: Network<f32> = Network::new(NetConfig::tiny(), 42);
    let x = batch_x(&random_states(6, 1));
    let out = net.forward_az(&x).unwrap();
    for row in out.policy.outer_iter() {
        assert!((row.sum() - 1.0).abs() < 1e-6);
        assert!(row.iter().all(|&p| p >= 0.0));
    }
    assert_eq!(out.value.len(), 3);
    for head in &out.value {
        assert_eq!(head.ncols(), 26);
        for row in head.outer_iter() {
            assert!((row.sum() - 1.0).abs() < 1e-6);
        }
    }
}

#[test]
fn forward_is_deterministic_and_batch_independent() {
    let net: Network<f32> = Network::new(NetConfig::tiny(), 7);
    let states = random_states(4, 9);
    let x = batch_x(&states);
    let a = net.forward_az(&x).unwrap();
    let b = net.forward_az(&x).unwrap();
    assert_eq!(a.policy, b.policy);

    // Two identical samples give identical rows.
    let dup = batch_x(&[states[0].clone(), states[0].clone()]);
    let out = net.forward_az(&dup).unwrap();
    assert_eq!(
        out.policy.row(0).to_vec(),
        out.policy.row(1).to_vec()
    );

    // Permuting the batch permutes the outputs identically.
    let fwd = net.forward_az(&batch_x(&[states[1].clone(), states[2].clone()])).unwrap();
    let rev = net.forward_az(&batch_x(&[states[2].clone(), states[1].clone()])).unwrap();
    assert_eq!(fwd.policy.row(0).to_vec(), rev.policy.row(1).to_vec());
    assert_eq!(fwd.value[2].row(1).to_vec(), rev.value[2].row(0).to_vec());

    let d1 = net.forward_descent(&batch_x(&[states[3].clone()])).unwrap();
    assert_eq!(d1.shape(), &[1, 3]);
    let d2 = net.forward_descent(&batch_x(&[states[3].clone()])).unwrap();
    assert_eq!(d1, d2);
}

/// With all parameters zero the policy is uniform over 25 moves and each
/// value head uniform over 26 bins, so the loss is exactly
/// ln(25) + 3·ln(26): the cross-entropy of uniform predictions, no L2.
#[test]
fn loss_az_of_zero_network_is_uniform_cross_entropy() {
    let config = NetConfig::tiny();
    let net = Network::<f64> {
        params: mpgo_net::Params::zeros(&config),
        config,
    };
    let batch = {
        let b32 = random_az_batch(4, 3);
        AzBatch::<f64> {
            x: b32.x.mapv(|v| v as f64),
            policy_targets: b32.policy_targets.mapv(|v| v as f64),
            policy_mask: b32.policy_mask.mapv(|v| v as f64),
            value_targets: b32.value_targets.iter().map(|t| t.mapv(|v| v as f64)).collect(),
        }
    };
    let loss = net.loss_az(&batch).unwrap();
    let expected = (25.0f64).ln() + 3.0 * (26.0f64).ln();
    assert!((loss - expected).abs() < 1e-9, "{loss} vs {expected}");
}

#[test]
fn loss_descent_examples() {
    let config = NetConfig::tiny();
    let net = Network::<f64> {
        params: mpgo_net::Params::zeros(&config),
        config,
    };
    let x = batch_x(&random_states(1, 5)).mapv(|v| v as f64);
    // Zero network predicts (0,0,0); target (0,0,0) gives exactly zero.
    let zero_batch = DescentBatch {
        x: x.clone(),
        targets: Array2::zeros((1, 3)),
    };
    assert_eq!(net.loss_descent(&zero_batch).unwrap(), 0.0);
    // Target (25,0,0) gives 625/3.
    let mut targets = Array2::zeros((1, 3));
    targets[[0, 0]] = 25.0;
    let batch = DescentBatch { x, targets };
    let loss = net.loss_descent(&batch).unwrap();
    assert!((loss - 625.0 / 3.0).abs() < 1e-9, "{loss}");
}

#[test]
fn l2_term_counts_weights_not_biases() {
    let config = NetConfig::tiny();
    let mut net = Network::<f64> {
        params: mpgo_net::Params::zeros(&config),
        config,
    };
    // Biases alone contribute nothing to L2.
    for i in 0..net.params.len() {
        if net.params.meta(i).kind == mpgo_net::TensorKind::Bias {
            net.params.tensor_mut(i).fill(3.0);
        }
    }
    let x = batch_x(&random_states(1, 6)).mapv(|v| v as f64);
    let batch = DescentBatch {
        x,
        targets: Array2::from_shape_fn((1, 3), |(_, j)| 3.0 * ((j == 0) as usize as f64)),
    };
    // descent output = bias = 3 for every player; target (3,0,0):
    // mse = (0 + 9 + 9)/3 = 6; no L2 from biases.
    let loss = net.loss_descent(&batch).unwrap();
    assert!((loss - 6.0).abs() < 1e-9, "{loss}");

    // A nonzero descent weight adds exactly l2 * sum(w^2).
    let w_idx = net.params.index_of("descent.w").unwrap();
    net.params.tensor_mut(w_idx).fill(1e-3);
    let n_weights = net.params.tensor(w_idx).len() as f64;
    let with_l2 = net.loss_descent(&batch).unwrap();
    let l2_term = net.config.l2 * n_weights * 1e-6;
    // The tiny weights also shift the prediction slightly; bound that shift.
    assert!(with_l2 > loss + l2_term * 0.5, "{with_l2} vs {loss} + {l2_term}");
}

#[test]
fn zero_learning_rate_leaves_params_unchanged() {
    let mut net: Network<f32> = Network::new(NetConfig::tiny(), 11);
    let before = net.params.clone();
    let mut opt = OptState::new(&net, OptimizerKind::Sgd);
    let batch = random_az_batch(2, 12);
    train_step(
        &mut net,
        &mut opt,
        Batch::Az(&batch),
        TrainSettings {
            optimizer: OptimizerKind::Sgd,
            lr: 0.0,
        },
    )
    .unwrap();
    for i in 0..net.params.len() {
        assert_eq!(net.params.tensor(i), before.tensor(i));
    }
}

#[test]
fn loss_decreases_monotonically_on_fixed_batch() {
    let mut net: Network<f32> = Network::new(NetConfig::tiny(), 13);
    let mut opt = OptState::new(&net, OptimizerKind::Sgd);
    let batch = random_az_batch(8, 14);
    let settings = TrainSettings {
        optimizer: OptimizerKind::Sgd,
        lr: 0.01,
    };
    let mut last = f64::INFINITY;
    for _ in 0..50 {
        let loss = train_step(&mut net, &mut opt, Batch::Az(&batch), settings).unwrap();
        assert!(loss < last, "loss increased: {loss} after {last}");
        last = loss;
    }
}

#[test]
fn adam_reduces_descent_mse() {
    let mut net: Network<f32> = Network::new(NetConfig::tiny(), 15);
    let mut opt = OptState::new(&net, OptimizerKind::Adam);
    let x = batch_x(&random_states(8, 16));
    let mut targets = Array2::<f32>::zeros((8, 3));
    for (i, mut row) in targets.outer_iter_mut().enumerate() {
        row[0] = (i % 26) as f32;
        row[1] = 12.0;
        row[2] = 3.0;
    }
    let batch = DescentBatch { x, targets };
    let first = net.loss_descent(&batch).unwrap();
    let settings = TrainSettings {
        optimizer: OptimizerKind::Adam,
        lr: 0.01,
    };
    let mut loss = first;
    for _ in 0..100 {
        loss = train_step(&mut net, &mut opt, Batch::Descent(&batch), settings).unwrap();
    }
    assert!(loss < first * 0.2, "{first} -> {loss}");
}

#[test]
fn checkpoint_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.ckpt");
    let mut net: Network<f32> = Network::new(NetConfig::tiny(), 21);
    let mut opt = OptState::new(&net, OptimizerKind::Adam);
    let batch = random_az_batch(4, 22);
    for _ in 0..3 {
        train_step(
            &mut net,
            &mut opt,
            Batch::Az(&batch),
            TrainSettings {
                optimizer: OptimizerKind::Adam,
                lr: 1e-3,
            },
        )
        .unwrap();
    }
    let x = batch_x(&random_states(3, 23));
    let before = net.forward_az(&x).unwrap();

    save_checkpoint(
        &path,
        &Checkpoint {
            iteration: 7,
            network: net,
            opt_state: opt,
        },
    )
    .unwrap();
    let loaded: Checkpoint<f32> = load_checkpoint(&path).unwrap();
    assert_eq!(loaded.iteration, 7);
    assert_eq!(loaded.opt_state.step, 3);
    let after = loaded.network.forward_az(&x).unwrap();
    assert_eq!(before.policy, after.policy);
    assert_eq!(before.value, after.value);

    // Save -> load -> save reproduces the file byte for byte.
    let path2 = dir.path().join("net2.ckpt");
    save_checkpoint(&path2, &loaded).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
}

#[test]
fn checkpoint_rejects_truncation_and_future_versions() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.ckpt");
    let net: Network<f32> = Network::new(NetConfig::tiny(), 31);
    let opt = OptState::new(&net, OptimizerKind::Sgd);
    save_checkpoint(
        &path,
        &Checkpoint {
            iteration: 0,
            network: net,
            opt_state: opt,
        },
    )
    .unwrap();

    let bytes = std::fs::read(&path).unwrap();
    let truncated_path = dir.path().join("trunc.ckpt");
    std::fs::write(&truncated_path, &bytes[..bytes.len() / 2]).unwrap();
    assert!(matches!(
        load_checkpoint::<f32, _>(&truncated_path),
        Err(NetError::CorruptCheckpoint(_))
    ));

    let mut bumped = bytes.clone();
    bumped[4] = 99; // version field follows the 4-byte magic
    let bumped_path = dir.path().join("future.ckpt");
    std::fs::write(&bumped_path, &bumped).unwrap();
    assert!(matches!(
        load_checkpoint::<f32, _>(&bumped_path),
        Err(NetError::UnsupportedVersion { found: 99, .. })
    ));
}

#[test]
fn overfit_single_sample_descent() {
    // Training to convergence on one fixed pair drives the output to the
    // target within 0.1.
    let mut net: Network<f32> = Network::new(NetConfig::tiny(), 41);
    let mut opt = OptState::new(&net, OptimizerKind::Adam);
    let x = batch_x(&random_states(1, 42));
    let mut targets = Array2::<f32>::zeros((1, 3));
    targets[[0, 0]] = 14.0;
    targets[[0, 1]] = 6.0;
    targets[[0, 2]] = 5.0;
    let batch = DescentBatch {
        x: x.clone(),
        targets: targets.clone(),
    };
    let settings = TrainSettings {
        optimizer: OptimizerKind::Adam,
        lr: 0.01,
    };
    for _ in 0..400 {
        train_step(&mut net, &mut opt, Batch::Descent(&batch), settings).unwrap();
    }
    let out = net.forward_descent(&x).unwrap();
    for j in 0..3 {
        assert!(
            (out[[0, j]] - targets[[0, j]]).abs() < 0.1,
            "head {j}: {} vs {}",
            out[[0, j]],
            targets[[0, j]]
        );
    }
}
