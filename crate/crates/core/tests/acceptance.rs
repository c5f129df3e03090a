//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test -p nearmiss-core --test acceptance -- --nocapture`
//! to see the per-criterion lines.

mod support;

use nearmiss_core::nn::{ActorNet, CriticNet, HistoryWindow, NetConfig, ParamBlock};
use support::{criterion_line, fd_check_actor, fd_check_critic, random_window};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Criterion 1: analytic gradients of actor and critic match central finite
/// differences (step 1e-5) within 1e-4 relative error on 5 random seeds,
/// covering the embedding, both SST layers, attention, and dense heads.
#[test]
fn criterion_01_gradient_fidelity() {
    let cfg = NetConfig::tiny();
    assert_eq!(cfg.sst_layers, 2);
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let actor = ActorNet::init(&cfg, &mut rng);
        let critic = CriticNet::init(&cfg, &mut rng);
        let window = random_window(&cfg, &mut rng);

        let worst_actor = fd_check_actor(&actor, &window, None);
        assert!(
            worst_actor < 1e-4,
            "actor gradient check failed on seed {seed}: max rel err {worst_actor:e}"
        );
        let worst_critic = fd_check_critic(&critic, &window, [0.4, -0.8], [-0.3, 0.6], None);
        assert!(
            worst_critic < 1e-4,
            "critic gradient check failed on seed {seed}: max rel err {worst_critic:e}"
        );
    }

    // Spot-check the full-size configuration on a sampled coordinate subset.
    let cfg = NetConfig::full();
    let mut rng = ChaCha8Rng::seed_from_u64(2000);
    let actor = ActorNet::init(&cfg, &mut rng);
    let critic = CriticNet::init(&cfg, &mut rng);
    let window = random_window(&cfg, &mut rng);
    let n = actor.flat_len();
    let sample: Vec<usize> = (0..200).map(|k| (k * 7919) % n).collect();
    let worst = fd_check_actor(&actor, &window, Some(&sample));
    assert!(worst < 1e-4, "full-size actor spot check: {worst:e}");
    let nc = critic.flat_len();
    let sample: Vec<usize> = (0..200).map(|k| (k * 7919) % nc).collect();
    let worst = fd_check_critic(&critic, &window, [0.4, -0.8], [-0.3, 0.6], Some(&sample));
    assert!(worst < 1e-4, "full-size critic spot check: {worst:e}");

    criterion_line(1, "gradient fidelity vs central finite differences", true);
}

#[allow(dead_code)]
fn unused_window_helper(cfg: &NetConfig) -> HistoryWindow {
    HistoryWindow::zeros(cfg.seq_len)
}
