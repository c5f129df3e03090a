//! Shared helpers for the integration suites: finite-difference gradient
//! checks and fixture generators.

use nearmiss_core::nn::{ActorNet, CriticNet, HistoryWindow, NetConfig, ParamBlock};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-5;

pub fn criterion_line(number: u32, label: &str, pass: bool) {
    println!(
        "criterion {number:02} [{}] {label}",
        if pass { "PASS" } else { "FAIL" }
    );
}

pub fn random_window(cfg: &NetConfig, rng: &mut ChaCha8Rng) -> HistoryWindow {
    let mut w = HistoryWindow::zeros(cfg.seq_len);
    for _ in 0..cfg.seq_len {
        let mut obs = [0.0; 6];
        for o in &mut obs {
            *o = rng.gen_range(-2.0..2.0);
        }
        w.push(obs);
    }
    w
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Central finite differences over (a subset of) the actor parameters
/// against the analytic gradient of a fixed linear functional of the
/// action output. Returns the worst relative error.
pub fn fd_check_actor(actor: &ActorNet, window: &HistoryWindow, subset: Option<&[usize]>) -> f64 {
    // Fixed projection so the scalar loss exercises both output components.
    let proj = [0.7, -1.3];
    let loss = |net: &ActorNet| -> f64 {
        let (a, _) = net.forward(window);
        proj[0] * a[0] + proj[1] * a[1]
    };

    let (_, tape) = actor.forward(window);
    let mut grads = actor.zeros_like();
    actor.backward(&tape, proj, &mut grads);
    let analytic = grads.to_flat();

    let base = actor.to_flat();
    let indices: Vec<usize> = match subset {
        Some(s) => s.to_vec(),
        None => (0..base.len()).collect(),
    };
    let mut worst = 0.0f64;
    let mut probe = actor.clone();
    for &i in &indices {
        let mut flat = base.clone();
        flat[i] = base[i] + FD_STEP;
        probe.copy_from_flat(&flat);
        let up = loss(&probe);
        flat[i] = base[i] - FD_STEP;
        probe.copy_from_flat(&flat);
        let down = loss(&probe);
        let fd = (up - down) / (2.0 * FD_STEP);
        worst = worst.max(rel_err(analytic[i], fd));
    }
    worst
}

/// Central finite differences over (a subset of) the critic parameters
/// against the analytic gradient of the value output.
pub fn fd_check_critic(
    critic: &CriticNet,
    window: &HistoryWindow,
    a_self: [f64; 2],
    a_other: [f64; 2],
    subset: Option<&[usize]>,
) -> f64 {
    let loss = |net: &CriticNet| -> f64 {
        let (q, _) = net.forward(window, a_self, a_other);
        q
    };

    let (_, tape) = critic.forward(window, a_self, a_other);
    let mut grads = critic.zeros_like();
    critic.backward(&tape, 1.0, Some(&mut grads));
    let analytic = grads.to_flat();

    let base = critic.to_flat();
    let indices: Vec<usize> = match subset {
        Some(s) => s.to_vec(),
        None => (0..base.len()).collect(),
    };
    let mut worst = 0.0f64;
    let mut probe = critic.clone();
    for &i in &indices {
        let mut flat = base.clone();
        flat[i] = base[i] + FD_STEP;
        probe.copy_from_flat(&flat);
        let up = loss(&probe);
        flat[i] = base[i] - FD_STEP;
        probe.copy_from_flat(&flat);
        let down = loss(&probe);
        let fd = (up - down) / (2.0 * FD_STEP);
        worst = worst.max(rel_err(analytic[i], fd));
    }
    worst
}
