//! Training engine: replay buffers, prioritized sampling, targets, losses,
//! policy gradients, soft updates, exploration, and convergence.

mod buffer;
mod checkpoint;
mod trainer;

pub use buffer::{AgentTrackData, Provenance, ReplayBuffer, ReplayEntry};
pub use checkpoint::Checkpoint;
pub use trainer::{train_step, AgentNets, BatchSource, MultiAgentNets, Stage, TrainContext, TrainStepOutcome};

use crate::{Error, Result};

/// Exploration noise decay `N(t) = N0*exp(-beta*t) + N_min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplorationSchedule {
    pub n0: f64,
    pub decay_beta: f64,
    pub n_min: f64,
}

impl Default for ExplorationSchedule {
    fn default() -> Self {
        Self {
            n0: 0.3,
            decay_beta: 0.001,
            n_min: 0.05,
        }
    }
}

impl ExplorationSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.n0 > self.n_min && self.n_min >= 0.0 && self.decay_beta > 0.0) {
            return Err(Error::Config(
                "exploration schedule requires n0 > n_min >= 0 and decay_beta > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Noise scale at training step `t`, used as a per-component Gaussian
/// standard deviation in acceleration units.
pub fn exploration_noise(t: u64, sched: &ExplorationSchedule) -> f64 {
    sched.n0 * (-sched.decay_beta * t as f64).exp() + sched.n_min
}

/// Training hyperparameters. Defaults are the full-scale values; `desk()`
/// shrinks the batch and iteration counts for laptop runs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub buffer_capacity: usize,
    pub batch_size: usize,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub lr_online: f64,
    pub gamma: f64,
    pub tau_soft: f64,
    /// Online-refinement episode budget.
    pub episodes: usize,
    /// Offline pre-training iteration budget.
    pub pretrain_iters: usize,
    pub priority_exponent: f64,
    pub real_bonus: f64,
    pub priority_floor: f64,
    pub grad_norm_threshold: f64,
    pub patience: usize,
    pub exploration: ExplorationSchedule,
    /// Temperature of the TD-error emphasis weight.
    pub td_temperature: f64,
    /// Random timestep anchors evaluated per sampled sequence; 0 = all.
    pub anchors_per_sequence: usize,
    pub max_grad_norm: f64,
    /// Fraction of each online batch drawn from the practical buffer.
    pub practical_fraction: f64,
    pub updates_per_episode: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            buffer_capacity: 10_000,
            batch_size: 256,
            lr_actor: 1e-4,
            lr_critic: 2e-4,
            lr_online: 5e-5,
            gamma: 0.99,
            tau_soft: 0.01,
            episodes: 3000,
            pretrain_iters: 3000,
            priority_exponent: 0.6,
            real_bonus: 0.2,
            priority_floor: 1e-3,
            grad_norm_threshold: 1e-4,
            patience: 100,
            exploration: ExplorationSchedule::default(),
            td_temperature: 1.0,
            anchors_per_sequence: 4,
            max_grad_norm: 10.0,
            practical_fraction: 0.2,
            updates_per_episode: 1,
        }
    }
}

impl TrainingConfig {
    /// Reduced budgets for desk-scale end-to-end runs.
    pub fn desk() -> Self {
        Self {
            batch_size: 32,
            episodes: 500,
            pretrain_iters: 300,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config("gamma must lie in (0, 1)".into()));
        }
        if !(self.tau_soft > 0.0 && self.tau_soft <= 1.0) {
            return Err(Error::Config("tau_soft must lie in (0, 1]".into()));
        }
        for (name, v) in [
            ("lr_actor", self.lr_actor),
            ("lr_critic", self.lr_critic),
            ("lr_online", self.lr_online),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.buffer_capacity == 0 || self.batch_size == 0 {
            return Err(Error::Config("buffer and batch sizes must be positive".into()));
        }
        if !(self.td_temperature > 0.0) {
            return Err(Error::Config("td_temperature must be positive".into()));
        }
        if !(self.priority_exponent >= 0.0 && self.priority_floor > 0.0) {
            return Err(Error::Config(
                "priority exponent must be non-negative and the floor positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.practical_fraction) {
            return Err(Error::Config("practical_fraction must lie in [0, 1]".into()));
        }
        self.exploration.validate()
    }
}

/// Bootstrapped critic target `y = r + gamma*next_q`, masked on terminals.
pub fn critic_target(r: f64, next_q: f64, gamma: f64, terminal: bool) -> f64 {
    if terminal {
        r
    } else {
        r + gamma * next_q
    }
}

/// Converged when the most recent `patience` gradient norms all sit below
/// the threshold.
pub fn check_convergence(grad_norm_history: &[f64], cfg: &TrainingConfig) -> bool {
    if grad_norm_history.len() < cfg.patience {
        return false;
    }
    grad_norm_history[grad_norm_history.len() - cfg.patience..]
        .iter()
        .all(|g| *g < cfg.grad_norm_threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exploration_noise_examples() {
        let sched = ExplorationSchedule::default();
        assert_relative_eq!(exploration_noise(0, &sched), 0.35, epsilon = 1e-12);
        // Half-life of the decaying part.
        let half_life = (2.0f64.ln() / sched.decay_beta).round() as u64;
        assert_relative_eq!(
            exploration_noise(half_life, &sched),
            0.15 + 0.05,
            epsilon = 1e-4
        );
        assert_relative_eq!(exploration_noise(10_000_000, &sched), 0.05, epsilon = 1e-12);
    }

    #[test]
    fn critic_target_examples() {
        assert_relative_eq!(critic_target(1.0, 2.0, 0.99, false), 2.98, epsilon = 1e-12);
        assert_relative_eq!(critic_target(0.7, 5.0, 0.0, false), 0.7);
        assert_relative_eq!(critic_target(0.7, 123.0, 0.99, true), 0.7);
    }

    #[test]
    fn convergence_window_rules() {
        let cfg = TrainingConfig {
            patience: 100,
            grad_norm_threshold: 1e-4,
            ..TrainingConfig::default()
        };
        let converged = vec![1e-5; 100];
        assert!(check_convergence(&converged, &cfg));
        let mut broken = vec![1e-5; 99];
        broken.push(2e-4);
        assert!(!check_convergence(&broken, &cfg));
        assert!(!check_convergence(&[], &cfg));
        // A long history only counts its trailing window.
        let mut tail_ok = vec![1.0; 50];
        tail_ok.extend(vec![9e-5; 100]);
        assert!(check_convergence(&tail_ok, &cfg));
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        let mut cfg = TrainingConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.gamma = 1.0;
        assert!(cfg.validate().is_err());
        cfg.gamma = 0.99;
        cfg.td_temperature = 0.0;
        assert!(cfg.validate().is_err());
    }
}
