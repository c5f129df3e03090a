//! Sequence-encoder actor and critic networks with hand-rolled reverse mode.
//!
//! Each network embeds a fixed-length observation window, runs it through a
//! stack of linear state-transition layers with causal multi-head attention,
//! and finishes with small dense heads. All math is f64 so the analytic
//! gradients can be checked against central finite differences.

mod checkpoint;
mod dense;
mod encoder;
mod nets;
mod params;
mod sst;

pub use checkpoint::BinaryStore;
pub use dense::{Dense, Mlp, MlpTape};
pub use encoder::{EncoderTape, SeqEncoder};
pub use nets::{ActorNet, ActorTape, CriticNet, CriticTape};
pub use params::{sgd_step, soft_update, ParamBlock, TensorMut, TensorRef};
pub use sst::{SstLayer, SstTape};

use crate::{Error, Result};

/// Network dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub key_dim: usize,
    pub heads: usize,
    pub sst_layers: usize,
    pub seq_len: usize,
    pub action_dim: usize,
    pub actor_hidden: Vec<usize>,
    pub critic_state_units: usize,
    pub critic_action_units: usize,
    pub critic_hidden: Vec<usize>,
}

impl NetConfig {
    /// Full-size configuration used for paper-scale training.
    pub fn full() -> Self {
        Self {
            input_dim: 6,
            hidden_dim: 256,
            key_dim: 32,
            heads: 8,
            sst_layers: 2,
            seq_len: 10,
            action_dim: 2,
            actor_hidden: vec![64, 64],
            critic_state_units: 16,
            critic_action_units: 16,
            critic_hidden: vec![64, 64],
        }
    }

    /// Reduced dimensions for desk-scale training runs.
    pub fn desk() -> Self {
        Self {
            hidden_dim: 32,
            key_dim: 8,
            heads: 4,
            ..Self::full()
        }
    }

    /// Tiny dimensions for exhaustive gradient checks.
    pub fn tiny() -> Self {
        Self {
            input_dim: 6,
            hidden_dim: 6,
            key_dim: 3,
            heads: 2,
            sst_layers: 2,
            seq_len: 4,
            action_dim: 2,
            actor_hidden: vec![5, 4],
            critic_state_units: 4,
            critic_action_units: 4,
            critic_hidden: vec![5, 4],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positives = [
            self.input_dim,
            self.hidden_dim,
            self.key_dim,
            self.heads,
            self.sst_layers,
            self.seq_len,
            self.action_dim,
            self.critic_state_units,
            self.critic_action_units,
        ];
        if positives.iter().any(|v| *v == 0) {
            return Err(Error::Config("network dimensions must be positive".into()));
        }
        if self.hidden_dim % self.heads != 0 {
            return Err(Error::Config(
                "hidden_dim must be divisible by the head count".into(),
            ));
        }
        if self.actor_hidden.is_empty() || self.critic_hidden.is_empty() {
            return Err(Error::Config("head layer lists must be non-empty".into()));
        }
        Ok(())
    }

    /// Per-head slice of the layer output used as attention values.
    pub fn value_chunk(&self) -> usize {
        self.hidden_dim / self.heads
    }
}

/// Fixed-length observation window, oldest first, zero-padded at the start
/// of an episode or stored sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryWindow {
    feats: Vec<[f64; 6]>,
}

impl HistoryWindow {
    pub fn zeros(seq_len: usize) -> Self {
        Self {
            feats: vec![[0.0; 6]; seq_len],
        }
    }

    /// Window over `stream[..=end]`, zero-padded on the left.
    pub fn ending_at(stream: &[[f64; 6]], end: usize, seq_len: usize) -> Self {
        let mut w = Self::zeros(seq_len);
        for k in 0..seq_len {
            // Position seq_len-1-k holds stream[end-k] when it exists.
            if k > end {
                break;
            }
            w.feats[seq_len - 1 - k] = stream[end - k];
        }
        w
    }

    /// Slide the window forward by one observation.
    pub fn push(&mut self, obs: [f64; 6]) {
        self.feats.rotate_left(1);
        let last = self.feats.len() - 1;
        self.feats[last] = obs;
    }

    pub fn frames(&self) -> &[[f64; 6]] {
        &self.feats
    }

    pub fn len(&self) -> usize {
        self.feats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.feats.is_empty()
    }
}

/// Sample emphasis from a temporal-difference error: `exp(|td| / tau)`.
///
/// The temperature must be validated positive at configuration time.
pub fn importance_weight(td_error: f64, temperature: f64) -> f64 {
    debug_assert!(temperature > 0.0, "temperature must be positive");
    (td_error.abs() / temperature).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn importance_weight_examples() {
        assert_eq!(importance_weight(0.0, 1.0), 1.0);
        assert_relative_eq!(
            importance_weight(0.7, 0.7),
            std::f64::consts::E,
            epsilon = 1e-12
        );
        assert_eq!(importance_weight(2.5, 1.3), importance_weight(-2.5, 1.3));
        // Strictly increasing in |td|.
        assert!(importance_weight(2.0, 1.0) > importance_weight(1.0, 1.0));
        assert!(importance_weight(0.1, 1.0) >= 1.0);
    }

    #[test]
    fn window_padding_and_push() {
        let stream = vec![[1.0; 6], [2.0; 6], [3.0; 6]];
        let w = HistoryWindow::ending_at(&stream, 1, 4);
        assert_eq!(w.frames()[0], [0.0; 6]);
        assert_eq!(w.frames()[1], [0.0; 6]);
        assert_eq!(w.frames()[2], [1.0; 6]);
        assert_eq!(w.frames()[3], [2.0; 6]);

        let mut w = HistoryWindow::zeros(3);
        w.push([5.0; 6]);
        w.push([6.0; 6]);
        assert_eq!(w.frames(), &[[0.0; 6], [5.0; 6], [6.0; 6]]);
    }

    #[test]
    fn config_validation() {
        assert!(NetConfig::full().validate().is_ok());
        assert!(NetConfig::desk().validate().is_ok());
        assert!(NetConfig::tiny().validate().is_ok());
        let mut bad = NetConfig::full();
        bad.heads = 7;
        assert!(bad.validate().is_err());
    }
}
