//! Replay storage for interaction sequences with mixed-provenance
//! prioritized sampling.

use std::collections::VecDeque;

use rand::Rng;

use super::TrainingConfig;
use crate::{Error, Result};

/// Where an entry came from; real entries get the sampling bonus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Real,
    Simulation,
}

/// One agent's per-step streams. Observations carry one extra trailing
/// element so the final step can bootstrap.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AgentTrackData {
    pub obs: Vec<[f64; 6]>,
    pub actions: Vec<[f64; 2]>,
    pub rewards: Vec<f64>,
}

impl AgentTrackData {
    pub fn steps(&self) -> usize {
        self.actions.len()
    }

    fn consistent(&self) -> bool {
        self.obs.len() == self.actions.len() + 1 && self.rewards.len() == self.actions.len()
    }
}

/// One stored interaction window: aligned streams for both agents.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayEntry {
    pub veh: AgentTrackData,
    pub ped: AgentTrackData,
    pub provenance: Provenance,
    /// Last refreshed TD-error magnitude.
    pub priority: f64,
    /// Whether the final step ended the episode.
    pub terminal: bool,
}

impl ReplayEntry {
    pub fn steps(&self) -> usize {
        self.veh.steps()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.veh.consistent() || !self.ped.consistent() {
            return Err(Error::Input(
                "replay entry streams must satisfy obs = actions + 1 = rewards + 1".into(),
            ));
        }
        if self.veh.steps() != self.ped.steps() || self.veh.steps() == 0 {
            return Err(Error::Input(
                "replay entry requires equal, non-zero step counts for both agents".into(),
            ));
        }
        if self.priority < 0.0 {
            return Err(Error::Input("priority must be non-negative".into()));
        }
        Ok(())
    }
}

/// Fixed-capacity FIFO ring of replay entries.
#[derive(Debug, Clone, Default)]
pub struct ReplayBuffer {
    entries: VecDeque<ReplayEntry>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            entries: VecDeque::with_capacity(capacity.min(4096)),
            capacity,
        }
    }

    pub fn push(&mut self, entry: ReplayEntry) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(entry);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, idx: usize) -> &ReplayEntry {
        &self.entries[idx]
    }

    pub fn set_priority(&mut self, idx: usize, priority: f64) {
        self.entries[idx].priority = priority;
    }

    pub fn iter(&self) -> impl Iterator<Item = &ReplayEntry> {
        self.entries.iter()
    }

    /// Sampling distribution `P(i) = (|d_i|^alpha + bonus*real_i + floor) / Z`.
    pub fn sample_probabilities(&self, cfg: &TrainingConfig) -> Vec<f64> {
        let weights: Vec<f64> = self
            .entries
            .iter()
            .map(|e| {
                let real = matches!(e.provenance, Provenance::Real) as u8 as f64;
                e.priority.abs().powf(cfg.priority_exponent)
                    + cfg.real_bonus * real
                    + cfg.priority_floor
            })
            .collect();
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    }

    /// Draw `m` indices with replacement from the prioritized distribution.
    pub fn sample_prioritized(
        &self,
        m: usize,
        cfg: &TrainingConfig,
        rng: &mut impl Rng,
    ) -> Result<Vec<usize>> {
        if self.is_empty() {
            return Err(Error::NotReady("replay buffer is empty".into()));
        }
        let probs = self.sample_probabilities(cfg);
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cumulative.push(acc);
        }
        let draws = (0..m)
            .map(|_| {
                let u: f64 = rng.gen_range(0.0..1.0);
                cumulative.partition_point(|c| *c < u).min(probs.len() - 1)
            })
            .collect();
        Ok(draws)
    }
}
