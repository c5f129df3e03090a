//! Reward components and the adaptive weighting scheme.
//!
//! The speed term penalizes normalized deviation between a predicted and an
//! observed body-frame velocity; collision and goal terms are event-triggered
//! constants; the three weights renormalize each episode from the magnitude
//! of each component's episode mean.

use crate::{Error, Result};

/// Event reward constants.
pub const COLLISION_PENALTY: f64 = -200.0;
pub const GOAL_REWARD: f64 = 100.0;
/// Scaling factor applied to the speed term when used in training.
pub const REWARD_SCALE: f64 = 100.0;

/// Per-axis speed mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisStats {
    pub mean: f64,
    pub std: f64,
}

/// Body-frame speed statistics frozen from the pre-training corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedStats {
    pub veh_long: AxisStats,
    pub veh_lat: AxisStats,
    pub ped_long: AxisStats,
    pub ped_lat: AxisStats,
}

impl SpeedStats {
    pub fn validate(&self) -> Result<()> {
        let all = [self.veh_long, self.veh_lat, self.ped_long, self.ped_lat];
        if all.iter().any(|a| !(a.std > 0.0) || !a.std.is_finite() || !a.mean.is_finite()) {
            return Err(Error::Config(
                "speed statistics require positive finite std on every axis".into(),
            ));
        }
        Ok(())
    }

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.veh_long.mean,
            self.veh_long.std,
            self.veh_lat.mean,
            self.veh_lat.std,
            self.ped_long.mean,
            self.ped_long.std,
            self.ped_lat.mean,
            self.ped_lat.std,
        ]
    }

    pub fn from_array(a: [f64; 8]) -> Self {
        Self {
            veh_long: AxisStats { mean: a[0], std: a[1] },
            veh_lat: AxisStats { mean: a[2], std: a[3] },
            ped_long: AxisStats { mean: a[4], std: a[5] },
            ped_lat: AxisStats { mean: a[6], std: a[7] },
        }
    }

    pub fn axes_for(&self, agent: crate::conflict::AgentId) -> (AxisStats, AxisStats) {
        match agent {
            crate::conflict::AgentId::Vehicle => (self.veh_long, self.veh_lat),
            crate::conflict::AgentId::Pedestrian => (self.ped_long, self.ped_lat),
        }
    }
}

/// Speed reward: negative sum of squared normalized deviations between
/// predicted and observed (long, lat) speeds. Zero iff they match. The mean
/// offsets cancel algebraically but are kept in the written form.
pub fn speed_reward(
    pred: [f64; 2],
    obs: [f64; 2],
    stats: &SpeedStats,
    agent: crate::conflict::AgentId,
) -> f64 {
    let (long, lat) = stats.axes_for(agent);
    let d_long = (pred[0] - long.mean) / long.std - (obs[0] - long.mean) / long.std;
    let d_lat = (pred[1] - lat.mean) / lat.std - (obs[1] - lat.mean) / lat.std;
    -(d_long * d_long + d_lat * d_lat)
}

/// Event rewards: `(-200 iff collided else 0, 100 iff goal reached else 0)`.
pub fn event_rewards(collided: bool, goal_reached: bool) -> (f64, f64) {
    (
        if collided { COLLISION_PENALTY } else { 0.0 },
        if goal_reached { GOAL_REWARD } else { 0.0 },
    )
}

/// Per-step reward components before weighting.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RewardBreakdown {
    pub r_collision: f64,
    pub r_goal: f64,
    pub r_speed: f64,
}

/// Normalized component weights plus the adaptation temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardWeights {
    pub w_collision: f64,
    pub w_goal: f64,
    pub w_speed: f64,
    pub lambda_temp: f64,
    /// When true, `update_weights` leaves the weights unchanged (fixed-weight
    /// sweeps).
    pub frozen: bool,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            w_collision: 1.0 / 3.0,
            w_goal: 1.0 / 3.0,
            w_speed: 1.0 / 3.0,
            lambda_temp: 0.1,
            frozen: false,
        }
    }
}

impl RewardWeights {
    pub fn fixed(w_collision: f64, w_goal: f64, w_speed: f64) -> Self {
        Self {
            w_collision,
            w_goal,
            w_speed,
            lambda_temp: 0.0,
            frozen: true,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.w_collision, self.w_goal, self.w_speed]
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.as_array();
        if w.iter().any(|x| *x < 0.0 || !x.is_finite()) {
            return Err(Error::Config("reward weights must be non-negative".into()));
        }
        if (w.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::Config("reward weights must sum to 1".into()));
        }
        if self.lambda_temp < 0.0 {
            return Err(Error::Config("lambda_temp must be non-negative".into()));
        }
        Ok(())
    }
}

/// Weighted sum of the three components.
pub fn total_reward(b: &RewardBreakdown, w: &RewardWeights) -> f64 {
    w.w_collision * b.r_collision + w.w_goal * b.r_goal + w.w_speed * b.r_speed
}

/// Episode-end weight adaptation from component-mean magnitudes:
/// `w_k' = w_k * exp(lambda*|mean_k|) / sum_j w_j * exp(lambda*|mean_j|)`.
/// Exponents are shifted by their maximum before exponentiation, which
/// leaves the ratio unchanged and keeps large means finite.
pub fn update_weights(w: &RewardWeights, episode_means: [f64; 3]) -> RewardWeights {
    if w.frozen {
        return *w;
    }
    let exponents: Vec<f64> = episode_means
        .iter()
        .map(|m| w.lambda_temp * m.abs())
        .collect();
    let shift = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights = w.as_array();
    let scaled: Vec<f64> = weights
        .iter()
        .zip(&exponents)
        .map(|(wk, e)| wk * (e - shift).exp())
        .collect();
    let total: f64 = scaled.iter().sum();
    RewardWeights {
        w_collision: scaled[0] / total,
        w_goal: scaled[1] / total,
        w_speed: scaled[2] / total,
        ..*w
    }
}
