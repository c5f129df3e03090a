//! Curvilinear time-to-collision and episode-level safety labeling.
//!
//! The vehicle is projected along a constant-curvature arc (curvature from
//! its current lateral acceleration and speed, straight below the speed
//! epsilon), the pedestrian along a constant-velocity line. CurvTTC is the
//! first projected time the two come within the collision distance, found by
//! a fixed-step scan refined by bisection.

use crate::world::{AgentState, Vec2};
use crate::{Error, Result};

/// Thresholds and scan resolution for conflict detection and labeling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConflictParams {
    /// Below this CurvTTC the situation is safety-critical (onset marker).
    pub critical_threshold_s: f64,
    /// Below this CurvTTC at any frame the episode is a conflict.
    pub conflict_threshold_s: f64,
    pub horizon_s: f64,
    pub scan_dt_s: f64,
    pub collision_dist_m: f64,
    pub steer_epsilon: f64,
    pub bisect_tol_s: f64,
    /// Speed below which an agent counts as having stopped.
    pub near_stop_speed_mps: f64,
    /// Yield also triggers when speed falls below this fraction of onset speed.
    pub yield_fraction: f64,
}

impl Default for ConflictParams {
    fn default() -> Self {
        Self {
            critical_threshold_s: 5.0,
            conflict_threshold_s: 2.0,
            horizon_s: 10.0,
            scan_dt_s: 0.05,
            collision_dist_m: 1.3,
            steer_epsilon: 1e-6,
            bisect_tol_s: 1e-3,
            near_stop_speed_mps: 0.3,
            yield_fraction: 0.5,
        }
    }
}

impl ConflictParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.conflict_threshold_s
            && self.conflict_threshold_s < self.critical_threshold_s
            && self.critical_threshold_s <= self.horizon_s)
        {
            return Err(Error::Config(
                "require 0 < conflict_threshold < critical_threshold <= horizon".into(),
            ));
        }
        if !(self.scan_dt_s > 0.0) {
            return Err(Error::Config("scan_dt_s must be positive".into()));
        }
        if !(self.collision_dist_m > 0.0) {
            return Err(Error::Config("collision_dist_m must be positive".into()));
        }
        if !(self.yield_fraction > 0.0 && self.yield_fraction < 1.0) {
            return Err(Error::Config("yield_fraction must be in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Vehicle position projected `t` seconds ahead on a constant-curvature arc.
fn project_vehicle(veh: &AgentState, curvature: f64, t: f64) -> Vec2 {
    if curvature.abs() < 1e-9 {
        return veh.pos + veh.vel * t;
    }
    let speed = veh.speed();
    let r = 1.0 / curvature;
    let psi = veh.heading;
    let swept = curvature * speed * t;
    Vec2::new(
        veh.pos.x + r * ((psi + swept).sin() - psi.sin()),
        veh.pos.y + r * (psi.cos() - (psi + swept).cos()),
    )
}

/// Projected-path first-contact time, `+inf` when no contact occurs within
/// the horizon. `veh_lat_accel` is the vehicle's current lateral
/// acceleration, which sets the projection curvature.
pub fn curv_ttc(
    veh: &AgentState,
    veh_lat_accel: f64,
    ped: &AgentState,
    p: &ConflictParams,
) -> f64 {
    let speed = veh.speed();
    let curvature = if speed > p.steer_epsilon {
        veh_lat_accel / (speed * speed)
    } else {
        0.0
    };
    let dist_at = |t: f64| -> f64 {
        let vp = project_vehicle(veh, curvature, t);
        let pp = ped.pos + ped.vel * t;
        (vp - pp).norm() - p.collision_dist_m
    };

    if dist_at(0.0) <= 0.0 {
        return 0.0;
    }
    let steps = (p.horizon_s / p.scan_dt_s).ceil() as usize;
    let mut prev_t = 0.0;
    for k in 1..=steps {
        let t = (k as f64 * p.scan_dt_s).min(p.horizon_s);
        if dist_at(t) <= 0.0 {
            // Bisect for the crossing inside (prev_t, t].
            let (mut lo, mut hi) = (prev_t, t);
            while hi - lo > p.bisect_tol_s {
                let mid = 0.5 * (lo + hi);
                if dist_at(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
        prev_t = t;
    }
    f64::INFINITY
}

/// Minimal per-frame view the labeler needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameView {
    pub veh_speed: f64,
    pub ped_speed: f64,
    pub distance: f64,
    pub curv_ttc: f64,
}

/// Kinematics snapshot at the onset frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnsetKinematics {
    pub veh_speed: f64,
    pub ped_speed: f64,
    pub veh_accel: f64,
    pub ped_accel: f64,
    pub distance: f64,
}

/// Derived safety labels for one episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeLabels {
    pub onset_frame: Option<usize>,
    pub min_curvttc_s: f64,
    pub is_conflict: bool,
    pub veh_yielded: bool,
    pub ped_yielded: bool,
    pub onset: Option<OnsetKinematics>,
}

/// Which agent a per-agent query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentId {
    Vehicle,
    Pedestrian,
}

/// Label an episode from its recorded frame stream.
///
/// Onset is the first frame with CurvTTC below the critical threshold; the
/// conflict flag follows the lower threshold; onset accelerations are speed
/// derivatives between adjacent frames.
pub fn label_episode(frames: &[FrameView], dt: f64, p: &ConflictParams) -> Result<EpisodeLabels> {
    if frames.is_empty() {
        return Err(Error::Input("cannot label an empty episode".into()));
    }
    let mut onset_frame = None;
    let mut min_ttc = f64::INFINITY;
    let mut is_conflict = false;
    for (k, f) in frames.iter().enumerate() {
        if f.curv_ttc < min_ttc {
            min_ttc = f.curv_ttc;
        }
        if onset_frame.is_none() && f.curv_ttc < p.critical_threshold_s {
            onset_frame = Some(k);
        }
        if f.curv_ttc < p.conflict_threshold_s {
            is_conflict = true;
        }
    }
    let onset = onset_frame.map(|k| {
        let accel = |get: fn(&FrameView) -> f64| {
            if k == 0 {
                0.0
            } else {
                (get(&frames[k]) - get(&frames[k - 1])) / dt
            }
        };
        OnsetKinematics {
            veh_speed: frames[k].veh_speed,
            ped_speed: frames[k].ped_speed,
            veh_accel: accel(|f| f.veh_speed),
            ped_accel: accel(|f| f.ped_speed),
            distance: frames[k].distance,
        }
    });
    let mut labels = EpisodeLabels {
        onset_frame,
        min_curvttc_s: min_ttc,
        is_conflict,
        veh_yielded: false,
        ped_yielded: false,
        onset,
    };
    labels.veh_yielded = classify_yielding(frames, AgentId::Vehicle, &labels, p);
    labels.ped_yielded = classify_yielding(frames, AgentId::Pedestrian, &labels, p);
    Ok(labels)
}

/// Yield decision: between onset and conflict clearance the agent's speed
/// drops below the near-stop threshold or below `yield_fraction` of its
/// onset speed. Clearance is the first post-onset frame where CurvTTC has
/// recovered above the critical threshold while the gap is opening.
pub fn classify_yielding(
    frames: &[FrameView],
    agent: AgentId,
    labels: &EpisodeLabels,
    p: &ConflictParams,
) -> bool {
    let Some(onset) = labels.onset_frame else {
        return false;
    };
    let speed_of = |f: &FrameView| match agent {
        AgentId::Vehicle => f.veh_speed,
        AgentId::Pedestrian => f.ped_speed,
    };
    let onset_speed = speed_of(&frames[onset]);
    let threshold = p.near_stop_speed_mps.max(p.yield_fraction * onset_speed);

    let mut end = frames.len();
    for k in (onset + 1)..frames.len() {
        let cleared = frames[k].curv_ttc >= p.critical_threshold_s
            && frames[k].distance > frames[k - 1].distance;
        if cleared {
            end = k;
            break;
        }
    }
    frames[onset..end].iter().any(|f| speed_of(f) < threshold)
}
