//! Deterministic 2D kinematics for one vehicle and one pedestrian.
//!
//! All operations here are pure functions of their inputs; episode workers
//! may call them concurrently. Units are meters, seconds, radians.

pub mod scenario;

use crate::{Error, Result};

/// 2D vector in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Unit vector at `angle` radians from +x.
    pub fn from_angle(angle: f64) -> Self {
        Self::new(angle.cos(), angle.sin())
    }

    /// Rotation by +90 degrees counterclockwise.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Physical limits of the simulated vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleSpec {
    pub wheelbase_m: f64,
    pub max_steer_rad: f64,
    pub max_accel_mps2: f64,
    pub max_decel_mps2: f64,
    pub steer_epsilon: f64,
    pub body_radius_m: f64,
}

impl Default for VehicleSpec {
    fn default() -> Self {
        Self {
            wheelbase_m: 2.875,
            max_steer_rad: 0.52,
            max_accel_mps2: 9.25,
            max_decel_mps2: 8.88,
            steer_epsilon: 1e-6,
            body_radius_m: 1.0,
        }
    }
}

impl VehicleSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.wheelbase_m,
            self.max_steer_rad,
            self.max_accel_mps2,
            self.max_decel_mps2,
            self.steer_epsilon,
            self.body_radius_m,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("vehicle spec fields must be positive".into()));
        }
        if self.max_steer_rad >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::Config("max_steer_rad must be below pi/2".into()));
        }
        Ok(())
    }
}

/// World-frame pose and velocity of one agent at one tick.
///
/// The heading tracks the velocity direction while the agent is moving and
/// freezes at its last value below `steer_epsilon` speed; for pedestrians the
/// heading is pinned to the nominal crossing direction for the whole episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub pos: Vec2,
    pub vel: Vec2,
    pub heading: f64,
}

impl AgentState {
    pub fn new(pos: Vec2, vel: Vec2, fallback_heading: f64, steer_epsilon: f64) -> Self {
        let heading = if vel.norm() > steer_epsilon {
            vel.y.atan2(vel.x)
        } else {
            fallback_heading
        };
        Self { pos, vel, heading }
    }

    pub fn speed(&self) -> f64 {
        self.vel.norm()
    }

    /// Body axes: longitudinal along the heading, lateral +90 degrees CCW.
    pub fn axes(&self) -> (Vec2, Vec2) {
        let lon = Vec2::from_angle(self.heading);
        (lon, lon.perp())
    }

    pub fn is_finite(&self) -> bool {
        self.pos.is_finite() && self.vel.is_finite() && self.heading.is_finite()
    }
}

/// The 6-component body-frame feature each agent observes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Observation {
    pub own_long_speed: f64,
    pub own_lat_speed: f64,
    pub rel_long_dist: f64,
    pub rel_lat_dist: f64,
    pub rel_long_speed: f64,
    pub rel_lat_speed: f64,
}

impl Observation {
    pub fn to_array(self) -> [f64; 6] {
        [
            self.own_long_speed,
            self.own_lat_speed,
            self.rel_long_dist,
            self.rel_lat_dist,
            self.rel_long_speed,
            self.rel_lat_speed,
        ]
    }
}

/// Body-frame acceleration command.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Action {
    pub long_accel: f64,
    pub lat_accel: f64,
}

impl Action {
    pub fn new(long_accel: f64, lat_accel: f64) -> Self {
        Self {
            long_accel,
            lat_accel,
        }
    }

    /// Clamp both components to `[-max_decel, max_accel]` before integration.
    pub fn clamped(self, spec: &VehicleSpec) -> Action {
        let lo = -spec.max_decel_mps2;
        let hi = spec.max_accel_mps2;
        Action {
            long_accel: self.long_accel.clamp(lo, hi),
            lat_accel: self.lat_accel.clamp(lo, hi),
        }
    }
}

/// Steering/throttle/brake command derived from an acceleration action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlCommand {
    pub steer: f64,
    pub throttle: f64,
    pub brake: f64,
}

fn observe_one(me: &AgentState, other: &AgentState) -> Observation {
    let (lon, lat) = me.axes();
    let dp = other.pos - me.pos;
    let dv = me.vel - other.vel;
    Observation {
        own_long_speed: me.vel.dot(lon),
        own_lat_speed: me.vel.dot(lat),
        rel_long_dist: dp.dot(lon),
        rel_lat_dist: dp.dot(lat),
        rel_long_speed: dv.dot(lon),
        rel_lat_speed: dv.dot(lat),
    }
}

/// Build both agents' observations, each in its own body frame.
pub fn observe(veh: &AgentState, ped: &AgentState) -> (Observation, Observation) {
    (observe_one(veh, ped), observe_one(ped, veh))
}

/// Advance the vehicle one tick.
///
/// The body-frame command is rotated into the world frame by the current
/// heading, velocity then position are integrated, and the heading is
/// re-derived from the new velocity (frozen below `steer_epsilon`).
pub fn step_vehicle(state: &AgentState, action: Action, dt: f64, spec: &VehicleSpec) -> AgentState {
    debug_assert!(dt > 0.0);
    let a = action.clamped(spec);
    let (lon, lat) = state.axes();
    let a_world = lon * a.long_accel + lat * a.lat_accel;
    let vel = state.vel + a_world * dt;
    let pos = state.pos + vel * dt;
    AgentState::new(pos, vel, state.heading, spec.steer_epsilon)
}

/// Advance the pedestrian one tick with the half-step velocity update.
///
/// Per axis: `v' = v + 0.5*a*dt`, `x' = x + (v + 0.5*a*dt)*dt`. The heading
/// stays pinned to the crossing direction so the observation frame is
/// constant over the episode.
pub fn step_pedestrian(
    state: &AgentState,
    action: Action,
    dt: f64,
    spec: &VehicleSpec,
) -> AgentState {
    debug_assert!(dt > 0.0);
    let a = action.clamped(spec);
    let (lon, lat) = state.axes();
    let a_world = lon * a.long_accel + lat * a.lat_accel;
    let vel = state.vel + a_world * (0.5 * dt);
    let pos = state.pos + vel * dt;
    AgentState {
        pos,
        vel,
        heading: state.heading,
    }
}

/// Map an acceleration action to normalized steer/throttle/brake.
///
/// `steer = clamp(atan(L*a_lat / (v_long^2 + eps)) / max_steer, -1, 1)`;
/// throttle and brake are the longitudinal component normalized by the
/// respective saturation constant, never both nonzero.
pub fn control_from_accel(action: Action, state: &AgentState, spec: &VehicleSpec) -> ControlCommand {
    let (lon, _) = state.axes();
    let v_long = state.vel.dot(lon);
    let steer_raw =
        (spec.wheelbase_m * action.lat_accel / (v_long * v_long + spec.steer_epsilon)).atan();
    let steer = (steer_raw / spec.max_steer_rad).clamp(-1.0, 1.0);
    let (throttle, brake) = if action.long_accel >= 0.0 {
        ((action.long_accel / spec.max_accel_mps2).min(1.0), 0.0)
    } else {
        (0.0, (action.long_accel.abs() / spec.max_decel_mps2).min(1.0))
    };
    ControlCommand {
        steer,
        throttle,
        brake,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec() -> VehicleSpec {
        VehicleSpec::default()
    }

    // Independent 2D rotation used as the oracle for frame projections.
    fn rotate_into_frame(v: Vec2, heading: f64) -> Vec2 {
        let (s, c) = heading.sin_cos();
        Vec2::new(c * v.x + s * v.y, -s * v.x + c * v.y)
    }

    #[test]
    fn observe_still_agents_projects_offsets() {
        let veh = AgentState::new(Vec2::ZERO, Vec2::ZERO, 0.0, 1e-6);
        let ped = AgentState::new(Vec2::new(3.0, 4.0), Vec2::ZERO, 0.0, 1e-6);
        let (ov, _) = observe(&veh, &ped);
        assert_eq!(ov.rel_long_dist, 3.0);
        assert_eq!(ov.rel_lat_dist, 4.0);
        assert_eq!(ov.own_long_speed, 0.0);
        assert_eq!(ov.rel_long_speed, 0.0);
        assert_eq!(ov.rel_lat_speed, 0.0);
    }

    #[test]
    fn observe_coincident_positions() {
        let veh = AgentState::new(Vec2::new(1.0, 2.0), Vec2::new(1.0, 0.0), 0.0, 1e-6);
        let ped = AgentState::new(Vec2::new(1.0, 2.0), Vec2::ZERO, 1.0, 1e-6);
        let (ov, op) = observe(&veh, &ped);
        assert_eq!((ov.rel_long_dist, ov.rel_lat_dist), (0.0, 0.0));
        assert_eq!((op.rel_long_dist, op.rel_lat_dist), (0.0, 0.0));
    }

    #[test]
    fn observe_relative_speeds_subtract_componentwise() {
        let veh = AgentState::new(Vec2::ZERO, Vec2::new(5.0, 0.0), 0.0, 1e-6);
        let ped = AgentState::new(Vec2::new(10.0, 2.0), Vec2::new(0.0, 1.4), 0.0, 1e-6);
        let (ov, _) = observe(&veh, &ped);
        assert_eq!(ov.rel_long_speed, 5.0);
        assert_eq!(ov.rel_lat_speed, -1.4);
    }

    #[test]
    fn observe_matches_rotation_oracle() {
        let veh = AgentState::new(Vec2::new(1.0, -2.0), Vec2::new(3.0, 4.0), 0.0, 1e-6);
        let ped = AgentState::new(Vec2::new(-1.5, 0.5), Vec2::new(-0.3, 1.1), 0.8, 1e-6);
        let (ov, op) = observe(&veh, &ped);

        let dv = rotate_into_frame(veh.vel - ped.vel, veh.heading);
        let dp = rotate_into_frame(ped.pos - veh.pos, veh.heading);
        assert_relative_eq!(ov.rel_long_speed, dv.x, epsilon = 1e-12);
        assert_relative_eq!(ov.rel_lat_speed, dv.y, epsilon = 1e-12);
        assert_relative_eq!(ov.rel_long_dist, dp.x, epsilon = 1e-12);
        assert_relative_eq!(ov.rel_lat_dist, dp.y, epsilon = 1e-12);

        let dvp = rotate_into_frame(ped.vel - veh.vel, ped.heading);
        assert_relative_eq!(op.rel_long_speed, dvp.x, epsilon = 1e-12);
        assert_relative_eq!(op.rel_lat_speed, dvp.y, epsilon = 1e-12);
    }

    proptest! {
        // With aligned frames the relative-speed components of the two
        // observations are exact negations of each other.
        #[test]
        fn frame_antisymmetry_when_aligned(
            vx in -10.0f64..10.0, vy in -10.0f64..10.0,
            ux in -10.0f64..10.0, uy in -10.0f64..10.0,
            heading in -3.0f64..3.0,
        ) {
            let veh = AgentState { pos: Vec2::ZERO, vel: Vec2::new(vx, vy), heading };
            let ped = AgentState { pos: Vec2::new(5.0, 1.0), vel: Vec2::new(ux, uy), heading };
            let (ov, op) = observe(&veh, &ped);
            prop_assert_eq!(ov.rel_long_speed, -op.rel_long_speed);
            prop_assert_eq!(ov.rel_lat_speed, -op.rel_lat_speed);
        }

        // Zero action conserves velocity bit-for-bit over repeated steps.
        #[test]
        fn energy_free_kinematics(vx in -10.0f64..10.0, vy in -10.0f64..10.0, steps in 1usize..200) {
            let mut state = AgentState::new(Vec2::ZERO, Vec2::new(vx, vy), 0.0, 1e-6);
            let initial = state.vel;
            for _ in 0..steps {
                state = step_vehicle(&state, Action::default(), 0.05, &spec());
            }
            prop_assert_eq!(state.vel, initial);
        }

        // Steer is odd in lateral acceleration.
        #[test]
        fn steer_odd_symmetry(a_lat in -20.0f64..20.0, v in 0.0f64..15.0) {
            let state = AgentState::new(Vec2::ZERO, Vec2::new(v, 0.0), 0.0, 1e-6);
            let pos = control_from_accel(Action::new(0.0, a_lat), &state, &spec());
            let neg = control_from_accel(Action::new(0.0, -a_lat), &state, &spec());
            prop_assert_eq!(pos.steer, -neg.steer);
        }
    }

    #[test]
    fn step_vehicle_hand_integration() {
        let state = AgentState::new(Vec2::ZERO, Vec2::new(5.0, 0.0), 0.0, 1e-6);
        let next = step_vehicle(&state, Action::new(1.0, 0.0), 0.05, &spec());
        assert_relative_eq!(next.vel.x, 5.05, epsilon = 1e-12);
        assert_relative_eq!(next.vel.y, 0.0, epsilon = 1e-12);

        let next = step_vehicle(&state, Action::new(0.0, 1.0), 0.05, &spec());
        assert_relative_eq!(next.vel.x, 5.0, epsilon = 1e-12);
        assert_relative_eq!(next.vel.y, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn step_vehicle_zero_action_advects() {
        let state = AgentState::new(Vec2::new(1.0, 1.0), Vec2::new(2.0, -1.0), 0.0, 1e-6);
        let next = step_vehicle(&state, Action::default(), 0.05, &spec());
        assert_eq!(next.vel, state.vel);
        assert_relative_eq!(next.pos.x, 1.0 + 2.0 * 0.05, epsilon = 1e-12);
        assert_relative_eq!(next.pos.y, 1.0 - 1.0 * 0.05, epsilon = 1e-12);
    }

    #[test]
    fn step_pedestrian_half_step_update() {
        // Eqs evaluated by hand: v' = 1 + 0.5*0.5*0.05 = 1.0125,
        // x gain = 1.0125 * 0.05 = 0.050625.
        let state = AgentState {
            pos: Vec2::ZERO,
            vel: Vec2::new(1.0, 0.0),
            heading: 0.0,
        };
        let next = step_pedestrian(&state, Action::new(0.5, 0.0), 0.05, &spec());
        assert_relative_eq!(next.vel.x, 1.0125, epsilon = 1e-12);
        assert_relative_eq!(next.pos.x, 0.050625, epsilon = 1e-12);
        assert_eq!(next.heading, 0.0);
    }

    #[test]
    fn step_pedestrian_from_rest() {
        // v' = 0.05, x gain = 0.0025.
        let state = AgentState {
            pos: Vec2::ZERO,
            vel: Vec2::ZERO,
            heading: 0.0,
        };
        let next = step_pedestrian(&state, Action::new(2.0, 0.0), 0.05, &spec());
        assert_relative_eq!(next.vel.x, 0.05, epsilon = 1e-12);
        assert_relative_eq!(next.pos.x, 0.0025, epsilon = 1e-12);
    }

    #[test]
    fn step_pedestrian_zero_accel_advects() {
        let state = AgentState {
            pos: Vec2::ZERO,
            vel: Vec2::new(0.0, 1.4),
            heading: std::f64::consts::FRAC_PI_2,
        };
        let next = step_pedestrian(&state, Action::default(), 0.05, &spec());
        assert_eq!(next.vel, state.vel);
        assert_relative_eq!(next.pos.y, 0.07, epsilon = 1e-12);
    }

    #[test]
    fn repeated_pedestrian_steps_match_tick_oracle() {
        // Tick-by-tick oracle, not the continuous closed form.
        let dt = 0.05;
        let a = 0.8;
        let mut v = 1.2;
        let mut x = 0.0;
        let mut state = AgentState {
            pos: Vec2::ZERO,
            vel: Vec2::new(1.2, 0.0),
            heading: 0.0,
        };
        for _ in 0..40 {
            v += 0.5 * a * dt;
            x += v * dt;
            state = step_pedestrian(&state, Action::new(a, 0.0), dt, &spec());
        }
        assert_relative_eq!(state.vel.x, v, epsilon = 1e-12);
        assert_relative_eq!(state.pos.x, x, epsilon = 1e-12);
    }

    #[test]
    fn control_scalar_example() {
        // arctan(2.875*2 / (25 + 1e-6)) / 0.52, derived with plain scalar math.
        let state = AgentState::new(Vec2::ZERO, Vec2::new(5.0, 0.0), 0.0, 1e-6);
        let cmd = control_from_accel(Action::new(0.0, 2.0), &state, &spec());
        let expected = (2.875_f64 * 2.0 / (25.0 + 1e-6)).atan() / 0.52;
        assert_relative_eq!(cmd.steer, expected, epsilon = 1e-12);
        assert_relative_eq!(cmd.steer, 0.4347, epsilon = 1e-3);
    }

    #[test]
    fn control_zero_lateral_is_straight() {
        let state = AgentState::new(Vec2::ZERO, Vec2::new(3.0, 0.0), 0.0, 1e-6);
        let cmd = control_from_accel(Action::new(1.0, 0.0), &state, &spec());
        assert_eq!(cmd.steer, 0.0);
    }

    #[test]
    fn control_saturation_constants() {
        let state = AgentState::new(Vec2::ZERO, Vec2::new(3.0, 0.0), 0.0, 1e-6);
        let cmd = control_from_accel(Action::new(9.25, 0.0), &state, &spec());
        assert_eq!(cmd.throttle, 1.0);
        assert_eq!(cmd.brake, 0.0);
        let cmd = control_from_accel(Action::new(-8.88, 0.0), &state, &spec());
        assert_eq!(cmd.throttle, 0.0);
        assert_eq!(cmd.brake, 1.0);
        // Exclusive by construction.
        let cmd = control_from_accel(Action::new(2.0, 0.0), &state, &spec());
        assert_eq!(cmd.throttle * cmd.brake, 0.0);
    }

    #[test]
    fn steer_saturates_monotonically() {
        let state = AgentState::new(Vec2::ZERO, Vec2::new(2.0, 0.0), 0.0, 1e-6);
        let mut last = 0.0;
        for i in 0..200 {
            let a = i as f64 * 0.1;
            let cmd = control_from_accel(Action::new(0.0, a), &state, &spec());
            assert!(cmd.steer >= last);
            assert!(cmd.steer <= 1.0);
            last = cmd.steer;
        }
        assert_eq!(last, 1.0);
    }

    #[test]
    fn heading_freezes_below_epsilon() {
        let state = AgentState::new(Vec2::ZERO, Vec2::ZERO, 1.3, 1e-6);
        assert_eq!(state.heading, 1.3);
        let next = step_vehicle(&state, Action::default(), 0.05, &spec());
        assert_eq!(next.heading, 1.3);
    }

    #[test]
    fn action_clamp_bounds() {
        let a = Action::new(100.0, -100.0).clamped(&spec());
        assert_eq!(a.long_accel, 9.25);
        assert_eq!(a.lat_accel, -8.88);
    }
}
