//! Right-turn intersection scenarios: geometry presets, spawn sampling, and
//! the rule-based controllers that stand in for recorded traffic.
//!
//! The vehicle follows a straight approach, a quarter-circle right turn, and
//! a straight exit. Pedestrians cross either the exit leg (S-N / N-S tags) or
//! the approach leg (E-W / W-E tags). Two geometry presets ship as locations
//! A and B.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use rand::Rng;

use super::{observe, Action, AgentState, Vec2, VehicleSpec};
use crate::{Error, Result};

/// Intersection preset identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Location {
    A,
    B,
}

/// Pedestrian crossing direction, compass-named.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Crossing {
    SouthNorth,
    NorthSouth,
    EastWest,
    WestEast,
}

impl Crossing {
    pub fn file_token(self) -> &'static str {
        match self {
            Crossing::SouthNorth => "S-N",
            Crossing::NorthSouth => "N-S",
            Crossing::EastWest => "E-W",
            Crossing::WestEast => "W-E",
        }
    }

    /// Crossings over the exit leg run along +-y; approach-leg crossings
    /// run along +-x.
    pub fn crosses_exit_leg(self) -> bool {
        matches!(self, Crossing::SouthNorth | Crossing::NorthSouth)
    }
}

/// One of the eight scenario variants (two locations, four directions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScenarioTag {
    pub location: Location,
    pub crossing: Crossing,
}

impl ScenarioTag {
    pub fn all() -> Vec<ScenarioTag> {
        let mut tags = Vec::with_capacity(8);
        for location in [Location::A, Location::B] {
            for crossing in [
                Crossing::SouthNorth,
                Crossing::NorthSouth,
                Crossing::EastWest,
                Crossing::WestEast,
            ] {
                tags.push(ScenarioTag { location, crossing });
            }
        }
        tags
    }

    /// Dataset file name for this scenario.
    pub fn file_name(&self) -> String {
        format!(
            "Location{}_PedCross_{}.csv",
            match self.location {
                Location::A => "A",
                Location::B => "B",
            },
            self.crossing.file_token()
        )
    }

    /// Short label used in configuration files, e.g. `A:S-N`.
    pub fn label(&self) -> String {
        format!(
            "{}:{}",
            match self.location {
                Location::A => "A",
                Location::B => "B",
            },
            self.crossing.file_token()
        )
    }

    pub fn parse_label(text: &str) -> Result<ScenarioTag> {
        let (loc, cross) = text
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("bad scenario tag {text:?}")))?;
        let location = match loc.trim() {
            "A" => Location::A,
            "B" => Location::B,
            other => return Err(Error::Config(format!("unknown location {other:?}"))),
        };
        let crossing = match cross.trim() {
            "S-N" => Crossing::SouthNorth,
            "N-S" => Crossing::NorthSouth,
            "E-W" => Crossing::EastWest,
            "W-E" => Crossing::WestEast,
            other => return Err(Error::Config(format!("unknown crossing {other:?}"))),
        };
        Ok(ScenarioTag { location, crossing })
    }

    /// Parse a tag back from a dataset file name.
    pub fn parse_file_name(name: &str) -> Option<ScenarioTag> {
        let stem = name.strip_suffix(".csv")?;
        let rest = stem.strip_prefix("Location")?;
        let (loc, cross) = rest.split_once("_PedCross_")?;
        Self::parse_label(&format!("{loc}:{cross}")).ok()
    }
}

impl fmt::Display for ScenarioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Dimensions of one intersection corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionGeometry {
    /// x of the approach lane center; the approach runs north along it.
    pub entry_x: f64,
    /// y where the approach segment begins.
    pub approach_start_y: f64,
    /// y where the turn arc begins.
    pub arc_start_y: f64,
    pub turn_radius: f64,
    pub exit_len: f64,
    /// Half width of the crossed road; curbs sit this far from the lane line.
    pub road_half_width: f64,
    /// Crosswalk distance past the arc end on the exit leg.
    pub exit_crosswalk_offset: f64,
    /// Crosswalk distance below the arc start on the approach leg.
    pub entry_crosswalk_offset: f64,
}

impl IntersectionGeometry {
    pub fn preset(location: Location) -> Self {
        match location {
            Location::A => Self {
                entry_x: 0.0,
                approach_start_y: -12.0,
                arc_start_y: 0.0,
                turn_radius: 6.0,
                exit_len: 10.0,
                road_half_width: 3.5,
                exit_crosswalk_offset: 4.0,
                entry_crosswalk_offset: 5.0,
            },
            Location::B => Self {
                entry_x: 0.0,
                approach_start_y: -14.0,
                arc_start_y: 0.0,
                turn_radius: 9.0,
                exit_len: 12.0,
                road_half_width: 4.0,
                exit_crosswalk_offset: 5.0,
                entry_crosswalk_offset: 6.0,
            },
        }
    }
}

/// Arclength-parameterized approach + quarter-arc + exit path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnPath {
    entry_x: f64,
    start_y: f64,
    arc_y: f64,
    radius: f64,
    exit_len: f64,
}

impl TurnPath {
    pub fn new(geom: &IntersectionGeometry) -> Self {
        Self {
            entry_x: geom.entry_x,
            start_y: geom.approach_start_y,
            arc_y: geom.arc_start_y,
            radius: geom.turn_radius,
            exit_len: geom.exit_len,
        }
    }

    pub fn approach_len(&self) -> f64 {
        self.arc_y - self.start_y
    }

    pub fn arc_len(&self) -> f64 {
        self.radius * FRAC_PI_2
    }

    pub fn total_len(&self) -> f64 {
        self.approach_len() + self.arc_len() + self.exit_len
    }

    fn arc_center(&self) -> Vec2 {
        Vec2::new(self.entry_x + self.radius, self.arc_y)
    }

    /// Position and heading at arclength `s` (clamped to the path).
    pub fn point_at(&self, s: f64) -> (Vec2, f64) {
        let s = s.clamp(0.0, self.total_len());
        let l1 = self.approach_len();
        if s <= l1 {
            return (Vec2::new(self.entry_x, self.start_y + s), FRAC_PI_2);
        }
        let s_arc = s - l1;
        if s_arc <= self.arc_len() {
            let phi = PI - s_arc / self.radius;
            let c = self.arc_center();
            let pos = c + Vec2::from_angle(phi) * self.radius;
            return (pos, phi - FRAC_PI_2);
        }
        let s_exit = s_arc - self.arc_len();
        (
            Vec2::new(
                self.entry_x + self.radius + s_exit,
                self.arc_y + self.radius,
            ),
            0.0,
        )
    }

    /// Signed path curvature at arclength `s` (negative on the right turn).
    pub fn curvature_at(&self, s: f64) -> f64 {
        let l1 = self.approach_len();
        if s > l1 && s < l1 + self.arc_len() {
            -1.0 / self.radius
        } else {
            0.0
        }
    }

    /// Arclength of the point on the path closest to `pos`.
    pub fn project(&self, pos: Vec2) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        let mut consider = |s: f64| {
            let (p, _) = self.point_at(s);
            let d = (p - pos).norm();
            if d < best.0 {
                best = (d, s);
            }
        };
        // Approach segment.
        consider((pos.y - self.start_y).clamp(0.0, self.approach_len()));
        // Arc segment.
        let c = self.arc_center();
        let rel = pos - c;
        if rel.norm() > 1e-9 {
            let phi = rel.y.atan2(rel.x).clamp(FRAC_PI_2, PI);
            consider(self.approach_len() + (PI - phi) * self.radius);
        }
        // Exit segment.
        let s_exit = (pos.x - (self.entry_x + self.radius)).clamp(0.0, self.exit_len);
        consider(self.approach_len() + self.arc_len() + s_exit);
        best.1
    }

    pub fn goal(&self) -> Vec2 {
        self.point_at(self.total_len()).0
    }
}

/// Rule-based controller gains and trigger distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutopilotParams {
    pub speed_gain: f64,
    pub lookahead_min_m: f64,
    pub lookahead_gain_s: f64,
    pub brake_trigger_dist_m: f64,
    pub brake_corridor_half_m: f64,
    pub brake_accel_frac: f64,
    pub ped_trigger_dist_m: f64,
    pub ped_gain: f64,
    pub ped_accel_cap_mps2: f64,
}

impl Default for AutopilotParams {
    fn default() -> Self {
        Self {
            speed_gain: 1.5,
            lookahead_min_m: 2.0,
            lookahead_gain_s: 0.6,
            brake_trigger_dist_m: 7.0,
            brake_corridor_half_m: 2.0,
            brake_accel_frac: 0.75,
            ped_trigger_dist_m: 4.0,
            ped_gain: 1.5,
            ped_accel_cap_mps2: 2.0,
        }
    }
}

/// Full description of one scenario variant, loadable from a preset file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub tag: ScenarioTag,
    pub geometry: IntersectionGeometry,
    pub vehicle: VehicleSpec,
    pub dt_s: f64,
    pub max_duration_s: f64,
    pub throttle_range: (f64, f64),
    pub ped_speed_range_mps: (f64, f64),
    /// Vehicle target speed at full throttle; sampled throttles scale it.
    pub target_speed_scale_mps: f64,
    pub veh_goal_radius_m: f64,
    pub ped_goal_radius_m: f64,
    pub ped_body_radius_m: f64,
    /// Vehicle spawn window along the path start.
    pub veh_start_jitter_m: f64,
    /// Pedestrian may start this far behind the near curb.
    pub ped_curb_backoff_m: f64,
    pub autopilot: AutopilotParams,
}

impl ScenarioConfig {
    pub fn preset(tag: ScenarioTag) -> Self {
        Self {
            tag,
            geometry: IntersectionGeometry::preset(tag.location),
            vehicle: VehicleSpec::default(),
            dt_s: 0.05,
            max_duration_s: 10.0,
            throttle_range: (0.6, 0.9),
            ped_speed_range_mps: (1.0, 4.0),
            target_speed_scale_mps: 4.5,
            veh_goal_radius_m: 2.0,
            ped_goal_radius_m: 0.5,
            ped_body_radius_m: 0.3,
            veh_start_jitter_m: 3.0,
            ped_curb_backoff_m: 4.0,
            autopilot: AutopilotParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.vehicle.validate()?;
        if !(self.dt_s > 0.0) {
            return Err(Error::Config("scenario dt_s must be positive".into()));
        }
        if self.throttle_range.0 > self.throttle_range.1
            || self.ped_speed_range_mps.0 > self.ped_speed_range_mps.1
        {
            return Err(Error::Config("scenario ranges must be non-empty".into()));
        }
        if !(self.max_duration_s > 0.0) {
            return Err(Error::Config("max_duration_s must be positive".into()));
        }
        Ok(())
    }

    pub fn collision_dist_m(&self) -> f64 {
        self.vehicle.body_radius_m + self.ped_body_radius_m
    }

    pub fn max_steps(&self) -> usize {
        (self.max_duration_s / self.dt_s).round() as usize
    }

    /// Crosswalk description for this scenario's crossing direction.
    pub fn crosswalk(&self) -> Crosswalk {
        let g = &self.geometry;
        let path = TurnPath::new(g);
        if self.tag.crossing.crosses_exit_leg() {
            let x = g.entry_x + g.turn_radius + g.exit_crosswalk_offset;
            let lane_y = g.arc_start_y + g.turn_radius;
            let conflict = Vec2::new(x, lane_y);
            let dir = match self.tag.crossing {
                Crossing::SouthNorth => Vec2::new(0.0, 1.0),
                _ => Vec2::new(0.0, -1.0),
            };
            let path_s = path.approach_len() + path.arc_len() + g.exit_crosswalk_offset;
            Crosswalk {
                conflict_point: conflict,
                dir,
                half_span: g.road_half_width,
                vehicle_path_s: path_s,
            }
        } else {
            let y = g.arc_start_y - g.entry_crosswalk_offset;
            let conflict = Vec2::new(g.entry_x, y);
            let dir = match self.tag.crossing {
                Crossing::EastWest => Vec2::new(-1.0, 0.0),
                _ => Vec2::new(1.0, 0.0),
            };
            Crosswalk {
                conflict_point: conflict,
                dir,
                half_span: g.road_half_width,
                vehicle_path_s: y - g.approach_start_y,
            }
        }
    }
}

/// A crossing segment through the vehicle path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crosswalk {
    /// Where the crossing meets the vehicle lane center.
    pub conflict_point: Vec2,
    /// Unit walking direction.
    pub dir: Vec2,
    /// Curb distance on either side of the conflict point.
    pub half_span: f64,
    /// Vehicle arclength at the conflict point.
    pub vehicle_path_s: f64,
}

/// How pedestrian spawn timing relates to the vehicle's arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpawnTiming {
    /// Arrival times aligned within a jitter window, forcing interactions.
    Synced { jitter_s: f64 },
    /// Arrival offset drawn uniformly over a wider window.
    Free { window_s: f64 },
}

/// Sampled initial conditions for one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSetup {
    pub config: ScenarioConfig,
    pub path: TurnPath,
    pub crosswalk: Crosswalk,
    pub veh_start_s: f64,
    pub veh_target_speed: f64,
    pub ped_start: Vec2,
    pub ped_speed: f64,
    pub ped_heading: f64,
    pub ped_goal: Vec2,
}

impl EpisodeSetup {
    pub fn initial_states(&self) -> (AgentState, AgentState) {
        let (pos, heading) = self.path.point_at(self.veh_start_s);
        let veh = AgentState {
            pos,
            vel: Vec2::from_angle(heading) * self.veh_target_speed,
            heading,
        };
        let ped = AgentState {
            pos: self.ped_start,
            vel: self.crosswalk.dir * self.ped_speed,
            heading: self.ped_heading,
        };
        (veh, ped)
    }

    pub fn veh_goal(&self) -> Vec2 {
        self.path.goal()
    }
}

/// Draw one episode's initial conditions.
pub fn sample_setup(cfg: &ScenarioConfig, rng: &mut impl Rng, timing: SpawnTiming) -> EpisodeSetup {
    let path = TurnPath::new(&cfg.geometry);
    let crosswalk = cfg.crosswalk();

    let throttle = rng.gen_range(cfg.throttle_range.0..=cfg.throttle_range.1);
    let veh_target_speed = throttle * cfg.target_speed_scale_mps;
    let veh_start_s = rng.gen_range(0.0..=cfg.veh_start_jitter_m);
    let ped_speed = rng.gen_range(cfg.ped_speed_range_mps.0..=cfg.ped_speed_range_mps.1);

    let t_veh = (crosswalk.vehicle_path_s - veh_start_s).max(0.0) / veh_target_speed;
    let offset_s = match timing {
        SpawnTiming::Synced { jitter_s } => rng.gen_range(-jitter_s..=jitter_s),
        SpawnTiming::Free { window_s } => rng.gen_range(-window_s..=window_s),
    };
    let dist_to_conflict = (ped_speed * (t_veh + offset_s))
        .clamp(0.5, crosswalk.half_span + cfg.ped_curb_backoff_m);
    let ped_start = crosswalk.conflict_point - crosswalk.dir * dist_to_conflict;
    let ped_goal = crosswalk.conflict_point + crosswalk.dir * crosswalk.half_span;
    let ped_heading = crosswalk.dir.y.atan2(crosswalk.dir.x);

    EpisodeSetup {
        config: cfg.clone(),
        path,
        crosswalk,
        veh_start_s,
        veh_target_speed,
        ped_start,
        ped_speed,
        ped_heading,
        ped_goal,
    }
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a < -PI {
        a += 2.0 * PI;
    }
    a
}

/// Rule-based control for both agents: pure pursuit along the turn path with
/// fixed proximity braking for the vehicle; constant-speed crossing with a
/// stop-when-threatened rule for the pedestrian.
pub fn autopilot_step(
    veh: &AgentState,
    ped: &AgentState,
    setup: &EpisodeSetup,
) -> (Action, Action) {
    let ap = &setup.config.autopilot;
    let (veh_obs, _) = observe(veh, ped);

    // Vehicle: pure-pursuit lateral command toward a lookahead point.
    let v = veh.speed();
    let lookahead = ap.lookahead_min_m.max(v * ap.lookahead_gain_s);
    let s = setup.path.project(veh.pos);
    let (target, _) = setup.path.point_at(s + lookahead);
    let to_target = target - veh.pos;
    let veh_lat = if to_target.norm() > 1e-9 && v > 1e-9 {
        let desired = to_target.y.atan2(to_target.x);
        let err = wrap_angle(desired - veh.heading);
        let curvature_cmd = 2.0 * err.sin() / lookahead;
        v * v * curvature_cmd
    } else {
        0.0
    };
    let ped_ahead = veh_obs.rel_long_dist > 0.0
        && veh_obs.rel_long_dist < ap.brake_trigger_dist_m
        && veh_obs.rel_lat_dist.abs() < ap.brake_corridor_half_m;
    let veh_long = if ped_ahead {
        -ap.brake_accel_frac * setup.config.vehicle.max_decel_mps2
    } else {
        ap.speed_gain * (setup.veh_target_speed - veh_obs.own_long_speed)
    };

    // Pedestrian: track the sampled crossing velocity, stop when a vehicle
    // is close and closing in.
    let to_ped = ped.pos - veh.pos;
    let dist = to_ped.norm();
    let approaching = veh.vel.dot(to_ped) > 0.0;
    let desired = if dist < ap.ped_trigger_dist_m && approaching {
        Vec2::ZERO
    } else {
        setup.crosswalk.dir * setup.ped_speed
    };
    let mut a_world = (desired - ped.vel) * ap.ped_gain;
    let mag = a_world.norm();
    if mag > ap.ped_accel_cap_mps2 {
        a_world = a_world * (ap.ped_accel_cap_mps2 / mag);
    }
    let (lon, lat) = ped.axes();
    let ped_action = Action::new(a_world.dot(lon), a_world.dot(lat));

    (Action::new(veh_long, veh_lat), ped_action)
}
