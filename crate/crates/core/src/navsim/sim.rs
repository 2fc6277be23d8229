use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::NavConfig;
use super::control::{control, wrap_angle, RobotState};
use super::grid::{OccupancyGrid, Point};
use super::observers::{observe_safety, PowerModel};
use super::planner::{Path, PathPlanner};
use super::SimError;
use crate::mapek::{Diagnostic, ExecError, Executor, ReconfigurationCommand};

/// Simulator step in seconds.
pub const DT: f64 = 0.05;
pub const GOAL_TOLERANCE: f64 = 0.3;
pub const SENSOR_RADIUS: f64 = 3.0;
/// Unexpected obstacles appear once the robot is this close.
pub const SPAWN_DISTANCE: f64 = 4.0;
pub const OBSTACLE_RADIUS: f64 = 0.3;
pub const TIMEOUT: f64 = 600.0;
/// Observers report every this many steps (10 Hz).
const EMIT_EVERY: u64 = 2;
/// Inflation of the reference plan used to place obstacles, so that the
/// layout does not depend on the configuration under test.
const PLACEMENT_INFLATION: f64 = 0.65;
/// Minimum static clearance around an obstacle center, leaving room to
/// pass it at the largest inflation radius.
const PLACEMENT_CLEARANCE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Clutter {
    None,
    Low,
    Medium,
    High,
}

impl Clutter {
    pub const ALL: [Clutter; 4] = [Clutter::None, Clutter::Low, Clutter::Medium, Clutter::High];

    pub fn as_str(self) -> &'static str {
        match self {
            Clutter::None => "none",
            Clutter::Low => "low",
            Clutter::Medium => "medium",
            Clutter::High => "high",
        }
    }

    /// Obstacle positions as fractions of the reference path length.
    fn fractions(self) -> &'static [f64] {
        match self {
            Clutter::None => &[],
            Clutter::Low => &[0.5],
            Clutter::Medium => &[0.25, 0.75],
            Clutter::High => &[0.45, 0.5, 0.55],
        }
    }
}

impl fmt::Display for Clutter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Clutter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Clutter::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown clutter level `{s}` (none, low, medium, high)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContingencySpec {
    pub clutter: Clutter,
    /// Fractional increase of power draw, e.g. 0.3 for +30%.
    pub power_increase: f64,
}

impl Default for ContingencySpec {
    fn default() -> Self {
        Self {
            clutter: Clutter::None,
            power_increase: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mission {
    pub start: Point,
    pub goal: Point,
    pub tolerance: f64,
}

impl Default for Mission {
    /// Bottom-left workstation to top-right workstation.
    fn default() -> Self {
        Self {
            start: Point::new(-4.5, -7.0),
            goal: Point::new(8.5, 7.0),
            tolerance: GOAL_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnexpectedObstacle {
    pub center: Point,
    pub radius: f64,
    pub spawn_time: Option<f64>,
    pub sensed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Complete,
    Collision,
    NoPath,
    Timeout,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Complete => "complete",
            Outcome::Collision => "collision",
            Outcome::NoPath => "no_path",
            Outcome::Timeout => "timeout",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [Outcome::Complete, Outcome::Collision, Outcome::NoPath, Outcome::Timeout]
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| format!("unknown outcome `{s}`"))
    }
}

/// What one simulator step produced.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub time: f64,
    pub safety: f64,
    pub energy: f64,
    pub diagnostics: Vec<Diagnostic>,
    pub outcome: Option<Outcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub safety: f64,
    pub energy: f64,
    pub design: String,
}

/// Places the contingency's obstacles along the reference path from start
/// to goal. Deterministic in `(grid, mission, clutter, seed)`.
pub fn place_obstacles(grid: &OccupancyGrid, mission: &Mission, clutter: Clutter, seed: u64) -> Vec<UnexpectedObstacle> {
    let fractions = clutter.fractions();
    if fractions.is_empty() {
        return vec![];
    }
    let Ok(path) = PathPlanner::new(PLACEMENT_INFLATION).plan(grid, mission.start, mission.goal) else {
        return vec![];
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6f62_7374_6163_6c65);
    let len = path.length();
    fractions
        .iter()
        .map(|&f| {
            let along = rng.gen_range(-0.3..=0.3);
            let lateral = rng.gen_range(-0.3..=0.3);
            let mut s = f * len + along;
            // slide to the nearest spot with room to pass
            let mut best = s;
            let mut k = 0.0;
            while k < len {
                let found = [s + k, s - k]
                    .into_iter()
                    .filter(|c| (0.0..=len).contains(c))
                    .find(|&c| grid.clearance_at(path.point_at(c)) >= PLACEMENT_CLEARANCE);
                if let Some(c) = found {
                    best = c;
                    break;
                }
                k += grid.resolution();
            }
            s = best;
            let p = path.point_at(s);
            let q = path.point_at(s + 0.1);
            let (dx, dy) = (q.x - p.x, q.y - p.y);
            let n = dx.hypot(dy).max(1e-9);
            UnexpectedObstacle {
                center: Point::new(p.x - dy / n * lateral, p.y + dx / n * lateral),
                radius: OBSTACLE_RADIUS,
                spawn_time: None,
                sensed: false,
            }
        })
        .collect()
}

/// One navigation mission in progress.
#[derive(Debug, Clone)]
pub struct NavSim {
    static_grid: OccupancyGrid,
    known: OccupancyGrid,
    mission: Mission,
    cfg: NavConfig,
    pending: Option<NavConfig>,
    power: PowerModel,
    contingency: ContingencySpec,
    obstacles: Vec<UnexpectedObstacle>,
    robot: RobotState,
    path: Option<Path>,
    replan: bool,
    steps: u64,
    outcome: Option<Outcome>,
    trajectory: Option<Vec<TrajectoryRow>>,
    reconfigurations: u32,
}

impl NavSim {
    pub fn new(grid: OccupancyGrid, mission: Mission, cfg: NavConfig, contingency: ContingencySpec, seed: u64) -> Self {
        let obstacles = place_obstacles(&grid, &mission, contingency.clutter, seed);
        let mut sim = Self {
            known: grid.clone(),
            static_grid: grid,
            mission,
            cfg,
            pending: None,
            power: PowerModel::default(),
            contingency,
            obstacles,
            robot: RobotState {
                position: mission.start,
                heading: 0.0,
                speed: 0.0,
            },
            path: None,
            replan: false,
            steps: 0,
            outcome: None,
            trajectory: None,
            reconfigurations: 0,
        };
        sim.replan_now();
        if let Some(p) = &sim.path {
            let t = p.point_at(super::control::LOOKAHEAD);
            sim.robot.heading = (t.y - mission.start.y).atan2(t.x - mission.start.x);
        }
        sim
    }

    /// Replaces the contingency's obstacles with `obstacles`.
    pub fn with_obstacles(mut self, obstacles: Vec<UnexpectedObstacle>) -> Self {
        self.obstacles = obstacles;
        self
    }

    pub fn with_power_model(mut self, power: PowerModel) -> Self {
        self.power = power;
        self
    }

    /// Keeps a per-step trajectory for [`NavSim::write_trajectory`].
    pub fn record_trajectory(&mut self) {
        self.trajectory.get_or_insert_with(Vec::new);
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * DT
    }

    pub fn robot(&self) -> &RobotState {
        &self.robot
    }

    pub fn config(&self) -> &NavConfig {
        &self.cfg
    }

    pub fn design(&self) -> String {
        self.cfg.design_name()
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_ref()
    }

    pub fn obstacles(&self) -> &[UnexpectedObstacle] {
        &self.obstacles
    }

    pub fn known_grid(&self) -> &OccupancyGrid {
        &self.known
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    pub fn reconfigurations(&self) -> u32 {
        self.reconfigurations
    }

    pub fn contingency(&self) -> &ContingencySpec {
        &self.contingency
    }

    /// Schedules a switch to the configuration named by `design`; it takes
    /// effect at the next control step. The controller frequency is kept.
    pub fn apply_configuration(&mut self, design: &str) -> Result<(), SimError> {
        let cfg = NavConfig::from_design(design)?.with_controller_frequency(self.cfg.controller_frequency);
        self.pending = Some(cfg);
        self.reconfigurations += 1;
        Ok(())
    }

    fn replan_now(&mut self) {
        self.replan = false;
        let planner = PathPlanner::new(self.cfg.inflation_radius).with_start_relief();
        match planner.plan(&self.known, self.robot.position, self.mission.goal) {
            Ok(p) => self.path = Some(p),
            Err(_) => self.outcome = Some(Outcome::NoPath),
        }
    }

    fn planner_tick(&self) -> bool {
        let every = (1.0 / (self.cfg.planner_frequency * DT)).round().max(1.0) as u64;
        self.steps.is_multiple_of(every)
    }

    /// Advances the world by one step. Returns `None` once the mission has
    /// ended.
    pub fn step(&mut self) -> Option<StepReport> {
        if self.outcome.is_some() {
            return None;
        }
        if let Some(cfg) = self.pending.take() {
            if cfg.inflation_radius != self.cfg.inflation_radius {
                self.replan = true;
            }
            self.cfg = cfg;
        }
        let now = self.time();
        let pos = self.robot.position;
        for o in &mut self.obstacles {
            if o.spawn_time.is_none() && pos.dist(o.center) <= SPAWN_DISTANCE {
                o.spawn_time = Some(now);
            }
            if o.spawn_time.is_some() && !o.sensed && pos.dist(o.center) <= SENSOR_RADIUS {
                o.sensed = true;
                self.known.fill_disc(o.center, o.radius);
                self.replan = true;
            }
        }
        if self.replan && self.planner_tick() {
            self.replan_now();
            if self.outcome.is_some() {
                return Some(self.finish(1.0, 0.0, vec![]));
            }
        }
        let path = self.path.as_ref().expect("a path exists while the mission runs");
        let cmd = control(&self.robot, path, &self.cfg, DT, self.mission.tolerance);
        let h = self.robot.heading;
        self.robot.position.x += cmd.speed * DT * h.cos();
        self.robot.position.y += cmd.speed * DT * h.sin();
        self.robot.heading = wrap_angle(h + cmd.turn_rate * DT);
        self.robot.speed = cmd.speed;
        self.steps += 1;
        let t = self.time();

        let p = self.robot.position;
        if self.static_grid.occupied_at(p) || self.obstacles.iter().any(|o| o.spawn_time.is_some() && p.dist(o.center) < o.radius) {
            self.outcome = Some(Outcome::Collision);
        } else if p.dist(self.mission.goal) <= self.mission.tolerance {
            self.outcome = Some(Outcome::Complete);
        } else if t >= TIMEOUT - 1e-9 {
            self.outcome = Some(Outcome::Timeout);
        }

        let safety = observe_safety(&self.known, p, self.robot.heading, cmd.speed, self.cfg.accel_lim);
        let energy = self.power.energy(cmd.speed, cmd.accel, self.cfg.controller_frequency, self.contingency.power_increase);
        let mut diagnostics = vec![];
        if self.steps.is_multiple_of(EMIT_EVERY) {
            diagnostics.push(Diagnostic::qa(t, "safety", safety).expect("safety is normalized"));
            diagnostics.push(Diagnostic::qa(t, "energy", energy).expect("energy is normalized"));
        }
        if let Some(rows) = &mut self.trajectory {
            rows.push(TrajectoryRow {
                t,
                x: p.x,
                y: p.y,
                v: cmd.speed,
                safety,
                energy,
                design: self.cfg.design_name(),
            });
        }
        Some(self.finish(safety, energy, diagnostics))
    }

    fn finish(&self, safety: f64, energy: f64, diagnostics: Vec<Diagnostic>) -> StepReport {
        StepReport {
            time: self.time(),
            safety,
            energy,
            diagnostics,
            outcome: self.outcome,
        }
    }

    /// Steps until the mission ends and returns the outcome.
    pub fn run_to_end(&mut self) -> Outcome {
        while self.step().is_some() {}
        self.outcome.expect("loop exits only with an outcome")
    }

    pub fn trajectory(&self) -> Option<&[TrajectoryRow]> {
        self.trajectory.as_deref()
    }

    /// Writes `t,x,y,v,safety,energy,design` rows.
    pub fn write_trajectory<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x", "y", "v", "safety", "energy", "design"])?;
        for r in self.trajectory.as_deref().unwrap_or_default() {
            w.write_record([
                format!("{:.2}", r.t),
                format!("{:.3}", r.x),
                format!("{:.3}", r.y),
                format!("{:.3}", r.v),
                format!("{:.4}", r.safety),
                format!("{:.4}", r.energy),
                r.design.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl Executor for NavSim {
    fn apply(&mut self, cmd: &ReconfigurationCommand) -> Result<(), ExecError> {
        self.apply_configuration(&cmd.to_design)
            .map_err(|e| ExecError::Rejected(e.to_string()))
    }
}
