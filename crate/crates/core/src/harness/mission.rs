use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use crate::mapek::{Diagnostic, LoopConfig, MapeLoop, ReconfigurationCommand};
use crate::model::{builtin, generate_nav_model, ArchitectureModel, NavParameterSpace, ENERGY_THRESHOLD, NAV_OBJECTIVE, SAFETY_THRESHOLD};
use crate::navsim::{Clutter, ContingencySpec, Mission, NavConfig, NavSim, OccupancyGrid, Outcome, DT};
use crate::tomasys::KnowledgeBase;

/// Acceleration limit used by every initial configuration.
pub const INITIAL_ACCEL: f64 = 6.0;

/// A launch configuration of the navigation experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConfig {
    pub label: &'static str,
    pub controller_frequency: f64,
    pub max_vel: f64,
    pub inflation_radius: f64,
}

/// C1..C7. C6 is (25 Hz, 0.5 m/s, 0.8 m); C4 and C5 are identical.
pub const INITIAL_CONFIGS: [InitialConfig; 7] = [
    InitialConfig { label: "C1", controller_frequency: 15.0, max_vel: 0.3, inflation_radius: 0.8 },
    InitialConfig { label: "C2", controller_frequency: 15.0, max_vel: 0.75, inflation_radius: 0.5 },
    InitialConfig { label: "C3", controller_frequency: 20.0, max_vel: 0.3, inflation_radius: 0.8 },
    InitialConfig { label: "C4", controller_frequency: 20.0, max_vel: 0.5, inflation_radius: 0.65 },
    InitialConfig { label: "C5", controller_frequency: 20.0, max_vel: 0.5, inflation_radius: 0.65 },
    InitialConfig { label: "C6", controller_frequency: 25.0, max_vel: 0.5, inflation_radius: 0.8 },
    InitialConfig { label: "C7", controller_frequency: 25.0, max_vel: 0.75, inflation_radius: 0.5 },
];

impl InitialConfig {
    pub fn by_label(label: &str) -> Option<InitialConfig> {
        INITIAL_CONFIGS.iter().copied().find(|c| c.label.eq_ignore_ascii_case(label))
    }

    pub fn nav_config(&self) -> NavConfig {
        NavConfig::new(self.max_vel, INITIAL_ACCEL, self.inflation_radius).with_controller_frequency(self.controller_frequency)
    }

    pub fn design(&self) -> String {
        self.nav_config().design_name()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Base,
    Mros,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Base => "base",
            Mode::Mros => "mros",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "base" => Ok(Mode::Base),
            "mros" => Ok(Mode::Mros),
            _ => Err(format!("unknown mode `{s}` (base, mros)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestCase {
    pub config: InitialConfig,
    pub contingency: ContingencySpec,
    pub mode: Mode,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissionMetrics {
    pub outcome: Outcome,
    pub mission_time: f64,
    /// Seconds with safety below its threshold.
    pub t_safety_viol: f64,
    /// Seconds with energy above its threshold.
    pub t_energy_viol: f64,
    pub reconfig_count: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MissionOptions {
    pub record_diagnostics: bool,
    pub record_trajectory: bool,
}

#[derive(Debug, Clone)]
pub struct MissionRun {
    pub metrics: MissionMetrics,
    pub commands: Vec<ReconfigurationCommand>,
    /// Every emitted diagnostic, when requested.
    pub diagnostics: Vec<Diagnostic>,
    /// The finished simulator, holding the trajectory when requested.
    pub sim: NavSim,
}

/// The shipped factory floor.
pub fn factory_grid() -> &'static OccupancyGrid {
    static GRID: OnceLock<OccupancyGrid> = OnceLock::new();
    GRID.get_or_init(|| OccupancyGrid::parse(builtin::FACTORY_GRID).expect("shipped grid parses"))
}

/// The generated 27-design navigation model.
pub fn navigation_model() -> Arc<ArchitectureModel> {
    static MODEL: OnceLock<Arc<ArchitectureModel>> = OnceLock::new();
    MODEL
        .get_or_init(|| Arc::new(generate_nav_model(&NavParameterSpace::default())))
        .clone()
}

/// Runs one mission to its outcome. In `mros` mode the MAPE-K loop ticks
/// once per simulated second, in lockstep with the simulator.
pub fn run_mission(case: &TestCase, options: MissionOptions) -> MissionRun {
    let mut sim = NavSim::new(factory_grid().clone(), Mission::default(), case.config.nav_config(), case.contingency, case.seed);
    if options.record_trajectory {
        sim.record_trajectory();
    }
    let mut mape = match case.mode {
        Mode::Base => None,
        Mode::Mros => {
            let kb = KnowledgeBase::new(navigation_model(), [(NAV_OBJECTIVE, case.config.design())])
                .expect("initial configurations are designs of the navigation model");
            Some(MapeLoop::new(kb, LoopConfig::default()))
        }
    };
    let tx = mape.as_ref().map(MapeLoop::sender);
    let steps_per_tick = mape
        .as_ref()
        .map(|m| (m.config().period / DT).round().max(1.0) as u64)
        .unwrap_or(u64::MAX);

    let mut commands = Vec::new();
    let mut diagnostics = Vec::new();
    let (mut t_safety, mut t_energy) = (0.0, 0.0);
    let mut steps = 0u64;
    while let Some(report) = sim.step() {
        steps += 1;
        if report.safety < SAFETY_THRESHOLD {
            t_safety += DT;
        }
        if report.energy > ENERGY_THRESHOLD {
            t_energy += DT;
        }
        if options.record_diagnostics {
            diagnostics.extend(report.diagnostics.iter().cloned());
        }
        if let Some(tx) = &tx {
            for d in report.diagnostics {
                tx.send(d).expect("loop owns the receiver");
            }
        }
        if report.outcome.is_some() {
            break;
        }
        if let Some(m) = mape.as_mut() {
            if steps.is_multiple_of(steps_per_tick) {
                commands.extend(m.tick(report.time, &mut sim).commands);
            }
        }
    }
    let metrics = MissionMetrics {
        outcome: sim.outcome().expect("loop ends with an outcome"),
        mission_time: sim.time(),
        t_safety_viol: t_safety,
        t_energy_viol: t_energy,
        reconfig_count: commands.len() as u32,
    };
    MissionRun {
        metrics,
        commands,
        diagnostics,
        sim,
    }
}

impl TestCase {
    pub fn new(config: InitialConfig, clutter: Clutter, power_percent: u32, mode: Mode, seed: u64) -> Self {
        Self {
            config,
            contingency: ContingencySpec {
                clutter,
                power_increase: power_percent as f64 / 100.0,
            },
            mode,
            seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn configs_map_to_designs() {
        let model = navigation_model();
        for c in INITIAL_CONFIGS {
            assert!(model.design(&c.design()).is_some(), "{}", c.label);
        }
        assert_eq!(InitialConfig::by_label("c6").unwrap().design(), "f_nav_v0.5_a6_r0.8");
        assert!(InitialConfig::by_label("C8").is_none());
    }

    #[test]
    fn base_mode_never_reconfigures() {
        let case = TestCase::new(INITIAL_CONFIGS[6], Clutter::High, 50, Mode::Base, 3);
        let run = run_mission(&case, MissionOptions::default());
        assert_eq!(run.metrics.reconfig_count, 0);
        assert!(run.commands.is_empty());
    }
}
