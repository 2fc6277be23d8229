//! Kinematic navigation simulator: the managed system of the navigation
//! experiments.
//!
//! The robot follows a grid-planned path with a pure-pursuit controller,
//! discovers unexpected obstacles within sensor range and replans around
//! them. Observers emit normalized safety and energy readings at 10 Hz.

mod config;
mod control;
mod grid;
mod observers;
mod planner;
mod sim;

use thiserror::Error;

pub use config::{NavConfig, DEFAULT_CONTROLLER_HZ, PLANNER_HZ};
pub use control::{control, wrap_angle, ControlCommand, RobotState, LOOKAHEAD, MAX_TURN_RATE};
pub use grid::{GridError, OccupancyGrid, Point};
pub use observers::{
    braking_distance, free_distance_ahead, observe_safety, safety_value, PowerModel, CONE_HALF_ANGLE, FOOTPRINT_RADIUS,
    REACTION_TIME,
};
pub use planner::{Path, PathPlanner, PlanError};
pub use sim::{
    Clutter, ContingencySpec, Mission, NavSim, Outcome, StepReport, TrajectoryRow, UnexpectedObstacle, DT,
    GOAL_TOLERANCE, OBSTACLE_RADIUS, SENSOR_RADIUS, SPAWN_DISTANCE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("unknown design `{0}`")]
    UnknownDesign(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid configuration: {0}")]
    Config(String),
}
