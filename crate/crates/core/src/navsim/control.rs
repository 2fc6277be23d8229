use std::f64::consts::PI;

use super::config::NavConfig;
use super::grid::Point;
use super::planner::Path;

pub const LOOKAHEAD: f64 = 0.5;
pub const MAX_TURN_RATE: f64 = 1.5;
/// Beyond this heading error the robot stops and turns in place.
pub const ROTATE_IN_PLACE: f64 = PI / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RobotState {
    pub position: Point,
    pub heading: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlCommand {
    /// Speed to hold over the next step.
    pub speed: f64,
    /// `(speed - current) / dt`.
    pub accel: f64,
    pub turn_rate: f64,
}

pub fn wrap_angle(a: f64) -> f64 {
    let mut a = (a + PI).rem_euclid(2.0 * PI) - PI;
    if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// Pure-pursuit step toward a point [`LOOKAHEAD`] meters ahead on `path`.
///
/// The speed change is limited to `accel_lim · dt`, so a lowered `max_vel`
/// is reached by braking rather than instantly.
pub fn control(robot: &RobotState, path: &Path, cfg: &NavConfig, dt: f64, goal_tolerance: f64) -> ControlCommand {
    let v = robot.speed;
    let dv = cfg.accel_lim * dt;
    let finish = |target: f64, turn_rate: f64| {
        let speed = target.clamp(v - dv, v + dv).max(0.0);
        ControlCommand {
            speed,
            accel: (speed - v) / dt,
            turn_rate: turn_rate.clamp(-MAX_TURN_RATE, MAX_TURN_RATE),
        }
    };

    let goal = path.goal();
    if robot.position.dist(goal) <= goal_tolerance {
        return finish(0.0, 0.0);
    }
    let s = path.project(robot.position);
    let remaining = (path.length() - s).max(robot.position.dist(goal));
    let target = path.point_at(s + LOOKAHEAD);
    let ld = robot.position.dist(target).max(1e-6);
    let alpha = wrap_angle((target.y - robot.position.y).atan2(target.x - robot.position.x) - robot.heading);

    if alpha.abs() > ROTATE_IN_PLACE {
        return finish(0.0, alpha.signum() * MAX_TURN_RATE.min(alpha.abs() / dt));
    }
    let kappa = 2.0 * alpha.sin() / ld;
    let mut speed = cfg.max_vel;
    let stop_dist = (remaining - 0.5 * goal_tolerance).max(0.0);
    speed = speed.min((2.0 * cfg.accel_lim * stop_dist).sqrt());
    let mut cmd = finish(speed, 0.0);
    // keep turning when starting from rest
    let ref_speed = cmd.speed.max(0.1);
    cmd.turn_rate = (ref_speed * kappa).clamp(-MAX_TURN_RATE, MAX_TURN_RATE);
    cmd
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight() -> Path {
        Path::new(vec![Point::new(0.0, 0.0), Point::new(10.0, 0.0)])
    }

    #[test]
    fn first_step_is_acceleration_limited() {
        let cfg = NavConfig::new(0.5, 6.0, 0.5);
        let cmd = control(&RobotState::default(), &straight(), &cfg, 0.05, 0.3);
        assert!((cmd.speed - 0.3).abs() < 1e-12);
        assert!((cmd.accel - 6.0).abs() < 1e-9);
        assert_eq!(cmd.turn_rate, 0.0);
    }

    #[test]
    fn arrival_commands_zero() {
        let cfg = NavConfig::new(0.5, 6.0, 0.5);
        let r = RobotState {
            position: Point::new(9.9, 0.0),
            heading: 0.0,
            speed: 0.0,
        };
        assert_eq!(control(&r, &straight(), &cfg, 0.05, 0.3).speed, 0.0);
    }

    #[test]
    fn lowered_bound_decays_at_accel_limit() {
        let mut r = RobotState {
            position: Point::new(1.0, 0.0),
            heading: 0.0,
            speed: 0.75,
        };
        let cfg = NavConfig::new(0.3, 3.6, 0.5);
        let mut speeds = vec![];
        for _ in 0..5 {
            let c = control(&r, &straight(), &cfg, 0.05, 0.3);
            assert!(c.accel.abs() <= cfg.accel_lim + 1e-9);
            r.speed = c.speed;
            r.position.x += c.speed * 0.05;
            speeds.push(c.speed);
        }
        assert!((speeds[0] - 0.57).abs() < 1e-9);
        assert!((speeds[1] - 0.39).abs() < 1e-9);
        assert!((speeds[2] - 0.3).abs() < 1e-9);
        assert!((speeds[4] - 0.3).abs() < 1e-9);
    }

    #[test]
    fn large_heading_error_turns_in_place() {
        let cfg = NavConfig::new(0.5, 6.0, 0.5);
        let r = RobotState {
            position: Point::new(0.0, 0.0),
            heading: PI,
            speed: 0.0,
        };
        let c = control(&r, &straight(), &cfg, 0.05, 0.3);
        assert_eq!(c.speed, 0.0);
        assert_eq!(c.turn_rate.abs(), MAX_TURN_RATE);
    }

    #[test]
    fn wraps_angles() {
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert_eq!(wrap_angle(0.25), 0.25);
    }
}
