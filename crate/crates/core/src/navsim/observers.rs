use super::grid::{OccupancyGrid, Point};

/// Reaction horizon added to the braking distance.
pub const REACTION_TIME: f64 = 1.0;
/// Half-angle of the forward cone searched for obstacles.
pub const CONE_HALF_ANGLE: f64 = std::f64::consts::FRAC_PI_6;
pub const FOOTPRINT_RADIUS: f64 = 0.4;

/// Power draw of the base: idle load plus speed, acceleration and
/// controller-rate terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    pub p_idle: f64,
    pub c_v: f64,
    pub c_a: f64,
    pub c_f: f64,
    pub p_max: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self {
            p_idle: 20.0,
            c_v: 30.0,
            c_a: 5.0,
            c_f: 0.2,
            p_max: 80.0,
        }
    }
}

impl PowerModel {
    /// Instantaneous power in watts; `increase` is the injected fractional
    /// overhead.
    pub fn power(&self, speed: f64, accel: f64, controller_hz: f64, increase: f64) -> f64 {
        (self.p_idle + self.c_v * speed.abs() + self.c_a * accel.abs() + self.c_f * controller_hz) * (1.0 + increase)
    }

    /// Power at constant speed.
    pub fn cruise_power(&self, speed: f64, controller_hz: f64, increase: f64) -> f64 {
        self.power(speed, 0.0, controller_hz, increase)
    }

    /// Normalized energy quality: power over `p_max`, saturating at 1.
    pub fn energy(&self, speed: f64, accel: f64, controller_hz: f64, increase: f64) -> f64 {
        (self.power(speed, accel, controller_hz, increase) / self.p_max).clamp(0.0, 1.0)
    }
}

pub fn braking_distance(speed: f64, accel_lim: f64) -> f64 {
    let v = speed.abs();
    v * REACTION_TIME + v * v / (2.0 * accel_lim)
}

/// Safety for a free distance `p` ahead of the footprint.
///
/// ```
/// use metacontrol::navsim::safety_value;
/// assert_eq!(safety_value(2.0, 0.5, 6.0), 1.0);
/// assert!((safety_value(0.26, 0.5, 6.0) - 0.4992).abs() < 1e-4);
/// assert_eq!(safety_value(0.0, 0.0, 6.0), 1.0);
/// ```
pub fn safety_value(p: f64, speed: f64, accel_lim: f64) -> f64 {
    let d = braking_distance(speed, accel_lim);
    if speed == 0.0 || p >= d {
        1.0
    } else {
        (p.max(0.0) / d).clamp(0.0, 1.0)
    }
}

/// Distance from the footprint edge to the nearest occupied cell within
/// the forward cone, searching up to `range` meters from the center.
/// `None` when the cone is clear within range.
pub fn free_distance_ahead(grid: &OccupancyGrid, pos: Point, heading: f64, range: f64) -> Option<f64> {
    let res = grid.resolution();
    let o = grid.origin();
    let cells = (range / res).ceil() as i64 + 1;
    let cx = ((pos.x - o.x) / res).floor() as i64;
    let cy = ((pos.y - o.y) / res).floor() as i64;
    let (hx, hy) = (heading.cos(), heading.sin());
    let cos_cone = CONE_HALF_ANGLE.cos();
    let mut best = f64::INFINITY;
    for iy in cy - cells..=cy + cells {
        for ix in cx - cells..=cx + cells {
            let occupied = if grid.in_bounds(ix, iy) {
                grid.is_occupied(ix as usize, iy as usize)
            } else {
                true
            };
            if !occupied {
                continue;
            }
            let c = Point::new(o.x + (ix as f64 + 0.5) * res, o.y + (iy as f64 + 0.5) * res);
            let (dx, dy) = (c.x - pos.x, c.y - pos.y);
            let d = dx.hypot(dy);
            if d > range || d >= best {
                continue;
            }
            if d > 1e-9 && (dx * hx + dy * hy) / d < cos_cone {
                continue;
            }
            best = d;
        }
    }
    best.is_finite().then(|| (best - FOOTPRINT_RADIUS).max(0.0))
}

/// Safety observer over the robot's known map.
pub fn observe_safety(grid: &OccupancyGrid, pos: Point, heading: f64, speed: f64, accel_lim: f64) -> f64 {
    let d = braking_distance(speed, accel_lim);
    if speed == 0.0 {
        return 1.0;
    }
    match free_distance_ahead(grid, pos, heading, d + FOOTPRINT_RADIUS + grid.resolution()) {
        Some(p) => safety_value(p, speed, accel_lim),
        None => 1.0,
    }
}
