use crate::model::parse_design_name;

use super::SimError;

pub const DEFAULT_CONTROLLER_HZ: f64 = 20.0;
pub const PLANNER_HZ: f64 = 4.0;

/// Navigation stack parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavConfig {
    pub max_vel: f64,
    pub accel_lim: f64,
    pub inflation_radius: f64,
    /// Only feeds the power model; the simulator always steps at 0.05 s.
    pub controller_frequency: f64,
    pub planner_frequency: f64,
}

impl NavConfig {
    pub fn new(max_vel: f64, accel_lim: f64, inflation_radius: f64) -> Self {
        Self {
            max_vel,
            accel_lim,
            inflation_radius,
            controller_frequency: DEFAULT_CONTROLLER_HZ,
            planner_frequency: PLANNER_HZ,
        }
    }

    pub fn with_controller_frequency(mut self, hz: f64) -> Self {
        self.controller_frequency = hz;
        self
    }

    /// Decodes a generated design name such as `f_nav_v0.3_a3.6_r0.8`.
    pub fn from_design(name: &str) -> Result<Self, SimError> {
        let (v, a, r) = parse_design_name(name).ok_or_else(|| SimError::UnknownDesign(name.to_string()))?;
        let cfg = Self::new(v, a, r);
        cfg.check().map_err(|_| SimError::UnknownDesign(name.to_string()))?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), String> {
        let fields = [
            ("max_vel", self.max_vel),
            ("accel_lim", self.accel_lim),
            ("inflation_radius", self.inflation_radius),
            ("controller_frequency", self.controller_frequency),
            ("planner_frequency", self.planner_frequency),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }

    /// Same parameters, expressed as a design name.
    pub fn design_name(&self) -> String {
        crate::model::design_name(self.max_vel, self.accel_lim, self.inflation_radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_design_names() {
        let c = NavConfig::from_design("f_nav_v0.3_a3.6_r0.8").unwrap();
        assert_eq!((c.max_vel, c.accel_lim, c.inflation_radius), (0.3, 3.6, 0.8));
        assert_eq!(c.controller_frequency, 20.0);
        assert_eq!(c.planner_frequency, 4.0);
        assert_eq!(c.design_name(), "f_nav_v0.3_a3.6_r0.8");
    }

    #[test]
    fn rejects_unknown_names() {
        for bad in ["tag_detect_normal", "f_nav_v0.30_a3.6_r0.8", "f_nav_v0_a3.6_r0.8", "f_nav_v-1_a3_r1"] {
            assert!(matches!(NavConfig::from_design(bad), Err(SimError::UnknownDesign(_))), "{bad}");
        }
    }
}
