use indexmap::IndexMap;

use super::ArchitectureModel;
use crate::navsim::PowerModel;
use crate::tomasys::{Comparator, Component, Function, FunctionDesign, Nfr, Objective, Polarity, QaType};

pub const NAV_FUNCTION: &str = "f_navigate";
pub const NAV_OBJECTIVE: &str = "o_nav";
pub const NAV_STACK: &str = "nav_stack";
pub const SAFETY_THRESHOLD: f64 = 0.4;
pub const ENERGY_THRESHOLD: f64 = 0.7;
/// Controller frequency assumed when estimating cruise energy.
pub const ESTIMATE_CONTROLLER_HZ: f64 = 20.0;

/// The three tunable navigation parameters and their candidate values.
#[derive(Debug, Clone, PartialEq)]
pub struct NavParameterSpace {
    pub max_vel: Vec<f64>,
    pub accel_lim: Vec<f64>,
    pub inflation_radius: Vec<f64>,
}

impl Default for NavParameterSpace {
    /// The 3×3×3 grid of `move_base` values used by the experiments.
    fn default() -> Self {
        Self {
            max_vel: vec![0.3, 0.5, 0.75],
            accel_lim: vec![3.6, 6.0, 9.0],
            inflation_radius: vec![0.5, 0.65, 0.8],
        }
    }
}

impl NavParameterSpace {
    pub fn check(&self) -> Result<(), String> {
        for (name, list) in [
            ("max_vel", &self.max_vel),
            ("accel_lim", &self.accel_lim),
            ("inflation_radius", &self.inflation_radius),
        ] {
            if list.is_empty() {
                return Err(format!("{name}: no values"));
            }
            if list.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(format!("{name}: values must be positive"));
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("{name}: values must be strictly increasing"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.max_vel.len() * self.accel_lim.len() * self.inflation_radius.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cartesian product in (max_vel, accel_lim, inflation_radius) order.
    pub fn configurations(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.max_vel.iter().flat_map(move |&v| {
            self.accel_lim
                .iter()
                .flat_map(move |&a| self.inflation_radius.iter().map(move |&r| (v, a, r)))
        })
    }
}

pub fn design_name(max_vel: f64, accel_lim: f64, inflation_radius: f64) -> String {
    format!("f_nav_v{max_vel}_a{accel_lim}_r{inflation_radius}")
}

fn component_name(max_vel: f64, accel_lim: f64, inflation_radius: f64) -> String {
    format!("cfg_v{max_vel}_a{accel_lim}_r{inflation_radius}")
}

/// Inverse of [`design_name`].
pub fn parse_design_name(name: &str) -> Option<(f64, f64, f64)> {
    let rest = name.strip_prefix("f_nav_v")?;
    let (v, rest) = rest.split_once("_a")?;
    let (a, r) = rest.split_once("_r")?;
    let parsed = (v.parse().ok()?, a.parse().ok()?, r.parse().ok()?);
    (design_name(parsed.0, parsed.1, parsed.2) == name).then_some(parsed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavEstimates {
    pub safety: f64,
    pub energy: f64,
    pub performance: f64,
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Design-time quality estimates for one navigation configuration.
///
/// Safety grows with inflation radius and shrinks with speed; energy is the
/// normalized cruise power at `max_vel`; performance is speed relative to
/// the fastest setting. Acceleration only acts at run time.
pub fn nav_estimates(max_vel: f64, _accel_lim: f64, inflation_radius: f64) -> NavEstimates {
    let safety = clamp01(0.30 + 0.40 * (inflation_radius - 0.5) / 0.3 + 0.30 * (0.75 - max_vel) / 0.45);
    let power = PowerModel::default();
    let energy = clamp01(power.cruise_power(max_vel, ESTIMATE_CONTROLLER_HZ, 0.0) / power.p_max);
    let performance = clamp01(max_vel / 0.75);
    NavEstimates {
        safety: round6(safety),
        energy: round6(energy),
        performance: round6(performance),
    }
}

/// Builds the navigation architecture model: one design per parameter
/// combination, all realizing `f_navigate`, and the `o_nav` objective with
/// the safety and energy requirements.
pub fn generate_nav_model(space: &NavParameterSpace) -> ArchitectureModel {
    let mut components = vec![Component { name: NAV_STACK.into() }];
    let mut designs = Vec::with_capacity(space.len());
    for (v, a, r) in space.configurations() {
        let pseudo = component_name(v, a, r);
        let est = nav_estimates(v, a, r);
        let mut qa_estimates = IndexMap::new();
        qa_estimates.insert("safety".to_string(), est.safety);
        qa_estimates.insert("energy".to_string(), est.energy);
        qa_estimates.insert("performance".to_string(), est.performance);
        designs.push(FunctionDesign {
            name: design_name(v, a, r),
            realizes: NAV_FUNCTION.into(),
            requires: vec![NAV_STACK.into(), pseudo.clone()],
            qa_estimates,
            utility: est.performance,
        });
        components.push(Component { name: pseudo });
    }
    ArchitectureModel {
        name: "navigation".into(),
        qa_types: vec![
            QaType {
                name: "safety".into(),
                polarity: Polarity::HigherBetter,
            },
            QaType {
                name: "energy".into(),
                polarity: Polarity::LowerBetter,
            },
            QaType {
                name: "performance".into(),
                polarity: Polarity::HigherBetter,
            },
        ],
        components,
        functions: vec![Function {
            name: NAV_FUNCTION.into(),
        }],
        designs,
        objectives: vec![Objective {
            id: NAV_OBJECTIVE.into(),
            function: NAV_FUNCTION.into(),
            nfrs: vec![
                Nfr {
                    qa_type: "safety".into(),
                    comparator: Comparator::AtLeast,
                    threshold: SAFETY_THRESHOLD,
                },
                Nfr {
                    qa_type: "energy".into(),
                    comparator: Comparator::AtMost,
                    threshold: ENERGY_THRESHOLD,
                },
            ],
        }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_space_yields_27_designs() {
        let m = generate_nav_model(&NavParameterSpace::default());
        assert_eq!(m.designs.len(), 27);
        assert_eq!(m.components.len(), 28);
        assert!(m.design("f_nav_v0.75_a9_r0.5").is_some());
        assert!(m.design("f_nav_v0.3_a3.6_r0.8").is_some());
        let o = m.objective("o_nav").unwrap();
        assert_eq!(o.nfrs.len(), 2);
    }

    #[test]
    fn singleton_space() {
        let s = NavParameterSpace {
            max_vel: vec![0.5],
            accel_lim: vec![6.0],
            inflation_radius: vec![0.65],
        };
        assert_eq!(generate_nav_model(&s).designs.len(), 1);
    }

    #[test]
    fn estimates_by_hand() {
        // (20 + 30 v + 0.2 * 20) / 80
        let slow = nav_estimates(0.3, 3.6, 0.5);
        let fast = nav_estimates(0.75, 3.6, 0.5);
        assert!((slow.energy - 33.0 / 80.0).abs() < 1e-9);
        assert!((fast.energy - 46.5 / 80.0).abs() < 1e-9);
        assert!(slow.energy < fast.energy);
        // 0.30 + 0 + 0.30 * 0.45 / 0.45
        assert!((slow.safety - 0.6).abs() < 1e-9);
        assert!((fast.safety - 0.3).abs() < 1e-9);
        assert!((nav_estimates(0.75, 6.0, 0.65).safety - 0.5).abs() < 1e-9);
        assert_eq!(nav_estimates(0.3, 9.0, 0.8).safety, 1.0);
        assert_eq!(fast.performance, 1.0);
        assert!((slow.performance - 0.4).abs() < 1e-9);
    }

    #[test]
    fn design_names_round_trip() {
        for (v, a, r) in NavParameterSpace::default().configurations() {
            assert_eq!(parse_design_name(&design_name(v, a, r)), Some((v, a, r)));
        }
        assert_eq!(parse_design_name("f_nav_v0.3_a3.6_r0.8"), Some((0.3, 3.6, 0.8)));
        assert_eq!(parse_design_name("dual_arm"), None);
        assert_eq!(parse_design_name("f_nav_v0.30_a3.6_r0.8"), None);
    }

    #[test]
    fn space_checks() {
        assert!(NavParameterSpace::default().check().is_ok());
        let mut s = NavParameterSpace {
            max_vel: vec![0.5, 0.3],
            ..Default::default()
        };
        assert!(s.check().is_err());
        s.max_vel = vec![];
        assert!(s.check().is_err());
        s.max_vel = vec![-1.0];
        assert!(s.check().is_err());
    }

    proptest! {
        #[test]
        fn estimates_are_monotone(v1 in 0.1f64..1.0, v2 in 0.1f64..1.0, r1 in 0.3f64..1.0, r2 in 0.3f64..1.0, a in 1.0f64..10.0) {
            let (vlo, vhi) = if v1 <= v2 { (v1, v2) } else { (v2, v1) };
            let (rlo, rhi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            prop_assert!(nav_estimates(vlo, a, rhi).safety >= nav_estimates(vhi, a, rhi).safety);
            prop_assert!(nav_estimates(vlo, a, rhi).safety >= nav_estimates(vlo, a, rlo).safety);
            prop_assert!(nav_estimates(vlo, a, rlo).energy <= nav_estimates(vhi, a, rlo).energy);
            let e = nav_estimates(v1, a, r1);
            for x in [e.safety, e.energy, e.performance] {
                prop_assert!((0.0..=1.0).contains(&x));
            }
        }
    }
}
