use std::fmt;
use std::sync::Arc;

use crate::mapek::{Diagnostic, LoopConfig, MapeLoop, RecordingExecutor, ReconfigurationCommand, ReportedStatus};
use crate::model::{builtin, parse_model};
use crate::reasoner::objective_status;
use crate::tomasys::{KnowledgeBase, ObjectiveStatus};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub name: String,
    pub passed: bool,
    pub commands: Vec<ReconfigurationCommand>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PyramidReport {
    pub scenarios: Vec<ScenarioResult>,
}

impl PyramidReport {
    pub fn passed(&self) -> bool {
        self.scenarios.iter().all(|s| s.passed)
    }
}

impl fmt::Display for PyramidReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.scenarios {
            writeln!(f, "{} {}: {}", if s.passed { "PASS" } else { "FAIL" }, s.name, s.detail)?;
            for c in &s.commands {
                writeln!(f, "    {}", c.to_json_line())?;
            }
        }
        Ok(())
    }
}

struct Trace {
    commands: Vec<ReconfigurationCommand>,
    status: Vec<(String, Result<ObjectiveStatus, String>)>,
}

/// Runs the loop once per second from t = 1 to t = `until`, injecting
/// component errors at their timestamps.
fn run(injections: &[(f64, &str)], until: u32, period: f64) -> Trace {
    let model = Arc::new(parse_model(builtin::PYRAMID).expect("shipped model parses"));
    let kb = KnowledgeBase::new(model, [("o_detect", "tag_detect_normal"), ("o_build", "dual_arm")]).expect("designs exist");
    let mut mape = MapeLoop::new(kb, LoopConfig { period, ..LoopConfig::default() });
    let tx = mape.sender();
    let mut exec = RecordingExecutor::default();
    let mut commands = Vec::new();
    let mut pending: Vec<(f64, &str)> = injections.to_vec();
    for k in 1..=until {
        let now = k as f64 * period;
        pending.retain(|&(t, name)| {
            if t <= now + 1e-9 {
                tx.send(Diagnostic::component(t, name, ReportedStatus::Error)).expect("loop alive");
                false
            } else {
                true
            }
        });
        commands.extend(mape.tick(now, &mut exec).commands);
    }
    let kb = mape.kb();
    let status = kb
        .model()
        .objectives
        .iter()
        .map(|o| (o.id.clone(), objective_status(kb, &o.id).map_err(|e| e.to_string())))
        .collect();
    Trace { commands, status }
}

fn single_switch(name: &str, fault_at: f64, component: &str, objective: &str, target: &str) -> ScenarioResult {
    let period = LoopConfig::default().period;
    let t = run(&[(fault_at, component)], 10, period);
    let status = t.status.iter().find(|(o, _)| o == objective).map(|(_, s)| s.clone());
    let mut problems = Vec::new();
    if t.commands.len() != 1 {
        problems.push(format!("expected 1 command, got {}", t.commands.len()));
    }
    if let Some(c) = t.commands.first() {
        if c.to_design != target {
            problems.push(format!("switched to {} instead of {target}", c.to_design));
        }
        if c.objective != objective {
            problems.push(format!("reconfigured {} instead of {objective}", c.objective));
        }
        if c.timestamp - fault_at > period + 1e-9 {
            problems.push(format!("reacted at t = {} for a fault at t = {fault_at}", c.timestamp));
        }
    }
    if status != Some(Ok(ObjectiveStatus::Ok)) {
        problems.push(format!("{objective} ends as {status:?}"));
    }
    let detail = if problems.is_empty() {
        format!("{component} fails at t = {fault_at}, {objective} regrounded on {target}")
    } else {
        problems.join("; ")
    };
    ScenarioResult {
        name: name.into(),
        passed: problems.is_empty(),
        commands: t.commands,
        detail,
    }
}

/// The tag-detection fallback, the single-arm fallback and the case with
/// both arms lost.
pub fn run_pyramid_scenarios() -> PyramidReport {
    let s1 = single_switch("scenario 1 (tag not detected)", 2.0, "tag_detector_normal", "o_detect", "tag_detect_lowlight");
    let s2 = single_switch("scenario 2 (one arm available)", 5.0, "arm_right", "o_build", "single_arm_with_move");
    let t = run(&[(5.0, "arm_left"), (5.0, "arm_right")], 10, LoopConfig::default().period);
    let status = t.status.iter().find(|(o, _)| o == "o_build").map(|(_, s)| s.clone());
    let ok = t.commands.is_empty() && status == Some(Ok(ObjectiveStatus::Unresolvable));
    let s3 = ScenarioResult {
        name: "both arms lost".into(),
        passed: ok,
        detail: if ok {
            "o_build unresolvable, no command issued".into()
        } else {
            format!("{} commands, o_build ends as {status:?}", t.commands.len())
        },
        commands: t.commands,
    };
    PyramidReport {
        scenarios: vec![s1, s2, s3],
    }
}
