//! The managing subsystem: Monitor → Analyze → Plan → Execute over the
//! knowledge base.
//!
//! Monitors never touch the knowledge base. They push [`Diagnostic`]s into a
//! queue (any number of [`DiagnosticSender`] clones); the loop drains the
//! queue at the start of each tick. In lockstep mode the caller drives
//! [`MapeLoop::tick`] with a simulated clock. [`spawn_free_running`] drives
//! it from wall-clock time on its own thread.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use serde::Deserialize;
use thiserror::Error;

use crate::reasoner;
use crate::tomasys::{FunctionDesign, KbError, KnowledgeBase, NegativeFact, QaValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportedStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiagnosticPayload {
    ComponentStatus { name: String, status: ReportedStatus },
    QaValue { qa_type: String, value: f64 },
}

/// Monitor → loop message.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub timestamp: f64,
    pub payload: DiagnosticPayload,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecordError {
    #[error("malformed record: {0}")]
    Json(String),
    #[error("unknown record kind `{0}`")]
    UnknownKind(String),
    #[error("record of kind `{kind}` lacks field `{field}`")]
    MissingField { kind: String, field: &'static str },
    #[error("invalid status `{0}` (expected `ok` or `error`)")]
    BadStatus(String),
    #[error("quality value {0} outside [0, 1]")]
    ValueOutOfRange(f64),
    #[error("reconfiguration from and to the same design `{0}`")]
    SameDesign(String),
}

#[derive(Deserialize)]
struct RawRecord {
    t: f64,
    kind: Option<String>,
    name: Option<String>,
    status: Option<String>,
    #[serde(rename = "type")]
    qa_type: Option<String>,
    value: Option<f64>,
    objective: Option<String>,
    from: Option<String>,
    to: Option<String>,
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn json_num(x: f64) -> String {
    serde_json::to_string(&x).unwrap_or_else(|_| "null".into())
}

impl Diagnostic {
    pub fn component(timestamp: f64, name: impl Into<String>, status: ReportedStatus) -> Self {
        Self {
            timestamp,
            payload: DiagnosticPayload::ComponentStatus {
                name: name.into(),
                status,
            },
        }
    }

    pub fn qa(timestamp: f64, qa_type: impl Into<String>, value: f64) -> Result<Self, RecordError> {
        if !(0.0..=1.0).contains(&value) {
            return Err(RecordError::ValueOutOfRange(value));
        }
        Ok(Self {
            timestamp,
            payload: DiagnosticPayload::QaValue {
                qa_type: qa_type.into(),
                value,
            },
        })
    }

    /// Parses one line of the diagnostics stream.
    pub fn from_json_line(line: &str) -> Result<Self, RecordError> {
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| RecordError::Json(e.to_string()))?;
        let kind = raw.kind.ok_or(RecordError::MissingField {
            kind: "?".into(),
            field: "kind",
        })?;
        let missing = |field| RecordError::MissingField {
            kind: kind.clone(),
            field,
        };
        match kind.as_str() {
            "component_status" => {
                let name = raw.name.ok_or_else(|| missing("name"))?;
                let status = match raw.status.ok_or_else(|| missing("status"))?.as_str() {
                    "ok" => ReportedStatus::Ok,
                    "error" => ReportedStatus::Error,
                    other => return Err(RecordError::BadStatus(other.to_string())),
                };
                Ok(Self::component(raw.t, name, status))
            }
            "qa_value" => {
                let qa_type = raw.qa_type.ok_or_else(|| missing("type"))?;
                let value = raw.value.ok_or_else(|| missing("value"))?;
                Self::qa(raw.t, qa_type, value)
            }
            _ => Err(RecordError::UnknownKind(kind)),
        }
    }

    pub fn to_json_line(&self) -> String {
        match &self.payload {
            DiagnosticPayload::ComponentStatus { name, status } => format!(
                "{{\"t\": {}, \"kind\": \"component_status\", \"name\": {}, \"status\": \"{}\"}}",
                json_num(self.timestamp),
                json_str(name),
                match status {
                    ReportedStatus::Ok => "ok",
                    ReportedStatus::Error => "error",
                }
            ),
            DiagnosticPayload::QaValue { qa_type, value } => format!(
                "{{\"t\": {}, \"kind\": \"qa_value\", \"type\": {}, \"value\": {}}}",
                json_num(self.timestamp),
                json_str(qa_type),
                json_num(*value)
            ),
        }
    }
}

/// A request to re-ground an objective on a different design.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconfigurationCommand {
    pub timestamp: f64,
    pub objective: String,
    pub from_design: String,
    pub to_design: String,
}

impl ReconfigurationCommand {
    pub fn new(
        timestamp: f64,
        objective: impl Into<String>,
        from_design: impl Into<String>,
        to_design: impl Into<String>,
    ) -> Result<Self, RecordError> {
        let (from_design, to_design) = (from_design.into(), to_design.into());
        if from_design == to_design {
            return Err(RecordError::SameDesign(to_design));
        }
        Ok(Self {
            timestamp,
            objective: objective.into(),
            from_design,
            to_design,
        })
    }

    pub fn from_json_line(line: &str) -> Result<Self, RecordError> {
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| RecordError::Json(e.to_string()))?;
        let field = |v: Option<String>, field| {
            v.ok_or(RecordError::MissingField {
                kind: "command".into(),
                field,
            })
        };
        Self::new(
            raw.t,
            field(raw.objective, "objective")?,
            field(raw.from, "from")?,
            field(raw.to, "to")?,
        )
    }

    pub fn to_json_line(&self) -> String {
        format!(
            "{{\"t\": {}, \"objective\": {}, \"from\": {}, \"to\": {}}}",
            json_num(self.timestamp),
            json_str(&self.objective),
            json_str(&self.from_design),
            json_str(&self.to_design)
        )
    }
}

impl fmt::Display for ReconfigurationCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json_line())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("executor rejected the command: {0}")]
    Rejected(String),
    #[error("executor timed out")]
    Timeout,
}

/// Enforces a reconfiguration on the managed system.
pub trait Executor {
    fn apply(&mut self, cmd: &ReconfigurationCommand) -> Result<(), ExecError>;
}

impl<E: Executor + ?Sized> Executor for &mut E {
    fn apply(&mut self, cmd: &ReconfigurationCommand) -> Result<(), ExecError> {
        (**self).apply(cmd)
    }
}

/// Executor that acknowledges everything and remembers what it saw.
#[derive(Debug, Default, Clone)]
pub struct RecordingExecutor {
    pub applied: Vec<ReconfigurationCommand>,
}

impl Executor for RecordingExecutor {
    fn apply(&mut self, cmd: &ReconfigurationCommand) -> Result<(), ExecError> {
        self.applied.push(cmd.clone());
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopConfig {
    /// Seconds of (simulated or wall) time between ticks.
    pub period: f64,
    /// Failed executions tolerated per objective before it is declared
    /// unresolvable.
    pub max_retries: u32,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            period: 1.0,
            max_retries: 3,
        }
    }
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct IngestSummary {
    pub applied: usize,
    pub skipped: Vec<(Diagnostic, KbError)>,
}

/// Applies a batch of diagnostics in timestamp order. Diagnostics naming
/// unknown entities are skipped and reported, the rest still apply.
pub fn ingest(kb: &mut KnowledgeBase, batch: impl IntoIterator<Item = Diagnostic>) -> IngestSummary {
    let mut batch: Vec<Diagnostic> = batch.into_iter().collect();
    batch.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    let mut summary = IngestSummary::default();
    for diag in batch {
        let result = match &diag.payload {
            DiagnosticPayload::ComponentStatus { name, status } => match status {
                ReportedStatus::Error => kb.assert(NegativeFact::ComponentError(name.clone())),
                ReportedStatus::Ok => kb.report_component_ok(name),
            },
            DiagnosticPayload::QaValue { qa_type, value } => {
                QaValue::new(qa_type.clone(), *value, diag.timestamp).and_then(|v| kb.assert(v))
            }
        };
        match result {
            Ok(()) => summary.applied += 1,
            Err(e) => summary.skipped.push((diag, e)),
        }
    }
    summary
}

/// Runs the reasoner and returns the objectives in error.
pub fn analyze(kb: &mut KnowledgeBase) -> BTreeSet<String> {
    reasoner::infer(kb);
    kb.model()
        .objectives
        .iter()
        .filter(|o| !kb.objective_fulfilled(&o.id))
        .map(|o| o.id.clone())
        .collect()
}

/// Records, for each requirement of `objective` that the latest measurement
/// violates, the current design's estimate as a bound that replacements must
/// strictly improve on. Returns the violated QA types.
pub fn record_violations(kb: &mut KnowledgeBase, objective: &str) -> Vec<String> {
    let Some(grounding) = kb.grounding(objective).cloned() else {
        return vec![];
    };
    let Some(obj) = kb.model().objective(objective).cloned() else {
        return vec![];
    };
    let Some(design) = kb.model().design(&grounding.design).cloned() else {
        return vec![];
    };
    let mut violated = Vec::new();
    for nfr in &obj.nfrs {
        let Some(m) = kb.measurement(&nfr.qa_type) else { continue };
        if nfr.satisfied_by(m.value) {
            continue;
        }
        if let Some(est) = design.estimate(&nfr.qa_type) {
            kb.record_violation_bound(objective, &nfr.qa_type, est);
        }
        violated.push(nfr.qa_type.clone());
    }
    violated
}

/// True when `design` may replace the current grounding of `objective`:
/// it realizes the objective's function, is realisable, differs from the
/// current design, meets every requirement by estimate, and improves on
/// every recorded violation bound.
pub fn is_feasible(kb: &KnowledgeBase, objective: &str, design: &FunctionDesign) -> bool {
    let Some(obj) = kb.model().objective(objective) else {
        return false;
    };
    if design.realizes != obj.function || !kb.design_realisable(&design.name) {
        return false;
    }
    if kb.grounding(objective).is_some_and(|g| g.design == design.name) {
        return false;
    }
    obj.nfrs.iter().all(|nfr| {
        let Some(est) = design.estimate(&nfr.qa_type) else {
            return false;
        };
        if !nfr.satisfied_by(est) {
            return false;
        }
        match (kb.violation_bound(objective, &nfr.qa_type), kb.model().qa_type(&nfr.qa_type)) {
            (Some(bound), Some(q)) => q.polarity.strictly_better(est, bound),
            _ => true,
        }
    })
}

/// Highest-utility feasible design, ties broken by the smallest name.
pub fn plan<'a>(kb: &'a KnowledgeBase, objective: &str) -> Option<&'a FunctionDesign> {
    kb.model()
        .designs
        .iter()
        .filter(|d| is_feasible(kb, objective, d))
        .min_by(|a, b| b.utility.total_cmp(&a.utility).then_with(|| a.name.cmp(&b.name)))
}

/// Hands `cmd` to the executor. On acknowledgement the objective is
/// re-grounded and its error facts are retracted until the next analysis.
pub fn execute(kb: &mut KnowledgeBase, cmd: &ReconfigurationCommand, executor: &mut dyn Executor) -> Result<(), ExecError> {
    executor.apply(cmd)?;
    kb.ground(&cmd.objective, &cmd.to_design, cmd.timestamp)
        .map_err(|e| ExecError::Rejected(e.to_string()))?;
    kb.retract(&NegativeFact::GroundingInError(cmd.objective.clone()).into());
    kb.retract(&NegativeFact::ObjectiveInError(cmd.objective.clone()).into());
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionFailure {
    pub command: ReconfigurationCommand,
    pub error: ExecError,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LoopReport {
    pub tick_time: f64,
    pub ingested: usize,
    pub skipped: usize,
    pub objectives_in_error: BTreeSet<String>,
    /// At most one per objective.
    pub commands: Vec<ReconfigurationCommand>,
    pub failures: Vec<ExecutionFailure>,
    pub unresolvable: BTreeSet<String>,
}

impl LoopReport {
    /// The single command of a one-objective loop, if any.
    pub fn command(&self) -> Option<&ReconfigurationCommand> {
        self.commands.first()
    }
}

pub type DiagnosticSender = Sender<Diagnostic>;

/// Loop state: the knowledge base it owns, the diagnostics queue and retry
/// bookkeeping.
pub struct MapeLoop {
    kb: KnowledgeBase,
    config: LoopConfig,
    tx: Sender<Diagnostic>,
    rx: Receiver<Diagnostic>,
    last_tick: Option<f64>,
    failures: BTreeMap<String, u32>,
}

impl MapeLoop {
    pub fn new(kb: KnowledgeBase, config: LoopConfig) -> Self {
        assert!(config.period > 0.0, "loop period must be positive");
        let (tx, rx) = mpsc::channel();
        Self {
            kb,
            config,
            tx,
            rx,
            last_tick: None,
            failures: BTreeMap::new(),
        }
    }

    pub fn sender(&self) -> DiagnosticSender {
        self.tx.clone()
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn kb_mut(&mut self) -> &mut KnowledgeBase {
        &mut self.kb
    }

    pub fn config(&self) -> &LoopConfig {
        &self.config
    }

    pub fn last_tick(&self) -> Option<f64> {
        self.last_tick
    }

    /// True when `now` is at least one period after the previous tick.
    pub fn due(&self, now: f64) -> bool {
        self.last_tick.is_none_or(|t| now >= t + self.config.period - 1e-9)
    }

    /// One full Monitor → Analyze → Plan → Execute pass.
    pub fn tick(&mut self, now: f64, executor: &mut dyn Executor) -> LoopReport {
        self.last_tick = Some(now);
        let batch: Vec<Diagnostic> = self.rx.try_iter().collect();
        let summary = ingest(&mut self.kb, batch);
        let mut report = LoopReport {
            tick_time: now,
            ingested: summary.applied,
            skipped: summary.skipped.len(),
            ..Default::default()
        };

        report.objectives_in_error = analyze(&mut self.kb);
        let ids: Vec<String> = self.kb.model().objectives.iter().map(|o| o.id.clone()).collect();
        for id in &ids {
            if !report.objectives_in_error.contains(id) {
                self.failures.remove(id);
                self.kb.clear_unresolvable(id);
            }
        }

        for objective in report.objectives_in_error.clone() {
            if self.failures.get(&objective).copied().unwrap_or(0) >= self.config.max_retries {
                report.unresolvable.insert(objective);
                continue;
            }
            record_violations(&mut self.kb, &objective);
            let Some(target) = plan(&self.kb, &objective).map(|d| d.name.clone()) else {
                self.kb.mark_unresolvable(&objective);
                report.unresolvable.insert(objective);
                continue;
            };
            self.kb.clear_unresolvable(&objective);
            let from = self
                .kb
                .grounding(&objective)
                .map(|g| g.design.clone())
                .unwrap_or_default();
            let cmd = ReconfigurationCommand::new(now, objective.clone(), from, target)
                .expect("planner never proposes the current design");
            match execute(&mut self.kb, &cmd, executor) {
                Ok(()) => {
                    self.failures.remove(&objective);
                    report.commands.push(cmd);
                }
                Err(error) => {
                    let n = self.failures.entry(objective.clone()).or_insert(0);
                    *n += 1;
                    if *n >= self.config.max_retries {
                        self.kb.mark_unresolvable(&objective);
                        report.unresolvable.insert(objective.clone());
                    }
                    report.failures.push(ExecutionFailure { command: cmd, error });
                }
            }
        }
        report
    }
}

/// Handle to a loop running on its own thread against wall-clock time.
pub struct FreeRunning {
    stop: Arc<AtomicBool>,
    handle: JoinHandle<(MapeLoop, Vec<LoopReport>)>,
}

impl FreeRunning {
    /// Stops the loop after its current tick and returns it with its reports.
    pub fn stop(self) -> (MapeLoop, Vec<LoopReport>) {
        self.stop.store(true, Ordering::SeqCst);
        self.handle.join().expect("loop thread panicked")
    }
}

/// Runs `mape` every `config.period` seconds of wall-clock time. The tick
/// timestamp is seconds since the loop started.
pub fn spawn_free_running<E>(mut mape: MapeLoop, mut executor: E) -> FreeRunning
where
    E: Executor + Send + 'static,
{
    let stop = Arc::new(AtomicBool::new(false));
    let flag = stop.clone();
    let handle = std::thread::spawn(move || {
        let start = Instant::now();
        let period = Duration::from_secs_f64(mape.config.period);
        let mut reports = Vec::new();
        let mut next = start;
        while !flag.load(Ordering::SeqCst) {
            let now = Instant::now();
            if now >= next {
                reports.push(mape.tick(start.elapsed().as_secs_f64(), &mut executor));
                next += period;
            } else {
                std::thread::sleep((next - now).min(Duration::from_millis(5)));
            }
        }
        (mape, reports)
    });
    FreeRunning { stop, handle }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin, generate_nav_model, parse_model, NavParameterSpace};
    use crate::reasoner::objective_status;
    use crate::tomasys::{ObjectiveStatus, QaValue};

    fn pyramid_kb() -> KnowledgeBase {
        let m = Arc::new(parse_model(builtin::PYRAMID).unwrap());
        KnowledgeBase::new(m, [("o_build", "dual_arm"), ("o_detect", "tag_detect_normal")]).unwrap()
    }

    fn nav_kb(initial: &str) -> KnowledgeBase {
        let m = Arc::new(generate_nav_model(&NavParameterSpace::default()));
        KnowledgeBase::new(m, [("o_nav", initial)]).unwrap()
    }

    struct Rejecting;
    impl Executor for Rejecting {
        fn apply(&mut self, _: &ReconfigurationCommand) -> Result<(), ExecError> {
            Err(ExecError::Rejected("no".into()))
        }
    }

    #[test]
    fn diagnostic_lines_round_trip() {
        let lines = [
            r#"{"t": 1.5, "kind": "component_status", "name": "arm_left", "status": "error"}"#,
            r#"{"t": 2.0, "kind": "qa_value", "type": "safety", "value": 0.37}"#,
        ];
        for l in lines {
            assert_eq!(Diagnostic::from_json_line(l).unwrap().to_json_line(), l);
        }
        let c = r#"{"t": 3.0, "objective": "o_nav", "from": "a", "to": "b"}"#;
        assert_eq!(ReconfigurationCommand::from_json_line(c).unwrap().to_json_line(), c);
    }

    #[test]
    fn malformed_records() {
        assert!(matches!(
            Diagnostic::from_json_line(r#"{"t": 1, "kind": "qa_value", "type": "safety", "value": 1.2}"#),
            Err(RecordError::ValueOutOfRange(_))
        ));
        assert!(matches!(
            Diagnostic::from_json_line(r#"{"t": 1, "kind": "bogus"}"#),
            Err(RecordError::UnknownKind(_))
        ));
        assert!(matches!(
            Diagnostic::from_json_line(r#"{"t": 1, "kind": "component_status", "name": "x", "status": "dead"}"#),
            Err(RecordError::BadStatus(_))
        ));
        assert!(Diagnostic::from_json_line("not json").is_err());
        assert!(matches!(
            ReconfigurationCommand::from_json_line(r#"{"t": 3, "objective": "o", "from": "a", "to": "a"}"#),
            Err(RecordError::SameDesign(_))
        ));
    }

    #[test]
    fn ingest_measurements_and_errors() {
        let mut kb = nav_kb("f_nav_v0.5_a6_r0.65");
        let s = ingest(
            &mut kb,
            [
                Diagnostic::qa(1.0, "safety", 0.95).unwrap(),
                Diagnostic::qa(1.0, "energy", 0.30).unwrap(),
            ],
        );
        assert_eq!(s.applied, 2);
        assert_eq!(kb.measurement("safety").unwrap().value, 0.95);
        assert!(kb.asserted_facts().is_empty());

        let mut kb = pyramid_kb();
        ingest(&mut kb, [Diagnostic::component(1.0, "arm_left", ReportedStatus::Error)]);
        assert!(kb.holds(&NegativeFact::ComponentError("arm_left".into())));
    }

    #[test]
    fn ingest_orders_by_timestamp() {
        let mut kb = pyramid_kb();
        // error at t=1, ok at t=2, delivered out of order
        ingest(
            &mut kb,
            [
                Diagnostic::component(2.0, "arm_left", ReportedStatus::Ok),
                Diagnostic::component(1.0, "arm_left", ReportedStatus::Error),
            ],
        );
        assert!(kb.asserted_facts().is_empty());
    }

    #[test]
    fn ingest_skips_unknown_entities() {
        let mut kb = pyramid_kb();
        let s = ingest(
            &mut kb,
            [
                Diagnostic::component(1.0, "ghost", ReportedStatus::Error),
                Diagnostic::component(1.0, "arm_left", ReportedStatus::Error),
            ],
        );
        assert_eq!(s.applied, 1);
        assert_eq!(s.skipped.len(), 1);
    }

    #[test]
    fn plan_picks_highest_utility() {
        let src = "system u {
    component c;
    component bad;
    function f;
    design cur realizes f { requires c; utility = 0.1; }
    design lo realizes f { requires c; utility = 0.7; }
    design hi realizes f { requires c; utility = 0.9; }
    design hi_broken realizes f { requires bad; utility = 1.0; }
    objective o : f { }
}";
        let m = Arc::new(parse_model(src).unwrap());
        let mut kb = KnowledgeBase::new(m, [("o", "cur")]).unwrap();
        kb.assert(NegativeFact::ComponentError("bad".into())).unwrap();
        analyze(&mut kb);
        assert_eq!(plan(&kb, "o").unwrap().name, "hi");
    }

    #[test]
    fn plan_none_when_everything_broken() {
        let mut kb = pyramid_kb();
        kb.assert(NegativeFact::ComponentError("arm_left".into())).unwrap();
        analyze(&mut kb);
        assert!(plan(&kb, "o_build").is_none());
    }

    #[test]
    fn plan_respects_violation_bounds() {
        let mut kb = nav_kb("f_nav_v0.75_a6_r0.8");
        kb.assert(QaValue::new("energy", 0.87, 1.0).unwrap()).unwrap();
        analyze(&mut kb);
        assert_eq!(record_violations(&mut kb, "o_nav"), vec!["energy".to_string()]);
        let d = plan(&kb, "o_nav").unwrap();
        // cheaper than any 0.75 m/s design: the fastest 0.5 m/s one
        assert_eq!(d.name, "f_nav_v0.5_a3.6_r0.5");
    }

    #[test]
    fn tick_noop_when_all_ok() {
        let mut mape = MapeLoop::new(nav_kb("f_nav_v0.5_a6_r0.65"), LoopConfig::default());
        mape.sender().send(Diagnostic::qa(0.5, "safety", 0.9).unwrap()).unwrap();
        let mut ex = RecordingExecutor::default();
        let r = mape.tick(1.0, &mut ex);
        assert!(r.objectives_in_error.is_empty());
        assert!(r.commands.is_empty());
        assert_eq!(r.ingested, 1);
        assert!(ex.applied.is_empty());
        assert_eq!(mape.kb().grounding("o_nav").unwrap().design, "f_nav_v0.5_a6_r0.65");
    }

    #[test]
    fn tick_reacts_to_arm_failure_within_one_tick() {
        let mut mape = MapeLoop::new(pyramid_kb(), LoopConfig::default());
        let mut ex = RecordingExecutor::default();
        mape.tick(0.0, &mut ex);
        mape.sender()
            .send(Diagnostic::component(0.5, "arm_right", ReportedStatus::Error))
            .unwrap();
        let r = mape.tick(1.0, &mut ex);
        assert_eq!(r.commands.len(), 1);
        assert_eq!(r.command().unwrap().to_design, "single_arm_with_move");
        let r = mape.tick(2.0, &mut ex);
        assert!(r.objectives_in_error.is_empty());
        assert!(r.commands.is_empty());
        assert_eq!(objective_status(mape.kb(), "o_build").unwrap(), ObjectiveStatus::Ok);
    }

    #[test]
    fn rejected_execution_leaves_facts_and_retries() {
        let mut mape = MapeLoop::new(pyramid_kb(), LoopConfig::default());
        mape.sender()
            .send(Diagnostic::component(0.5, "arm_right", ReportedStatus::Error))
            .unwrap();
        let r = mape.tick(1.0, &mut Rejecting);
        assert_eq!(r.failures.len(), 1);
        assert!(r.commands.is_empty());
        assert_eq!(mape.kb().grounding("o_build").unwrap().design, "dual_arm");
        assert!(!mape.kb().objective_fulfilled("o_build"));
        let r2 = mape.tick(2.0, &mut Rejecting);
        assert_eq!(r2.failures.len(), 1);
        let r3 = mape.tick(3.0, &mut Rejecting);
        assert!(r3.unresolvable.contains("o_build"));
        let r4 = mape.tick(4.0, &mut Rejecting);
        assert!(r4.failures.is_empty());
        assert!(r4.unresolvable.contains("o_build"));
        assert_eq!(objective_status(mape.kb(), "o_build").unwrap(), ObjectiveStatus::Unresolvable);
    }

    #[test]
    fn unsafe_measurement_leads_to_safer_design() {
        let mut mape = MapeLoop::new(nav_kb("f_nav_v0.75_a9_r0.5"), LoopConfig::default());
        mape.sender().send(Diagnostic::qa(0.9, "safety", 0.37).unwrap()).unwrap();
        let mut ex = RecordingExecutor::default();
        let r = mape.tick(1.0, &mut ex);
        let cmd = r.command().unwrap();
        let d = mape.kb().model().design(&cmd.to_design).unwrap();
        assert!(d.estimate("safety").unwrap() >= 0.4);
        assert_eq!(cmd.to_design, "f_nav_v0.75_a3.6_r0.65");
    }

    #[test]
    fn runtime_nfr_change() {
        use crate::tomasys::{Comparator, Nfr};
        let mut kb = nav_kb("f_nav_v0.5_a6_r0.65");
        kb.assert(QaValue::new("safety", 0.5, 1.0).unwrap()).unwrap();
        assert!(analyze(&mut kb).is_empty());
        kb.set_objective_nfrs(
            "o_nav",
            vec![Nfr {
                qa_type: "safety".into(),
                comparator: Comparator::AtLeast,
                threshold: 0.6,
            }],
        )
        .unwrap();
        assert!(analyze(&mut kb).contains("o_nav"));
    }

    #[test]
    fn free_running_loop_ticks() {
        let mape = MapeLoop::new(
            pyramid_kb(),
            LoopConfig {
                period: 0.01,
                ..Default::default()
            },
        );
        let tx = mape.sender();
        let running = spawn_free_running(mape, RecordingExecutor::default());
        tx.send(Diagnostic::component(0.0, "arm_right", ReportedStatus::Error)).unwrap();
        std::thread::sleep(Duration::from_millis(100));
        let (mape, reports) = running.stop();
        assert!(!reports.is_empty());
        assert_eq!(mape.kb().grounding("o_build").unwrap().design, "single_arm_with_move");
        assert_eq!(reports.iter().map(|r| r.commands.len()).sum::<usize>(), 1);
    }
}
