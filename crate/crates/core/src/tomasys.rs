//! Runtime architecture model: functions, designs, objectives and the
//! closed-world knowledge base the adaptation loop reasons over.
//!
//! The knowledge base stores *negative* facts only. Anything that has no
//! error fact recorded against it is healthy: a component without
//! `component_error` is ok, a design without `design_unrealisable` can be
//! realised, an objective without `objective_in_error` is fulfilled.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ArchitectureModel;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KbError {
    #[error("design `{design}` realizes `{realizes}`, but objective `{objective}` needs `{function}`")]
    GroundingMismatch {
        objective: String,
        design: String,
        realizes: String,
        function: String,
    },
    #[error("unknown {kind} `{name}`")]
    UnknownEntity { kind: &'static str, name: String },
    #[error("knowledge base changed since the last inference run")]
    StaleKb,
    #[error("quality value {0} outside [0, 1]")]
    ValueOutOfRange(f64),
}

/// Whether larger values of a quality attribute are preferable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    HigherBetter,
    LowerBetter,
}

impl Polarity {
    /// The only comparator an NFR on this polarity may use.
    pub fn comparator(self) -> Comparator {
        match self {
            Polarity::HigherBetter => Comparator::AtLeast,
            Polarity::LowerBetter => Comparator::AtMost,
        }
    }

    /// True when `a` is strictly preferable to `b`.
    pub fn strictly_better(self, a: f64, b: f64) -> bool {
        match self {
            Polarity::HigherBetter => a > b,
            Polarity::LowerBetter => a < b,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Polarity::HigherBetter => "higher_better",
            Polarity::LowerBetter => "lower_better",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QaType {
    pub name: String,
    pub polarity: Polarity,
}

/// A normalized quality-attribute measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QaReading {
    pub value: f64,
    pub timestamp: f64,
}

/// A measurement tagged with its quality-attribute type.
#[derive(Debug, Clone, PartialEq)]
pub struct QaValue {
    pub qa_type: String,
    pub value: f64,
    pub timestamp: f64,
}

impl QaValue {
    pub fn new(qa_type: impl Into<String>, value: f64, timestamp: f64) -> Result<Self, KbError> {
        if !(0.0..=1.0).contains(&value) {
            return Err(KbError::ValueOutOfRange(value));
        }
        Ok(Self {
            qa_type: qa_type.into(),
            value,
            timestamp,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentState {
    Ok,
    Error,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Component {
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Function {
    pub name: String,
}

/// A concrete variant realizing a function.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDesign {
    pub name: String,
    pub realizes: String,
    pub requires: Vec<String>,
    /// Expected quality per attribute, in declaration order.
    pub qa_estimates: IndexMap<String, f64>,
    pub utility: f64,
}

impl FunctionDesign {
    pub fn estimate(&self, qa: &str) -> Option<f64> {
        self.qa_estimates.get(qa).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    AtLeast,
    AtMost,
}

impl Comparator {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparator::AtLeast => value >= threshold,
            Comparator::AtMost => value <= threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::AtLeast => ">=",
            Comparator::AtMost => "<=",
        }
    }
}

/// Non-functional requirement on an objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Nfr {
    pub qa_type: String,
    pub comparator: Comparator,
    pub threshold: f64,
}

impl Nfr {
    pub fn satisfied_by(&self, value: f64) -> bool {
        self.comparator.holds(value, self.threshold)
    }
}

impl fmt::Display for Nfr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.qa_type, self.comparator.symbol(), self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub id: String,
    pub function: String,
    pub nfrs: Vec<Nfr>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveStatus {
    Ok,
    InError,
    Unresolvable,
}

impl fmt::Display for ObjectiveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObjectiveStatus::Ok => "ok",
            ObjectiveStatus::InError => "in_error",
            ObjectiveStatus::Unresolvable => "unresolvable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroundingStatus {
    Ok,
    InError,
}

/// Runtime binding of an objective to the design currently realizing it.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionGrounding {
    pub objective: String,
    pub design: String,
    pub since: f64,
}

/// The four kinds of negative fact. Groundings are identified by their
/// objective, since an objective has at most one grounding at a time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NegativeFact {
    ComponentError(String),
    DesignUnrealisable(String),
    GroundingInError(String),
    ObjectiveInError(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FactKind {
    ComponentError,
    DesignUnrealisable,
    GroundingInError,
    ObjectiveInError,
}

impl FactKind {
    pub fn predicate(self) -> &'static str {
        match self {
            FactKind::ComponentError => "component_error",
            FactKind::DesignUnrealisable => "design_unrealisable",
            FactKind::GroundingInError => "grounding_in_error",
            FactKind::ObjectiveInError => "objective_in_error",
        }
    }
}

impl NegativeFact {
    pub fn kind(&self) -> FactKind {
        match self {
            NegativeFact::ComponentError(_) => FactKind::ComponentError,
            NegativeFact::DesignUnrealisable(_) => FactKind::DesignUnrealisable,
            NegativeFact::GroundingInError(_) => FactKind::GroundingInError,
            NegativeFact::ObjectiveInError(_) => FactKind::ObjectiveInError,
        }
    }

    pub fn subject(&self) -> &str {
        match self {
            NegativeFact::ComponentError(s)
            | NegativeFact::DesignUnrealisable(s)
            | NegativeFact::GroundingInError(s)
            | NegativeFact::ObjectiveInError(s) => s,
        }
    }
}

impl fmt::Display for NegativeFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind().predicate(), self.subject())
    }
}

/// Query pattern: a fact kind and an optional subject (`None` is a wildcard).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactPattern {
    pub kind: FactKind,
    pub subject: Option<String>,
}

impl FactPattern {
    pub fn any(kind: FactKind) -> Self {
        Self { kind, subject: None }
    }

    pub fn exact(kind: FactKind, subject: impl Into<String>) -> Self {
        Self {
            kind,
            subject: Some(subject.into()),
        }
    }

    pub fn matches(&self, fact: &NegativeFact) -> bool {
        fact.kind() == self.kind && self.subject.as_deref().is_none_or(|s| s == fact.subject())
    }
}

/// Anything that can be asserted into or retracted from the knowledge base.
#[derive(Debug, Clone, PartialEq)]
pub enum Fact {
    Negative(NegativeFact),
    Measurement(QaValue),
}

impl From<NegativeFact> for Fact {
    fn from(f: NegativeFact) -> Self {
        Fact::Negative(f)
    }
}

impl From<QaValue> for Fact {
    fn from(v: QaValue) -> Self {
        Fact::Measurement(v)
    }
}

/// Closed-world runtime fact store.
///
/// Asserted facts come from monitors (and tests); derived facts are owned by
/// the reasoner and recomputed from the asserted ones on every inference run.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    model: Arc<ArchitectureModel>,
    asserted: BTreeSet<NegativeFact>,
    derived: BTreeSet<NegativeFact>,
    measurements: BTreeMap<String, QaReading>,
    groundings: BTreeMap<String, FunctionGrounding>,
    reported: BTreeSet<String>,
    unresolvable: BTreeSet<String>,
    /// (objective, qa type) -> estimate of a design that was measured to
    /// violate the objective's requirement on that qa type.
    violation_bounds: BTreeMap<(String, String), f64>,
    stale: bool,
}

impl KnowledgeBase {
    /// Builds a fresh, all-ok knowledge base with the given groundings.
    pub fn new<I, O, D>(model: Arc<ArchitectureModel>, initial_groundings: I) -> Result<Self, KbError>
    where
        I: IntoIterator<Item = (O, D)>,
        O: Into<String>,
        D: Into<String>,
    {
        let mut kb = Self {
            model,
            asserted: BTreeSet::new(),
            derived: BTreeSet::new(),
            measurements: BTreeMap::new(),
            groundings: BTreeMap::new(),
            reported: BTreeSet::new(),
            unresolvable: BTreeSet::new(),
            violation_bounds: BTreeMap::new(),
            stale: false,
        };
        for (objective, design) in initial_groundings {
            kb.ground(&objective.into(), &design.into(), 0.0)?;
        }
        kb.stale = false;
        Ok(kb)
    }

    pub fn model(&self) -> &ArchitectureModel {
        &self.model
    }

    pub fn model_arc(&self) -> &Arc<ArchitectureModel> {
        &self.model
    }

    /// Binds `objective` to `design`, replacing any previous grounding.
    pub fn ground(&mut self, objective: &str, design: &str, since: f64) -> Result<(), KbError> {
        let obj = self.model.objective(objective).ok_or_else(|| KbError::UnknownEntity {
            kind: "objective",
            name: objective.to_string(),
        })?;
        let d = self.model.design(design).ok_or_else(|| KbError::UnknownEntity {
            kind: "design",
            name: design.to_string(),
        })?;
        if d.realizes != obj.function {
            return Err(KbError::GroundingMismatch {
                objective: objective.to_string(),
                design: design.to_string(),
                realizes: d.realizes.clone(),
                function: obj.function.clone(),
            });
        }
        self.groundings.insert(
            objective.to_string(),
            FunctionGrounding {
                objective: objective.to_string(),
                design: design.to_string(),
                since,
            },
        );
        self.stale = true;
        Ok(())
    }

    fn check_entity(&self, fact: &NegativeFact) -> Result<(), KbError> {
        let m = &self.model;
        let (known, kind) = match fact {
            NegativeFact::ComponentError(c) => (m.component(c).is_some(), "component"),
            NegativeFact::DesignUnrealisable(d) => (m.design(d).is_some(), "design"),
            NegativeFact::GroundingInError(o) => (m.objective(o).is_some(), "grounding"),
            NegativeFact::ObjectiveInError(o) => (m.objective(o).is_some(), "objective"),
        };
        if known {
            Ok(())
        } else {
            Err(KbError::UnknownEntity {
                kind,
                name: fact.subject().to_string(),
            })
        }
    }

    /// Asserts a negative fact (idempotent) or stores a measurement.
    ///
    /// A measurement older than the stored one for the same type is ignored,
    /// so the stored timestamp is always the newest one seen.
    pub fn assert(&mut self, fact: impl Into<Fact>) -> Result<(), KbError> {
        match fact.into() {
            Fact::Negative(f) => {
                self.check_entity(&f)?;
                if let NegativeFact::ComponentError(c) = &f {
                    self.reported.insert(c.clone());
                }
                if self.asserted.insert(f) {
                    self.stale = true;
                }
                Ok(())
            }
            Fact::Measurement(v) => {
                if self.model.qa_type(&v.qa_type).is_none() {
                    return Err(KbError::UnknownEntity {
                        kind: "qa type",
                        name: v.qa_type,
                    });
                }
                if !(0.0..=1.0).contains(&v.value) {
                    return Err(KbError::ValueOutOfRange(v.value));
                }
                let newer = self
                    .measurements
                    .get(&v.qa_type)
                    .is_none_or(|old| v.timestamp >= old.timestamp);
                if newer {
                    self.measurements.insert(
                        v.qa_type,
                        QaReading {
                            value: v.value,
                            timestamp: v.timestamp,
                        },
                    );
                    self.stale = true;
                }
                Ok(())
            }
        }
    }

    /// Removes a fact from both the asserted and derived sets. Never fails.
    pub fn retract(&mut self, fact: &Fact) {
        match fact {
            Fact::Negative(f) => {
                let a = self.asserted.remove(f);
                let d = self.derived.remove(f);
                if a || d {
                    self.stale = true;
                }
            }
            Fact::Measurement(v) => {
                if self.measurements.remove(&v.qa_type).is_some() {
                    self.stale = true;
                }
            }
        }
    }

    /// Records that a monitor has seen `component` healthy. Any error fact
    /// against it is retracted.
    pub fn report_component_ok(&mut self, component: &str) -> Result<(), KbError> {
        if self.model.component(component).is_none() {
            return Err(KbError::UnknownEntity {
                kind: "component",
                name: component.to_string(),
            });
        }
        self.reported.insert(component.to_string());
        self.retract(&Fact::Negative(NegativeFact::ComponentError(component.to_string())));
        Ok(())
    }

    /// All facts, asserted or derived, matching `pattern`, ordered by subject.
    pub fn query(&self, pattern: &FactPattern) -> Vec<NegativeFact> {
        let mut out: Vec<NegativeFact> = self
            .asserted
            .union(&self.derived)
            .filter(|f| pattern.matches(f))
            .cloned()
            .collect();
        out.sort_by(|a, b| a.subject().cmp(b.subject()).then(a.cmp(b)));
        out.dedup();
        out
    }

    pub fn holds(&self, fact: &NegativeFact) -> bool {
        self.asserted.contains(fact) || self.derived.contains(fact)
    }

    pub fn asserted_facts(&self) -> &BTreeSet<NegativeFact> {
        &self.asserted
    }

    pub fn derived_facts(&self) -> &BTreeSet<NegativeFact> {
        &self.derived
    }

    pub(crate) fn replace_derived(&mut self, derived: BTreeSet<NegativeFact>) {
        self.derived = derived;
        self.stale = false;
    }

    pub fn is_stale(&self) -> bool {
        self.stale
    }

    pub fn measurement(&self, qa_type: &str) -> Option<QaReading> {
        self.measurements.get(qa_type).copied()
    }

    pub fn measurements(&self) -> &BTreeMap<String, QaReading> {
        &self.measurements
    }

    pub fn grounding(&self, objective: &str) -> Option<&FunctionGrounding> {
        self.groundings.get(objective)
    }

    pub fn groundings(&self) -> impl Iterator<Item = &FunctionGrounding> {
        self.groundings.values()
    }

    pub fn component_state(&self, component: &str) -> ComponentState {
        if self.holds(&NegativeFact::ComponentError(component.to_string())) {
            ComponentState::Error
        } else if self.reported.contains(component) {
            ComponentState::Ok
        } else {
            ComponentState::Unknown
        }
    }

    pub fn design_realisable(&self, design: &str) -> bool {
        !self.holds(&NegativeFact::DesignUnrealisable(design.to_string()))
    }

    pub fn objective_fulfilled(&self, objective: &str) -> bool {
        !self.holds(&NegativeFact::ObjectiveInError(objective.to_string()))
    }

    pub fn grounding_status(&self, objective: &str) -> GroundingStatus {
        if self.holds(&NegativeFact::GroundingInError(objective.to_string())) {
            GroundingStatus::InError
        } else {
            GroundingStatus::Ok
        }
    }

    pub fn mark_unresolvable(&mut self, objective: &str) {
        self.unresolvable.insert(objective.to_string());
    }

    pub fn clear_unresolvable(&mut self, objective: &str) {
        self.unresolvable.remove(objective);
    }

    pub fn is_marked_unresolvable(&self, objective: &str) -> bool {
        self.unresolvable.contains(objective)
    }

    /// Remembers that a design with estimate `estimate` on `qa_type` was
    /// observed violating `objective`'s requirement. Only the tightest bound
    /// per (objective, qa type) is kept.
    pub fn record_violation_bound(&mut self, objective: &str, qa_type: &str, estimate: f64) {
        let Some(polarity) = self.model.qa_type(qa_type).map(|q| q.polarity) else {
            return;
        };
        let key = (objective.to_string(), qa_type.to_string());
        match self.violation_bounds.get(&key) {
            Some(&old) if !polarity.strictly_better(estimate, old) => {}
            _ => {
                self.violation_bounds.insert(key, estimate);
            }
        }
    }

    pub fn violation_bound(&self, objective: &str, qa_type: &str) -> Option<f64> {
        self.violation_bounds
            .get(&(objective.to_string(), qa_type.to_string()))
            .copied()
    }

    /// Changes the NFR set of an objective at runtime.
    pub fn set_objective_nfrs(&mut self, objective: &str, nfrs: Vec<Nfr>) -> Result<(), KbError> {
        let model = Arc::make_mut(&mut self.model);
        let obj = model
            .objectives
            .iter_mut()
            .find(|o| o.id == objective)
            .ok_or_else(|| KbError::UnknownEntity {
                kind: "objective",
                name: objective.to_string(),
            })?;
        obj.nfrs = nfrs;
        self.violation_bounds.retain(|(o, _), _| o != objective);
        self.stale = true;
        Ok(())
    }
}
