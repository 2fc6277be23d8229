//! Forward-chaining evaluation of the adaptation rules.
//!
//! | rule | body | head |
//! |------|------|------|
//! | R1 | `component_error(c)`, `c ∈ requires(d)` | `design_unrealisable(d)` |
//! | R2 | grounding `g` on design `d`, `design_unrealisable(d)` | `grounding_in_error(g)` |
//! | R3 | grounding `g` of objective `o`, NFR `(q, cmp, θ)` of `o`, measurement `m(q)`, `¬(m cmp θ)` | `grounding_in_error(g)`, `objective_in_error(o)` |
//! | R4 | `grounding_in_error(g)`, `g` grounds `o` | `objective_in_error(o)` |
//!
//! Every rule is monotone in the negative facts, so the fixpoint is unique
//! and independent of the order in which rules are applied. Derived facts
//! are recomputed from scratch on each run; nothing is carried over from the
//! previous fixpoint.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::tomasys::{KbError, KnowledgeBase, NegativeFact, ObjectiveStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
}

impl RuleId {
    pub const ALL: [RuleId; 4] = [RuleId::R1, RuleId::R2, RuleId::R3, RuleId::R4];
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleFiring {
    pub rule: RuleId,
    pub bindings: BTreeMap<&'static str, String>,
    pub derived: NegativeFact,
}

impl fmt::Display for RuleFiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rule)?;
        for (k, v) in &self.bindings {
            write!(f, " {k}={v}")?;
        }
        write!(f, " ⇒ {}", self.derived)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InferenceReport {
    pub firings: Vec<RuleFiring>,
    /// Passes over the rule set, including the final pass that derived nothing.
    pub iterations: usize,
    pub derived: BTreeSet<NegativeFact>,
}

impl fmt::Display for InferenceReport {
    /// One line per firing: `RULE_ID var=value ... ⇒ fact`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for firing in &self.firings {
            writeln!(f, "{firing}")?;
        }
        Ok(())
    }
}

/// Runs the rules to fixpoint in the canonical order R1..R4 and stores the
/// derived facts in `kb`.
pub fn infer(kb: &mut KnowledgeBase) -> InferenceReport {
    infer_with_order(kb, &RuleId::ALL)
}

/// Like [`infer`] but applying the rules in `order` on every pass. Rules
/// missing from `order` are never applied.
pub fn infer_with_order(kb: &mut KnowledgeBase, order: &[RuleId]) -> InferenceReport {
    let mut facts: BTreeSet<NegativeFact> = kb.asserted_facts().clone();
    let mut report = InferenceReport::default();
    loop {
        report.iterations += 1;
        let mut changed = false;
        for &rule in order {
            for firing in fire(kb, rule, &facts) {
                if facts.insert(firing.derived.clone()) {
                    report.derived.insert(firing.derived.clone());
                    report.firings.push(firing);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    kb.replace_derived(report.derived.clone());
    report
}

fn binding(pairs: &[(&'static str, &str)]) -> BTreeMap<&'static str, String> {
    pairs.iter().map(|(k, v)| (*k, v.to_string())).collect()
}

/// All instantiations of `rule` whose body holds in `facts`.
fn fire(kb: &KnowledgeBase, rule: RuleId, facts: &BTreeSet<NegativeFact>) -> Vec<RuleFiring> {
    let model = kb.model();
    let mut out = Vec::new();
    match rule {
        RuleId::R1 => {
            for d in &model.designs {
                for c in &d.requires {
                    if facts.contains(&NegativeFact::ComponentError(c.clone())) {
                        out.push(RuleFiring {
                            rule,
                            bindings: binding(&[("c", c), ("d", &d.name)]),
                            derived: NegativeFact::DesignUnrealisable(d.name.clone()),
                        });
                    }
                }
            }
        }
        RuleId::R2 => {
            for g in kb.groundings() {
                if facts.contains(&NegativeFact::DesignUnrealisable(g.design.clone())) {
                    out.push(RuleFiring {
                        rule,
                        bindings: binding(&[("g", &g.objective), ("d", &g.design)]),
                        derived: NegativeFact::GroundingInError(g.objective.clone()),
                    });
                }
            }
        }
        RuleId::R3 => {
            for g in kb.groundings() {
                let Some(obj) = model.objective(&g.objective) else { continue };
                for nfr in &obj.nfrs {
                    let Some(m) = kb.measurement(&nfr.qa_type) else { continue };
                    if nfr.satisfied_by(m.value) {
                        continue;
                    }
                    let b = binding(&[("g", &g.objective), ("o", &obj.id), ("q", &nfr.qa_type)]);
                    out.push(RuleFiring {
                        rule,
                        bindings: b.clone(),
                        derived: NegativeFact::GroundingInError(g.objective.clone()),
                    });
                    out.push(RuleFiring {
                        rule,
                        bindings: b,
                        derived: NegativeFact::ObjectiveInError(obj.id.clone()),
                    });
                }
            }
        }
        RuleId::R4 => {
            for g in kb.groundings() {
                if facts.contains(&NegativeFact::GroundingInError(g.objective.clone())) {
                    out.push(RuleFiring {
                        rule,
                        bindings: binding(&[("g", &g.objective), ("o", &g.objective)]),
                        derived: NegativeFact::ObjectiveInError(g.objective.clone()),
                    });
                }
            }
        }
    }
    out
}

/// Status of an objective after the last inference run.
pub fn objective_status(kb: &KnowledgeBase, objective: &str) -> Result<ObjectiveStatus, KbError> {
    if kb.model().objective(objective).is_none() {
        return Err(KbError::UnknownEntity {
            kind: "objective",
            name: objective.to_string(),
        });
    }
    if kb.is_stale() {
        return Err(KbError::StaleKb);
    }
    Ok(if kb.objective_fulfilled(objective) {
        ObjectiveStatus::Ok
    } else if kb.is_marked_unresolvable(objective) {
        ObjectiveStatus::Unresolvable
    } else {
        ObjectiveStatus::InError
    })
}
