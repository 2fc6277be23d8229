use std::fmt::Write as _;
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use super::mission::navigation_model;
use crate::mapek::{ingest, Diagnostic};
use crate::model::{builtin, parse_model, ArchitectureModel};
use crate::reasoner::{infer, objective_status, InferenceReport};
use crate::tomasys::{KbError, KnowledgeBase};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SnapshotError {
    #[error("line {line}: {message}")]
    Record { line: usize, message: String },
    #[error("model: {0}")]
    Model(String),
    #[error(transparent)]
    Kb(#[from] KbError),
}

#[derive(Deserialize)]
struct Header {
    kind: String,
    name: Option<String>,
    source: Option<String>,
    objective: Option<String>,
    design: Option<String>,
}

/// A knowledge base rebuilt from a snapshot file.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub kb: KnowledgeBase,
    pub diagnostics: Vec<Diagnostic>,
}

fn named_model(name: &str) -> Result<Arc<ArchitectureModel>, SnapshotError> {
    match name {
        "pyramid" => parse_model(builtin::PYRAMID)
            .map(Arc::new)
            .map_err(|e| SnapshotError::Model(e[0].to_string())),
        "navigation" => Ok(navigation_model()),
        other => Err(SnapshotError::Model(format!("unknown built-in model `{other}` (pyramid, navigation)"))),
    }
}

/// Reads a snapshot: JSON lines in the diagnostics record format, preceded
/// by optional `model` and `grounding` records.
///
/// ```text
/// {"t": 0, "kind": "model", "name": "pyramid"}
/// {"t": 0, "kind": "grounding", "objective": "o_build", "design": "dual_arm"}
/// {"t": 5.0, "kind": "component_status", "name": "arm_right", "status": "error"}
/// ```
///
/// A `model` record takes either `name` (a built-in model) or `source`
/// (inline `.archmodel` text). Without one the pyramid model is used.
/// Objectives without a `grounding` record are grounded on their
/// highest-utility design.
pub fn load_snapshot(text: &str) -> Result<Snapshot, SnapshotError> {
    let mut model: Option<Arc<ArchitectureModel>> = None;
    let mut groundings: Vec<(String, String)> = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| SnapshotError::Record { line: line_no, message };
        let header: Header = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        match header.kind.as_str() {
            "model" => {
                if model.is_some() {
                    return Err(err("second model record".into()));
                }
                model = Some(match (header.name, header.source) {
                    (Some(n), None) => named_model(&n)?,
                    (None, Some(src)) => Arc::new(parse_model(&src).map_err(|e| SnapshotError::Model(e[0].to_string()))?),
                    _ => return Err(err("model record needs exactly one of `name` or `source`".into())),
                });
            }
            "grounding" => {
                let (Some(o), Some(d)) = (header.objective, header.design) else {
                    return Err(err("grounding record needs `objective` and `design`".into()));
                };
                groundings.push((o, d));
            }
            _ => diagnostics.push(Diagnostic::from_json_line(line).map_err(|e| err(e.to_string()))?),
        }
    }
    let model = match model {
        Some(m) => m,
        None => named_model("pyramid")?,
    };
    for o in &model.objectives {
        if !groundings.iter().any(|(id, _)| id == &o.id) {
            if let Some(d) = model
                .designs_for(&o.function)
                .min_by(|a, b| b.utility.total_cmp(&a.utility).then_with(|| a.name.cmp(&b.name)))
            {
                groundings.push((o.id.clone(), d.name.clone()));
            }
        }
    }
    let kb = KnowledgeBase::new(model, groundings)?;
    Ok(Snapshot { kb, diagnostics })
}

/// Loads a snapshot, ingests its diagnostics, runs the reasoner and returns
/// the inference trace followed by each objective's status.
pub fn reason_over_snapshot(text: &str) -> Result<(InferenceReport, String), SnapshotError> {
    let Snapshot { mut kb, diagnostics } = load_snapshot(text)?;
    let summary = ingest(&mut kb, diagnostics);
    let report = infer(&mut kb);
    let mut out = report.to_string();
    for (d, e) in &summary.skipped {
        let _ = writeln!(out, "skipped {}: {e}", d.to_json_line());
    }
    for o in &kb.model().objectives {
        let status = objective_status(&kb, &o.id)?;
        let design = kb.grounding(&o.id).map(|g| g.design.as_str()).unwrap_or("-");
        let _ = writeln!(out, "{} [{design}]: {status}", o.id);
    }
    Ok((report, out))
}
