use std::collections::HashSet;

use super::parser::{parse_unchecked, SourceMap};
use super::{ArchitectureModel, ParseDiagnostic, Pos};

/// Checks every model invariant. An empty result means the model is valid
/// and no objective is statically unsatisfiable.
pub fn validate(model: &ArchitectureModel) -> Vec<ParseDiagnostic> {
    validate_with_source(model, None)
}

/// Parses `source` and validates it, keeping warnings. Syntax errors are
/// returned as the only diagnostic.
pub fn validate_source(source: &str) -> Vec<ParseDiagnostic> {
    match parse_unchecked(source) {
        Ok((model, map)) => validate_with_source(&model, Some(&map)),
        Err(d) => vec![d],
    }
}

fn unit_range(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

pub(crate) fn validate_with_source(model: &ArchitectureModel, map: Option<&SourceMap>) -> Vec<ParseDiagnostic> {
    let mut out = Vec::new();
    let at = |f: &dyn Fn(&SourceMap) -> Option<Pos>| map.and_then(f).unwrap_or_default();

    let dupes = |kind: &str, names: Vec<&str>, pos: &dyn Fn(usize) -> Pos, out: &mut Vec<ParseDiagnostic>| {
        let mut seen = HashSet::new();
        for (i, n) in names.into_iter().enumerate() {
            if !seen.insert(n) {
                out.push(ParseDiagnostic::error(pos(i), format!("duplicate {kind} `{n}`")));
            }
        }
    };
    dupes(
        "qa_type",
        model.qa_types.iter().map(|q| q.name.as_str()).collect(),
        &|i| at(&|m| m.qa_types.get(i).copied()),
        &mut out,
    );
    dupes(
        "component",
        model.components.iter().map(|c| c.name.as_str()).collect(),
        &|i| at(&|m| m.components.get(i).copied()),
        &mut out,
    );
    dupes(
        "function",
        model.functions.iter().map(|f| f.name.as_str()).collect(),
        &|i| at(&|m| m.functions.get(i).copied()),
        &mut out,
    );
    dupes(
        "design",
        model.designs.iter().map(|d| d.name.as_str()).collect(),
        &|i| at(&|m| m.designs.get(i).map(|d| d.name)),
        &mut out,
    );
    dupes(
        "objective",
        model.objectives.iter().map(|o| o.id.as_str()).collect(),
        &|i| at(&|m| m.objectives.get(i).map(|o| o.id)),
        &mut out,
    );

    for (i, d) in model.designs.iter().enumerate() {
        let dp = map.and_then(|m| m.designs.get(i));
        if model.function(&d.realizes).is_none() {
            out.push(ParseDiagnostic::error(
                dp.map(|p| p.realizes).unwrap_or_default(),
                format!("design `{}` realizes undeclared function `{}`", d.name, d.realizes),
            ));
        }
        if d.requires.is_empty() {
            out.push(ParseDiagnostic::error(
                dp.map(|p| p.name).unwrap_or_default(),
                format!("design `{}` requires no component", d.name),
            ));
        }
        for (j, c) in d.requires.iter().enumerate() {
            if model.component(c).is_none() {
                out.push(ParseDiagnostic::error(
                    dp.and_then(|p| p.requires.get(j).copied()).unwrap_or_default(),
                    format!("design `{}` requires undeclared component `{c}`", d.name),
                ));
            }
        }
        for (j, (q, v)) in d.qa_estimates.iter().enumerate() {
            let pos = dp.and_then(|p| p.qa.get(j).copied()).unwrap_or_default();
            if model.qa_type(q).is_none() {
                out.push(ParseDiagnostic::error(pos, format!("design `{}` estimates undeclared qa_type `{q}`", d.name)));
            }
            if !unit_range(*v) {
                out.push(ParseDiagnostic::error(
                    pos,
                    format!("estimate {v} for `{q}` in design `{}` is outside [0, 1]", d.name),
                ));
            }
        }
        if !unit_range(d.utility) {
            out.push(ParseDiagnostic::error(
                dp.map(|p| p.utility).unwrap_or_default(),
                format!("utility {} of design `{}` is outside [0, 1]", d.utility, d.name),
            ));
        }
    }

    for (i, o) in model.objectives.iter().enumerate() {
        let op = map.and_then(|m| m.objectives.get(i));
        let fpos = op.map(|p| p.function).unwrap_or_default();
        if model.function(&o.function).is_none() {
            out.push(ParseDiagnostic::error(
                fpos,
                format!("objective `{}` targets undeclared function `{}`", o.id, o.function),
            ));
            continue;
        }
        let designs: Vec<_> = model.designs_for(&o.function).collect();
        if designs.is_empty() {
            out.push(ParseDiagnostic::error(
                fpos,
                format!("no design realizes function `{}` required by objective `{}`", o.function, o.id),
            ));
        }
        let mut nfrs_ok = true;
        for (j, nfr) in o.nfrs.iter().enumerate() {
            let pos = op.and_then(|p| p.nfrs.get(j).copied()).unwrap_or_default();
            let Some(qa) = model.qa_type(&nfr.qa_type) else {
                out.push(ParseDiagnostic::error(
                    pos,
                    format!("objective `{}` requires undeclared qa_type `{}`", o.id, nfr.qa_type),
                ));
                nfrs_ok = false;
                continue;
            };
            if qa.polarity.comparator() != nfr.comparator {
                out.push(ParseDiagnostic::error(
                    pos,
                    format!(
                        "`{}` is {}, so its requirement must use `{}`",
                        qa.name,
                        qa.polarity.keyword(),
                        qa.polarity.comparator().symbol()
                    ),
                ));
                nfrs_ok = false;
            }
            if !unit_range(nfr.threshold) {
                out.push(ParseDiagnostic::error(
                    pos,
                    format!("threshold {} on `{}` is outside [0, 1]", nfr.threshold, nfr.qa_type),
                ));
                nfrs_ok = false;
            }
            for d in &designs {
                if d.estimate(&nfr.qa_type).is_none() {
                    let dpos = model
                        .designs
                        .iter()
                        .position(|x| x.name == d.name)
                        .and_then(|k| map.and_then(|m| m.designs.get(k)))
                        .map(|p| p.name)
                        .unwrap_or_default();
                    out.push(ParseDiagnostic::error(
                        dpos,
                        format!(
                            "design `{}` has no `{}` estimate, required by objective `{}`",
                            d.name, nfr.qa_type, o.id
                        ),
                    ));
                    nfrs_ok = false;
                }
            }
        }
        if !nfrs_ok || designs.is_empty() {
            continue;
        }
        let opos = op.map(|p| p.id).unwrap_or_default();
        let mut single_blocked = false;
        for (j, nfr) in o.nfrs.iter().enumerate() {
            let best_ok = designs
                .iter()
                .any(|d| d.estimate(&nfr.qa_type).is_some_and(|v| nfr.satisfied_by(v)));
            if !best_ok {
                single_blocked = true;
                out.push(ParseDiagnostic::warning(
                    op.and_then(|p| p.nfrs.get(j).copied()).unwrap_or_default(),
                    format!(
                        "statically unsatisfiable NFR: no design of `{}` meets `{nfr}` for objective `{}`",
                        o.function, o.id
                    ),
                ));
            }
        }
        if !single_blocked {
            let jointly = designs.iter().any(|d| {
                o.nfrs
                    .iter()
                    .all(|n| d.estimate(&n.qa_type).is_some_and(|v| n.satisfied_by(v)))
            });
            if !jointly {
                out.push(ParseDiagnostic::warning(
                    opos,
                    format!(
                        "statically unsatisfiable NFR: no single design of `{}` meets all requirements of objective `{}`",
                        o.function, o.id
                    ),
                ));
            }
        }
    }

    out.sort_by_key(|d| (d.line, d.column));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin, generate_nav_model, NavParameterSpace, Severity};

    #[test]
    fn generated_navigation_model_is_clean() {
        assert!(validate(&generate_nav_model(&NavParameterSpace::default())).is_empty());
    }

    #[test]
    fn shipped_models_are_clean() {
        assert!(validate_source(builtin::PYRAMID).is_empty());
        assert!(validate_source(builtin::NAVIGATION).is_empty());
    }

    #[test]
    fn unreachable_threshold_warns() {
        let src = builtin::NAVIGATION.replace("require energy <= 0.7;", "require energy <= 0.3;");
        let diags = validate_source(&src);
        assert_eq!(diags.len(), 1, "{diags:?}");
        assert_eq!(diags[0].severity, Severity::Warning);
        assert!(diags[0].message.starts_with("statically unsatisfiable NFR"));
        // warnings do not fail parsing
        assert!(crate::model::parse_model(&src).is_ok());
    }

    #[test]
    fn jointly_unsatisfiable_warns_once() {
        let src = "system j {
    qa_type a higher_better;
    qa_type b higher_better;
    component c;
    function f;
    design d1 realizes f { requires c; qa a = 0.9; qa b = 0.1; utility = 0.5; }
    design d2 realizes f { requires c; qa a = 0.1; qa b = 0.9; utility = 0.5; }
    objective o : f { require a >= 0.5; require b >= 0.5; }
}";
        let diags = validate_source(src);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("no single design"));
        assert_eq!(diags[0].line, 8);
    }

    #[test]
    fn duplicate_design_names() {
        let src = "system dup {
    component c;
    function f;
    design d realizes f { requires c; utility = 0.5; }
    design d realizes f { requires c; utility = 0.6; }
}";
        let diags = validate_source(src);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].is_error());
        assert_eq!((diags[0].line, diags[0].column), (5, 12));
        assert!(diags[0].message.contains("duplicate design `d`"));
    }

    #[test]
    fn missing_estimate_for_nfr() {
        let src = "system m {
    qa_type safety higher_better;
    component c;
    function f;
    design d realizes f { requires c; utility = 0.5; }
    objective o : f { require safety >= 0.4; }
}";
        let diags = validate_source(src);
        assert!(diags.iter().any(|d| d.is_error() && d.message.contains("no `safety` estimate")));
    }

    #[test]
    fn objective_without_designs() {
        let src = "system m {
    function f;
    objective o : f { }
}";
        let diags = validate_source(src);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("no design realizes"));
    }
}
