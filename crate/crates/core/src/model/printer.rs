use std::fmt::Write;

use super::ArchitectureModel;

/// Renders a model in canonical `.archmodel` form.
///
/// Declarations are grouped by kind and keep their order within each group.
/// Numbers use the shortest representation that parses back to the same
/// `f64`, so `parse_model(print_model(m)) == m`.
pub fn print_model(model: &ArchitectureModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "system {} {{", model.name);
    let section = |s: &mut String, lines: Vec<String>| {
        if lines.is_empty() {
            return;
        }
        if !s.ends_with("{\n") {
            s.push('\n');
        }
        for l in lines {
            s.push_str(&l);
        }
    };

    section(
        &mut s,
        model
            .qa_types
            .iter()
            .map(|q| format!("    qa_type {} {};\n", q.name, q.polarity.keyword()))
            .collect(),
    );
    section(
        &mut s,
        model.components.iter().map(|c| format!("    component {};\n", c.name)).collect(),
    );
    section(
        &mut s,
        model.functions.iter().map(|f| format!("    function {};\n", f.name)).collect(),
    );
    section(
        &mut s,
        model
            .designs
            .iter()
            .map(|d| {
                let mut b = format!("    design {} realizes {} {{\n", d.name, d.realizes);
                let _ = writeln!(b, "        requires {};", d.requires.join(", "));
                for (q, v) in &d.qa_estimates {
                    let _ = writeln!(b, "        qa {q} = {v};");
                }
                let _ = writeln!(b, "        utility = {};", d.utility);
                b.push_str("    }\n");
                b
            })
            .collect(),
    );
    section(
        &mut s,
        model
            .objectives
            .iter()
            .map(|o| {
                let mut b = format!("    objective {} : {} {{\n", o.id, o.function);
                for n in &o.nfrs {
                    let _ = writeln!(b, "        require {n};");
                }
                b.push_str("    }\n");
                b
            })
            .collect(),
    );
    s.push_str("}\n");
    s
}
