//! Design-time architecture models and the `.archmodel` text format.
//!
//! ```text
//! system NAME {
//!     qa_type ID (higher_better|lower_better);
//!     component ID;
//!     function ID;
//!     design ID realizes ID { requires ID, ...; qa ID = NUMBER; utility = NUMBER; }
//!     objective ID : ID { require ID (>=|<=) NUMBER; }
//! }
//! ```
//!
//! `//` starts a line comment. Identifiers may contain `.` after the first
//! character so that generated design names such as `f_nav_v0.3_a3.6_r0.8`
//! are plain identifiers.

pub mod builtin;
mod lexer;
mod navgen;
mod parser;
mod printer;
mod validate;

use std::fmt;

use crate::tomasys::{Component, Function, FunctionDesign, Objective, QaType};

pub use navgen::{
    design_name, generate_nav_model, nav_estimates, parse_design_name, NavEstimates, NavParameterSpace, ENERGY_THRESHOLD,
    ESTIMATE_CONTROLLER_HZ, NAV_FUNCTION, NAV_OBJECTIVE, NAV_STACK, SAFETY_THRESHOLD,
};
pub use parser::parse_model;
pub use printer::print_model;
pub use validate::{validate, validate_source};

#[derive(Debug, Clone, PartialEq)]
pub struct ArchitectureModel {
    pub name: String,
    pub qa_types: Vec<QaType>,
    pub components: Vec<Component>,
    pub functions: Vec<Function>,
    pub designs: Vec<FunctionDesign>,
    pub objectives: Vec<Objective>,
}

impl ArchitectureModel {
    pub fn qa_type(&self, name: &str) -> Option<&QaType> {
        self.qa_types.iter().find(|q| q.name == name)
    }

    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn design(&self, name: &str) -> Option<&FunctionDesign> {
        self.designs.iter().find(|d| d.name == name)
    }

    pub fn objective(&self, id: &str) -> Option<&Objective> {
        self.objectives.iter().find(|o| o.id == id)
    }

    /// Designs realizing `function`, in declaration order.
    pub fn designs_for<'a>(&'a self, function: &'a str) -> impl Iterator<Item = &'a FunctionDesign> + 'a {
        self.designs.iter().filter(move |d| d.realizes == function)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

/// A positioned parser or validator message. Line and column are 1-based;
/// both are 0 when the model did not come from source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub line: u32,
    pub column: u32,
    pub message: String,
}

impl ParseDiagnostic {
    pub(crate) fn error(pos: Pos, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }

    pub(crate) fn warning(pos: Pos, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{} {} {}", self.line, self.column, sev, self.message)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: u32,
    pub column: u32,
}
