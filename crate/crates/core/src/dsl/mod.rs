// SPDX-License-Identifier: Apache-2.0

//! The `.cva` system description language.
//!
//! ```text
//! system banking {
//!   alphabet {login, logout, transfer}
//!   sync {login, logout, transfer}
//!   mutex {}
//!   party j { init q; state q { on {login} -> q; } }
//!   party bank { init q; state q { on {login} -> q; } }
//!   contract c { init c0; state c0 { clauses { F<j>(transfer) } on contains(login) -> c0; } }
//! }
//! ```
//!
//! Party labels are exact action sets. Contract arms are guarded, tried in
//! order, and a state without a matching arm stays where it is.

pub mod ast;
mod lexer;
mod lower;
mod parser;
mod pretty;

use std::fmt;

use serde::Serialize;

pub use lower::{load, LoadOptions, Loaded, System};
pub use parser::parse;
pub use pretty::pretty;

/// Source position, 1-based. Positions never affect equality.
#[derive(Clone, Copy, Debug, Default, Eq, Serialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Span,
    pub code: &'static str,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: &'static str, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            span,
            code,
            message: message.into(),
        }
    }

    pub fn warning(code: &'static str, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            span,
            code,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}: {sev}[{}]: {}",
            self.span.line, self.span.col, self.code, self.message
        )
    }
}
