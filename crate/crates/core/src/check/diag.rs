use std::fmt;

use serde::Serialize;

use crate::lang::{Span, SyntaxError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Severity {
    #[serde(rename = "error")]
    Error,
    #[serde(rename = "warning")]
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// Diagnostic codes.
///
/// - `E0xx`: the source does not lex or parse.
/// - `E1xx`: type errors found by the checker.
/// - `E2xx`: data errors (bad entries or lengths) and registry conflicts.
/// - `Wxxx`: warnings; never affect the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    /// Illegal character, unterminated string or malformed number.
    E001,
    /// Unexpected token.
    E002,
    /// `gather` through an index over a different axis.
    E101,
    /// `lift` to an axis not reachable through registered maps.
    E102,
    /// Annotation disagrees with the inferred type.
    E103,
    /// Arithmetic on values that live on different axes.
    E104,
    /// Unknown identifier, axis or dataset.
    E105,
    /// Values from two different datasets combined.
    E106,
    /// `reindex` with a map whose child axis is not the index's axis.
    E107,
    /// `observe` whose mean or sigma does not fit the observed data.
    E108,
    /// Name declared twice.
    E109,
    /// Empty axis or dataset.
    E110,
    /// Index or map entry outside its parent axis.
    E201,
    /// Data length differs from the declared size.
    E202,
    /// Second map between the same pair of axes.
    E203,
    /// Map that would close a cycle.
    E204,
    /// More than one registered lift path.
    E205,
    /// Evaluation needs data or a map that is not there.
    E206,
    /// Non-positive sigma or non-finite value at evaluation time.
    E207,
    /// Unreadable data file.
    E208,
    /// Binding shadows an earlier one.
    W001,
    /// Declaration never used.
    W002,
}

impl Code {
    pub fn severity(self) -> Severity {
        match self {
            Code::W001 | Code::W002 => Severity::Warning,
            _ => Severity::Error,
        }
    }

    pub fn as_str(self) -> &'static str {
        use Code::*;
        match self {
            E001 => "E001",
            E002 => "E002",
            E101 => "E101",
            E102 => "E102",
            E103 => "E103",
            E104 => "E104",
            E105 => "E105",
            E106 => "E106",
            E107 => "E107",
            E108 => "E108",
            E109 => "E109",
            E110 => "E110",
            E201 => "E201",
            E202 => "E202",
            E203 => "E203",
            E204 => "E204",
            E205 => "E205",
            E206 => "E206",
            E207 => "E207",
            E208 => "E208",
            W001 => "W001",
            W002 => "W002",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Code {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: Code,
    pub severity: Severity,
    pub span: Span,
    pub message: String,
}

/// Flat form of a [`Diagnostic`] for machine-readable output.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticRecord<'a> {
    pub code: Code,
    pub severity: Severity,
    pub file: &'a str,
    pub line: u32,
    pub col: u32,
    pub message: &'a str,
}

impl Diagnostic {
    pub fn new(code: Code, span: Span, message: impl Into<String>) -> Self {
        Self {
            code,
            severity: code.severity(),
            span,
            message: message.into(),
        }
    }

    /// E001 for lexical errors, E002 for parse errors.
    pub fn from_syntax(e: &SyntaxError) -> Self {
        let code = match e {
            SyntaxError::Lex(_) => Code::E001,
            SyntaxError::Parse(_) => Code::E002,
        };
        Self::new(code, e.span(), e.to_string())
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `<file>:<line>:<col>: error[E101]: <message>`
    pub fn render(&self, file: &str, color: bool) -> String {
        let label = format!("{}[{}]", self.severity, self.code);
        let label = if color {
            let c = match self.severity {
                Severity::Error => "1;31",
                Severity::Warning => "1;33",
            };
            format!("\x1b[{c}m{label}\x1b[0m")
        } else {
            label
        };
        format!(
            "{file}:{}:{}: {label}: {}",
            self.span.line, self.span.col, self.message
        )
    }

    pub fn record<'a>(&'a self, file: &'a str) -> DiagnosticRecord<'a> {
        DiagnosticRecord {
            code: self.code,
            severity: self.severity,
            file,
            line: self.span.line,
            col: self.span.col,
            message: &self.message,
        }
    }
}

/// Final summary line, mirroring the usual type-checker output.
pub fn summary_line(diagnostics: &[Diagnostic]) -> String {
    match diagnostics.iter().filter(|d| d.is_error()).count() {
        0 => "Success: no issues found in 1 source file".to_string(),
        1 => "Found 1 error in 1 file (checked 1 source file)".to_string(),
        n => format!("Found {n} errors in 1 file (checked 1 source file)"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_plain_and_colored() {
        let d = Diagnostic::new(
            Code::E101,
            Span {
                offset: 0,
                len: 3,
                line: 4,
                col: 9,
            },
            "bad",
        );
        assert_eq!(d.render("m.geist", false), "m.geist:4:9: error[E101]: bad");
        assert_eq!(
            d.render("m.geist", true),
            "m.geist:4:9: \x1b[1;31merror[E101]\x1b[0m: bad"
        );
    }

    #[test]
    fn warnings_do_not_count() {
        let w = Diagnostic::new(Code::W002, Span::default(), "unused");
        assert!(!w.is_error());
        assert_eq!(
            summary_line(&[w]),
            "Success: no issues found in 1 source file"
        );
    }
}
