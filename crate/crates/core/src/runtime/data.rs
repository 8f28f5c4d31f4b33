//! Data sources for `from "file"` declarations.
//!
//! Data files are single-column CSV with a one-line header naming the
//! symbol:
//!
//! ```text
//! county_idx
//! 0
//! 0
//! 1
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::check::{Code, Diagnostic};
use crate::lang::ast::Source;
use crate::lang::Span;

/// Resolves the path of a `from` clause to file contents.
pub trait DataSource {
    fn read(&self, path: &str) -> Result<String, String>;
}

/// Reads files relative to a base directory, normally the directory of the
/// `.geist` file.
#[derive(Debug, Clone)]
pub struct DirSource {
    base: PathBuf,
}

impl DirSource {
    pub fn new(base: impl Into<PathBuf>) -> Self {
        Self { base: base.into() }
    }

    /// Source for the program stored at `program_path`.
    pub fn for_program(program_path: &Path) -> Self {
        let base = program_path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        Self { base }
    }
}

impl DataSource for DirSource {
    fn read(&self, path: &str) -> Result<String, String> {
        std::fs::read_to_string(self.base.join(path)).map_err(|e| e.to_string())
    }
}

/// In-memory files keyed by path.
#[derive(Debug, Clone, Default)]
pub struct MemorySource {
    files: BTreeMap<String, String>,
}

impl MemorySource {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, path: impl Into<String>, contents: impl Into<String>) {
        self.files.insert(path.into(), contents.into());
    }
}

impl DataSource for MemorySource {
    fn read(&self, path: &str) -> Result<String, String> {
        self.files
            .get(path)
            .cloned()
            .ok_or_else(|| "no such file".to_string())
    }
}

/// Renders a single-column CSV file.
pub fn write_column<T: ToString>(header: &str, values: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([header]).expect("writing to memory");
    for v in values {
        w.write_record([v.to_string()]).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is UTF-8")
}

/// Numbers of one source, with a label for messages: the quoted file path
/// or `inline data`.
#[derive(Debug, Clone)]
pub struct Column {
    pub label: String,
    pub values: Vec<f64>,
    pub span: Span,
}

/// Reads the numbers of `source`.
pub fn load_column(source: &Source, data: &dyn DataSource) -> Result<Column, Diagnostic> {
    match source {
        Source::Inline { values, span } => Ok(Column {
            label: "inline data".to_string(),
            values: values.iter().map(|n| n.as_f64()).collect(),
            span: *span,
        }),
        Source::File { path, span } => {
            let label = format!("\"{path}\"");
            let unreadable = |why: String| {
                Diagnostic::new(Code::E208, *span, format!("Cannot read {label}: {why}"))
            };
            let text = data.read(path).map_err(unreadable)?;
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(true)
                .trim(csv::Trim::All)
                .from_reader(text.as_bytes());
            let columns = reader
                .headers()
                .map_err(|e| unreadable(e.to_string()))?
                .len();
            if columns != 1 {
                return Err(unreadable(format!("expected one column, found {columns}")));
            }
            let mut values = Vec::new();
            for (pos, record) in reader.records().enumerate() {
                let record = record.map_err(|e| unreadable(e.to_string()))?;
                let field = record.get(0).unwrap_or("");
                let v: f64 = field
                    .parse()
                    .map_err(|_| unreadable(format!("entry {pos} is not a number: {field:?}")))?;
                values.push(v);
            }
            Ok(Column {
                label,
                values,
                span: *span,
            })
        }
    }
}

impl Column {
    /// Reports a length other than `expected`.
    pub fn expect_len(&self, expected: usize, owner: &str) -> Result<(), Diagnostic> {
        if self.values.len() == expected {
            return Ok(());
        }
        Err(Diagnostic::new(
            Code::E202,
            self.span,
            format!(
                "{} has {} entries; \"{owner}\" has size {expected}",
                self.label,
                self.values.len()
            ),
        ))
    }

    /// Converts to indices, rejecting anything that is not a non-negative
    /// integer below `bound` (when given).
    pub fn indices(&self, bound: Option<(usize, &str)>) -> Result<Vec<usize>, Diagnostic> {
        let mut out = Vec::with_capacity(self.values.len());
        for (pos, &v) in self.values.iter().enumerate() {
            let whole = v.fract() == 0.0 && v >= 0.0 && v < usize::MAX as f64;
            let inside = match bound {
                Some((b, _)) => whole && (v as usize) < b,
                None => whole,
            };
            if !inside {
                let what = match bound {
                    Some((b, owner)) => format!("not an index into \"{owner}\" (size {b})"),
                    None => "not a non-negative integer".to_string(),
                };
                return Err(Diagnostic::new(
                    Code::E201,
                    self.span,
                    format!("{}: entry {pos} is {v}, {what}", self.label),
                ));
            }
            out.push(v as usize);
        }
        Ok(out)
    }

    /// Rejects NaN and infinities.
    pub fn finite(&self) -> Result<(), Diagnostic> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(pos) => Err(Diagnostic::new(
                Code::E207,
                self.span,
                format!("{}: entry {pos} is not finite", self.label),
            )),
        }
    }
}
