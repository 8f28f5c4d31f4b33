//! Static checking of model programs.

mod checker;
mod diag;
mod types;

pub use checker::{
    analyze, check_annotation, check_program, check_registry_decls, Analysis, AnnotationSite,
    CheckContext, Inferred, MapSig, ResolvedLift,
};
pub use diag::{summary_line, Code, Diagnostic, DiagnosticRecord, Severity};
pub use types::SemType;
