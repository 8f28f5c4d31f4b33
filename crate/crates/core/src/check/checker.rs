//! Single-pass static checker.
//!
//! Items are processed top to bottom. Declarations extend the symbol tables
//! (and, for maps, the per-dataset registry); statements synthesize a type
//! for every expression bottom-up and compare it with any annotation. No
//! data file is ever opened.

use std::collections::BTreeMap;

use super::diag::{Code, Diagnostic};
use super::types::SemType;
use crate::axis::{AxisTag, DatasetTag};
use crate::lang::ast::*;
use crate::lang::Span;
use crate::registry::{Registry, RegistryError};

/// Registry edge payload used during checking: which declaration made it.
#[derive(Debug, Clone)]
pub struct MapSig {
    pub name: String,
    pub span: Span,
}

/// A lift the checker accepted, with the maps it goes through.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedLift {
    pub span: Span,
    pub from: String,
    pub to: String,
    /// Dataset whose registry holds the path; `None` for an identity lift.
    pub dataset: Option<String>,
    pub maps: Vec<String>,
}

/// Everything the checker learns about a program.
#[derive(Debug, Clone, Default)]
pub struct Analysis {
    pub diagnostics: Vec<Diagnostic>,
    pub lifts: Vec<ResolvedLift>,
}

impl Analysis {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_error)
    }
}

#[derive(Debug, Clone)]
struct Symbol {
    size: u64,
}

#[derive(Debug, Clone)]
struct Binding {
    /// `None` when the binding's own expression failed to check; uses of it
    /// are then silently untyped so one mistake yields one diagnostic.
    ty: Option<SemType>,
    span: Span,
    declared: bool,
    used: bool,
}

/// Where an annotation came from; selects the message template.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnotationSite {
    Assignment,
    Check,
}

/// Result of typing one expression. `Err(None)` means the expression
/// depends on a binding that already failed.
pub type Inferred = Result<SemType, Option<Diagnostic>>;

/// Checker environment: symbol tables, per-dataset registries and bindings.
#[derive(Debug, Default)]
pub struct CheckContext {
    axes: BTreeMap<String, Symbol>,
    datasets: BTreeMap<String, Symbol>,
    registries: BTreeMap<String, Registry<MapSig>>,
    bindings: BTreeMap<String, Binding>,
    diagnostics: Vec<Diagnostic>,
    lifts: Vec<ResolvedLift>,
}

/// Checks a whole program. An empty result (or one holding only warnings)
/// means the program is well typed.
pub fn check_program(program: &ModelProgram) -> Vec<Diagnostic> {
    analyze(program).diagnostics
}

/// [`check_program`] plus the resolution of every accepted lift.
pub fn analyze(program: &ModelProgram) -> Analysis {
    let mut ctx = CheckContext::new();
    for item in &program.items {
        match item {
            Item::Decl(d) => ctx.declare(d),
            Item::Stmt(s) => ctx.check_stmt(s),
        }
    }
    ctx.finish()
}

/// Only the registry-related findings of [`check_program`]: duplicate maps,
/// cycles and ambiguous lifts.
pub fn check_registry_decls(program: &ModelProgram) -> Vec<Diagnostic> {
    check_program(program)
        .into_iter()
        .filter(|d| matches!(d.code, Code::E203 | Code::E204 | Code::E205))
        .collect()
}

/// Compares an annotation with the type inferred for its expression.
pub fn check_annotation(
    declared: &SemType,
    inferred: &SemType,
    span: Span,
    site: AnnotationSite,
) -> Option<Diagnostic> {
    if declared == inferred {
        return None;
    }
    let message = match site {
        AnnotationSite::Assignment => format!(
            "Incompatible types in assignment (expression has type \"{inferred}\"; variable has type \"{declared}\")"
        ),
        AnnotationSite::Check => format!(
            "Incompatible types in check (expression has type \"{inferred}\"; expected type \"{declared}\")"
        ),
    };
    Some(Diagnostic::new(Code::E103, span, message))
}

/// Gather and lift number their arguments after the vector, which plays
/// the receiver: `gather(a, idx)` reads as `a.gather(idx)`.
fn receiver_error(span: Span, func: &str, found: &SemType, expected: &str) -> Diagnostic {
    Diagnostic::new(
        Code::E101,
        span,
        format!(
            "Receiver of \"{func}\" has incompatible type \"{found}\"; expected \"{expected}\""
        ),
    )
}

fn arg_error(
    code: Code,
    span: Span,
    n: usize,
    func: &str,
    found: &SemType,
    expected: &str,
) -> Diagnostic {
    Diagnostic::new(
        code,
        span,
        format!(
            "Argument {n} to \"{func}\" has incompatible type \"{found}\"; expected \"{expected}\""
        ),
    )
}

impl CheckContext {
    pub fn new() -> Self {
        Self::default()
    }

    fn emit(&mut self, d: Diagnostic) {
        self.diagnostics.push(d);
    }

    /// Sorted diagnostics, with unused-declaration warnings appended.
    pub fn finish(mut self) -> Analysis {
        let unused: Vec<_> = self
            .bindings
            .iter()
            .filter(|(_, b)| b.declared && !b.used)
            .map(|(name, b)| {
                Diagnostic::new(
                    Code::W002,
                    b.span,
                    format!("\"{name}\" is declared but never used"),
                )
            })
            .collect();
        self.diagnostics.extend(unused);
        self.diagnostics.sort_by_key(|d| (d.span.offset, d.code));
        Analysis {
            diagnostics: self.diagnostics,
            lifts: self.lifts,
        }
    }

    fn axis_size(&mut self, id: &Ident) -> Option<u64> {
        match self.axes.get(&id.name) {
            Some(s) => Some(s.size),
            None => {
                self.emit(Diagnostic::new(
                    Code::E105,
                    id.span,
                    format!("Axis \"{}\" is not defined", id.name),
                ));
                None
            }
        }
    }

    fn dataset_size(&mut self, id: &Ident) -> Option<u64> {
        match self.datasets.get(&id.name) {
            Some(s) => Some(s.size),
            None => {
                self.emit(Diagnostic::new(
                    Code::E105,
                    id.span,
                    format!("Dataset \"{}\" is not defined", id.name),
                ));
                None
            }
        }
    }

    fn bind(&mut self, name: &Ident, ty: Option<SemType>, declared: bool) {
        if self.bindings.contains_key(&name.name) {
            if declared {
                self.emit(Diagnostic::new(
                    Code::E109,
                    name.span,
                    format!("Name \"{}\" already defined", name.name),
                ));
                return;
            }
            self.emit(Diagnostic::new(
                Code::W001,
                name.span,
                format!("\"{}\" shadows an earlier binding", name.name),
            ));
        }
        self.bindings.insert(
            name.name.clone(),
            Binding {
                ty,
                span: name.span,
                declared,
                used: false,
            },
        );
    }

    fn level_name_taken(&mut self, name: &Ident) -> bool {
        if self.axes.contains_key(&name.name) || self.datasets.contains_key(&name.name) {
            self.emit(Diagnostic::new(
                Code::E109,
                name.span,
                format!("Name \"{}\" already defined", name.name),
            ));
            return true;
        }
        false
    }

    fn positive(&mut self, what: &str, name: &Ident, count: &Count) -> u64 {
        if count.value == 0 {
            self.emit(Diagnostic::new(
                Code::E110,
                count.span,
                format!(
                    "{what} \"{}\" must have at least one {}",
                    name.name,
                    if what == "Axis" {
                        "level"
                    } else {
                        "observation"
                    }
                ),
            ));
        }
        count.value
    }

    /// Processes one declaration.
    pub fn declare(&mut self, decl: &Decl) {
        match &decl.kind {
            DeclKind::Dataset { name, obs_count } => {
                let size = self.positive("Dataset", name, obs_count);
                if self.level_name_taken(name) {
                    return;
                }
                self.datasets.insert(name.name.clone(), Symbol { size });
                let tag = DatasetTag::new(name.name.as_str(), size.max(1) as usize)
                    .expect("size is at least one");
                self.registries
                    .insert(name.name.clone(), Registry::new(tag));
            }
            DeclKind::Axis { name, size } => {
                let size = self.positive("Axis", name, size);
                if self.level_name_taken(name) {
                    return;
                }
                self.axes.insert(name.name.clone(), Symbol { size });
            }
            DeclKind::Map {
                name,
                parent,
                child,
                dataset,
                source,
            } => {
                let p = self.axis_size(parent);
                let c = self.axis_size(child);
                let d = self.dataset_size(dataset);
                let (Some(p), Some(c), Some(_)) = (p, c, d) else {
                    self.bind(name, None, true);
                    return;
                };
                self.check_index_source(&name.name, source, c, p, &child.name, &parent.name);
                self.register(name, parent, child, dataset, p, c);
                let ty = SemType::Map(
                    parent.name.clone(),
                    child.name.clone(),
                    dataset.name.clone(),
                );
                self.bind(name, Some(ty), true);
            }
            DeclKind::Idx {
                name,
                axis,
                dataset,
                source,
            } => {
                let k = self.axis_size(axis);
                let d = self.dataset_size(dataset);
                let (Some(k), Some(d)) = (k, d) else {
                    self.bind(name, None, true);
                    return;
                };
                self.check_index_source(&name.name, source, d, k, &dataset.name, &axis.name);
                let ty = SemType::Idx(axis.name.clone(), dataset.name.clone());
                self.bind(name, Some(ty), true);
            }
            DeclKind::Vec { name, axis, source } => {
                let resolved = if let Some(s) = self.axes.get(&axis.name) {
                    Some((SemType::Vec(axis.name.clone()), s.size))
                } else if let Some(s) = self.datasets.get(&axis.name) {
                    Some((SemType::Obs(axis.name.clone()), s.size))
                } else {
                    self.emit(Diagnostic::new(
                        Code::E105,
                        axis.span,
                        format!("Axis or dataset \"{}\" is not defined", axis.name),
                    ));
                    None
                };
                let Some((ty, len)) = resolved else {
                    self.bind(name, None, true);
                    return;
                };
                if let Some(Source::Inline { values, span }) = source {
                    if len > 0 && values.len() as u64 != len {
                        self.emit(Diagnostic::new(
                            Code::E202,
                            *span,
                            format!(
                                "Data for \"{}\" has {} entries; \"{}\" has size {len}",
                                name.name,
                                values.len(),
                                axis.name
                            ),
                        ));
                    }
                }
                self.bind(name, Some(ty), true);
            }
        }
    }

    /// Validates inline index data: `len` entries, each an integer below
    /// `bound`. File sources are left to the loader.
    fn check_index_source(
        &mut self,
        name: &str,
        source: &Source,
        len: u64,
        bound: u64,
        len_owner: &str,
        bound_owner: &str,
    ) {
        let Source::Inline { values, span } = source else {
            return;
        };
        if len > 0 && values.len() as u64 != len {
            self.emit(Diagnostic::new(
                Code::E202,
                *span,
                format!(
                    "Data for \"{name}\" has {} entries; \"{len_owner}\" has size {len}",
                    values.len()
                ),
            ));
        }
        if bound == 0 {
            return;
        }
        let bad = values.iter().enumerate().find(|(_, v)| match v {
            Number::Int(i) => *i < 0 || *i as u64 >= bound,
            Number::Real(_) => true,
        });
        if let Some((pos, v)) = bad {
            let shown = match v {
                Number::Int(i) => i.to_string(),
                Number::Real(r) => format!("{r:?}"),
            };
            self.emit(Diagnostic::new(
                Code::E201,
                *span,
                format!(
                    "Entry {pos} of \"{name}\" is {shown}, not an index into \"{bound_owner}\" (size {bound})"
                ),
            ));
        }
    }

    fn register(
        &mut self,
        name: &Ident,
        parent: &Ident,
        child: &Ident,
        dataset: &Ident,
        p: u64,
        c: u64,
    ) {
        let Some(registry) = self.registries.get_mut(&dataset.name) else {
            return;
        };
        let (Ok(pt), Ok(ct)) = (
            AxisTag::new(parent.name.as_str(), p.max(1) as usize),
            AxisTag::new(child.name.as_str(), c.max(1) as usize),
        ) else {
            return;
        };
        let sig = MapSig {
            name: name.name.clone(),
            span: name.span,
        };
        let result = registry.insert(&pt, &ct, sig);
        let diag = match result {
            Ok(()) => return,
            Err(RegistryError::Duplicate { .. }) => {
                let first = registry
                    .lookup(&parent.name, &child.name)
                    .map(|m| m.name.clone())
                    .unwrap_or_default();
                Diagnostic::new(
                    Code::E203,
                    name.span,
                    format!(
                        "Map \"{}\" duplicates \"{first}\": \"{}\" -> \"{}\" is already registered in \"{}\"",
                        name.name, parent.name, child.name, dataset.name
                    ),
                )
            }
            Err(RegistryError::Cycle { cycle, .. }) => Diagnostic::new(
                Code::E204,
                name.span,
                format!(
                    "Map \"{}\" would create the cycle {} in \"{}\"",
                    name.name,
                    cycle.join(" -> "),
                    dataset.name
                ),
            ),
            Err(other) => Diagnostic::new(Code::E110, name.span, other.to_string()),
        };
        self.emit(diag);
    }

    /// Converts an annotation to a type, reporting unknown names.
    pub fn resolve_annotation(&mut self, ann: &TypeAnn) -> Option<SemType> {
        match &ann.kind {
            TypeAnnKind::Vec(a) => self.axis_size(a).map(|_| SemType::Vec(a.name.clone())),
            TypeAnnKind::Idx(a, d) => {
                let k = self.axis_size(a);
                let ds = self.dataset_size(d);
                (k.is_some() && ds.is_some()).then(|| SemType::Idx(a.name.clone(), d.name.clone()))
            }
            TypeAnnKind::Obs(d) => self.dataset_size(d).map(|_| SemType::Obs(d.name.clone())),
            TypeAnnKind::Scalar => Some(SemType::Scalar),
        }
    }

    /// Processes one statement.
    pub fn check_stmt(&mut self, stmt: &Stmt) {
        match &stmt.kind {
            StmtKind::Let { name, ann, value } => {
                let inferred = self.infer_expr(value);
                let declared = ann.as_ref().map(|a| self.resolve_annotation(a));
                let ty = match (inferred, declared) {
                    (Err(d), declared) => {
                        if let Some(d) = d {
                            self.emit(d);
                        }
                        declared.flatten()
                    }
                    (Ok(t), None) => Some(t),
                    (Ok(_), Some(None)) => None,
                    (Ok(t), Some(Some(decl))) => {
                        if let Some(d) =
                            check_annotation(&decl, &t, value.span, AnnotationSite::Assignment)
                        {
                            self.emit(d);
                        }
                        Some(decl)
                    }
                };
                self.bind(name, ty, false);
            }
            StmtKind::Check { expr, ann } => {
                let inferred = self.infer_expr(expr);
                let declared = self.resolve_annotation(ann);
                match (inferred, declared) {
                    (Err(Some(d)), _) => self.emit(d),
                    (Ok(t), Some(decl)) => {
                        if let Some(d) =
                            check_annotation(&decl, &t, expr.span, AnnotationSite::Check)
                        {
                            self.emit(d);
                        }
                    }
                    _ => {}
                }
            }
            StmtKind::Observe { data, mean, sigma } => self.check_observe(data, mean, sigma),
        }
    }

    fn check_observe(&mut self, data: &Ident, mean: &Expr, sigma: &Expr) {
        let data_ty = self.lookup(&data.name, data.span);
        let mean_ty = self.infer_expr(mean);
        let sigma_ty = self.infer_expr(sigma);
        let data_ty = match data_ty {
            Ok(t @ (SemType::Vec(_) | SemType::Obs(_))) => Some(t),
            Ok(other) => {
                self.emit(Diagnostic::new(
                    Code::E108,
                    data.span,
                    format!(
                        "Observed \"{}\" has type \"{other}\"; expected a \"Vec\" or \"Obs\" type",
                        data.name
                    ),
                ));
                None
            }
            Err(d) => {
                if let Some(d) = d {
                    self.emit(d);
                }
                None
            }
        };
        match (mean_ty, &data_ty) {
            (Err(Some(d)), _) => self.emit(d),
            (Ok(SemType::Scalar), _) | (Err(None), _) | (_, None) => {}
            (Ok(t), Some(expected)) if &t != expected => {
                self.emit(arg_error(
                    Code::E108,
                    mean.span,
                    1,
                    "normal",
                    &t,
                    &expected.to_string(),
                ));
            }
            _ => {}
        }
        match sigma_ty {
            Err(Some(d)) => self.emit(d),
            Ok(t) if t != SemType::Scalar => {
                self.emit(arg_error(Code::E108, sigma.span, 2, "normal", &t, "Scalar"));
            }
            _ => {}
        }
    }

    fn lookup(&mut self, name: &str, span: Span) -> Inferred {
        match self.bindings.get_mut(name) {
            Some(b) => {
                b.used = true;
                b.ty.clone().ok_or(None)
            }
            None => Err(Some(Diagnostic::new(
                Code::E105,
                span,
                format!("Name \"{name}\" is not defined"),
            ))),
        }
    }

    /// Synthesizes the type of `expr`.
    pub fn infer_expr(&mut self, expr: &Expr) -> Inferred {
        match &expr.kind {
            ExprKind::Number(_) => Ok(SemType::Scalar),
            ExprKind::Name(n) => self.lookup(n, expr.span),
            ExprKind::Gather(v, i) => {
                let tv = self.infer_expr(v)?;
                let ti = self.infer_expr(i)?;
                match (&tv, &ti) {
                    (SemType::Vec(k), SemType::Idx(ki, d)) if k == ki => {
                        Ok(SemType::Obs(d.clone()))
                    }
                    (SemType::Vec(k), _) => {
                        let d = match &ti {
                            SemType::Idx(_, d) => d.clone(),
                            _ => self.sole_dataset(),
                        };
                        Err(Some(arg_error(
                            Code::E101,
                            i.span,
                            1,
                            "gather",
                            &ti,
                            &format!("Idx[{k}, {d}]"),
                        )))
                    }
                    (_, SemType::Idx(k, _)) => Err(Some(receiver_error(
                        v.span,
                        "gather",
                        &tv,
                        &format!("Vec[{k}]"),
                    ))),
                    _ => Err(Some(receiver_error(v.span, "gather", &tv, "Vec[Any]"))),
                }
            }
            ExprKind::Lift(v, target) => {
                let tv = self.infer_expr(v)?;
                if !self.axes.contains_key(&target.name) {
                    return Err(Some(Diagnostic::new(
                        Code::E105,
                        target.span,
                        format!("Axis \"{}\" is not defined", target.name),
                    )));
                }
                let SemType::Vec(from) = &tv else {
                    return Err(Some(Diagnostic::new(
                        Code::E102,
                        v.span,
                        format!("Receiver of \"lift\" has incompatible type \"{tv}\"; expected \"Vec[Any]\""),
                    )));
                };
                self.infer_lift(from, target, expr.span)
            }
            ExprKind::Reindex(m, i) => {
                let tm = self.infer_expr(m)?;
                let ti = self.infer_expr(i)?;
                let SemType::Map(parent, child, dm) = &tm else {
                    let expected = match &ti {
                        SemType::Idx(l, d) => format!("Map[Any, {l}, {d}]"),
                        _ => "Map[Any, Any, Any]".to_string(),
                    };
                    return Err(Some(arg_error(
                        Code::E107,
                        m.span,
                        1,
                        "reindex",
                        &tm,
                        &expected,
                    )));
                };
                let expected = format!("Idx[{child}, {dm}]");
                match &ti {
                    SemType::Idx(l, d) if l == child && d == dm => {
                        Ok(SemType::Idx(parent.clone(), dm.clone()))
                    }
                    SemType::Idx(l, _) if l == child => Err(Some(arg_error(
                        Code::E106,
                        i.span,
                        2,
                        "reindex",
                        &ti,
                        &expected,
                    ))),
                    _ => Err(Some(arg_error(
                        Code::E107,
                        i.span,
                        2,
                        "reindex",
                        &ti,
                        &expected,
                    ))),
                }
            }
            ExprKind::BinOp(op, a, b) => {
                let ta = self.infer_expr(a)?;
                let tb = self.infer_expr(b)?;
                binop_type(*op, ta, tb, a.span, b.span)
            }
        }
    }

    fn sole_dataset(&self) -> String {
        if self.datasets.len() == 1 {
            self.datasets.keys().next().cloned().unwrap_or_default()
        } else {
            "Any".to_string()
        }
    }

    /// Types `lift(<Vec[from]>, target)`. The path is looked up in every
    /// dataset's registry and must exist in exactly one of them.
    fn infer_lift(&mut self, from: &str, target: &Ident, span: Span) -> Inferred {
        let to = target.name.as_str();
        let mut resolved = ResolvedLift {
            span,
            from: from.to_string(),
            to: to.to_string(),
            dataset: None,
            maps: Vec::new(),
        };
        if from == to {
            self.lifts.push(resolved);
            return Ok(SemType::Vec(to.to_string()));
        }
        let mut found = 0usize;
        let mut ambiguous = None;
        for (dataset, reg) in &self.registries {
            match reg.resolve_lift_path(from, to) {
                Ok(path) => {
                    found += 1;
                    resolved.dataset = Some(dataset.clone());
                    resolved.maps = path.steps().iter().map(|m| m.name.clone()).collect();
                }
                Err(RegistryError::AmbiguousPath { count, .. }) => {
                    ambiguous.get_or_insert((dataset.clone(), count));
                }
                Err(_) => {}
            }
        }
        if let Some((dataset, count)) = ambiguous {
            return Err(Some(Diagnostic::new(
                Code::E205,
                span,
                format!(
                    "Lift from \"{from}\" to \"{to}\" is ambiguous: {}{count} registered paths in \"{dataset}\"",
                    if count >= 2 { "at least " } else { "" }
                ),
            )));
        }
        match found {
            1 => {
                for m in &resolved.maps {
                    if let Some(b) = self.bindings.get_mut(m) {
                        b.used = true;
                    }
                }
                self.lifts.push(resolved);
                Ok(SemType::Vec(to.to_string()))
            }
            0 => {
                let mut targets: Vec<String> = self
                    .registries
                    .values()
                    .flat_map(|r| r.reachable_from(from))
                    .collect();
                targets.sort();
                targets.dedup();
                let message = if targets.is_empty() {
                    format!(
                        "Argument \"to\" to \"lift\" has incompatible type \"type[{to}]\"; \"Vec[{from}]\" has no registered lift targets"
                    )
                } else {
                    let expected: Vec<String> =
                        targets.iter().map(|t| format!("type[{t}]")).collect();
                    format!(
                        "Argument \"to\" to \"lift\" has incompatible type \"type[{to}]\"; expected \"{}\"",
                        expected.join(" | ")
                    )
                };
                Err(Some(Diagnostic::new(Code::E102, target.span, message)))
            }
            _ => Err(Some(Diagnostic::new(
                Code::E205,
                span,
                format!(
                    "Lift from \"{from}\" to \"{to}\" is ambiguous: registered in {found} datasets"
                ),
            ))),
        }
    }
}

fn binop_type(op: BinOp, ta: SemType, tb: SemType, sa: Span, sb: Span) -> Inferred {
    use SemType::*;
    if ta.is_arithmetic() && tb.is_arithmetic() {
        if ta == tb || tb == Scalar {
            return Ok(ta);
        }
        if ta == Scalar {
            return Ok(tb);
        }
    }
    let func = op.symbol();
    // The left operand is blamed unless only the right one is not arithmetic.
    let (n, found, expected, span) = if !ta.is_arithmetic() {
        let expected = if tb.is_arithmetic() {
            tb.to_string()
        } else {
            "Scalar".to_string()
        };
        (1, ta, expected, sa)
    } else if !tb.is_arithmetic() {
        (2, tb, ta.to_string(), sb)
    } else {
        (1, ta, tb.to_string(), sa)
    };
    let code = match (&found, expected.as_str()) {
        (Obs(_), e) if e.starts_with("Obs[") => Code::E106,
        _ => Code::E104,
    };
    Err(Some(arg_error(code, span, n, func, &found, &expected)))
}
