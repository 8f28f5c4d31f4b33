//! Syntax tree for model programs.
//!
//! Every node carries the [`Span`] it was parsed from. Structural
//! comparisons that should ignore positions go through
//! [`ModelProgram::without_spans`].

use super::span::Span;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelProgram {
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Decl(Decl),
    Stmt(Stmt),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Count {
    pub value: u64,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decl {
    pub kind: DeclKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DeclKind {
    Dataset {
        name: Ident,
        obs_count: Count,
    },
    Axis {
        name: Ident,
        size: Count,
    },
    Map {
        name: Ident,
        parent: Ident,
        child: Ident,
        dataset: Ident,
        source: Source,
    },
    Idx {
        name: Ident,
        axis: Ident,
        dataset: Ident,
        source: Source,
    },
    /// `axis` may name an axis (a parameter vector) or a dataset (an
    /// observation-level array).
    Vec {
        name: Ident,
        axis: Ident,
        source: Option<Source>,
    },
}

impl DeclKind {
    /// The value name this declaration binds, if any.
    pub fn bound_name(&self) -> &Ident {
        match self {
            DeclKind::Dataset { name, .. }
            | DeclKind::Axis { name, .. }
            | DeclKind::Map { name, .. }
            | DeclKind::Idx { name, .. }
            | DeclKind::Vec { name, .. } => name,
        }
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            DeclKind::Dataset { .. } => "dataset",
            DeclKind::Axis { .. } => "axis",
            DeclKind::Map { .. } => "map",
            DeclKind::Idx { .. } => "idx",
            DeclKind::Vec { .. } => "vec",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Number {
    Int(i64),
    Real(f64),
}

impl Number {
    pub fn as_f64(self) -> f64 {
        match self {
            Number::Int(v) => v as f64,
            Number::Real(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Inline { values: Vec<Number>, span: Span },
    File { path: String, span: Span },
}

impl Source {
    pub fn span(&self) -> Span {
        match self {
            Source::Inline { span, .. } | Source::File { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Let {
        name: Ident,
        ann: Option<TypeAnn>,
        value: Expr,
    },
    Check {
        expr: Expr,
        ann: TypeAnn,
    },
    Observe {
        data: Ident,
        mean: Expr,
        sigma: Expr,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeAnn {
    pub kind: TypeAnnKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TypeAnnKind {
    Vec(Ident),
    Idx(Ident, Ident),
    Obs(Ident),
    Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Mul,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Mul => "*",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Number(f64),
    Name(String),
    Gather(Box<Expr>, Box<Expr>),
    Lift(Box<Expr>, Ident),
    Reindex(Box<Expr>, Box<Expr>),
    BinOp(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Calls `f` on this node and every descendant, parents first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Number(_) | ExprKind::Name(_) => {}
            ExprKind::Lift(e, _) => e.walk(f),
            ExprKind::Gather(a, b) | ExprKind::Reindex(a, b) | ExprKind::BinOp(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Expr)) {
        f(self);
        match &mut self.kind {
            ExprKind::Number(_) | ExprKind::Name(_) => {}
            ExprKind::Lift(e, _) => e.walk_mut(f),
            ExprKind::Gather(a, b) | ExprKind::Reindex(a, b) | ExprKind::BinOp(_, a, b) => {
                a.walk_mut(f);
                b.walk_mut(f);
            }
        }
    }
}

impl ModelProgram {
    pub fn decls(&self) -> impl Iterator<Item = &Decl> {
        self.items.iter().filter_map(|i| match i {
            Item::Decl(d) => Some(d),
            Item::Stmt(_) => None,
        })
    }

    pub fn stmts(&self) -> impl Iterator<Item = &Stmt> {
        self.items.iter().filter_map(|i| match i {
            Item::Stmt(s) => Some(s),
            Item::Decl(_) => None,
        })
    }

    /// Every expression root in the program, in source order.
    pub fn exprs(&self) -> impl Iterator<Item = &Expr> {
        self.stmts().flat_map(|s| -> Vec<&Expr> {
            match &s.kind {
                StmtKind::Let { value, .. } => vec![value],
                StmtKind::Check { expr, .. } => vec![expr],
                StmtKind::Observe { mean, sigma, .. } => vec![mean, sigma],
            }
        })
    }

    /// Mutable form of [`ModelProgram::exprs`].
    pub fn exprs_mut(&mut self) -> impl Iterator<Item = &mut Expr> {
        self.items.iter_mut().flat_map(|item| -> Vec<&mut Expr> {
            match item {
                Item::Decl(_) => Vec::new(),
                Item::Stmt(s) => match &mut s.kind {
                    StmtKind::Let { value, .. } => vec![value],
                    StmtKind::Check { expr, .. } => vec![expr],
                    StmtKind::Observe { mean, sigma, .. } => vec![mean, sigma],
                },
            }
        })
    }

    /// Copy of the program with every span reset, for structural comparison.
    pub fn without_spans(&self) -> ModelProgram {
        let mut p = self.clone();
        p.visit_spans(&mut |s| *s = Span::default());
        p
    }

    /// Calls `f` on every span in the tree.
    pub fn visit_spans(&mut self, f: &mut impl FnMut(&mut Span)) {
        for item in &mut self.items {
            match item {
                Item::Decl(d) => {
                    f(&mut d.span);
                    match &mut d.kind {
                        DeclKind::Dataset { name, obs_count } => {
                            f(&mut name.span);
                            f(&mut obs_count.span);
                        }
                        DeclKind::Axis { name, size } => {
                            f(&mut name.span);
                            f(&mut size.span);
                        }
                        DeclKind::Map {
                            name,
                            parent,
                            child,
                            dataset,
                            source,
                        } => {
                            for id in [name, parent, child, dataset] {
                                f(&mut id.span);
                            }
                            source_spans(source, f);
                        }
                        DeclKind::Idx {
                            name,
                            axis,
                            dataset,
                            source,
                        } => {
                            for id in [name, axis, dataset] {
                                f(&mut id.span);
                            }
                            source_spans(source, f);
                        }
                        DeclKind::Vec { name, axis, source } => {
                            f(&mut name.span);
                            f(&mut axis.span);
                            if let Some(s) = source {
                                source_spans(s, f);
                            }
                        }
                    }
                }
                Item::Stmt(s) => {
                    f(&mut s.span);
                    match &mut s.kind {
                        StmtKind::Let { name, ann, value } => {
                            f(&mut name.span);
                            if let Some(a) = ann {
                                ann_spans(a, f);
                            }
                            expr_spans(value, f);
                        }
                        StmtKind::Check { expr, ann } => {
                            expr_spans(expr, f);
                            ann_spans(ann, f);
                        }
                        StmtKind::Observe { data, mean, sigma } => {
                            f(&mut data.span);
                            expr_spans(mean, f);
                            expr_spans(sigma, f);
                        }
                    }
                }
            }
        }
    }
}

fn source_spans(source: &mut Source, f: &mut impl FnMut(&mut Span)) {
    match source {
        Source::Inline { span, .. } | Source::File { span, .. } => f(span),
    }
}

fn ann_spans(ann: &mut TypeAnn, f: &mut impl FnMut(&mut Span)) {
    f(&mut ann.span);
    match &mut ann.kind {
        TypeAnnKind::Vec(a) | TypeAnnKind::Obs(a) => f(&mut a.span),
        TypeAnnKind::Idx(a, d) => {
            f(&mut a.span);
            f(&mut d.span);
        }
        TypeAnnKind::Scalar => {}
    }
}

fn expr_spans(expr: &mut Expr, f: &mut impl FnMut(&mut Span)) {
    expr.walk_mut(&mut |e| {
        f(&mut e.span);
        if let ExprKind::Lift(_, target) = &mut e.kind {
            f(&mut target.span);
        }
    });
}
