//! Canonical text form of a [`ModelProgram`]. One item per line; nested
//! arithmetic is fully parenthesized so printing never changes the tree.

use std::fmt::Write;

use super::ast::*;

pub fn pretty_print(program: &ModelProgram) -> String {
    let mut out = String::new();
    for item in &program.items {
        match item {
            Item::Decl(d) => write_decl(&mut out, &d.kind),
            Item::Stmt(s) => write_stmt(&mut out, &s.kind),
        }
        out.push('\n');
    }
    out
}

fn write_decl(out: &mut String, decl: &DeclKind) {
    match decl {
        DeclKind::Dataset { name, obs_count } => {
            let _ = write!(out, "dataset {} obs {}", name.name, obs_count.value);
        }
        DeclKind::Axis { name, size } => {
            let _ = write!(out, "axis {} size {}", name.name, size.value);
        }
        DeclKind::Map {
            name,
            parent,
            child,
            dataset,
            source,
        } => {
            let _ = write!(
                out,
                "map {} : {} -> {} in {}",
                name.name, parent.name, child.name, dataset.name
            );
            write_source(out, source);
        }
        DeclKind::Idx {
            name,
            axis,
            dataset,
            source,
        } => {
            let _ = write!(out, "idx {} : {} in {}", name.name, axis.name, dataset.name);
            write_source(out, source);
        }
        DeclKind::Vec { name, axis, source } => {
            let _ = write!(out, "vec {} : {}", name.name, axis.name);
            if let Some(s) = source {
                write_source(out, s);
            }
        }
    }
}

fn write_source(out: &mut String, source: &Source) {
    match source {
        Source::Inline { values, .. } => {
            out.push_str(" = [");
            for (i, v) in values.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_number(out, *v);
            }
            out.push(']');
        }
        Source::File { path, .. } => {
            out.push_str(" from ");
            write_string(out, path);
        }
    }
}

fn write_number(out: &mut String, n: Number) {
    let _ = match n {
        Number::Int(v) => write!(out, "{v}"),
        Number::Real(v) => write!(out, "{v:?}"),
    };
}

fn write_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
}

fn write_stmt(out: &mut String, stmt: &StmtKind) {
    match stmt {
        StmtKind::Let { name, ann, value } => {
            let _ = write!(out, "let {}", name.name);
            if let Some(a) = ann {
                out.push_str(" : ");
                write_ann(out, a);
            }
            out.push_str(" = ");
            write_expr(out, value, false);
        }
        StmtKind::Check { expr, ann } => {
            out.push_str("check ");
            write_expr(out, expr, false);
            out.push_str(" : ");
            write_ann(out, ann);
        }
        StmtKind::Observe { data, mean, sigma } => {
            let _ = write!(out, "observe {} ~ normal(", data.name);
            write_expr(out, mean, false);
            out.push_str(", ");
            write_expr(out, sigma, false);
            out.push(')');
        }
    }
}

fn write_ann(out: &mut String, ann: &TypeAnn) {
    let _ = match &ann.kind {
        TypeAnnKind::Vec(a) => write!(out, "Vec[{}]", a.name),
        TypeAnnKind::Idx(a, d) => write!(out, "Idx[{}, {}]", a.name, d.name),
        TypeAnnKind::Obs(d) => write!(out, "Obs[{}]", d.name),
        TypeAnnKind::Scalar => write!(out, "Scalar"),
    };
}

/// Renders a single expression.
pub fn expr_text(expr: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, expr, false);
    s
}

fn write_expr(out: &mut String, expr: &Expr, nested: bool) {
    match &expr.kind {
        ExprKind::Number(v) => {
            let _ = write!(out, "{v:?}");
        }
        ExprKind::Name(n) => out.push_str(n),
        ExprKind::Gather(a, b) => {
            out.push_str("gather(");
            write_expr(out, a, false);
            out.push_str(", ");
            write_expr(out, b, false);
            out.push(')');
        }
        ExprKind::Reindex(a, b) => {
            out.push_str("reindex(");
            write_expr(out, a, false);
            out.push_str(", ");
            write_expr(out, b, false);
            out.push(')');
        }
        ExprKind::Lift(a, target) => {
            out.push_str("lift(");
            write_expr(out, a, false);
            let _ = write!(out, ", {})", target.name);
        }
        ExprKind::BinOp(op, a, b) => {
            if nested {
                out.push('(');
            }
            write_expr(out, a, true);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, b, true);
            if nested {
                out.push(')');
            }
        }
    }
}
