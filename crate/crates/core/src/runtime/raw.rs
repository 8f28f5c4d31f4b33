//! Evaluation with the checker bypassed.
//!
//! Values are plain arrays. Declarations are loaded without comparing
//! lengths against the declared sizes, and only two things are verified
//! while running: that every index is in bounds and that element-wise
//! operands have equal lengths. This is the baseline validator: it catches
//! exactly the mistakes a plain array library would.

use std::collections::BTreeMap;

use super::data::{load_column, DataSource};
use super::{
    elementwise, scalar_left, scalar_right, BindingSummary, EvalError, EvalReport, ObserveSummary,
};
use crate::check::{Code, Diagnostic};
use crate::kernels;
use crate::lang::ast::*;
use crate::lang::{parse_source, Span};

#[derive(Debug, Clone)]
enum Raw {
    /// Reals, remembering the axis they were declared over (if any) so
    /// `lift` can pick a map by name.
    Reals(Option<String>, Vec<f64>),
    Indices(Vec<usize>),
    Map(Vec<usize>),
    Scalar(f64),
    Symbolic,
}

struct RawEnv {
    maps: Vec<(String, String, Vec<usize>)>,
    bindings: BTreeMap<String, Raw>,
}

fn bounds(span: Span, what: &str, (pos, idx): (usize, usize), len: usize) -> Diagnostic {
    Diagnostic::new(
        Code::E201,
        span,
        format!("{what}: index {idx} at position {pos} is out of bounds for length {len}"),
    )
}

fn shape(span: Span, a: usize, b: usize) -> Diagnostic {
    Diagnostic::new(
        Code::E202,
        span,
        format!("operands could not be broadcast together with shapes ({a},) ({b},)"),
    )
}

fn unevaluable(span: Span, why: String) -> Diagnostic {
    Diagnostic::new(Code::E206, span, why)
}

/// Parses and evaluates `src` without type checking.
pub fn evaluate_unchecked_source(
    src: &str,
    data: &dyn DataSource,
) -> Result<EvalReport, EvalError> {
    let program = parse_source(src).map_err(EvalError::Syntax)?;
    evaluate_unchecked(&program, data)
}

/// Evaluates a parsed program without type checking. On well-typed
/// programs the numbers are bitwise identical to [`super::evaluate`].
pub fn evaluate_unchecked(
    program: &ModelProgram,
    data: &dyn DataSource,
) -> Result<EvalReport, EvalError> {
    run(program, data).map_err(EvalError::Data)
}

fn run(program: &ModelProgram, data: &dyn DataSource) -> Result<EvalReport, Diagnostic> {
    let mut env = RawEnv {
        maps: Vec::new(),
        bindings: BTreeMap::new(),
    };
    for decl in program.decls() {
        match &decl.kind {
            DeclKind::Dataset { .. } | DeclKind::Axis { .. } => {}
            DeclKind::Map {
                name,
                parent,
                child,
                source,
                ..
            } => {
                let entries = load_column(source, data)?.indices(None)?;
                env.maps
                    .push((parent.name.clone(), child.name.clone(), entries.clone()));
                env.bindings.insert(name.name.clone(), Raw::Map(entries));
            }
            DeclKind::Idx { name, source, .. } => {
                let indices = load_column(source, data)?.indices(None)?;
                env.bindings
                    .insert(name.name.clone(), Raw::Indices(indices));
            }
            DeclKind::Vec { name, axis, source } => {
                let value = match source {
                    None => Raw::Symbolic,
                    Some(s) => Raw::Reals(Some(axis.name.clone()), load_column(s, data)?.values),
                };
                env.bindings.insert(name.name.clone(), value);
            }
        }
    }
    let mut bindings = Vec::new();
    let mut observations = Vec::new();
    for stmt in program.stmts() {
        match &stmt.kind {
            StmtKind::Let { name, value, .. } => {
                let v = env.eval(value)?;
                let (values, scalar) = match &v {
                    Raw::Reals(_, x) => (x.clone(), false),
                    Raw::Indices(i) | Raw::Map(i) => (i.iter().map(|&e| e as f64).collect(), false),
                    Raw::Scalar(s) => (vec![*s], true),
                    Raw::Symbolic => (Vec::new(), false),
                };
                bindings.push(BindingSummary {
                    name: name.name.clone(),
                    ty: None,
                    values,
                    scalar,
                });
                env.bindings.insert(name.name.clone(), v);
            }
            StmtKind::Check { expr, .. } => {
                env.eval(expr)?;
            }
            StmtKind::Observe {
                data: y,
                mean,
                sigma,
            } => {
                let loglik = env.observe(y, mean, sigma)?;
                observations.push(ObserveSummary {
                    data: y.name.clone(),
                    span: stmt.span,
                    loglik,
                });
            }
        }
    }
    Ok(EvalReport::finish(bindings, observations))
}

impl RawEnv {
    fn name(&self, name: &str, span: Span) -> Result<Raw, Diagnostic> {
        match self.bindings.get(name) {
            None => Err(unevaluable(span, format!("name \"{name}\" is not defined"))),
            Some(Raw::Symbolic) => Err(unevaluable(span, format!("\"{name}\" has no data"))),
            Some(v) => Ok(v.clone()),
        }
    }

    fn observe(&self, y: &Ident, mean: &Expr, sigma: &Expr) -> Result<f64, Diagnostic> {
        let obs = match self.name(&y.name, y.span)? {
            Raw::Reals(_, v) => v,
            _ => {
                return Err(unevaluable(
                    y.span,
                    format!("\"{}\" is not an array of reals", y.name),
                ))
            }
        };
        let mu = match self.eval(mean)? {
            Raw::Reals(_, v) => v,
            Raw::Scalar(c) => vec![c; obs.len()],
            _ => {
                return Err(unevaluable(
                    mean.span,
                    "mean is not an array of reals".into(),
                ))
            }
        };
        if mu.len() != obs.len() {
            return Err(shape(mean.span, obs.len(), mu.len()));
        }
        let s = match self.eval(sigma)? {
            Raw::Scalar(s) => s,
            _ => return Err(unevaluable(sigma.span, "sigma is not a scalar".into())),
        };
        if !(s > 0.0 && s.is_finite()) {
            return Err(Diagnostic::new(
                Code::E207,
                sigma.span,
                format!("sigma must be positive and finite, got {s:?}"),
            ));
        }
        Ok(kernels::normal_loglik(&obs, &mu, s))
    }

    /// First chain of declared maps from `from` to `to`, searched
    /// depth-first in declaration order.
    fn find_chain(&self, from: &str, to: &str, seen: &mut Vec<String>) -> Option<Vec<usize>> {
        if from == to {
            return Some(Vec::new());
        }
        seen.push(from.to_string());
        for (i, (p, c, _)) in self.maps.iter().enumerate() {
            if p == from && !seen.contains(c) {
                if let Some(mut rest) = self.find_chain(c, to, seen) {
                    rest.insert(0, i);
                    return Some(rest);
                }
            }
        }
        None
    }

    fn eval(&self, expr: &Expr) -> Result<Raw, Diagnostic> {
        let span = expr.span;
        Ok(match &expr.kind {
            ExprKind::Number(v) => Raw::Scalar(*v),
            ExprKind::Name(n) => self.name(n, span)?,
            ExprKind::Gather(v, i) => match (self.eval(v)?, self.eval(i)?) {
                (Raw::Reals(_, v), Raw::Indices(i)) => {
                    let out = kernels::try_gather(&v, &i)
                        .map_err(|e| bounds(span, "gather", e, v.len()))?;
                    Raw::Reals(None, out)
                }
                _ => {
                    return Err(unevaluable(
                        span,
                        "gather needs an array of reals and an index array".into(),
                    ))
                }
            },
            ExprKind::Reindex(m, i) => match (self.eval(m)?, self.eval(i)?) {
                (Raw::Map(m), Raw::Indices(i)) => Raw::Indices(
                    kernels::try_gather(&m, &i).map_err(|e| bounds(span, "reindex", e, m.len()))?,
                ),
                _ => {
                    return Err(unevaluable(
                        span,
                        "reindex needs a map and an index array".into(),
                    ))
                }
            },
            ExprKind::Lift(v, target) => {
                let Raw::Reals(Some(from), mut values) = self.eval(v)? else {
                    return Err(unevaluable(
                        span,
                        "lift needs an array declared over an axis".into(),
                    ));
                };
                let chain = self
                    .find_chain(&from, &target.name, &mut Vec::new())
                    .ok_or_else(|| {
                        unevaluable(span, format!("no map leads from {from} to {}", target.name))
                    })?;
                for step in chain {
                    let entries = &self.maps[step].2;
                    values = kernels::try_gather(&values, entries)
                        .map_err(|e| bounds(span, "lift", e, values.len()))?;
                }
                Raw::Reals(Some(target.name.clone()), values)
            }
            ExprKind::BinOp(op, a, b) => {
                let op = *op;
                match (self.eval(a)?, self.eval(b)?) {
                    (Raw::Scalar(x), Raw::Scalar(y)) => Raw::Scalar(super::apply(op, x, y)),
                    (Raw::Reals(l, x), Raw::Reals(_, y)) => {
                        if x.len() != y.len() {
                            return Err(shape(span, x.len(), y.len()));
                        }
                        Raw::Reals(l, elementwise(op, &x, &y))
                    }
                    (Raw::Scalar(s), Raw::Reals(l, y)) => Raw::Reals(l, scalar_left(op, s, &y)),
                    (Raw::Reals(l, x), Raw::Scalar(s)) => Raw::Reals(l, scalar_right(op, &x, s)),
                    _ => return Err(unevaluable(span, "arithmetic needs reals".into())),
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::data::MemorySource;
    use crate::runtime::evaluate_source;

    const PROGRAM: &str = "\
dataset Data obs 5
axis State size 2
axis County size 3
map soc : State -> County in Data = [0, 0, 1]
idx ci : County in Data = [0, 1, 1, 2, 2]
idx si : State in Data = [0, 0, 0, 1, 1]
vec g : State = [0.25, -1.5]
vec y : Data = [0.1, 0.2, 0.3, 0.4, 0.5]
let gc : Vec[County] = lift(g, County)
let mu : Obs[Data] = gather(gc, ci) + 0.1 * y
observe y ~ normal(mu, 0.7)
check gather(g, si) : Obs[Data]
";

    #[test]
    fn matches_checked_evaluation_bitwise() {
        let mem = MemorySource::new();
        let checked = evaluate_source(PROGRAM, &mem).unwrap();
        let raw = evaluate_unchecked_source(PROGRAM, &mem).unwrap();
        assert!(checked.bitwise_eq(&raw));
        assert!(raw.render().contains("let mu : untyped (len 5)"));
    }

    #[test]
    fn transposed_index_runs_silently() {
        let mem = MemorySource::new();
        let good = evaluate_unchecked_source(PROGRAM, &mem).unwrap();
        let bad =
            evaluate_unchecked_source(&PROGRAM.replace("gather(gc, ci)", "gather(gc, si)"), &mem)
                .unwrap();
        assert_ne!(good.total, bad.total);
    }

    #[test]
    fn out_of_bounds_and_shape_errors() {
        let mem = MemorySource::new();
        let src = PROGRAM.replace("check gather(g, si)", "check gather(g, ci)");
        let Err(EvalError::Data(d)) = evaluate_unchecked_source(&src, &mem) else {
            panic!()
        };
        assert_eq!(d.code, Code::E201);
        let src = PROGRAM.replace("+ 0.1 * y", "+ gc");
        let Err(EvalError::Data(d)) = evaluate_unchecked_source(&src, &mem) else {
            panic!()
        };
        assert_eq!(d.code, Code::E202);
    }
}
