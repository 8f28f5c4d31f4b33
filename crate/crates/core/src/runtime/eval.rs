use std::collections::BTreeMap;
use std::sync::Arc;

use super::data::{load_column, DataSource};
use super::{
    elementwise, scalar_left, scalar_right, BindingSummary, EvalError, EvalReport, ObserveSummary,
};
use crate::axis::{self, AxisError, AxisMap, AxisTag, DatasetTag, IndexArray, ObsArray, TypedVec};
use crate::check::{check_program, Code, Diagnostic, SemType};
use crate::lang::ast::*;
use crate::lang::{parse_source, Span};
use crate::registry::MapRegistry;

/// A concrete value bound to a name.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Vec(TypedVec),
    Idx(IndexArray),
    Map(AxisMap),
    Obs(ObsArray),
    Scalar(f64),
    /// A `vec` declared without data: checkable, not evaluable.
    Symbolic(SemType),
}

impl Value {
    fn sem_type(&self) -> SemType {
        match self {
            Value::Vec(v) => SemType::Vec(v.axis().name().to_string()),
            Value::Idx(i) => SemType::Idx(
                i.source_axis().name().to_string(),
                i.dataset().name().to_string(),
            ),
            Value::Map(m) => SemType::Map(
                m.parent_axis().name().to_string(),
                m.child_axis().name().to_string(),
                m.dataset().name().to_string(),
            ),
            Value::Obs(o) => SemType::Obs(o.dataset().name().to_string()),
            Value::Scalar(_) => SemType::Scalar,
            Value::Symbolic(t) => t.clone(),
        }
    }

    fn numbers(&self) -> Vec<f64> {
        match self {
            Value::Vec(v) => v.values().to_vec(),
            Value::Obs(o) => o.values().to_vec(),
            Value::Idx(i) => i.indices().iter().map(|&e| e as f64).collect(),
            Value::Map(m) => m.entries().iter().map(|&e| e as f64).collect(),
            Value::Scalar(s) => vec![*s],
            Value::Symbolic(_) => Vec::new(),
        }
    }
}

/// Bindings and frozen registries of a checked program.
#[derive(Debug, Default)]
pub struct EvalEnv {
    pub axes: BTreeMap<String, AxisTag>,
    pub datasets: BTreeMap<String, DatasetTag>,
    pub registries: BTreeMap<String, Arc<MapRegistry>>,
    pub bindings: BTreeMap<String, Value>,
}

/// Maps a container error onto a data diagnostic at `span`.
pub(super) fn axis_error(span: Span, e: AxisError) -> Diagnostic {
    let code = match &e {
        AxisError::OutOfBounds { .. } => Code::E201,
        AxisError::Length { .. } => Code::E202,
        AxisError::NonFinite { .. } | AxisError::Domain(_) => Code::E207,
        AxisError::EmptyAxis(_) | AxisError::EmptyDataset(_) => Code::E110,
        AxisError::AxisMismatch { .. } => Code::E101,
        AxisError::DatasetMismatch { .. } => Code::E106,
    };
    Diagnostic::new(code, span, e.to_string())
}

/// Parses, checks and evaluates `src`.
pub fn evaluate_source(src: &str, data: &dyn DataSource) -> Result<EvalReport, EvalError> {
    let program = parse_source(src).map_err(EvalError::Syntax)?;
    evaluate(&program, data)
}

/// Checks and evaluates a parsed program. Type errors stop evaluation
/// before any data is read.
pub fn evaluate(program: &ModelProgram, data: &dyn DataSource) -> Result<EvalReport, EvalError> {
    let errors: Vec<Diagnostic> = check_program(program)
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    if !errors.is_empty() {
        return Err(EvalError::Type(errors));
    }
    let env = EvalEnv::load(program, data).map_err(EvalError::Data)?;
    env.run(program).map_err(EvalError::Data)
}

impl EvalEnv {
    /// Loads every declaration and freezes the registries.
    pub fn load(program: &ModelProgram, data: &dyn DataSource) -> Result<EvalEnv, Diagnostic> {
        let mut env = EvalEnv::default();
        let mut building: BTreeMap<String, MapRegistry> = BTreeMap::new();
        for decl in program.decls() {
            match &decl.kind {
                DeclKind::Dataset { name, obs_count } => {
                    let tag = DatasetTag::new(name.name.as_str(), obs_count.value as usize)
                        .map_err(|e| axis_error(name.span, e))?;
                    building.insert(name.name.clone(), MapRegistry::new(tag.clone()));
                    env.datasets.insert(name.name.clone(), tag);
                }
                DeclKind::Axis { name, size } => {
                    let tag = AxisTag::new(name.name.as_str(), size.value as usize)
                        .map_err(|e| axis_error(name.span, e))?;
                    env.axes.insert(name.name.clone(), tag);
                }
                DeclKind::Map {
                    name,
                    parent,
                    child,
                    dataset,
                    source,
                } => {
                    let (p, c) = (
                        env.axes[&parent.name].clone(),
                        env.axes[&child.name].clone(),
                    );
                    let col = load_column(source, data)?;
                    col.expect_len(c.size(), c.name())?;
                    let entries = col.indices(Some((p.size(), p.name())))?;
                    let reg = building.get_mut(&dataset.name).expect("checked dataset");
                    reg.register_map(&p, &c, entries)
                        .map_err(|e| Diagnostic::new(Code::E201, col.span, e.to_string()))?;
                    let map = reg.lookup_map(&p, &c).expect("just registered").clone();
                    env.bindings.insert(name.name.clone(), Value::Map(map));
                }
                DeclKind::Idx {
                    name,
                    axis,
                    dataset,
                    source,
                } => {
                    let k = env.axes[&axis.name].clone();
                    let d = env.datasets[&dataset.name].clone();
                    let col = load_column(source, data)?;
                    col.expect_len(d.obs_count(), d.name())?;
                    let indices = col.indices(Some((k.size(), k.name())))?;
                    let idx =
                        IndexArray::new(k, d, indices).map_err(|e| axis_error(col.span, e))?;
                    env.bindings.insert(name.name.clone(), Value::Idx(idx));
                }
                DeclKind::Vec { name, axis, source } => {
                    let value = if let Some(k) = env.axes.get(&axis.name) {
                        match source {
                            None => Value::Symbolic(SemType::Vec(axis.name.clone())),
                            Some(s) => {
                                let col = load_column(s, data)?;
                                col.expect_len(k.size(), k.name())?;
                                col.finite()?;
                                Value::Vec(
                                    TypedVec::new(k.clone(), col.values)
                                        .map_err(|e| axis_error(col.span, e))?,
                                )
                            }
                        }
                    } else {
                        let d = &env.datasets[&axis.name];
                        match source {
                            None => Value::Symbolic(SemType::Obs(axis.name.clone())),
                            Some(s) => {
                                let col = load_column(s, data)?;
                                col.expect_len(d.obs_count(), d.name())?;
                                col.finite()?;
                                Value::Obs(
                                    ObsArray::new(d.clone(), col.values)
                                        .map_err(|e| axis_error(col.span, e))?,
                                )
                            }
                        }
                    };
                    env.bindings.insert(name.name.clone(), value);
                }
            }
        }
        env.registries = building.into_iter().map(|(k, r)| (k, r.freeze())).collect();
        Ok(env)
    }

    /// Runs the statements and collects the report.
    pub fn run(mut self, program: &ModelProgram) -> Result<EvalReport, Diagnostic> {
        let mut bindings = Vec::new();
        let mut observations = Vec::new();
        for stmt in program.stmts() {
            match &stmt.kind {
                StmtKind::Let { name, value, .. } => {
                    let v = self.eval(value)?;
                    bindings.push(BindingSummary {
                        name: name.name.clone(),
                        ty: Some(v.sem_type()),
                        values: v.numbers(),
                        scalar: matches!(v, Value::Scalar(_)),
                    });
                    self.bindings.insert(name.name.clone(), v);
                }
                StmtKind::Check { expr, .. } => {
                    self.eval(expr)?;
                }
                StmtKind::Observe { data, mean, sigma } => {
                    let loglik = self.observe(data, mean, sigma)?;
                    observations.push(ObserveSummary {
                        data: data.name.clone(),
                        span: stmt.span,
                        loglik,
                    });
                }
            }
        }
        Ok(EvalReport::finish(bindings, observations))
    }

    fn observe(&self, data: &Ident, mean: &Expr, sigma: &Expr) -> Result<f64, Diagnostic> {
        let obs = self.name(&data.name, data.span)?;
        let mu = self.eval(mean)?;
        let Value::Scalar(s) = self.eval(sigma)? else {
            unreachable!("checked: sigma is a scalar")
        };
        if !(s > 0.0 && s.is_finite()) {
            return Err(Diagnostic::new(
                Code::E207,
                sigma.span,
                format!("sigma must be positive and finite, got {s:?}"),
            ));
        }
        let err = |e| axis_error(mean.span, e);
        let loglik = match (&obs, mu) {
            (Value::Vec(y), Value::Vec(m)) => axis::gaussian_loglik_vec(y, &m, s).map_err(err)?,
            (Value::Vec(y), Value::Scalar(c)) => {
                let m = TypedVec::new(y.axis().clone(), vec![c; y.values().len()]).map_err(err)?;
                axis::gaussian_loglik_vec(y, &m, s).map_err(err)?
            }
            (Value::Obs(y), Value::Obs(m)) => axis::gaussian_loglik(y, &m, s).map_err(err)?,
            (Value::Obs(y), Value::Scalar(c)) => {
                let m =
                    ObsArray::new(y.dataset().clone(), vec![c; y.values().len()]).map_err(err)?;
                axis::gaussian_loglik(y, &m, s).map_err(err)?
            }
            _ => unreachable!("checked: observe operands agree"),
        };
        if !loglik.is_finite() {
            return Err(Diagnostic::new(
                Code::E207,
                data.span,
                format!("log-likelihood of \"{}\" is not finite", data.name),
            ));
        }
        Ok(loglik)
    }

    fn name(&self, name: &str, span: Span) -> Result<Value, Diagnostic> {
        match &self.bindings[name] {
            Value::Symbolic(_) => Err(Diagnostic::new(
                Code::E206,
                span,
                format!("\"{name}\" is declared without data and cannot be evaluated"),
            )),
            v => Ok(v.clone()),
        }
    }

    /// Evaluates an expression of a checked program.
    pub fn eval(&self, expr: &Expr) -> Result<Value, Diagnostic> {
        let err = |e| axis_error(expr.span, e);
        Ok(match &expr.kind {
            ExprKind::Number(v) => Value::Scalar(*v),
            ExprKind::Name(n) => self.name(n, expr.span)?,
            ExprKind::Gather(v, i) => match (self.eval(v)?, self.eval(i)?) {
                (Value::Vec(v), Value::Idx(i)) => Value::Obs(axis::gather(&v, &i).map_err(err)?),
                _ => unreachable!("checked: gather(Vec, Idx)"),
            },
            ExprKind::Reindex(m, i) => match (self.eval(m)?, self.eval(i)?) {
                (Value::Map(m), Value::Idx(i)) => Value::Idx(axis::reindex(&m, &i).map_err(err)?),
                _ => unreachable!("checked: reindex(Map, Idx)"),
            },
            ExprKind::Lift(v, target) => {
                let Value::Vec(v) = self.eval(v)? else {
                    unreachable!("checked: lift(Vec, axis)")
                };
                let to = &self.axes[&target.name];
                if v.axis() == to {
                    return Ok(Value::Vec(v));
                }
                let reg = self
                    .registries
                    .values()
                    .find(|r| r.resolve_lift_path(v.axis().name(), to.name()).is_ok())
                    .expect("checked: a unique lift path exists");
                Value::Vec(
                    reg.auto_lift(&v, to)
                        .map_err(|e| Diagnostic::new(Code::E102, expr.span, e.to_string()))?,
                )
            }
            ExprKind::BinOp(op, a, b) => {
                let op = *op;
                match (self.eval(a)?, self.eval(b)?) {
                    (Value::Scalar(x), Value::Scalar(y)) => {
                        let r = super::apply(op, x, y);
                        if !r.is_finite() {
                            return Err(Diagnostic::new(
                                Code::E207,
                                expr.span,
                                "result is not finite",
                            ));
                        }
                        Value::Scalar(r)
                    }
                    (Value::Vec(x), Value::Vec(y)) => Value::Vec(
                        TypedVec::new(x.axis().clone(), elementwise(op, x.values(), y.values()))
                            .map_err(err)?,
                    ),
                    (Value::Scalar(s), Value::Vec(y)) => Value::Vec(
                        TypedVec::new(y.axis().clone(), scalar_left(op, s, y.values()))
                            .map_err(err)?,
                    ),
                    (Value::Vec(x), Value::Scalar(s)) => Value::Vec(
                        TypedVec::new(x.axis().clone(), scalar_right(op, x.values(), s))
                            .map_err(err)?,
                    ),
                    (Value::Obs(x), Value::Obs(y)) => Value::Obs(
                        ObsArray::new(x.dataset().clone(), elementwise(op, x.values(), y.values()))
                            .map_err(err)?,
                    ),
                    (Value::Scalar(s), Value::Obs(y)) => Value::Obs(
                        ObsArray::new(y.dataset().clone(), scalar_left(op, s, y.values()))
                            .map_err(err)?,
                    ),
                    (Value::Obs(x), Value::Scalar(s)) => Value::Obs(
                        ObsArray::new(x.dataset().clone(), scalar_right(op, x.values(), s))
                            .map_err(err)?,
                    ),
                    _ => unreachable!("checked: arithmetic on one axis"),
                }
            }
        })
    }
}
