//! Evaluation of model programs, the synthetic radon model and the
//! mutation harness.

pub mod data;
mod eval;
pub mod mutate;
pub mod radon;
mod raw;

use std::fmt::Write;

use crate::check::{Diagnostic, SemType};
use crate::kernels::CompensatedSum;
use crate::lang::ast::BinOp;
use crate::lang::{Span, SyntaxError};

pub use eval::{evaluate, evaluate_source, EvalEnv, Value};
pub use raw::{evaluate_unchecked, evaluate_unchecked_source};

/// Why a program could not be evaluated.
#[derive(Debug, Clone)]
pub enum EvalError {
    Syntax(Vec<SyntaxError>),
    Type(Vec<Diagnostic>),
    Data(Diagnostic),
}

impl EvalError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            EvalError::Type(_) => 1,
            EvalError::Syntax(_) => 2,
            EvalError::Data(_) => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BindingSummary {
    pub name: String,
    /// Static type; `None` when evaluated without checking.
    pub ty: Option<SemType>,
    pub values: Vec<f64>,
    pub scalar: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserveSummary {
    pub data: String,
    pub span: Span,
    pub loglik: f64,
}

/// Output of one evaluation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub bindings: Vec<BindingSummary>,
    pub observations: Vec<ObserveSummary>,
    pub total: f64,
}

const SHOWN: usize = 8;

impl EvalReport {
    fn finish(bindings: Vec<BindingSummary>, observations: Vec<ObserveSummary>) -> Self {
        let total = observations
            .iter()
            .map(|o| o.loglik)
            .collect::<CompensatedSum>()
            .value();
        Self {
            bindings,
            observations,
            total,
        }
    }

    /// True when every number in both reports has the same bit pattern.
    pub fn bitwise_eq(&self, other: &EvalReport) -> bool {
        fn bits(r: &EvalReport) -> Vec<u64> {
            let mut out: Vec<u64> = r
                .bindings
                .iter()
                .flat_map(|b| b.values.iter().map(|v| v.to_bits()))
                .collect();
            out.extend(r.observations.iter().map(|o| o.loglik.to_bits()));
            out.push(r.total.to_bits());
            out
        }
        let names = |r: &EvalReport| {
            r.bindings
                .iter()
                .map(|b| (b.name.clone(), b.values.len()))
                .collect::<Vec<_>>()
        };
        names(self) == names(other) && bits(self) == bits(other)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for b in &self.bindings {
            let ty =
                b.ty.as_ref()
                    .map_or("untyped".to_string(), |t| t.to_string());
            if b.scalar {
                let _ = writeln!(out, "let {} : {ty} = {:?}", b.name, b.values[0]);
                continue;
            }
            let shown: Vec<String> = b
                .values
                .iter()
                .take(SHOWN)
                .map(|v| format!("{v:?}"))
                .collect();
            let more = if b.values.len() > SHOWN { ", ..." } else { "" };
            let _ = writeln!(
                out,
                "let {} : {ty} (len {}) = [{}{more}]",
                b.name,
                b.values.len(),
                shown.join(", ")
            );
        }
        for o in &self.observations {
            let _ = writeln!(out, "observe {}: loglik = {:?}", o.data, o.loglik);
        }
        let _ = writeln!(out, "total loglik = {:?}", self.total);
        out
    }
}

fn apply(op: BinOp, x: f64, y: f64) -> f64 {
    match op {
        BinOp::Add => x + y,
        BinOp::Mul => x * y,
    }
}

/// Element-wise arithmetic shared by both evaluators so their results
/// agree bit for bit.
fn elementwise(op: BinOp, a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(&x, &y)| apply(op, x, y)).collect()
}

fn scalar_left(op: BinOp, s: f64, v: &[f64]) -> Vec<f64> {
    v.iter().map(|&y| apply(op, s, y)).collect()
}

fn scalar_right(op: BinOp, v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|&x| apply(op, x, s)).collect()
}
