//! Fault injection: axis-level mutations of a well-typed program, each
//! checked statically and force-evaluated with the baseline validator.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::data::DataSource;
use super::{evaluate_unchecked, EvalError};
use crate::check::{analyze, Code, Diagnostic};
use crate::lang::ast::*;

/// Likelihood deltas at or below this are "no change".
pub const NO_CHANGE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationKind {
    /// Two index arrays over different axes trade places at every use.
    IdxSwap,
    /// A lift is sent to another axis.
    LiftRetarget,
    /// A map's parent and child are exchanged.
    MapReverse,
    /// A declaration or annotation is moved to another axis.
    Rebind,
}

impl MutationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MutationKind::IdxSwap => "idx-swap",
            MutationKind::LiftRetarget => "lift-retarget",
            MutationKind::MapReverse => "map-reverse",
            MutationKind::Rebind => "rebind",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mutant {
    pub kind: MutationKind,
    pub description: String,
    pub program: ModelProgram,
}

/// What the baseline validator made of a mutant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    /// Ran to completion.
    Passed,
    /// Stopped by an out-of-bounds index or a length mismatch.
    ShapeError,
    /// Could not run at all (a missing map, a value of the wrong kind).
    Unevaluable,
}

impl Baseline {
    pub fn as_str(self) -> &'static str {
        match self {
            Baseline::Passed => "passed",
            Baseline::ShapeError => "shape-error",
            Baseline::Unevaluable => "unevaluable",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MutantRecord {
    pub index: usize,
    pub kind: MutationKind,
    pub description: String,
    pub static_codes: Vec<String>,
    pub statically_caught: bool,
    pub baseline: Baseline,
    pub baseline_message: Option<String>,
    pub delta: Option<f64>,
}

impl MutantRecord {
    pub fn silent(&self) -> bool {
        self.baseline == Baseline::Passed && self.delta.is_some_and(|d| d.is_nan() || d.abs() > NO_CHANGE)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct MutationReport {
    pub total_mutants: usize,
    pub statically_caught: usize,
    pub shape_caught: usize,
    pub unevaluable: usize,
    /// Passed the baseline and changed the log-likelihood.
    pub silent: usize,
    /// Passed the baseline without changing the log-likelihood.
    pub no_change: usize,
    pub records: Vec<MutantRecord>,
}

impl MutationReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let codes = if r.static_codes.is_empty() {
                "none".to_string()
            } else {
                r.static_codes.join(",")
            };
            let delta = r.delta.map_or("-".to_string(), |d| format!("{d:?}"));
            out.push_str(&format!(
                "#{} {} [{}] static={} baseline={} delta={}\n",
                r.index,
                r.kind.as_str(),
                r.description,
                codes,
                r.baseline.as_str(),
                delta
            ));
        }
        out.push_str(&format!(
            "mutants={} statically_caught={} shape_caught={} unevaluable={} silent={} no_change={}\n",
            self.total_mutants,
            self.statically_caught,
            self.shape_caught,
            self.unevaluable,
            self.silent,
            self.no_change
        ));
        out
    }
}

#[derive(Debug, Clone, Error)]
pub enum MutateError {
    #[error("the original program has type errors")]
    IllTyped(Vec<Diagnostic>),
    #[error("the original program does not evaluate")]
    Eval(EvalError),
}

struct Levels {
    axes: Vec<String>,
    datasets: Vec<String>,
}

fn levels(program: &ModelProgram) -> Levels {
    let mut l = Levels {
        axes: Vec::new(),
        datasets: Vec::new(),
    };
    for d in program.decls() {
        match &d.kind {
            DeclKind::Axis { name, .. } => l.axes.push(name.name.clone()),
            DeclKind::Dataset { name, .. } => l.datasets.push(name.name.clone()),
            _ => {}
        }
    }
    l
}

/// Names that occur in some statement, plus maps that some lift goes
/// through.
fn referenced(program: &ModelProgram) -> BTreeSet<String> {
    let mut names = BTreeSet::new();
    for e in program.exprs() {
        e.walk(&mut |e| {
            if let ExprKind::Name(n) = &e.kind {
                names.insert(n.clone());
            }
        });
    }
    for s in program.stmts() {
        if let StmtKind::Observe { data, .. } = &s.kind {
            names.insert(data.name.clone());
        }
    }
    for lift in analyze(program).lifts {
        names.extend(lift.maps);
    }
    names
}

/// Replaces every use of `a` by `b` and vice versa. Declarations are left
/// alone, so each name keeps its data and its declared type.
pub fn swap_uses(program: &ModelProgram, a: &str, b: &str) -> ModelProgram {
    let mut p = program.clone();
    for root in p.exprs_mut() {
        root.walk_mut(&mut |e| {
            if let ExprKind::Name(n) = &mut e.kind {
                if n == a {
                    *n = b.to_string();
                } else if n == b {
                    *n = a.to_string();
                }
            }
        });
    }
    p
}

/// Every mutant of `program`, in a fixed order: index swaps, lift
/// retargets, map reversals, then rebinds.
pub fn enumerate_mutants(program: &ModelProgram) -> Vec<Mutant> {
    let levels = levels(program);
    let used = referenced(program);
    let mut out = Vec::new();

    let idx: Vec<(&str, &str, &str)> = program
        .decls()
        .filter_map(|d| match &d.kind {
            DeclKind::Idx {
                name,
                axis,
                dataset,
                ..
            } if used.contains(&name.name) => Some((
                name.name.as_str(),
                axis.name.as_str(),
                dataset.name.as_str(),
            )),
            _ => None,
        })
        .collect();
    for (i, a) in idx.iter().enumerate() {
        for b in &idx[i + 1..] {
            if a.2 == b.2 && a.1 != b.1 {
                out.push(Mutant {
                    kind: MutationKind::IdxSwap,
                    description: format!("{} <-> {}", a.0, b.0),
                    program: swap_uses(program, a.0, b.0),
                });
            }
        }
    }

    let lift_count = program
        .exprs()
        .map(|root| {
            let mut n = 0;
            root.walk(&mut |e| n += matches!(e.kind, ExprKind::Lift(..)) as usize);
            n
        })
        .sum::<usize>();
    for which in 0..lift_count {
        let current = nth_lift_target(program, which);
        for axis in &levels.axes {
            if *axis == current {
                continue;
            }
            let mut p = program.clone();
            let mut seen = 0;
            for root in p.exprs_mut() {
                root.walk_mut(&mut |e| {
                    if let ExprKind::Lift(_, target) = &mut e.kind {
                        if seen == which {
                            target.name = axis.clone();
                        }
                        seen += 1;
                    }
                });
            }
            out.push(Mutant {
                kind: MutationKind::LiftRetarget,
                description: format!("lift #{which} to {axis} (was {current})"),
                program: p,
            });
        }
    }

    for (pos, item) in program.items.iter().enumerate() {
        if let Item::Decl(Decl {
            kind: DeclKind::Map { name, .. },
            ..
        }) = item
        {
            if !used.contains(&name.name) {
                continue;
            }
            let mut p = program.clone();
            if let Item::Decl(Decl {
                kind: DeclKind::Map { parent, child, .. },
                ..
            }) = &mut p.items[pos]
            {
                std::mem::swap(&mut parent.name, &mut child.name);
            }
            out.push(Mutant {
                kind: MutationKind::MapReverse,
                description: format!("reverse {}", name.name),
                program: p,
            });
        }
    }

    for (pos, item) in program.items.iter().enumerate() {
        let Item::Decl(Decl {
            kind: DeclKind::Vec { name, axis, .. },
            ..
        }) = item
        else {
            continue;
        };
        if !used.contains(&name.name) {
            continue;
        }
        let pool = if levels.axes.contains(&axis.name) {
            &levels.axes
        } else {
            &levels.datasets
        };
        for other in pool.iter().filter(|o| **o != axis.name) {
            let mut p = program.clone();
            if let Item::Decl(Decl {
                kind: DeclKind::Vec { axis, .. },
                ..
            }) = &mut p.items[pos]
            {
                axis.name = other.clone();
            }
            out.push(Mutant {
                kind: MutationKind::Rebind,
                description: format!("vec {} on {other} (was {})", name.name, axis.name),
                program: p,
            });
        }
    }
    for (pos, item) in program.items.iter().enumerate() {
        let Item::Stmt(Stmt {
            kind:
                StmtKind::Let {
                    name,
                    ann: Some(ann),
                    ..
                },
            ..
        }) = item
        else {
            continue;
        };
        let (current, pool) = match &ann.kind {
            TypeAnnKind::Vec(a) | TypeAnnKind::Idx(a, _) => (&a.name, &levels.axes),
            TypeAnnKind::Obs(d) => (&d.name, &levels.datasets),
            TypeAnnKind::Scalar => continue,
        };
        for other in pool.iter().filter(|o| *o != current) {
            let mut p = program.clone();
            if let Item::Stmt(Stmt {
                kind: StmtKind::Let { ann: Some(ann), .. },
                ..
            }) = &mut p.items[pos]
            {
                match &mut ann.kind {
                    TypeAnnKind::Vec(a) | TypeAnnKind::Idx(a, _) | TypeAnnKind::Obs(a) => {
                        a.name = other.clone()
                    }
                    TypeAnnKind::Scalar => {}
                }
            }
            out.push(Mutant {
                kind: MutationKind::Rebind,
                description: format!("let {} annotated on {other} (was {current})", name.name),
                program: p,
            });
        }
    }
    out
}

fn nth_lift_target(program: &ModelProgram, which: usize) -> String {
    let mut seen = 0;
    let mut found = String::new();
    for root in program.exprs() {
        root.walk(&mut |e| {
            if let ExprKind::Lift(_, target) = &e.kind {
                if seen == which {
                    found = target.name.clone();
                }
                seen += 1;
            }
        });
    }
    found
}

/// Indices of the mutants to run: all of them, or `trials` chosen by a
/// seeded shuffle, reported in ascending order.
pub fn select(total: usize, trials: usize, seed: u64) -> Vec<usize> {
    let mut all: Vec<usize> = (0..total).collect();
    if trials < total {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        all.shuffle(&mut rng);
        all.truncate(trials);
        all.sort_unstable();
    }
    all
}

/// Static check and forced evaluation of one mutant. `baseline_total` is
/// the unmutated program's total log-likelihood.
pub fn assess(
    index: usize,
    mutant: &Mutant,
    data: &dyn DataSource,
    baseline_total: f64,
) -> MutantRecord {
    let diagnostics: Vec<Diagnostic> = analyze(&mutant.program)
        .diagnostics
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    let mut codes: Vec<String> = diagnostics.iter().map(|d| d.code.to_string()).collect();
    codes.dedup();
    let (baseline, message, delta) = match evaluate_unchecked(&mutant.program, data) {
        Ok(report) => (Baseline::Passed, None, Some(report.total - baseline_total)),
        Err(EvalError::Data(d)) if matches!(d.code, Code::E201 | Code::E202) => {
            (Baseline::ShapeError, Some(d.message), None)
        }
        Err(EvalError::Data(d)) => (Baseline::Unevaluable, Some(d.message), None),
        Err(e) => (Baseline::Unevaluable, Some(format!("{e:?}")), None),
    };
    MutantRecord {
        index,
        kind: mutant.kind,
        description: mutant.description.clone(),
        statically_caught: !diagnostics.is_empty(),
        static_codes: codes,
        baseline,
        baseline_message: message,
        delta,
    }
}

/// Runs up to `trials` mutants of a well-typed, evaluable program.
pub fn run_mutations(
    program: &ModelProgram,
    data: &dyn DataSource,
    trials: usize,
    seed: u64,
) -> Result<MutationReport, MutateError> {
    let errors: Vec<Diagnostic> = analyze(program)
        .diagnostics
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    if !errors.is_empty() {
        return Err(MutateError::IllTyped(errors));
    }
    let mut report = MutationReport::default();
    if trials == 0 {
        return Ok(report);
    }
    let original = evaluate_unchecked(program, data).map_err(MutateError::Eval)?;
    let mutants = enumerate_mutants(program);
    for i in select(mutants.len(), trials, seed) {
        let r = assess(i, &mutants[i], data, original.total);
        report.total_mutants += 1;
        report.statically_caught += r.statically_caught as usize;
        match r.baseline {
            Baseline::ShapeError => report.shape_caught += 1,
            Baseline::Unevaluable => report.unevaluable += 1,
            Baseline::Passed if r.silent() => report.silent += 1,
            Baseline::Passed => report.no_change += 1,
        }
        report.records.push(r);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_source;
    use crate::runtime::data::MemorySource;

    const PROGRAM: &str = "\
dataset Data obs 5
axis State size 2
axis County size 3
map soc : State -> County in Data = [0, 0, 1]
idx ci : County in Data = [0, 1, 1, 2, 2]
idx si : State in Data = [0, 0, 0, 1, 1]
vec g : State = [0.25, -1.5]
vec a : County = [1, 2, 3]
vec y : Data = [0.1, 0.2, 0.3, 0.4, 0.5]
let gc : Vec[County] = lift(g, County)
let mu : Obs[Data] = gather(a + gc, ci)
observe y ~ normal(mu, 0.7)
check si : Idx[State, Data]
";

    #[test]
    fn every_mutant_is_caught() {
        let p = parse_source(PROGRAM).unwrap();
        let report = run_mutations(&p, &MemorySource::new(), 1000, 1).unwrap();
        assert!(report.total_mutants > 5);
        assert_eq!(
            report.statically_caught,
            report.total_mutants,
            "{}",
            report.render()
        );
        assert_eq!(
            report.shape_caught + report.unevaluable + report.silent + report.no_change,
            report.total_mutants
        );
        let kinds: BTreeSet<_> = report.records.iter().map(|r| r.kind).collect();
        assert_eq!(kinds.len(), 4);
    }

    #[test]
    fn the_swap_is_silent() {
        let p = parse_source(PROGRAM).unwrap();
        let report = run_mutations(&p, &MemorySource::new(), 1000, 1).unwrap();
        let swap = &report.records[0];
        assert_eq!(swap.kind, MutationKind::IdxSwap);
        assert_eq!(swap.static_codes, ["E101", "E103"]);
        assert!(swap.silent());
    }

    #[test]
    fn zero_trials() {
        let p = parse_source(PROGRAM).unwrap();
        let report = run_mutations(&p, &MemorySource::new(), 0, 1).unwrap();
        assert_eq!(report.total_mutants, 0);
        assert!(report.records.is_empty());
    }

    #[test]
    fn sampling_is_seeded() {
        assert_eq!(select(10, 4, 3), select(10, 4, 3));
        assert_eq!(select(10, 4, 3).len(), 4);
        assert_eq!(select(3, 10, 3), [0, 1, 2]);
    }

    #[test]
    fn ill_typed_input_is_refused() {
        let p = parse_source(&PROGRAM.replace("gather(a + gc, ci)", "gather(a, si)")).unwrap();
        assert!(matches!(
            run_mutations(&p, &MemorySource::new(), 10, 1),
            Err(MutateError::IllTyped(_))
        ));
    }
}
