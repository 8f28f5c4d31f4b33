//! Synthetic three-level radon model (states, counties, homes).
//!
//! Generative model, with every draw taken from a ChaCha8 stream seeded by
//! `seed`:
//!
//! ```text
//! v[s], u[j], z ~ N(0, 1)            x[i] ~ Bernoulli(1/2)
//! gamma_0[s] = eta_0 + eta_1 v[s] + sigma_s z
//! a[j]       = gamma_0[state(j)] + gamma_1 u[j] + sigma_a z
//! y[i]       = a[county(i)] + beta x[i] + sigma_y z
//! ```

use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use super::data::{write_column, MemorySource};
use super::mutate::swap_uses;
use super::{evaluate, evaluate_unchecked, EvalError, EvalReport};
use crate::check::{check_program, summary_line, Diagnostic};
use crate::lang::{parse_source, pretty_print, ModelProgram};

pub const PROGRAM_FILE: &str = "radon.geist";
pub const TRANSPOSED_FILE: &str = "radon_transposed.geist";

#[derive(Debug, Clone, PartialEq)]
pub struct RadonConfig {
    pub states: usize,
    pub counties: usize,
    pub homes: usize,
    pub seed: u64,
    /// Fixed state intercepts; drawn from the model when `None`.
    pub gamma_0: Option<Vec<f64>>,
    pub gamma_1: f64,
    pub eta_0: f64,
    pub eta_1: f64,
    pub beta: f64,
    pub sigma_y: f64,
    pub sigma_a: f64,
    pub sigma_s: f64,
}

impl RadonConfig {
    pub fn new(states: usize, counties: usize, homes: usize, seed: u64) -> Self {
        Self {
            states,
            counties,
            homes,
            seed,
            gamma_0: None,
            gamma_1: 0.7,
            eta_0: 1.0,
            eta_1: 0.5,
            beta: -0.6,
            sigma_y: 0.8,
            sigma_a: 0.3,
            sigma_s: 0.2,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(1 <= self.states && self.states <= self.counties && self.counties <= self.homes) {
            return Err(ConfigError::Sizes {
                states: self.states,
                counties: self.counties,
                homes: self.homes,
            });
        }
        for (name, s) in [
            ("sigma_y", self.sigma_y),
            ("sigma_a", self.sigma_a),
            ("sigma_s", self.sigma_s),
        ] {
            if !(s > 0.0 && s.is_finite()) {
                return Err(ConfigError::Sigma(name, s));
            }
        }
        if let Some(g) = &self.gamma_0 {
            if g.len() != self.states {
                return Err(ConfigError::Gamma0(g.len(), self.states));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("need 1 <= states <= counties <= homes, got {states}, {counties}, {homes}")]
    Sizes {
        states: usize,
        counties: usize,
        homes: usize,
    },
    #[error("{0} must be positive, got {1}")]
    Sigma(&'static str, f64),
    #[error("gamma_0 has {0} entries for {1} states")]
    Gamma0(usize, usize),
}

/// Generated data, kept numerically for oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct RadonData {
    pub state_of_county: Vec<usize>,
    pub county_idx: Vec<usize>,
    pub state_idx_obs: Vec<usize>,
    pub v: Vec<f64>,
    pub gamma_0: Vec<f64>,
    pub u: Vec<f64>,
    pub a: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// The program text and its data files.
#[derive(Debug, Clone)]
pub struct RadonFiles {
    pub program: String,
    pub files: Vec<(String, String)>,
    pub data: RadonData,
}

impl RadonFiles {
    pub fn source(&self) -> MemorySource {
        let mut mem = MemorySource::new();
        for (path, text) in &self.files {
            mem.insert(path.clone(), text.clone());
        }
        mem
    }
}

/// A surjective assignment of `n` children to `k` parents.
fn assignment(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..k).collect();
    out.extend((k..n).map(|_| rng.random_range(0..k)));
    out.shuffle(rng);
    out
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn simulate(config: &RadonConfig) -> Result<RadonData, ConfigError> {
    config.validate()?;
    let (s, j, n) = (config.states, config.counties, config.homes);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let state_of_county = assignment(&mut rng, j, s);
    let county_idx = assignment(&mut rng, n, j);
    let state_idx_obs = county_idx.iter().map(|&c| state_of_county[c]).collect();
    let v: Vec<f64> = (0..s).map(|_| normal(&mut rng)).collect();
    let gamma_0 = match &config.gamma_0 {
        Some(g) => g.clone(),
        None => v
            .iter()
            .map(|&vs| config.eta_0 + config.eta_1 * vs + config.sigma_s * normal(&mut rng))
            .collect(),
    };
    let u: Vec<f64> = (0..j).map(|_| normal(&mut rng)).collect();
    let a: Vec<f64> = (0..j)
        .map(|c| {
            gamma_0[state_of_county[c]] + config.gamma_1 * u[c] + config.sigma_a * normal(&mut rng)
        })
        .collect();
    let x: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 })
        .collect();
    let y = (0..n)
        .map(|i| a[county_idx[i]] + config.beta * x[i] + config.sigma_y * normal(&mut rng))
        .collect();
    Ok(RadonData {
        state_of_county,
        county_idx,
        state_idx_obs,
        v,
        gamma_0,
        u,
        a,
        x,
        y,
    })
}

/// Renders the model program for `config`.
pub fn program_text(config: &RadonConfig) -> String {
    let c = config;
    let mut p = String::new();
    let _ = write!(
        p,
        "\
# Three-level radon model: states -> counties -> homes.
dataset Data obs {n}
axis State size {s}
axis County size {j}
axis Home size {n}

map state_of_county : State -> County in Data from \"state_of_county.csv\"
map county_of_home : County -> Home in Data from \"county_idx.csv\"
idx county_idx : County in Data from \"county_idx.csv\"
idx state_idx_obs : State in Data from \"state_idx_obs.csv\"

vec v : State from \"v.csv\"
vec gamma_0 : State from \"gamma_0.csv\"
vec u : County from \"u.csv\"
vec a : County from \"a.csv\"
vec x : Data from \"x.csv\"
vec y : Data from \"y.csv\"

let eta_0 = {eta_0:?}
let eta_1 = {eta_1:?}
let gamma_1 = {gamma_1:?}
let beta = {beta:?}
let sigma_s = {sigma_s:?}
let sigma_a = {sigma_a:?}
let sigma_y = {sigma_y:?}

# State level.
let gamma_0_mean : Vec[State] = eta_0 + eta_1 * v
observe gamma_0 ~ normal(gamma_0_mean, sigma_s)

# County level.
let gamma_0_county : Vec[County] = lift(gamma_0, County)
let a_mean : Vec[County] = gamma_0_county + gamma_1 * u
observe a ~ normal(a_mean, sigma_a)

# Observation level.
let county_effects : Obs[Data] = gather(a, county_idx)
let mu : Obs[Data] = county_effects + beta * x
observe y ~ normal(mu, sigma_y)

# Index bookkeeping.
let state_idx_derived : Idx[State, Data] = reindex(state_of_county, county_idx)
check gather(gamma_0, state_idx_derived) : Obs[Data]
check state_idx_obs : Idx[State, Data]
check lift(a, Home) : Vec[Home]
",
        n = c.homes,
        s = c.states,
        j = c.counties,
        eta_0 = c.eta_0,
        eta_1 = c.eta_1,
        gamma_1 = c.gamma_1,
        beta = c.beta,
        sigma_s = c.sigma_s,
        sigma_a = c.sigma_a,
        sigma_y = c.sigma_y,
    );
    p
}

fn reals(values: &[f64]) -> Vec<String> {
    values.iter().map(|v| format!("{v:?}")).collect()
}

pub fn generate(config: &RadonConfig) -> Result<RadonFiles, ConfigError> {
    let data = simulate(config)?;
    let files = vec![
        (
            "state_of_county.csv".to_string(),
            write_column("state_of_county", &data.state_of_county),
        ),
        (
            "county_idx.csv".to_string(),
            write_column("county_idx", &data.county_idx),
        ),
        (
            "state_idx_obs.csv".to_string(),
            write_column("state_idx_obs", &data.state_idx_obs),
        ),
        ("v.csv".to_string(), write_column("v", &reals(&data.v))),
        (
            "gamma_0.csv".to_string(),
            write_column("gamma_0", &reals(&data.gamma_0)),
        ),
        ("u.csv".to_string(), write_column("u", &reals(&data.u))),
        ("a.csv".to_string(), write_column("a", &reals(&data.a))),
        ("x.csv".to_string(), write_column("x", &reals(&data.x))),
        ("y.csv".to_string(), write_column("y", &reals(&data.y))),
    ];
    Ok(RadonFiles {
        program: program_text(config),
        files,
        data,
    })
}

/// The index-transposition variant: every use of `county_idx` and
/// `state_idx_obs` swapped.
pub fn transposed(program: &ModelProgram) -> ModelProgram {
    swap_uses(program, "county_idx", "state_idx_obs")
}

#[derive(Debug, Clone)]
pub struct DemoReport {
    pub config: RadonConfig,
    pub files: RadonFiles,
    pub transposed_program: String,
    pub diagnostics: Vec<Diagnostic>,
    pub eval: EvalReport,
    pub transposed_diagnostics: Vec<Diagnostic>,
    /// Forced evaluation of the transposed variant with checking disabled.
    pub transposed_eval: Result<EvalReport, EvalError>,
}

impl DemoReport {
    /// Log-likelihood change caused by the transposition, if the forced
    /// evaluation ran.
    pub fn delta(&self) -> Option<f64> {
        self.transposed_eval
            .as_ref()
            .ok()
            .map(|r| r.total - self.eval.total)
    }

    pub fn render(&self) -> String {
        let c = &self.config;
        let mut out = format!(
            "radon demo: states={} counties={} homes={} seed={}\n",
            c.states, c.counties, c.homes, c.seed
        );
        for d in &self.diagnostics {
            out.push_str(&d.render(PROGRAM_FILE, false));
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "check {PROGRAM_FILE}: {}",
            summary_line(&self.diagnostics)
        );
        out.push_str(&self.eval.render());
        let _ = writeln!(out, "transposed variant (county_idx <-> state_idx_obs):");
        for d in &self.transposed_diagnostics {
            let _ = writeln!(out, "  {}", d.render(TRANSPOSED_FILE, false));
        }
        let _ = writeln!(
            out,
            "  check {TRANSPOSED_FILE}: {}",
            summary_line(&self.transposed_diagnostics)
        );
        match &self.transposed_eval {
            Ok(r) => {
                let _ = writeln!(
                    out,
                    "  forced evaluation (--unsafe-skip-check): total loglik = {:?}",
                    r.total
                );
                let _ = writeln!(out, "  loglik delta = {:?}", r.total - self.eval.total);
            }
            Err(EvalError::Data(d)) => {
                let _ = writeln!(out, "  forced evaluation failed: {}", d.message);
            }
            Err(e) => {
                let _ = writeln!(out, "  forced evaluation failed: {e:?}");
            }
        }
        out
    }
}

/// Generates the model, checks and evaluates it, then does the same for the
/// transposed variant with checking bypassed.
pub fn run_demo(config: &RadonConfig) -> Result<DemoReport, ConfigError> {
    let files = generate(config)?;
    let mem = files.source();
    let program = parse_source(&files.program).expect("generated program parses");
    let diagnostics = check_program(&program);
    let eval = evaluate(&program, &mem).expect("generated program evaluates");
    let swapped = transposed(&program);
    let transposed_program = pretty_print(&swapped);
    let reparsed = parse_source(&transposed_program).expect("printed program parses");
    let transposed_diagnostics: Vec<Diagnostic> = check_program(&reparsed)
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    let transposed_eval = evaluate_unchecked(&reparsed, &mem);
    Ok(DemoReport {
        config: config.clone(),
        files,
        transposed_program,
        diagnostics,
        eval,
        transposed_diagnostics,
        transposed_eval,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(RadonConfig::new(2, 3, 10, 0).validate().is_ok());
        assert!(RadonConfig::new(4, 3, 10, 0).validate().is_err());
        assert!(RadonConfig::new(1, 11, 10, 0).validate().is_err());
        assert!(RadonConfig::new(0, 1, 1, 0).validate().is_err());
        let mut c = RadonConfig::new(1, 1, 1, 0);
        c.sigma_y = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn every_level_is_populated() {
        for seed in 0..20 {
            let d = simulate(&RadonConfig::new(3, 7, 30, seed)).unwrap();
            let mut states: Vec<_> = d.state_of_county.clone();
            states.sort();
            states.dedup();
            assert_eq!(states, [0, 1, 2]);
            let mut counties = d.county_idx.clone();
            counties.sort();
            counties.dedup();
            assert_eq!(counties, (0..7).collect::<Vec<_>>());
        }
    }

    #[test]
    fn reproducible() {
        let a = generate(&RadonConfig::new(2, 3, 10, 42)).unwrap();
        let b = generate(&RadonConfig::new(2, 3, 10, 42)).unwrap();
        assert_eq!(a.program, b.program);
        assert_eq!(a.files, b.files);
        let c = generate(&RadonConfig::new(2, 3, 10, 43)).unwrap();
        assert_ne!(a.files, c.files);
    }

    #[test]
    fn demo_checks_clean_and_transposition_is_caught() {
        let r = run_demo(&RadonConfig::new(2, 3, 10, 42)).unwrap();
        assert!(r.diagnostics.is_empty(), "{:?}", r.diagnostics);
        assert!(!r.transposed_diagnostics.is_empty());
        assert!(r.delta().is_some());
    }

    #[test]
    fn single_level_transposition_changes_nothing() {
        let r = run_demo(&RadonConfig::new(1, 1, 1, 7)).unwrap();
        assert_eq!(r.delta(), Some(0.0));
    }
}
