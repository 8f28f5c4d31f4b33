#![allow(dead_code)]

use std::fmt::Write;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

/// Every `.geist` file under the corpus, sorted.
pub fn corpus_files() -> Vec<PathBuf> {
    let mut out = Vec::new();
    for sub in std::fs::read_dir(corpus_dir()).unwrap() {
        let sub = sub.unwrap().path();
        if !sub.is_dir() {
            continue;
        }
        for f in std::fs::read_dir(&sub).unwrap() {
            let f = f.unwrap().path();
            if f.extension().is_some_and(|e| e == "geist") {
                out.push(f);
            }
        }
    }
    out.sort();
    out
}

/// Random axis hierarchy: a forest of depth at most four levels, with
/// occasional second parents that turn it into a DAG.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub sizes: Vec<usize>,
    /// `(parent, child)` pairs.
    pub edges: Vec<(usize, usize)>,
}

impl Hierarchy {
    pub fn random(rng: &mut ChaCha8Rng, max_axes: usize, max_size: usize) -> Self {
        let n = rng.random_range(2..=max_axes);
        let sizes: Vec<usize> = (0..n).map(|_| rng.random_range(1..=max_size)).collect();
        let mut depth = vec![0usize; n];
        let mut edges = Vec::new();
        for c in 1..n {
            let parents: Vec<usize> = (0..c).filter(|&p| depth[p] < 3).collect();
            if parents.is_empty() || rng.random_bool(0.2) {
                continue;
            }
            let p = *parents.choose(rng).unwrap();
            depth[c] = depth[p] + 1;
            edges.push((p, c));
            if rng.random_bool(0.3) {
                let others: Vec<usize> = parents.iter().copied().filter(|&q| q != p).collect();
                if let Some(&q) = others.choose(rng) {
                    depth[c] = depth[c].max(depth[q] + 1);
                    edges.push((q, c));
                }
            }
        }
        Hierarchy { sizes, edges }
    }

    /// Number of distinct directed paths from `from` to `to`, by plain
    /// enumeration.
    pub fn paths(&self, from: usize, to: usize) -> usize {
        if from == to {
            return 1;
        }
        self.edges
            .iter()
            .filter(|(p, _)| *p == from)
            .map(|&(_, c)| self.paths(c, to))
            .sum()
    }
}

fn reals(rng: &mut ChaCha8Rng, n: usize) -> String {
    let xs: Vec<String> = (0..n)
        .map(|_| format!("{}", rng.random_range(-300..=300) as f64 / 100.0))
        .collect();
    format!("[{}]", xs.join(", "))
}

fn indices(rng: &mut ChaCha8Rng, n: usize, bound: usize) -> String {
    let xs: Vec<String> = (0..n)
        .map(|_| rng.random_range(0..bound).to_string())
        .collect();
    format!("[{}]", xs.join(", "))
}

/// A well-typed program over a random hierarchy with inline data.
///
/// Every vector is gathered through the index over its own axis, every
/// binding is annotated and every map is used by a `reindex`, so any
/// change to an axis, an index or a map direction shows up as a type error.
pub fn well_typed_program(rng: &mut ChaCha8Rng) -> String {
    let h = Hierarchy::random(rng, 6, 8);
    let n = h.sizes.len();
    let obs = rng.random_range(1..=12);
    let mut s = String::new();
    writeln!(s, "dataset Data obs {obs}").unwrap();
    for (k, size) in h.sizes.iter().enumerate() {
        writeln!(s, "axis A{k} size {size}").unwrap();
    }
    for &(p, c) in &h.edges {
        let entries = indices(rng, h.sizes[c], h.sizes[p]);
        writeln!(s, "map m{p}_{c} : A{p} -> A{c} in Data = {entries}").unwrap();
    }
    for k in 0..n {
        let entries = indices(rng, obs, h.sizes[k]);
        writeln!(s, "idx i{k} : A{k} in Data = {entries}").unwrap();
    }
    for k in 0..n {
        let values = reals(rng, h.sizes[k]);
        writeln!(s, "vec v{k} : A{k} = {values}").unwrap();
    }
    writeln!(s, "vec y : Data = {}", reals(rng, obs)).unwrap();

    for k in 0..n {
        writeln!(s, "let o{k} : Obs[Data] = gather(v{k}, i{k})").unwrap();
    }
    let mut liftable: Vec<(usize, usize)> = (0..n)
        .flat_map(|k| (0..n).map(move |l| (k, l)))
        .filter(|&(k, l)| k != l && h.paths(k, l) == 1)
        .collect();
    let mut lifts = Vec::new();
    for _ in 0..3 {
        if liftable.is_empty() {
            break;
        }
        let (k, l) = liftable.swap_remove(rng.random_range(0..liftable.len()));
        writeln!(s, "let l{k}_{l} : Vec[A{l}] = lift(v{k}, A{l})").unwrap();
        if rng.random_bool(0.5) {
            writeln!(s, "let s{k}_{l} : Vec[A{l}] = l{k}_{l} + 0.5 * v{l}").unwrap();
        }
        if rng.random_bool(0.5) {
            writeln!(s, "observe v{l} ~ normal(l{k}_{l}, 0.9)").unwrap();
        }
        lifts.push((k, l));
    }
    for &(p, c) in &h.edges {
        writeln!(
            s,
            "let r{p}_{c} : Idx[A{p}, Data] = reindex(m{p}_{c}, i{c})"
        )
        .unwrap();
        writeln!(s, "check gather(v{p}, r{p}_{c}) : Obs[Data]").unwrap();
    }
    let mut mean = "o0".to_string();
    for k in 1..n {
        if rng.random_bool(0.6) {
            let c = rng.random_range(1..=9) as f64 / 4.0;
            write!(mean, " + {c} * o{k}").unwrap();
        }
    }
    writeln!(s, "let mu : Obs[Data] = {mean}").unwrap();
    let sigma = rng.random_range(2..=20) as f64 / 10.0;
    writeln!(s, "observe y ~ normal(mu, {sigma})").unwrap();
    s
}
