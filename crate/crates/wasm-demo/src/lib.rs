//! Browser bindings for the checker and the index algebra.
//!
//! Every function takes plain values and returns a JSON string, so the page
//! needs no glue beyond `JSON.parse`.

use geist_core::axis::{gather, lift, reindex, AxisMap, AxisTag, DatasetTag, IndexArray, TypedVec};
use geist_core::check::{check_program, summary_line, Diagnostic};
use geist_core::lang::parse_source;
use geist_core::runtime::radon::{run_demo, RadonConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const FILE: &str = "model.geist";

const PRESETS: &[(&str, &str)] = &[
    (
        "inversion",
        include_str!("../../core/tests/corpus/failure_modes/inversion.geist"),
    ),
    (
        "inversion_fixed",
        include_str!("../../core/tests/corpus/failure_modes/inversion_fixed.geist"),
    ),
    (
        "unregistered_lift",
        include_str!("../../core/tests/corpus/failure_modes/unregistered_lift.geist"),
    ),
    (
        "unregistered_lift_fixed",
        include_str!("../../core/tests/corpus/failure_modes/unregistered_lift_fixed.geist"),
    ),
    (
        "dropped_plate",
        include_str!("../../core/tests/corpus/failure_modes/dropped_plate.geist"),
    ),
    (
        "dropped_plate_fixed",
        include_str!("../../core/tests/corpus/failure_modes/dropped_plate_fixed.geist"),
    ),
    (
        "mismatched_obs",
        include_str!("../../core/tests/corpus/failure_modes/mismatched_obs.geist"),
    ),
    (
        "mismatched_obs_fixed",
        include_str!("../../core/tests/corpus/failure_modes/mismatched_obs_fixed.geist"),
    ),
    (
        "radon",
        include_str!("../../core/tests/corpus/radon/radon.geist"),
    ),
    (
        "radon_transposed",
        include_str!("../../core/tests/corpus/radon/radon_transposed.geist"),
    ),
];

fn records(ds: &[Diagnostic]) -> Value {
    ds.iter()
        .map(|d| {
            let mut r = serde_json::to_value(d.record(FILE)).expect("serializable");
            r["rendered"] = d.render(FILE, false).into();
            r
        })
        .collect()
}

/// Names of the bundled example models, as a JSON array.
#[wasm_bindgen]
pub fn preset_names() -> String {
    json!(PRESETS.iter().map(|(n, _)| *n).collect::<Vec<_>>()).to_string()
}

/// Source of a bundled example, or an empty string for unknown names.
#[wasm_bindgen]
pub fn preset(name: &str) -> String {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| src.to_string())
        .unwrap_or_default()
}

/// Type-checks a model. Returns `{ok, diagnostics, summary}`.
#[wasm_bindgen]
pub fn check_source(src: &str) -> String {
    let ds = match parse_source(src) {
        Ok(program) => check_program(&program),
        Err(errs) => errs.iter().map(Diagnostic::from_syntax).collect(),
    };
    json!({
        "ok": !ds.iter().any(Diagnostic::is_error),
        "diagnostics": records(&ds),
        "summary": summary_line(&ds),
    })
    .to_string()
}

/// Generates the radon model, checks it, evaluates it, and does the same
/// for its transposed-index variant.
#[wasm_bindgen]
pub fn radon_demo(states: u32, counties: u32, homes: u32, seed: u32) -> String {
    let config = RadonConfig::new(
        states as usize,
        counties as usize,
        homes as usize,
        u64::from(seed),
    );
    match run_demo(&config) {
        Err(e) => json!({ "error": e.to_string() }),
        Ok(report) => json!({
            "program": report.files.program,
            "transposed_program": report.transposed_program,
            "loglik": report.eval.total,
            "transposed_diagnostics": records(&report.transposed_diagnostics),
            "transposed_loglik": report.transposed_eval.as_ref().ok().map(|e| e.total),
            "delta": report.delta(),
            "report": report.render(),
        }),
    }
    .to_string()
}

/// Random two-level data pushed both ways around the square
/// `gather(lift(m, v), i) == gather(v, reindex(m, i))`, plus the error the
/// typed layer raises for `gather(v, i)` with the wrong index.
#[wasm_bindgen]
pub fn explore_ops(parents: u32, children: u32, obs: u32, seed: u32) -> String {
    match explore(
        parents as usize,
        children as usize,
        obs as usize,
        u64::from(seed),
    ) {
        Ok(v) => v,
        Err(e) => json!({ "error": e.to_string() }),
    }
    .to_string()
}

fn explore(
    parents: usize,
    children: usize,
    obs: usize,
    seed: u64,
) -> geist_core::axis::Result<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let county = AxisTag::new("County", parents)?;
    let home = AxisTag::new("Home", children)?;
    let data = DatasetTag::new("Data", obs)?;
    let entries = (0..children)
        .map(|_| rng.random_range(0..parents))
        .collect();
    let map = AxisMap::new(county.clone(), home.clone(), data.clone(), entries)?;
    let values = (0..parents)
        .map(|_| (rng.random_range(-200..=200) as f64) / 100.0)
        .collect();
    let v = TypedVec::new(county, values)?;
    let indices = (0..obs).map(|_| rng.random_range(0..children)).collect();
    let idx = IndexArray::new(home, data, indices)?;

    let lifted = lift(&map, &v)?;
    let via_lift = gather(&lifted, &idx)?;
    let derived = reindex(&map, &idx)?;
    let via_reindex = gather(&v, &derived)?;
    let commutes = via_lift
        .values()
        .iter()
        .zip(via_reindex.values())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    let misuse = gather(&v, &idx).err().map(|e| e.to_string());
    Ok(json!({
        "map": map.entries(),
        "v": v.values(),
        "idx": idx.indices(),
        "lifted": lifted.values(),
        "via_lift": via_lift.values(),
        "derived_idx": derived.indices(),
        "via_reindex": via_reindex.values(),
        "commutes": commutes,
        "misuse": misuse,
    }))
}
