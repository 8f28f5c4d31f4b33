use geist_wasm_demo::{check_source, explore_ops, preset, preset_names, radon_demo};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn every_preset_checks() {
    let names = parse(preset_names());
    let names = names.as_array().unwrap();
    assert_eq!(names.len(), 10);
    for name in names {
        let name = name.as_str().unwrap();
        let r = parse(check_source(&preset(name)));
        let clean = name.ends_with("_fixed") || name == "radon";
        assert_eq!(r["ok"], clean, "{name}");
        if !clean {
            assert!(!r["diagnostics"].as_array().unwrap().is_empty());
        }
    }
    assert_eq!(preset("no such example"), "");
}

#[test]
fn failure_modes_report_their_codes() {
    for (name, code) in [
        ("inversion", "E101"),
        ("unregistered_lift", "E102"),
        ("dropped_plate", "E103"),
        ("mismatched_obs", "E104"),
    ] {
        let r = parse(check_source(&preset(name)));
        let ds = r["diagnostics"].as_array().unwrap();
        assert_eq!(ds.len(), 1, "{name}");
        assert_eq!(ds[0]["code"], code);
        assert!(ds[0]["rendered"]
            .as_str()
            .unwrap()
            .starts_with("model.geist:"));
    }
}

#[test]
fn syntax_errors_are_reported() {
    let r = parse(check_source("let = 1\n"));
    assert_eq!(r["ok"], false);
    assert_eq!(r["diagnostics"][0]["code"], "E002");
}

#[test]
fn radon_demo_flags_the_transposition() {
    let r = parse(radon_demo(2, 5, 50, 42));
    assert!(r["error"].is_null());
    let codes: Vec<&str> = r["transposed_diagnostics"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["code"].as_str().unwrap())
        .collect();
    assert!(codes.contains(&"E101"));
    assert!(r["delta"].as_f64().unwrap().abs() > 1e-12);
    assert_eq!(parse(radon_demo(2, 5, 50, 42)), r);
    assert!(parse(radon_demo(0, 5, 50, 1))["error"].is_string());
}

#[test]
fn both_routes_agree() {
    for seed in 0..20 {
        let r = parse(explore_ops(4, 9, 15, seed));
        assert_eq!(r["commutes"], true);
        assert_eq!(r["via_lift"], r["via_reindex"]);
        assert!(r["misuse"].as_str().unwrap().contains("County"));
    }
    assert!(parse(explore_ops(0, 3, 3, 0))["error"].is_string());
}
