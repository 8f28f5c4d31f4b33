use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/corpus")
}

fn geist(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geist"))
        .current_dir(dir)
        .env_remove("GEIST_COLOR")
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_matches_golden_files_and_exit_codes() {
    let dir = corpus().join("failure_modes");
    for stem in [
        "inversion",
        "unregistered_lift",
        "dropped_plate",
        "mismatched_obs",
    ] {
        for (suffix, code) in [("", 1), ("_fixed", 0)] {
            let name = format!("{stem}{suffix}.geist");
            let out = geist(&dir, &["check", &name]);
            assert_eq!(out.status.code(), Some(code), "{name}");
            let golden =
                std::fs::read_to_string(dir.join(format!("{stem}{suffix}.expected"))).unwrap();
            assert_eq!(stdout(&out), golden, "{name}");
        }
    }
    let out = geist(&dir, &["check", "inversion.geist"]);
    assert_eq!(
        stdout(&out)
            .lines()
            .filter(|l| l.contains("error["))
            .count(),
        1
    );
}

#[test]
fn syntax_and_io_errors() {
    let dir = corpus().join("errors");
    assert_eq!(
        geist(&dir, &["check", "syntax_errors.geist"]).status.code(),
        Some(2)
    );
    assert_eq!(
        geist(&dir, &["check", "lex_error.geist"]).status.code(),
        Some(2)
    );
    assert_eq!(
        geist(&dir, &["check", "no_such_file.geist"]).status.code(),
        Some(3)
    );
    let programs = corpus().join("programs");
    let out = geist(&programs, &["eval", "symbolic.geist"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("error[E208]"));
}

#[test]
fn warnings_do_not_fail() {
    let out = geist(&corpus().join("programs"), &["check", "unused.geist"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("warning[W002]"));
}

#[test]
fn json_records() {
    let out = geist(
        &corpus().join("errors"),
        &["check", "--json", "inline_data.geist"],
    );
    assert_eq!(out.status.code(), Some(1));
    let records: Vec<serde_json::Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0]["code"], "E201");
    assert_eq!(records[0]["file"], "inline_data.geist");
    assert_eq!(records[0]["line"], 4);
    assert_eq!(records[1]["code"], "E202");
    assert_eq!(records[1]["severity"], "error");
}

#[test]
fn color_is_opt_in() {
    let dir = corpus().join("failure_modes");
    assert!(!stdout(&geist(&dir, &["check", "inversion.geist"])).contains('\x1b'));
    let out = Command::new(env!("CARGO_BIN_EXE_geist"))
        .current_dir(&dir)
        .env("GEIST_COLOR", "1")
        .args(["check", "inversion.geist"])
        .output()
        .unwrap();
    assert!(stdout(&out).contains("\x1b[1;31m"));
}

fn numbers(report: &str) -> Vec<String> {
    report
        .lines()
        .map(|l| match (l.find(" : "), l.find(" = ")) {
            (Some(a), Some(b)) if l.starts_with("let ") => format!("{}{}", &l[..a], &l[b..]),
            _ => l.to_string(),
        })
        .collect()
}

#[test]
fn eval_with_and_without_checking() {
    let dir = corpus().join("programs");
    let checked = geist(&dir, &["eval", "hand_eval.geist"]);
    assert_eq!(checked.status.code(), Some(0));
    let text = stdout(&checked);
    assert!(text.contains("let mu : Obs[Data] (len 3) = [1.0, 1.5, 2.5]"));
    let unchecked = geist(&dir, &["eval", "--unsafe-skip-check", "hand_eval.geist"]);
    assert_eq!(unchecked.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&unchecked.stderr).contains("--unsafe-skip-check"));
    assert_eq!(numbers(&text), numbers(&stdout(&unchecked)));

    let failing = geist(
        &corpus().join("failure_modes"),
        &["eval", "inversion.geist"],
    );
    assert_eq!(failing.status.code(), Some(1));
    let forced = geist(
        &corpus().join("failure_modes"),
        &["eval", "--unsafe-skip-check", "inversion.geist"],
    );
    assert_eq!(forced.status.code(), Some(3));
    assert!(stdout(&forced).contains("error[E201]"));
}

#[test]
fn radon_demo_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |out: &str| {
        let o = geist(
            tmp.path(),
            &[
                "demo",
                "radon",
                "--states",
                "2",
                "--counties",
                "4",
                "--homes",
                "30",
                "--seed",
                "7",
                "--out",
                out,
            ],
        );
        assert_eq!(o.status.code(), Some(0));
        stdout(&o)
    };
    let first = run("a");
    let second = run("b");
    assert_eq!(first.replace(" a\n", "\n"), second.replace(" b\n", "\n"));
    let mut names: Vec<String> = std::fs::read_dir(tmp.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for name in &names {
        assert_eq!(
            std::fs::read(tmp.path().join("a").join(name)).unwrap(),
            std::fs::read(tmp.path().join("b").join(name)).unwrap(),
            "{name}"
        );
    }
    assert!(names.contains(&"radon.geist".to_string()));
    assert!(names.contains(&"y.csv".to_string()));

    let a = tmp.path().join("a");
    assert_eq!(geist(&a, &["check", "radon.geist"]).status.code(), Some(0));
    assert_eq!(
        geist(&a, &["check", "radon_transposed.geist"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(geist(&a, &["eval", "radon.geist"]).status.code(), Some(0));

    let bad = geist(
        tmp.path(),
        &["demo", "radon", "--states", "0", "--out", "c"],
    );
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn mutate_reports_every_mutant() {
    let dir = corpus().join("radon");
    let out = geist(&dir, &["mutate", "radon.geist", "--json", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let summary: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    let total = summary["total_mutants"].as_u64().unwrap();
    assert!(total > 0);
    assert_eq!(summary["statically_caught"], total);
    assert_eq!(text.lines().count() as u64, total + 1);

    let few = geist(&dir, &["mutate", "radon.geist", "--trials", "5", "--json"]);
    assert_eq!(stdout(&few).lines().count(), 6);

    let ill = geist(
        &corpus().join("failure_modes"),
        &["mutate", "inversion.geist"],
    );
    assert_eq!(ill.status.code(), Some(1));
}
