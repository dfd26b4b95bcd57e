use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use ellinc_cli::bench;
use ellinc_cli::commands;
use ellinc_cli::documents::{parse, CoverDoc, PairInput, SystemDoc};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn ellinc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellinc")).args(args).output().unwrap()
}

fn ellinc_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ellinc"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn exit_codes_match_verdicts_across_fixtures() {
    let table = [
        ("concentric_inside.json", 0),
        ("interval_inside.json", 0),
        ("analytic_outside.json", 1),
        ("center_outside.json", 1),
        ("batch.json", 1),
        ("identical_touching.json", 2),
        ("interval_touching.json", 2),
        ("malformed.json", 64),
        ("cover_mirror.json", 64),
        ("dimension_mismatch.json", 65),
        ("not_spd.json", 65),
    ];
    for (name, code) in table {
        let out = ellinc(&["check", fixture(name).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(code), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        if code >= 64 {
            assert!(out.stdout.is_empty());
            assert!(!out.stderr.is_empty());
        }
    }
}

#[test]
fn check_reports_rule_and_bracket() {
    let out = ellinc(&["check", fixture("concentric_inside.json").to_str().unwrap()]);
    let v = json_of(&out);
    assert_eq!(v["verdict"], "inside");
    assert_eq!(v["rule"], "pretest:concentric");

    let out = ellinc(&["check", fixture("analytic_outside.json").to_str().unwrap()]);
    let v = json_of(&out);
    assert_eq!(v["verdict"], "outside");
    assert_eq!(v["rule"], "bisection");
    assert!(v["bracket"].is_array());

    let out = ellinc(&["check", "--eps", "1e-6", fixture("identical_touching.json").to_str().unwrap()]);
    let v = json_of(&out);
    assert_eq!(v["verdict"], "touching_eps");
    let b = v["bracket"].as_array().unwrap();
    assert!(b[1].as_f64().unwrap() - b[0].as_f64().unwrap() <= 1e-6);
}

#[test]
fn batch_reports_every_pair() {
    let out = ellinc(&["check", fixture("batch.json").to_str().unwrap()]);
    let v = json_of(&out);
    let verdicts: Vec<_> = v.as_array().unwrap().iter().map(|x| x["verdict"].clone()).collect();
    assert_eq!(verdicts, vec!["inside", "outside"]);
}

#[test]
fn reads_stdin() {
    let text = std::fs::read_to_string(fixture("interval_inside.json")).unwrap();
    let out = ellinc_stdin(&["gamma"], &text);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["gamma"], 0.5625);
    let out = ellinc_stdin(&["check", "-"], "not json");
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn gamma_examples() {
    let text = std::fs::read_to_string(fixture("identical_touching.json")).unwrap();
    let v = commands::gamma(&text, 1e-10).unwrap().json;
    assert_eq!(v["gamma"], 1.0);

    let text = std::fs::read_to_string(fixture("analytic_outside.json")).unwrap();
    let v = commands::gamma(&text, 1e-10).unwrap().json;
    assert_eq!(v["gamma"].as_f64().unwrap(), commands::sig15(15.0 / 14.0));
    assert_eq!(v["at_lower_boundary"], true);
}

#[test]
fn fifteen_significant_digits() {
    assert_eq!(commands::sig15(1.0 / 3.0).to_string(), "0.333333333333333");
    assert_eq!(commands::sig15(0.5625), 0.5625);
    assert_eq!(commands::sig15(0.0), 0.0);
}

#[test]
fn contact_requires_touching_unless_rescaled() {
    let path = fixture("interval_inside.json");
    let out = ellinc(&["contact", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let out = ellinc(&["contact", "--rescale", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["points"][0][0], 0.75);
    assert_eq!(v["gamma"], 0.5625);

    let out = ellinc(&["contact", fixture("interval_touching.json").to_str().unwrap()]);
    let v = json_of(&out);
    assert!((v["points"][0][0].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["degenerate"], false);
}

#[test]
fn degenerate_contact_has_two_mirrored_points() {
    let out = ellinc(&["contact", fixture("degenerate_touching.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["degenerate"], true);
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 2);
    assert_eq!(pts[0][0].as_f64().unwrap(), -pts[1][0].as_f64().unwrap());
    for r in v["residuals"].as_array().unwrap() {
        assert!(r["E"].as_f64().unwrap().abs() <= 1e-8);
        assert!(r["E0"].as_f64().unwrap().abs() <= 1e-8);
    }
}

#[test]
fn cover_mirror_pair() {
    let out = ellinc(&["cover", fixture("cover_mirror.json").to_str().unwrap()]);
    let v = json_of(&out);
    assert_eq!(v["gamma"], 0.5625);
    assert_eq!(v["maximizations"], 1);
}

#[test]
fn invariant_writes_trajectory() {
    let dir = std::env::temp_dir().join(format!("ellinc-traj-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("traj.csv");
    let out = ellinc(&[
        "invariant",
        fixture("feedback_system.json").to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
        "--x0=-1,-1",
        "--horizon",
        "2",
        "--seed",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    assert_eq!(v["simulation"]["holds"], true);
    assert_eq!(v["per_vertex_gammas"].as_array().unwrap().len(), 2);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,x1,x2,w1,v,v_dot\n"));
    assert_eq!(text.lines().count(), 2002);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn documents_round_trip() {
    for entry in std::fs::read_dir(fixture("")).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        let text = std::fs::read_to_string(&path).unwrap();
        let original: Value = match serde_json::from_str(&text) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let reserialized = if name.starts_with("cover") {
            serde_json::to_value(parse::<CoverDoc>(&text).unwrap()).unwrap()
        } else if name.ends_with("system.json") {
            serde_json::to_value(parse::<SystemDoc>(&text).unwrap()).unwrap()
        } else {
            serde_json::to_value(parse::<PairInput>(&text).unwrap()).unwrap()
        };
        assert_eq!(reserialized, original, "{name}");
    }
}

#[test]
fn bench_small_run_honours_the_generator_contract() {
    let runs = bench::run(&[3], 10, 1, 1e-12).unwrap();
    assert_eq!(runs.len(), 10);
    let inside = runs.iter().filter(|r| r.record.verdict == "inside").count();
    assert_eq!(inside, 5);
    assert!(runs.iter().all(|r| r.record.rule_fired == "bisection"));
    assert!(runs.iter().all(|r| r.record.wall_time_ns > 0));

    let one_d = bench::run(&[1], 6, 2, 1e-12).unwrap();
    for r in &one_d {
        let g = r.record.gamma.unwrap();
        assert_eq!(r.record.verdict == "inside", g < 1.0);
    }
}

#[test]
fn bench_csv_is_deterministic_apart_from_timing() {
    let strip = |out: &Output| -> Vec<String> {
        String::from_utf8(out.stdout.clone())
            .unwrap()
            .lines()
            .map(|l| {
                let mut cols: Vec<&str> = l.split(',').collect();
                cols.remove(4);
                cols.join(",")
            })
            .collect()
    };
    let args = ["bench", "--dims", "3,10", "--cases", "6", "--seed", "9"];
    let a = ellinc(&args);
    let b = ellinc(&args);
    assert_eq!(a.status.code(), Some(0));
    let lines = strip(&a);
    assert_eq!(lines[0], "n,case_id,verdict,iterations,rule_fired,gamma");
    assert_eq!(lines.len(), 13);
    assert_eq!(lines, strip(&b));
    assert!(String::from_utf8_lossy(&a.stderr).contains("median"));
}

#[test]
fn usage_errors_do_not_look_like_verdicts() {
    assert_eq!(ellinc(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(ellinc(&["--help"]).status.code(), Some(0));
}
