use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use codid::csv_io::{read_records, write_panel};
use codid_core::bootstrap::{bootstrap, BootstrapConfig, Target};
use codid_core::panel::{PanelDataset, PanelOptions};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn tests_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests")
}

fn codid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_codid"))
        .args(args)
        .current_dir(tests_dir().join("data"))
        .output()
        .expect("binary runs")
}

fn golden(name: &str, args: &[&str]) {
    let out = codid(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let expected = std::fs::read(tests_dir().join("golden").join(name)).unwrap();
    assert!(out.stdout == expected, "{name} differs from golden output");
}

fn json(args: &[&str]) -> Value {
    let out = codid(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn golden_outputs() {
    golden("estimate_minimal.json", &["estimate", "minimal.csv"]);
    golden("demo_fig1.json", &["demo-fig1"]);
    golden("demo_fig1.txt", &["demo-fig1", "--format", "text"]);
    golden("bounds_decay.json", &["bounds", "bounds.csv", "--weights", "decay:0.5"]);
    golden("staggered_never.json", &["staggered", "staggered.csv", "cohorts.csv", "--strategy", "never"]);
    golden("simulate_population.csv", &["simulate", "spec.json"]);
    golden("synthetic.json", &["synthetic", "synthetic.csv", "--t0", "2"]);
}

#[test]
fn estimate_on_minimal_panel() {
    let doc = json(&["estimate", "minimal.csv"]);
    assert_eq!(doc["schema"], "codid.v1");
    assert_eq!(doc["command"], "estimate");
    let r = &doc["result"];
    for (got, want) in floats(&r["q_counterfactual"]).iter().zip([60.0, 20.0, 10.0]) {
        assert!((got - want).abs() < 1e-9);
    }
    assert!((r["S_counterfactual"].as_f64().unwrap() - 90.0).abs() < 1e-9);
    assert!(floats(&r["gtt"]).iter().all(|g| (g - 0.1).abs() < 1e-9));
    assert!((r["gtt_total"].as_f64().unwrap() - 0.1).abs() < 1e-9);
}

#[test]
fn bootstrap_flags_are_echoed_and_deterministic() {
    let args = ["estimate", "minimal.csv", "--bootstrap", "50", "--seed", "7"];
    let a = codid(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, codid(&args).stdout);
    let doc: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["config"]["bootstrap"]["replicates"], 50);
    assert_eq!(doc["config"]["bootstrap"]["seed"], 7);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing_col.csv");
    std::fs::write(&missing, "group,time,count\ncontrol,0,1\n").unwrap();
    let out = codid(&["estimate", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("panel.missing_column"));

    let unbalanced = dir.path().join("unbalanced.csv");
    let text = std::fs::read_to_string(tests_dir().join("data/minimal.csv")).unwrap();
    std::fs::write(&unbalanced, text.lines().take(12).collect::<Vec<_>>().join("\n")).unwrap();
    assert_eq!(codid(&["validate", unbalanced.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(codid(&["validate", "minimal.csv"]).status.code(), Some(0));

    assert_eq!(codid(&["estimate", "no_such_file.csv"]).status.code(), Some(1));
    assert_eq!(codid(&["bounds", "bounds.csv", "--weights", "decay:-1"]).status.code(), Some(2));
    assert_eq!(codid(&["synthetic", "synthetic.csv"]).status.code(), Some(2));
}

#[test]
fn output_file_and_csv_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = codid(&["estimate", "minimal.csv", "--format", "csv", "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("path,value\n"));
    assert!(text.contains("\ngtt_total,"));
}

#[test]
fn smoothing_flag_fills_zero_cells() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.csv");
    let text = std::fs::read_to_string(tests_dir().join("data/minimal.csv")).unwrap();
    std::fs::write(&path, text.replace("control,1,b,10", "control,1,b,0")).unwrap();
    let p = path.to_str().unwrap();
    assert_ne!(codid(&["estimate", p]).status.code(), Some(0));
    let doc = json(&["estimate", p, "--smooth", "0.5"]);
    assert_eq!(floats(&doc["result"]["q_control_post"]), [20.5, 0.5, 40.5]);
}

fn random_panel() -> impl Strategy<Value = String> {
    panel_of(2..4)
}

fn panel_of(groups_and_periods: std::ops::Range<usize>) -> impl Strategy<Value = String> {
    (groups_and_periods.clone(), groups_and_periods, 2usize..4)
        .prop_flat_map(|(g, t, k)| (Just((g, t, k)), prop::collection::vec(1u32..500, g * t * k)))
        .prop_map(|((g, t, k), counts)| {
            let mut text = String::from("group,time,category,count\n");
            let mut it = counts.into_iter();
            for gi in 0..g {
                for ti in 0..t {
                    for ki in 0..k {
                        text += &format!("g{gi},{ti},c{ki},{}\n", it.next().unwrap());
                    }
                }
            }
            text
        })
}

fn parse(text: &str) -> PanelDataset {
    PanelDataset::from_records(&read_records(text.as_bytes()).unwrap(), &PanelOptions::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn row_order_does_not_matter(text in random_panel(), seed in any::<u64>()) {
        let mut lines: Vec<&str> = text.lines().skip(1).collect();
        lines.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled = format!("group,time,category,count\n{}\n", lines.join("\n"));
        prop_assert_eq!(parse(&text), parse(&shuffled));
    }

    #[test]
    fn export_round_trips(text in random_panel()) {
        let panel = parse(&text);
        let mut buf = Vec::new();
        write_panel(&panel, &mut buf).unwrap();
        prop_assert_eq!(parse(std::str::from_utf8(&buf).unwrap()), panel);
    }

    #[test]
    fn parallel_bootstrap_matches_sequential(text in panel_of(2..3), seed in any::<u64>()) {
        let panel = parse(&text);
        let config = BootstrapConfig { replicates: 20, seed, ..BootstrapConfig::default() };
        let target = Target::TwoByTwo;
        let last = panel.groups().last().unwrap().id.clone();
        let treated = panel.with_treated(&last, 1).unwrap();
        let seq = bootstrap(&treated, &target, config).unwrap();
        let par = codid::parallel::bootstrap(&treated, &target, config).unwrap();
        prop_assert_eq!(format!("{seq:?}"), format!("{par:?}"));
    }
}
