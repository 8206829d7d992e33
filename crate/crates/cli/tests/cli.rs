use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn avgdist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avgdist")).args(args).env_remove("AVGDIST_CACHE_DIR").output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn adversary_reports_separation() {
    let r = json(&avgdist(&["adversary", "--n", "400", "--k", "1", "--m", "4000", "--strategy", "random", "--seed", "7"]));
    assert_eq!(r["agreement_on_E"], true);
    assert_eq!(r["target"], 4.0);
    let ratio = r["ratio"].as_f64().unwrap();
    assert!(ratio > 3.0 && ratio <= 4.0);
    let again = json(&avgdist(&["adversary", "--n", "400", "--k", "1", "--m", "4000", "--seed", "7"]));
    assert_eq!(r, again);
}

#[test]
fn adversary_replays_pair_files_and_dumps_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.txt");
    std::fs::write(&pairs, "4 1\n0 1\n").unwrap();
    let upper = dir.path().join("upper.csv");
    let r = json(&avgdist(&[
        "adversary", "--n", "4", "--k", "1", "--m", "1", "--strategy", "file", "--pairs", path(&pairs),
        "--dump-upper", path(&upper),
    ]));
    // One queried pair on four points: 22/16 over 7/16.
    assert!((r["ratio"].as_f64().unwrap() - 22.0 / 7.0).abs() < 1e-9);
    assert!(std::fs::read_to_string(&upper).unwrap().starts_with('4'));
    let missing = avgdist(&["adversary", "--n", "4", "--k", "1", "--m", "1", "--strategy", "file"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    assert_eq!(avgdist(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(avgdist(&["adversary", "--n", "10", "--bogus"]).status.code(), Some(64));
    assert_eq!(avgdist(&["adversary", "--n", "1", "--k", "1", "--m", "3"]).status.code(), Some(1));
    assert_eq!(avgdist(&["spectrum", "--graph", "/nonexistent/graph.txt"]).status.code(), Some(1));
    assert_eq!(avgdist(&["--help"]).status.code(), Some(0));
}

#[test]
fn check_is_green() {
    let r = json(&avgdist(&["check", "--trials", "100", "--seed", "3"]));
    assert_eq!(r["all_ok"], true);
    assert!(!r["items"].as_array().unwrap().is_empty());
}

#[test]
fn graph_commands() {
    let dir = tempfile::tempdir().unwrap();
    let k4 = dir.path().join("k4.txt");
    let c3 = dir.path().join("c3.txt");
    assert!(avgdist(&["gen-graph", "--kind", "complete", "--n", "4", "--out", path(&k4)]).status.success());
    assert!(avgdist(&["gen-graph", "--kind", "cycle", "--n", "3", "--out", path(&c3)]).status.success());

    let s = json(&avgdist(&["spectrum", "--graph", path(&k4)]));
    assert!((s["lambda2"].as_f64().unwrap() + 1.0 / 3.0).abs() < 1e-12);

    let p = json(&avgdist(&["poincare", "--graph", path(&k4), "--p", "2", "--extrapolate", "1"]));
    assert!((p["estimate"]["value"].as_f64().unwrap() - 0.75).abs() < 1e-9);
    assert!(p["extrapolation"].is_object());

    let out = dir.path().join("z.txt");
    let z = json(&avgdist(&["zigzag", "--g", path(&k4), "--h", path(&c3), "--out", path(&out)]));
    assert_eq!((z["vertices"].as_u64(), z["degree"].as_u64()), (Some(12), Some(4)));
    assert_eq!(z["within_bound"], true);
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("12 "));
}

#[test]
fn random_graphs_go_through_the_cache() {
    let cache = tempfile::tempdir().unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_avgdist"))
            .args(["gen-graph", "--n", "20", "--d", "3", "--seed", "5"])
            .env("AVGDIST_CACHE_DIR", cache.path())
            .output()
            .unwrap()
    };
    let first = run();
    assert!(first.status.success());
    assert!(cache.path().join("rr-20-3-5.txt").exists());
    assert_eq!(first.stdout, run().stdout);
}

#[test]
fn approx_and_embed() {
    let dir = tempfile::tempdir().unwrap();
    let metric = dir.path().join("m.csv");
    let coords: Vec<f64> = (0..30).map(|i| f64::from(i * i % 17)).collect();
    let mut text = String::from("30\n");
    for a in &coords {
        let row: Vec<String> = coords.iter().map(|b| (a - b).abs().to_string()).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(&metric, text).unwrap();
    let r = json(&avgdist(&["approx", "--metric", path(&metric)]));
    assert_eq!(r["lower_ok"], true);
    assert!(r["ratio"].as_f64().unwrap() > 0.0);
    let sub = json(&avgdist(&["approx", "--metric", path(&metric), "--points", "0,3,5,7,9"]));
    assert_eq!(sub["lower_ok"], true);
    assert_eq!(avgdist(&["approx", "--metric", path(&metric), "--points", "0,99"]).status.code(), Some(1));

    let small = dir.path().join("tri.csv");
    std::fs::write(&small, "3\n0,1,2\n1,0,1.5\n2,1.5,0\n").unwrap();
    let graph = dir.path().join("g.txt");
    let e = json(&avgdist(&["embed", "--metric", path(&small), "--eps", "0.5", "--out", path(&graph)]));
    assert!(e["distortion"].as_f64().unwrap() <= 1.5);
    assert_eq!(e["degree"], 3);
    assert!(graph.exists());
}

#[test]
fn suite_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "[]").unwrap();
    let out = dir.path().join("empty.csv");
    assert!(avgdist(&["suite", "--config", path(&empty), "--out", path(&out)]).status.success());
    let header = std::fs::read_to_string(&out).unwrap();
    assert_eq!(header.lines().count(), 1);
    assert!(header.starts_with("experiment,seed,status,"));

    let config = dir.path().join("c.json");
    std::fs::write(
        &config,
        r#"[
            {"experiment": "adversary", "params": {"n": 120, "k": 1, "strategy": "greedy"}, "seeds": [4, 4]},
            {"experiment": "small-alpha", "params": {"n": 200, "eps": 0.5}, "seeds": [1]},
            {"experiment": "approximator", "params": {"n": 32, "host_n": 128}, "seeds": [2]},
            {"experiment": "baseline", "params": {"n": 60, "m": 300}, "seeds": [3]},
            {"experiment": "nonsense", "seeds": [0]}
        ]"#,
    )
    .unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(avgdist(&["suite", "--config", path(&config), "--out", path(&a)]).status.success());
    assert!(avgdist(&["suite", "--config", path(&config), "--out", path(&b)]).status.success());
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());

    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0], rows[1]);
    assert_eq!(&rows[5][2], "error");
    assert!(rows[..5].iter().all(|r| &r[2] == "ok"));
    let ratio = |r: &csv::StringRecord| r[11].parse::<f64>().unwrap();
    assert!((ratio(&rows[2]) - 2.0).abs() < 0.02);

    let schema: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.csv.schema.json")).unwrap()).unwrap();
    let names: Vec<&str> = schema["columns"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, rdr.headers().unwrap().iter().collect::<Vec<_>>());
    assert!(dir.path().join("a.csv.log").exists());
    assert_eq!(json(&avgdist(&["schema"])), schema);

    let svg = dir.path().join("chart.svg");
    assert!(avgdist(&["report", "--in", path(&a), "--out", path(&svg)]).status.success());
    let svg = std::fs::read_to_string(&svg).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<path") && svg.matches("<circle").count() >= 5);
}
