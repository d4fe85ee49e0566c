use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nodal(args: &[&str]) -> Output {
    nodal_env(args, &[])
}

fn nodal_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nodal"));
    cmd.args(args).env_remove("NODAL_WORKERS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest(p: &Path) -> Value {
    serde_json::from_slice(&fs::read(p).unwrap()).unwrap()
}

#[test]
fn count_both_methods_on_9_4() {
    let o = nodal(&["count", "9", "4", "--method", "both"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("recursion  nu=10 eta=10 loops=4"), "{s}");
    assert!(s.contains("graph      nu=10 eta=10 loops=4"), "{s}");
    assert!(s.contains("agreement"));
}

#[test]
fn count_single_domain() {
    let o = nodal(&["count", "2", "1"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("nu=1 "));
}

#[test]
fn count_rejects_swapped_pair() {
    let o = nodal(&["count", "1", "2"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid mode"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&nodal(&["count"])), 1);
    assert_eq!(code(&nodal(&["count", "9", "4", "--method", "guess"])), 1);
    assert_eq!(code(&nodal(&["frobnicate"])), 1);
    assert_eq!(code(&nodal(&["--workers", "0", "count", "9", "4"])), 1);
    assert_eq!(code(&nodal(&["--help"])), 0);
}

#[test]
fn count_json_for_tiling_mode() {
    let o = nodal(&["count", "21", "6", "--method", "both", "--json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["reduced"], serde_json::json!([7, 2]));
    assert_eq!(v["tiles"], 9);
    assert_eq!(v["agree"], true);
    for r in v["results"].as_array().unwrap() {
        assert_eq!(r["nu"], 45);
    }
}

#[test]
fn count_oracle() {
    let o = nodal(&["count", "9", "5", "--method", "oracle"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("oracle     nu=10"));
}

#[test]
fn verify_low_spectrum_with_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.csv");
    let o = nodal(&[
        "verify",
        "--max-lambda",
        "30",
        "--oracle-bound",
        "30",
        "--out",
        path_arg(&out),
    ]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("8 modes with lambda <= 30"), "{s}");
    assert!(s.contains("0 mismatches"));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 9);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
    let m = manifest(&dir.path().join("v.manifest.json"));
    assert_eq!(m["command"], "verify");
}

#[test]
fn verify_empty_sweep() {
    let o = nodal(&["verify", "--max-lambda", "4"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("empty sweep"));
}

#[test]
fn verify_is_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(
        code(&nodal(&[
            "--workers",
            "1",
            "verify",
            "--max-lambda",
            "3000",
            "--out",
            path_arg(&a)
        ])),
        0
    );
    let o = nodal_env(
        &["verify", "--max-lambda", "3000", "--out", path_arg(&b)],
        &[("NODAL_WORKERS", "4")],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn render_tiling_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.svg");
    let o = nodal(&["render", "9", "5", "--out", path_arg(&out)]);
    assert_eq!(code(&o), 0);
    let svg = fs::read_to_string(&out).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("class=\"tile\"").count(), 2);
    let m = manifest(&dir.path().join("t.manifest.json"));
    assert_eq!(m["parameters"], serde_json::json!({"m": 9, "n": 5}));
    assert_eq!(m["outputs"][0]["path"], "t.svg");
}

#[test]
fn graph_exports() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("g.json");
    let dot = dir.path().join("g.dot");
    assert_eq!(
        code(&nodal(&["graph", "9", "4", "--out", path_arg(&json)])),
        0
    );
    assert_eq!(
        code(&nodal(&[
            "graph",
            "9",
            "4",
            "--format",
            "dot",
            "--out",
            path_arg(&dot)
        ])),
        0
    );
    let g: Value = serde_json::from_slice(&fs::read(&json).unwrap()).unwrap();
    assert_eq!(g["nodes"].as_array().unwrap().len(), 32);
    assert_eq!(g["edges"].as_array().unwrap().len(), 36);
    let d = fs::read_to_string(&dot).unwrap();
    assert!(d.starts_with("graph nodal_9_4"));
    assert_eq!(d.matches(" -- ").count(), 36);
}

#[test]
fn distribution_histogram_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let o = nodal(&[
        "distribution",
        "--lambda",
        "10000",
        "--g",
        "1",
        "--bins",
        "50",
        "--out",
        path_arg(&out),
    ]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 51);
    assert!(lines[0].starts_with("bin_low,bin_high,mass,integrated,tiles_1"));
    let mass: f64 = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((mass - 1.0).abs() < 1e-12);
    let m = manifest(&dir.path().join("p.manifest.json"));
    assert_eq!(
        m["args"],
        serde_json::json!([
            "distribution",
            "--lambda",
            "10000",
            "--g",
            "1",
            "--bins",
            "50"
        ])
    );
    assert_eq!(m["outputs"][0]["bytes"], csv.len());
}

#[test]
fn distribution_rejects_bad_window() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let o = nodal(&[
        "distribution",
        "--lambda",
        "2",
        "--g",
        "1",
        "--out",
        path_arg(&out),
    ]);
    assert_eq!(code(&o), 1);
    assert!(!out.exists());
}

#[test]
fn trace_outputs_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = nodal(&[
        "trace",
        "--kind",
        "C",
        "--kmin",
        "20",
        "--kmax",
        "60",
        "--out",
        path_arg(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["c.csv", "c.spectrum.csv", "c.peaks.csv", "c.manifest.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let curve = fs::read_to_string(&out).unwrap();
    assert!(curve.starts_with("x,value,smooth,residual\n20,"));
    assert_eq!(curve.lines().count(), 4002);

    let mpath = dir.path().join("c.manifest.json");
    let again = dir.path().join("again");
    let o = nodal(&["replay", path_arg(&mpath), "--into", path_arg(&again)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(&out).unwrap(),
        fs::read(again.join("c.csv")).unwrap()
    );
    assert_eq!(
        fs::read(&mpath).unwrap(),
        fs::read(again.join("c.manifest.json")).unwrap()
    );

    let mut m = manifest(&mpath);
    m["outputs"][1]["sha256"] = Value::from("0".repeat(64));
    fs::write(&mpath, serde_json::to_vec(&m).unwrap()).unwrap();
    let o = nodal(&[
        "replay",
        path_arg(&mpath),
        "--into",
        path_arg(&dir.path().join("third")),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn trace_by_index_and_boundary() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["Q", "eta"] {
        let out = dir.path().join(format!("{kind}.csv"));
        let o = nodal(&[
            "trace",
            "--kind",
            kind,
            "--kmin",
            "20",
            "--kmax",
            "60",
            "--out",
            path_arg(&out),
        ]);
        assert_eq!(
            code(&o),
            0,
            "{kind}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let m = manifest(&dir.path().join(format!("{kind}.manifest.json")));
        assert_eq!(m["parameters"]["kind"], kind);
    }
}

#[test]
fn trace_rejects_empty_range() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = nodal(&[
        "trace",
        "--kmin",
        "50",
        "--kmax",
        "40",
        "--out",
        path_arg(&out),
    ]);
    assert_eq!(code(&o), 1);
}
