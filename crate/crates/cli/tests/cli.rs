use std::path::{Path, PathBuf};
use std::process::Command;

use frechet_kit::oracles::plant_clusters;
use frechet_kit::PolygonalCurve;
use frechet_kit_cli::io::{curves_to_json, load_all, load_curves, Format};
use serde_json::Value;

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let p = std::env::temp_dir().join(format!("frechet-kit-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&p).unwrap();
        TempDir(p)
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> (Value, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_frechet-kit"))
        .args(args)
        .envs(envs.iter().copied())
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap_or_else(|_| panic!("{}", String::from_utf8_lossy(&out.stderr)));
    (v, out.status.code().unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn dist_of_identical_files() {
    let d = TempDir::new("dist");
    let a = d.file("a.csv", "0,0\n1,0.5\n2,0\n");
    let (v, code) = run(&["dist", s(&a), s(&a)], &[]);
    assert_eq!(code, 0);
    assert!(v["value"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn dist_is_scale_reported() {
    let d = TempDir::new("scale");
    let a = d.file("a.csv", "0,0\n3,0\n");
    let b = d.file("b.csv", "0,4\n3,4\n");
    let (v, _) = run(&["dist", s(&a), s(&b)], &[]);
    // bounding box 3 x 4 has diameter 5
    let scale = v["normalization"]["scale"].as_f64().unwrap();
    assert!((scale - 0.2).abs() < 1e-15);
    assert!((v["value"].as_f64().unwrap() - 0.8).abs() < 1e-6);
    let (raw, _) = run(&["--normalize", "false", "dist", s(&a), s(&b)], &[]);
    assert!((raw["value"].as_f64().unwrap() - 4.0).abs() < 1e-6);
}

#[test]
fn repr_of_a_point() {
    let d = TempDir::new("point");
    let p = d.file("p.json", r#"{"d":2,"curves":[[[0.5,0.5]]]}"#);
    let (v, code) = run(&["repr", s(&p), "--ell", "1", "--thresholds", "0.1"], &[]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["status"], "curve");
    assert_eq!(v["curve"].as_array().unwrap().len(), 1);
}

#[test]
fn repr_exit_codes() {
    let d = TempDir::new("codes");
    let far = d.file("far.json", r#"{"d":2,"curves":[[[0,0],[0.1,0]],[[1,1],[1.1,1]]]}"#);
    let (v, code) = run(&["repr", s(&far), "--ell", "2", "--thresholds", "0.05"], &[]);
    assert_eq!((code, v["status"].as_str()), (2, Some("null")));

    let planted = plant_clusters(1, 3, 4, 3, 0.0, 0.05, 2).unwrap();
    let f = d.file("three.json", &serde_json::to_string(&curves_to_json(&planted.curves)).unwrap());
    let (v, code) = run(&["repr", s(&f), "--ell", "3", "--thresholds", "0.3", "--budget", "1"], &[("FRECHET_KIT_THREADS", "2")]);
    assert_eq!((code, v["status"].as_str()), (3, Some("budget_exceeded")));

    let (v, code) = run(&["repr", s(&d.0.join("missing.json")), "--ell", "2", "--thresholds", "0.1"], &[]);
    assert_eq!((code, v["status"].as_str()), (1, Some("error")));
}

#[test]
fn bad_input_is_reported() {
    let d = TempDir::new("bad");
    let mixed = d.file("mixed.json", r#"{"d":2,"curves":[[[0,0],[1,1,1]]]}"#);
    let (v, code) = run(&["dist", s(&mixed), s(&mixed)], &[]);
    assert_eq!(code, 1);
    assert!(v["message"].as_str().unwrap().contains("coordinates"));
    let broken = d.file("broken.csv", "0,0\n1,x\n");
    let (v, code) = run(&["dist", s(&broken), s(&broken)], &[]);
    assert_eq!(code, 1);
    assert!(v["message"].as_str().unwrap().contains(":2:2:"), "{v}");
}

#[test]
fn simplify_reports_check() {
    let d = TempDir::new("simplify");
    let rows: String = (0..9).map(|i| format!("{},{}\n", i as f64 / 8.0, if i % 2 == 0 { 0.0 } else { 0.01 })).collect();
    let c = d.file("c.csv", &rows);
    let svg = d.0.join("out.svg");
    let (v, code) = run(&["simplify", s(&c), "--delta", "0.05", "--svg", s(&svg)], &[]);
    assert_eq!(code, 0);
    assert_eq!(v["frechet_check"]["pass"], true);
    assert_eq!(v["vertex_count"], 2);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn cluster_recovers_planted_assignment() {
    let d = TempDir::new("cluster");
    let planted = plant_clusters(2, 4, 4, 2, 0.5, 0.05, 3).unwrap();
    let f = d.file("all.json", &serde_json::to_string(&curves_to_json(&planted.curves)).unwrap());
    let (v, code) = run(
        &[
            "cluster", s(&f), "--k", "2", "--ell", "2", "--seed", "1", "--sample-size", "6", "--subset-size", "2", "--threshold-factors", "1.0",
        ],
        &[],
    );
    assert_eq!(code, 0, "{v}");
    let got: Vec<u64> = v["assignment"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    let want: Vec<u64> = planted.assignment.iter().map(|&x| x as u64).collect();
    let flipped: Vec<u64> = want.iter().map(|&x| 1 - x).collect();
    assert!(got == want || got == flipped, "{got:?} vs {want:?}");
    let flags: Vec<&str> = v["provenance_flags"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert!(flags.contains(&"median_standin"));
}

#[test]
fn json_round_trip() {
    let d = TempDir::new("roundtrip");
    let c = vec![
        PolygonalCurve::from_coords(&[vec![0.125, 1.5], vec![2.0, -3.25]]).unwrap(),
        PolygonalCurve::from_coords(&[vec![1.0, 1.0]]).unwrap(),
    ];
    let f = d.file("c.json", &serde_json::to_string(&curves_to_json(&c)).unwrap());
    assert_eq!(load_curves(&f, Format::Json).unwrap(), c);
    let (raw, norm) = load_all(&[&f], false).unwrap();
    assert_eq!(raw, c);
    assert_eq!(norm.scale, 1.0);
}

#[test]
fn csv_duplicates_collapse() {
    let d = TempDir::new("dup");
    let f = d.file("c.csv", "# x,y\n0,0\n0,0\n1,1\n1,1\n2,0\n");
    let c = load_curves(&f, Format::Csv).unwrap();
    assert_eq!(c[0].len(), 3);
}
