use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use tilediff::io::{parse_tiles, write_dataset, write_tiles};
use tilediff::toy;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    /// Toy dataset plus the tile sets `T = {T2, T4}`, `U = {T2, T3, T5}` and
    /// `ranked = {T2, T3, T4, T5}`.
    fn toy() -> Self {
        let ws = Workspace {
            dir: tempfile::tempdir().unwrap(),
        };
        let mut buf = Vec::new();
        write_dataset(&toy::dataset(), &mut buf).unwrap();
        fs::write(ws.path("toy.db"), buf).unwrap();
        for (name, ks) in [
            ("t.tiles", &[2, 4][..]),
            ("u.tiles", &[2, 3, 5]),
            ("ranked.tiles", &[2, 3, 4, 5]),
        ] {
            let mut buf = Vec::new();
            write_tiles(&toy::set(ks), &mut buf).unwrap();
            fs::write(ws.path(name), buf).unwrap();
        }
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_tilediff"))
            .current_dir(self.dir.path())
            .args(args)
            .output()
            .unwrap()
    }
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn jsonl(text: &str) -> Vec<Value> {
    text.lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn distance_on_toy() {
    let ws = Workspace::toy();
    let o = ws.run(&[
        "distance",
        "--data",
        "toy.db",
        "--left",
        "t.tiles",
        "--right",
        "u.tiles",
        "--background",
        "none",
    ]);
    assert_eq!(stdout(&o), "0.555556\n");
}

#[test]
fn distance_jsonl_reports_exact_value() {
    let ws = Workspace::toy();
    let o = ws.run(&[
        "distance", "--data", "toy.db", "--left", "t.tiles", "--right", "u.tiles", "--format",
        "jsonl",
    ]);
    let rec = &jsonl(&stdout(&o))[0];
    let d = rec["value"].as_f64().unwrap();
    assert!((d - 5.0 / 9.0).abs() < 1e-12);
}

#[test]
fn matrix_of_one_set_is_zero() {
    let ws = Workspace::toy();
    let o = ws.run(&["distance-matrix", "--data", "toy.db", "--tiles", "t.tiles"]);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    let cells: Vec<&str> = lines[1].split('\t').collect();
    assert_eq!(cells.len(), 2);
    assert_eq!(cells[1].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn matrix_is_symmetric_and_ordered_by_input() {
    let ws = Workspace::toy();
    let o = ws.run(&[
        "distance-matrix",
        "--data",
        "toy.db",
        "--tiles",
        "t.tiles",
        "u.tiles",
        "ranked.tiles",
    ]);
    let out = stdout(&o);
    let rows: Vec<Vec<&str>> = out.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows[0][1..], ["t.tiles", "u.tiles", "ranked.tiles"]);
    let v = |i: usize, j: usize| rows[i + 1][j + 1].parse::<f64>().unwrap();
    for i in 0..3 {
        assert_eq!(v(i, i), 0.0);
        for j in 0..3 {
            assert_eq!(v(i, j), v(j, i));
        }
    }
    assert!((v(0, 1) - 5.0 / 9.0).abs() < 1e-12);
}

#[test]
fn rank_modes_agree_on_toy() {
    let ws = Workspace::toy();
    let order = |mode: &str| -> Vec<Value> {
        let o = ws.run(&[
            "rank",
            "--data",
            "toy.db",
            "--tiles",
            "ranked.tiles",
            "--mode",
            mode,
        ]);
        jsonl(&stdout(&o))
            .into_iter()
            .map(|r| r["tile"].clone())
            .collect()
    };
    let exact = order("exact");
    assert_eq!(exact.len(), 4);
    assert_eq!(exact, order("heuristic"));
    // T3 first
    assert_eq!(exact[0]["rows"], serde_json::json!([3, 4, 5]));
    assert_eq!(exact[0]["cols"], serde_json::json!([1, 2]));
}

#[test]
fn rank_gains_sum_to_initial_distance() {
    let ws = Workspace::toy();
    let o = ws.run(&[
        "rank",
        "--data",
        "toy.db",
        "--tiles",
        "ranked.tiles",
        "--background",
        "density",
    ]);
    let steps = jsonl(&stdout(&o));
    let total: f64 = steps.iter().map(|s| s["gain"].as_f64().unwrap()).sum();
    let last = steps.last().unwrap()["distance_after"].as_f64().unwrap();
    assert!(last.abs() < 1e-9);
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn redescribe_reaches_target() {
    let ws = Workspace::toy();
    let o = ws.run(&[
        "redescribe",
        "--data",
        "toy.db",
        "--target",
        "t.tiles",
        "--candidates",
        "ranked.tiles",
    ]);
    let steps = jsonl(&stdout(&o));
    assert!(!steps.is_empty());
    let last = steps.last().unwrap()["distance"].as_f64().unwrap();
    assert!(last.abs() < 1e-12);
    for (i, s) in steps.iter().enumerate() {
        assert_eq!(s["step"], i + 1);
    }
}

#[test]
fn convert_round_trips() {
    let ws = Workspace::toy();
    ws.write("sets.txt", "1 2\n3-5\n4 5\n");
    let out = ws.path("sets.tiles");
    stdout(&ws.run(&[
        "convert",
        "itemsets",
        "--data",
        "toy.db",
        "--input",
        "sets.txt",
        "--output",
        out.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(&out).unwrap();
    let ts = parse_tiles(&text, Path::new("sets.tiles"), (5, 5), None).unwrap();
    assert_eq!(ts.len(), 3);
    // re-annotating from the data changes nothing
    let stripped: String = jsonl(&text)
        .into_iter()
        .map(|mut v| {
            v.as_object_mut().unwrap().remove("freq");
            format!("{v}\n")
        })
        .collect();
    let again = parse_tiles(&stripped, Path::new("x"), (5, 5), Some(&toy::dataset())).unwrap();
    assert_eq!(again, ts);
    let mut buf = Vec::new();
    write_tiles(&again, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), text);
}

#[test]
fn model_dump_matches_uniform_and_parses_exactly() {
    let ws = Workspace::toy();
    let out = stdout(&ws.run(&["model", "dump", "--data", "toy.db"]));
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 5);
    for r in rows {
        let v: Vec<f64> = r.split('\t').map(|x| x.parse().unwrap()).collect();
        assert_eq!(v, vec![0.5; 5]);
    }
}

#[test]
fn model_sample_is_seeded() {
    let ws = Workspace::toy();
    let args = [
        "model", "sample", "--data", "toy.db", "--tiles", "t.tiles", "--count", "3", "--seed", "11",
    ];
    let a = stdout(&ws.run(&args));
    assert_eq!(a, stdout(&ws.run(&args)));
    assert!(!a.is_empty());
}

#[test]
fn bad_input_exits_with_2() {
    let ws = Workspace::toy();
    ws.write(
        "bad.tiles",
        "{\"rows\": [9], \"cols\": [1], \"freq\": 0.5}\n",
    );
    let o = ws.run(&[
        "distance",
        "--data",
        "toy.db",
        "--left",
        "bad.tiles",
        "--right",
        "t.tiles",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let o = ws.run(&[
        "distance",
        "--data",
        "missing.db",
        "--left",
        "t.tiles",
        "--right",
        "t.tiles",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = ws.run(&["rank", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn infeasible_model_exits_with_3() {
    let ws = Workspace::toy();
    ws.write(
        "clash.tiles",
        "{\"rows\": [1], \"cols\": [1, 2], \"freq\": 1}\n{\"rows\": [1], \"cols\": [1, 2, 3], \"freq\": 0.1}\n",
    );
    let o = ws.run(&[
        "model",
        "dump",
        "--data",
        "toy.db",
        "--tiles",
        "clash.tiles",
    ]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}
