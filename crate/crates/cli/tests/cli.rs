use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use minforge_core::io::{circuit_to_string, scenario_to_string};
use minforge_core::{tiny3, CircuitDocument, DropParity, ScenarioDocument};
use serde_json::Value;
use tempfile::TempDir;

fn min(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_min")).args(args).output().expect("run min")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let f = Fixture { dir: tempfile::tempdir().unwrap() };
        std::fs::write(f.path("tiny3.mincir"), circuit_to_string(&CircuitDocument::new(tiny3())).unwrap()).unwrap();
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn tiny3(&self) -> PathBuf {
        self.path("tiny3.mincir")
    }

    fn generate(&self, family: &str, size: &str, name: &str) -> PathBuf {
        let out = self.path(name);
        let o = min(&["gen", family, "--size", size, "-o", s(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        out
    }
}

#[test]
fn simulate_tiny3_prints_counters() {
    let f = Fixture::new();
    let o = min(&["simulate", s(&f.tiny3()), "--path", "01", "--faults", "1", "--ticks", "10"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "delivered=5 dropped=5\n");
    let o = min(&["simulate", s(&f.tiny3()), "--path", "01", "--ticks", "10"]);
    assert_eq!(stdout(&o), "delivered=10 dropped=0\n");
    // default duration
    let o = min(&["simulate", s(&f.tiny3()), "--path", "01", "--faults", "1"]);
    assert_eq!(stdout(&o), "delivered=75 dropped=75\n");
}

#[test]
fn validate_reports_exact_messages_and_exit_3() {
    let f = Fixture::new();
    let o = min(&["validate", s(&f.tiny3()), "--path", "05", "--faults", ""]);
    assert_eq!(code(&o), 3);
    assert_eq!(stderr(&o), "Invalid Path. Please check the input.\n");
    let o = min(&["validate", s(&f.tiny3()), "--path", "01", "--faults", "9"]);
    assert_eq!(code(&o), 3);
    assert_eq!(stderr(&o), "Invalid Component number. Please check the input.\n");
    let o = min(&["validate", s(&f.tiny3()), "--path", "01", "--faults", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "valid\n");
    let o = min(&["validate", s(&f.tiny3()), "--path", "0,x", "--faults", ""]);
    assert_eq!(code(&o), 1);
}

#[test]
fn simulate_rejects_invalid_input_with_exit_3() {
    let f = Fixture::new();
    let o = min(&["simulate", s(&f.tiny3()), "--path", "05", "--faults", "1"]);
    assert_eq!(code(&o), 3);
    assert_eq!(stderr(&o), "Invalid Path. Please check the input.\n");
    let o = min(&["simulate", s(&f.tiny3()), "--path", "01", "--ticks", "0"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn paths_on_omega8() {
    let f = Fixture::new();
    let omega = f.generate("omega", "8", "omega8.mincir");
    let o = min(&["paths", s(&omega), "--src", "0", "--dst", "20", "--k", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("k=1\n"), "{}", stdout(&o));

    let args = ["paths", s(&omega), "--src", "0", "--dst", "20", "--k", "3", "--format", "machine"];
    let first = min(&args);
    let second = min(&args);
    assert_eq!(first.stdout, second.stdout);
    let v: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v["disjointness"], 1);

    let o = min(&["paths", s(&omega), "--src", "20", "--dst", "0"]);
    assert_eq!(code(&o), 4);
    let o = min(&["paths", s(&omega), "--src", "0", "--dst", "99"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn paths_on_replicated_and_extra_stage() {
    let f = Fixture::new();
    let out = f.path("rep3.mincir");
    let o = min(&["gen", "replicated", "--size", "4", "--copies", "3", "-o", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = min(&["paths", s(&out), "--src", "0", "--dst", "16", "--k", "3"]);
    assert!(stdout(&o).starts_with("k=3\n"), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().count(), 4);

    let extra = f.generate("extra-stage", "8", "extra8.mincir");
    let o = min(&["check", s(&extra)]);
    assert_eq!(stdout(&o), "ok: 32 components, 40 wires\n");
}

#[test]
fn check_exit_codes() {
    let f = Fixture::new();
    let omega = f.generate("omega", "8", "omega8.mincir");
    let o = min(&["check", s(&omega)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "ok: 28 components, 32 wires\n");

    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(f.tiny3()).unwrap()).unwrap();
    doc["wires"][1]["b"][0] = Value::from(7);
    let bad = f.path("bad.mincir");
    std::fs::write(&bad, doc.to_string()).unwrap();
    let o = min(&["check", s(&bad)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("wire 1"), "{}", stderr(&o));

    let garbage = f.path("garbage.mincir");
    std::fs::write(&garbage, "not a circuit").unwrap();
    assert_eq!(code(&min(&["check", s(&garbage)])), 1);
    assert_eq!(code(&min(&["check", s(&f.path("missing.mincir"))])), 1);
}

#[test]
fn strict_mode_enforces_legacy_capacity() {
    let f = Fixture::new();
    let omega32 = f.generate("omega", "32", "omega32.mincir");
    assert_eq!(code(&min(&["check", s(&omega32)])), 0);
    let o = min(&["check", "--strict", s(&omega32)]);
    assert_eq!(code(&o), 2);
    let omega16 = f.generate("omega", "16", "omega16.mincir");
    assert_eq!(code(&min(&["check", "--strict", s(&omega16)])), 0);
}

#[test]
fn gen_rejects_bad_sizes() {
    let f = Fixture::new();
    let o = min(&["gen", "omega", "--size", "6", "-o", s(&f.path("x.mincir"))]);
    assert_eq!(code(&o), 1);
    assert!(!f.path("x.mincir").exists());
}

#[test]
fn gen_is_deterministic() {
    let f = Fixture::new();
    let a = f.generate("omega", "16", "a.mincir");
    let b = f.generate("omega", "16", "b.mincir");
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn droplog_and_report_outputs() {
    let f = Fixture::new();
    let (log, report, tiny) = (f.path("run.droplog"), f.path("run.json"), f.tiny3());
    let args = [
        "simulate",
        s(&tiny),
        "--path",
        "01",
        "--faults",
        "1",
        "--ticks",
        "10",
        "--droplog",
        s(&log),
        "--report",
        s(&report),
    ];
    assert_eq!(code(&min(&args)), 0);
    let text = std::fs::read_to_string(&log).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "tick\tpacket_id\tcomponent\tpath");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("0\t0\t1\t"));
    let first = std::fs::read(&report).unwrap();
    let v: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(v["delivered"], 5);
    assert_eq!(v["events"].as_array().unwrap().len(), 10);
    min(&args);
    assert_eq!(std::fs::read(&report).unwrap(), first);
}

#[test]
fn scenario_file_supplies_defaults() {
    let f = Fixture::new();
    let scenario = ScenarioDocument {
        path_input: "01".into(),
        faults_input: "1".into(),
        duration_ticks: 7,
        drop_parity: DropParity::DeliverFirst,
    };
    let file = f.path("run.minsc");
    std::fs::write(&file, scenario_to_string(&scenario).unwrap()).unwrap();
    let o = min(&["simulate", s(&f.tiny3()), "--scenario", s(&file)]);
    assert_eq!(stdout(&o), "delivered=4 dropped=3\n", "{}", stderr(&o));
    let o = min(&["simulate", s(&f.tiny3()), "--scenario", s(&file), "--parity", "drop-first"]);
    assert_eq!(stdout(&o), "delivered=3 dropped=4\n");
    let o = min(&["simulate", s(&f.tiny3()), "--scenario", s(&file), "--faults", ""]);
    assert_eq!(stdout(&o), "delivered=7 dropped=0\n");
}

#[test]
fn render_writes_svg() {
    let f = Fixture::new();
    let out = f.path("red.svg");
    let o = min(&["render", s(&f.tiny3()), "--path", "01", "--faults", "1", "--state", "red", "-o", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let red = std::fs::read_to_string(&out).unwrap();
    assert!(red.starts_with("<?xml"));
    assert_eq!(red.matches("class=\"cross\"").count(), 2);

    let plain = f.path("plain.svg");
    assert_eq!(code(&min(&["render", s(&f.tiny3()), "--bug-compat", "-o", s(&plain)])), 0);
    assert!(!std::fs::read_to_string(&plain).unwrap().contains("highlight"));

    let o = min(&["render", s(&f.tiny3()), "--path", "05", "-o", s(&f.path("x.svg"))]);
    assert_eq!(code(&o), 3);
    assert_eq!(stderr(&o), "Invalid Path. Please check the input.\n");
}

#[test]
fn usage_errors_exit_1() {
    let o = min(&["simulate"]);
    assert_eq!(code(&o), 1);
    let o = min(&["frobnicate"]);
    assert_eq!(code(&o), 1);
    assert_eq!(code(&min(&["--help"])), 0);
}

#[test]
fn serve_answers_on_loopback() {
    let f = Fixture::new();
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_min"))
        .args(["serve", "--port", &port.to_string(), "--circuit", s(&f.tiny3())])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let deadline = Instant::now() + Duration::from_secs(10);
    let mut stream = loop {
        match TcpStream::connect(("127.0.0.1", port)) {
            Ok(s) => break s,
            Err(_) if Instant::now() < deadline => std::thread::sleep(Duration::from_millis(50)),
            Err(e) => {
                child.kill().ok();
                panic!("service did not start: {e}");
            }
        }
    };
    stream.write_all(b"GET /api/circuit HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    child.kill().ok();
    child.wait().ok();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.contains("\"revision\":1"));
    assert!(response.contains("tiny3"));
}
