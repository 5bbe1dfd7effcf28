//! Runs the `qicost` binary end to end.

use std::path::PathBuf;
use std::process::Command;

use qicost::functions::{sink_xor, FunctionRef};
use qicost::quantum::{alice_sends_input, QuantumProtocolFile};

fn qicost(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qicost"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qicost-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn verify_reports_and_writes_outputs() {
    let json = scratch("reports.json");
    let csv = scratch("reports.csv");
    let (code, out) = qicost(&[
        "verify",
        "--check",
        "FVDG",
        "--check",
        "MI_CHAIN",
        "--samples",
        "20",
        "--json",
        json.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("2/2 checks passed"), "{out}");
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert!(std::fs::read_to_string(csv).unwrap().lines().count() > 1);
}

#[test]
fn unknown_check_is_an_error() {
    let (code, _) = qicost(&["verify", "--check", "NOPE"]);
    assert_eq!(code, 2);
}

#[test]
fn measure_and_embed_a_protocol_file() {
    let path = scratch("sink.json");
    let p = alice_sends_input(&sink_xor(3).unwrap()).unwrap();
    std::fs::write(
        &path,
        QuantumProtocolFile::from_protocol(&p, Some(FunctionRef::SinkXor(3)))
            .to_json()
            .unwrap(),
    )
    .unwrap();
    let (code, out) = qicost(&[
        "measure",
        "--protocol",
        path.to_str().unwrap(),
        "--quantity",
        "qic",
    ]);
    assert_eq!(code, 0);
    let qic: f64 = out.trim().strip_prefix("qic = ").unwrap().parse().unwrap();
    assert!((qic - 3.0).abs() < 1e-9);

    let embedded = scratch("embedded.json");
    let (code, _) = qicost(&[
        "embed",
        "--protocol",
        path.to_str().unwrap(),
        "--spec",
        "sink:3",
        "--out",
        embedded.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (code, out) = qicost(&[
        "measure",
        "--protocol",
        embedded.to_str().unwrap(),
        "--quantity",
        "err",
    ]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn demo_passes_on_the_default_protocol() {
    let (code, out) = qicost(&["demo"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("PASS main_theorem_demo"), "{out}");
}
