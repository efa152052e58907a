use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bidir-bounds"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(o: &Output) -> f64 {
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    v["value_bits"].as_f64().unwrap()
}

/// `(param, value)` rows of a sweep CSV, after checking the header.
fn rows(csv: &str) -> Vec<(f64, f64)> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("param,value_bits,gap,wall_time_ms"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 4, "{l}");
            (f[0].parse().unwrap(), f[1].parse().unwrap())
        })
        .collect()
}

#[test]
fn bound_examples() {
    let swap = value(&run(&["bound", "--channel", "swap", "--quantity", "max-rains"]));
    assert!((swap - 2.0).abs() < 1e-4);
    let id = value(&run(&["bound", "--channel", "identity", "--quantity", "max-rains"]));
    assert!(id.abs() < 1e-6);
    let erasure = value(&run(&[
        "bound", "--channel", "erasure-cell", "--d", "3", "--p", "0.5", "--quantity", "erasure-formula",
    ]));
    assert!((erasure - 3f64.log2()).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["bound", "--channel", "warp"]).status.code(), Some(1));
    assert_eq!(run(&["bound", "--channel", "partial-swap"]).status.code(), Some(1));
    assert_eq!(run(&["bound", "--channel", "partial-swap", "--p", "1.5"]).status.code(), Some(1));
    assert_eq!(run(&["bound", "--channel", "swap", "--quantity", "reading-bound"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--channel", "swap", "--grid", "1:0:3"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    // A channel outside the size limit is a usage error.
    let big = run(&["bound", "--channel", "erasure-cell", "--d", "3", "--p", "0.2", "--quantity", "max-rains"]);
    assert_eq!(big.status.code(), Some(1));
    // A failed verification is reported, not swallowed.
    let bad = run(&["verify", "bicovariance", "--channel", "partial-swap", "--p", "0.5"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stdout(&bad).contains("FAIL"));
}

#[test]
fn traceout_sweep_endpoints() {
    let o = run(&["sweep", "--channel", "partial-swap-traceout", "--grid", "0:1:3", "--no-timing"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 3);
    assert!((r[0].1 - 1.0).abs() < 1e-4 && r[2].1.abs() < 1e-4, "{r:?}");
}

#[test]
fn dephasing_sweep_is_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("deph.csv");
    let o = run(&[
        "sweep", "--channel", "collective-dephasing", "--phi", "3.141592653589793", "--grid", "0:1:5",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(r[2].0, 0.5);
    assert!((r[2].1 - 1.0).abs() < 1e-4);
    for i in 0..5 {
        assert!((r[i].1 - r[4 - i].1).abs() < 1e-6);
    }
}

fn sweep_bytes(dir: &Path, name: &str, extra: &[&str]) -> Vec<u8> {
    let out = dir.join(name);
    let mut args = vec!["sweep", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(out).unwrap()
}

#[test]
fn identical_commands_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--channel", "partial-swap", "--quantity", "emax", "--grid", "0.2:0.8:3", "--starts", "2", "--seed", "5", "--no-timing"];
    let a = sweep_bytes(dir.path(), "a.csv", &args);
    let b = sweep_bytes(dir.path(), "b.csv", &args);
    assert_eq!(a, b);

    let bound = ["bound", "--channel", "cnot", "--quantity", "emax", "--starts", "3", "--seed", "11"];
    assert_eq!(run(&bound).stdout, run(&bound).stdout);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("sweep.conf");
    std::fs::write(&conf, "# test\nchannel = partial-swap\ngrid = 0:1:21\nno-timing = true\n").unwrap();
    let csv = sweep_bytes(dir.path(), "ps.csv", &["--config", conf.to_str().unwrap(), "--grid", "0:1:5"]);
    let r = rows(&String::from_utf8(csv).unwrap());
    assert_eq!(r.len(), 5);
    assert!((r[0].1 - 2.0).abs() < 1e-4 && r[4].1.abs() < 1e-4);
    assert!(r.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-7));

    std::fs::write(&conf, "channel = swap\nflavour = strange\n").unwrap();
    assert_eq!(run(&["bound", "--config", conf.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["partial-swap-sweep.conf", "collective-dephasing-sweep.conf"] {
        let path = root.join(name);
        // A bad grid override makes the run stop right after config parsing.
        let o = run(&["sweep", "--config", path.to_str().unwrap(), "--grid", "1:0:2"]);
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains("start < stop"), "{name}: {err}");
    }
}

#[test]
fn verify_suites() {
    let o = run(&["verify", "achievability"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("achievability: PASS"));

    let o = run(&["verify", "bicovariance", "--channel", "cnot"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("bicovariance: PASS"));

    let o = run(&["verify", "amortization", "--trials", "50", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("amortization: 50/50 satisfied"));
}
