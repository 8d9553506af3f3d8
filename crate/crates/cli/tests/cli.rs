use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ctcsim::io::read_records;

fn ctcsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctcsim"))
        .args(args)
        .output()
        .expect("spawn ctcsim")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn fixed_point_degenerate_example() {
    let o = ctcsim(&["fixed-point", "--circuit", "swap-cnot", "--phi", "1.5708"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(
        text.contains("fixed_set_dimension = 2 (degenerate"),
        "{text}"
    );
    assert!(text.contains("0.49999"), "{text}");
}

#[test]
fn fixed_point_horizontal_example() {
    let o = ctcsim(&[
        "fixed-point",
        "--circuit",
        "swap-cu",
        "--theta",
        "-0.7854",
        "--phi",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("bloch = (0.0000000000, 0.0000000000, 1.0000000000)"));
}

#[test]
fn degrees_flag_matches_radians() {
    let deg = ctcsim(&["discriminate", "--phi", "270", "--deg"]);
    let rad = ctcsim(&["discriminate", "--phi", "4.71238898038469"]);
    assert_eq!(deg.status.code(), Some(0));
    assert!(stdout(&deg).contains("L_ctc_sigma_z = 1.0000000000"));
    assert!(stdout(&deg).contains("L_qm          = 0.7500000000"));
    assert_eq!(stdout(&deg), stdout(&rad));
}

#[test]
fn validation_errors_exit_2() {
    let o = ctcsim(&["fixed-point", "--p", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("p = 1.5"));
    assert_eq!(
        ctcsim(&["fixed-point", "--circuit", "swap-cu", "--theta", "2.0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ctcsim(&["selftest", "--tol", "1e-16"]).status.code(),
        Some(2)
    );
    assert_eq!(ctcsim(&["sweep", "--grid", "1"]).status.code(), Some(2));
}

#[test]
fn non_convergence_exits_3() {
    let o = ctcsim(&[
        "fixed-point",
        "--circuit",
        "swap-cu",
        "--theta",
        "0.2",
        "--phi",
        "0.3",
        "--method",
        "damped",
        "--max-iter",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

fn reproduce_to(dir: &Path, target: &str) -> Vec<u8> {
    let path = dir.join(format!("{target}.csv"));
    let o = ctcsim(&["reproduce", target, "--out", path.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    fs::read(path).unwrap()
}

#[test]
fn fig6_csv_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = reproduce_to(dir.path(), "fig6");
    let second = reproduce_to(dir.path(), "fig6");
    assert_eq!(first, second);

    let records = read_records(first.as_slice()).unwrap();
    assert_eq!(records.len(), 41 * 41);
    assert_eq!((records[0].p, records[0].epsilon), (0.0, 0.0));
    assert_eq!(records[0].l_ctc_sigma_z, 1.0);

    let mut rewritten = Vec::new();
    ctcsim::io::write_records(&mut rewritten, &records).unwrap();
    assert_eq!(rewritten, first);
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let free = reproduce_to(dir.path(), "fig5c");
    let path = dir.path().join("capped.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_ctcsim"))
        .args(["reproduce", "fig5c", "--out", path.to_str().unwrap()])
        .env("CTCSIM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(path).unwrap(), free);
}

#[test]
fn fig3_has_all_states_and_inset() {
    let dir = tempfile::tempdir().unwrap();
    let records = read_records(reproduce_to(dir.path(), "fig3").as_slice()).unwrap();
    assert_eq!(records.len(), 14 * 5);
    let iterations: BTreeSet<usize> = records.iter().map(|r| r.n_iterations).collect();
    assert_eq!(
        iterations.into_iter().collect::<Vec<_>>(),
        vec![1, 2, 3, 4, 5]
    );
}

#[test]
fn thresholds_target() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let o = ctcsim(&["reproduce", "thresholds", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(path).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let crossings: Vec<(String, f64)> = rows
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].parse().unwrap())
        })
        .collect();
    assert_eq!(crossings[0].0, "p");
    assert!((crossings[0].1 - 0.414_213_6).abs() < 1e-6);
    assert_eq!(crossings[1].0, "epsilon");
    assert!((crossings[1].1 - 0.333_333_3).abs() < 1e-6);
}

#[test]
fn json_and_plot_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.json");
    let o = ctcsim(&[
        "sweep",
        "--variant",
        "fixed-state",
        "--prep",
        "non-local",
        "--grid",
        "8",
        "--format",
        "json",
        "--plot",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let rows = doc.as_array().unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows[0].get("L_ctc_sigma_z").is_some());
    let svg = fs::read_to_string(path.with_extension("svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<circle"));
}

#[test]
fn selftest_with_relaxed_tolerance() {
    let o = ctcsim(&["selftest", "--tol", "1e-6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.matches("tol=1e-6").count(), 11, "{text}");
    assert!(text.contains("11/11 criteria passed"));
}
