use std::path::Path;
use std::process::{Command, Output};

use qca_core::{Builtin, WeylVariant};
use serde_json::Value;

fn qca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qca")).args(args).output().expect("binary runs")
}

fn qca_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qca")).args(args).env("QCA_THREADS", threads).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn validate_builtin_passes() {
    let out = qca(&["validate", "--builtin", "weyl-1d"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["passed"], true);
    for key in ["completeness_left", "completeness_right", "max_difference_residual", "max_k_unitarity_residual"] {
        assert!(v[key].as_f64().unwrap() < 1e-12, "{key}");
    }
}

#[test]
fn validate_every_builtin() {
    for name in Builtin::names() {
        let out = qca(&["validate", "--builtin", &name, "--mass", "0.3", "--samples", "50"]);
        assert_eq!(code(&out), 0, "{name}");
    }
}

fn write_scaled_descriptor(dir: &Path, factor: f64) -> std::path::PathBuf {
    let a = qca_core::weyl::descriptor(&WeylVariant::D1);
    let mut doc: Value = serde_json::from_str(&a.to_json().unwrap()).unwrap();
    let matrices = doc["matrices"].as_object_mut().unwrap();
    let first = matrices.keys().next().unwrap().clone();
    for pair in matrices[&first].as_array_mut().unwrap() {
        for x in pair.as_array_mut().unwrap() {
            *x = Value::from(x.as_f64().unwrap() * factor);
        }
    }
    let path = dir.join(format!("descriptor-{factor}.json"));
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    path
}

#[test]
fn descriptor_files_are_validated() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_scaled_descriptor(dir.path(), 1.0);
    assert_eq!(code(&qca(&["validate", "--descriptor", good.to_str().unwrap()])), 0);
    let broken = write_scaled_descriptor(dir.path(), 1.1);
    let out = qca(&["validate", "--descriptor", broken.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn one_dimensional_dispersion_is_linear() {
    let out = qca(&["dispersion", "--variant", "weyl-1d", "--grid", "8", "--emit", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k1,omega_plus,omega_minus,v1");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 8);
    for r in rows {
        assert!((r[1] - r[0].abs()).abs() < 1e-15, "{r:?}");
        assert_eq!(r[2], -r[1]);
    }
}

#[test]
fn descriptor_dispersion_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scaled_descriptor(dir.path(), 1.0);
    let a = json(&qca(&["dispersion", "--descriptor", path.to_str().unwrap(), "--grid", "6"]));
    let b = json(&qca(&["dispersion", "--builtin", "weyl-1d", "--grid", "6"]));
    for (x, y) in a["rows"].as_array().unwrap().iter().zip(b["rows"].as_array().unwrap()) {
        assert!((x["omega_plus"].as_f64().unwrap() - y["omega_plus"].as_f64().unwrap()).abs() < 1e-12);
        // the bands touch at k = 0 and k = π, where the top eigenphase has a kink
        let k = x["k"][0].as_f64().unwrap().abs();
        if k > 1e-9 && k < std::f64::consts::PI - 1e-9 {
            assert!((x["velocity"][0].as_f64().unwrap() - y["velocity"][0].as_f64().unwrap()).abs() < 1e-6);
        }
    }
}

#[test]
fn outputs_are_deterministic() {
    let runs: [&[&str]; 3] = [
        &["dispersion", "--builtin", "bcc-a-plus", "--grid", "6", "--emit", "csv"],
        &["evolve", "--builtin", "weyl-2d", "--sizes", "8,8", "--steps", "3", "--seed", "9"],
        &["fock", "--modes", "6", "--fill", "2"],
    ];
    for args in runs {
        let a = qca_threads(args, "1");
        let b = qca_threads(args, "3");
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.stdout, qca(args).stdout);
    }
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["validate", "--bogus"],
        vec!["validate", "--builtin", "not-a-variant"],
        vec!["validate", "--builtin", "weyl-1d", "--emit", "csv"],
        vec!["frobnicate"],
        vec!["evolve", "--builtin", "weyl-1d", "--sizes", "8,8"],
        vec!["fock", "--modes", "4", "--fill", "5"],
    ] {
        let out = qca(&args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let out = qca_threads(&["graph"], "zero");
    assert_eq!(code(&out), 2);
}

#[test]
fn packet_moves_at_unit_speed() {
    let out = qca(&[
        "evolve",
        "--builtin",
        "weyl-1d",
        "--sizes",
        "512",
        "--steps",
        "100",
        "--packet-k",
        "0.9",
        "--sigma",
        "0.05",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!((v["velocity"][0].as_f64().unwrap() - 1.0).abs() < 1e-2);
    assert!((v["norm"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn compact_packet_and_observable_series() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("out.qcas");
    let out = qca(&[
        "evolve",
        "--builtin",
        "weyl-1d",
        "--sizes",
        "256",
        "--packet",
        "k0=0.9,sigma=0.05",
        "--steps",
        "4",
        "--snapshot",
        snap.to_str().unwrap(),
        "--observables",
        "csv",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "time,norm,mean1,spread1");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    // the packet starts mid-lattice and moves one site per step
    for (t, r) in rows.iter().enumerate() {
        assert_eq!(r[0], t as f64);
        assert!((r[2] - 128.0 - t as f64).abs() < 1e-6, "{r:?}");
    }
    assert!(snap.exists());
    let keyed = json(&qca(&[
        "evolve",
        "--builtin",
        "weyl-1d",
        "--sizes",
        "256",
        "--packet",
        "k0=0.9,sigma=0.05,x0=100",
        "--steps",
        "4",
    ]));
    assert!((keyed["mean_position"][0].as_f64().unwrap() - 104.0).abs() < 1e-6);
    assert_eq!(code(&qca(&["evolve", "--builtin", "weyl-1d", "--sizes", "8", "--packet", "sigma=0.1"])), 2);
}

#[test]
fn snapshots_resume_evolution() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("state.qcas");
    let s = snap.to_str().unwrap();
    let base = ["evolve", "--builtin", "dirac-weyl-2d", "--mass", "0.2", "--sizes", "6,6"];
    let mut args = base.to_vec();
    args.extend(["--steps", "2", "--snapshot", s]);
    assert_eq!(code(&qca(&args)), 0);
    let mut resumed = base.to_vec();
    resumed.extend(["--steps", "3", "--input", s]);
    let a = json(&qca(&resumed));
    let mut direct = base.to_vec();
    direct.extend(["--steps", "5", "--method", "direct"]);
    let b = json(&qca(&direct));
    assert_eq!(a["time"], 5);
    for (x, y) in a["mean_position"].as_array().unwrap().iter().zip(b["mean_position"].as_array().unwrap()) {
        assert!((x.as_f64().unwrap() - y.as_f64().unwrap()).abs() < 1e-10);
    }
}

#[test]
fn bcc_ball_of_radius_one() {
    let v = json(&qca(&["graph", "--kind", "bcc_3d", "--radius", "1"]));
    let ball = v["ball"].as_array().unwrap();
    assert_eq!(ball.len(), 9);
    assert_eq!(ball.iter().filter(|e| e["distance"] == 1).count(), 8);
    assert_eq!(v["presentation"]["generators"].as_array().unwrap().len(), 4);
}

#[test]
fn maxwell_report() {
    let out = qca(&["maxwell", "--k", "0.4,-0.9,1.3", "--time", "2", "--dt", "1e-3"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["transversality"].as_f64().unwrap() < 1e-14);
    assert!(v["rotation_form"].as_f64().unwrap() < 1e-11);
    assert!(v["e_residual"].as_f64().unwrap() < 1e-5);
    assert_eq!(code(&qca(&["maxwell", "--k", "0,0,0"])), 1);
}

#[test]
fn fock_table() {
    let v = json(&qca(&["fock", "--modes", "8", "--fill", "1"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    let diag = rows.iter().find(|r| r["fill"] == 1 && r["i"] == 0 && r["j"] == 0).unwrap();
    assert!((diag["deviation"].as_f64().unwrap() - 0.25).abs() < 1e-14);
    let tilted = json(&qca(&["fock", "--modes", "4", "--variant", "bcc-a-plus", "--k", "0.3,0.1,-0.2"]));
    assert!(tilted["rows"][0]["deviation"].as_f64().unwrap() < 1e-14);
}

#[test]
fn tiling_report() {
    let dir = tempfile::tempdir().unwrap();
    let coarse = dir.path().join("coarse.json");
    let out = qca(&[
        "tile",
        "--builtin",
        "weyl-2d",
        "--basis",
        "2,0;0,2",
        "--sizes",
        "8,8",
        "--descriptor-out",
        coarse.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["index"], 4);
    assert_eq!(v["coarse_internal_dim"], 8);
    assert!(v["commuting_square_residual"].as_f64().unwrap() < 1e-12);
    // the written coarse automaton validates on its own
    assert_eq!(code(&qca(&["validate", "--descriptor", coarse.to_str().unwrap(), "--samples", "100"])), 0);
    assert_eq!(code(&qca(&["tile", "--builtin", "weyl-1d", "--basis", "2", "--sizes", "9"])), 1);
}

#[test]
fn dirac_flag_selects_dirac_builtin() {
    let a = qca(&["dispersion", "--dirac", "--mass", "0.1", "--variant", "bcc-a-plus", "--grid", "4", "--emit", "csv"]);
    let b = qca(&["dispersion", "--builtin", "dirac-bcc-a-plus", "--mass", "0.1", "--grid", "4", "--emit", "csv"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let first = String::from_utf8(a.stdout).unwrap().lines().nth(1).unwrap().to_string();
    // the mass opens a gap at every k
    assert!(first.split(',').nth(3).unwrap().parse::<f64>().unwrap() > 0.0);
}

#[test]
fn dirac_search_report() {
    let v = json(&qca(&["dirac-search", "--variant", "weyl-1d", "--restarts", "10", "--k-samples", "20"]));
    let total: u64 = ["in_family", "relative_phase", "k_independent", "other", "not_converged"]
        .iter()
        .map(|k| v[k].as_u64().unwrap())
        .sum();
    assert_eq!(total, 10);
    assert_eq!(v["other"], 0);
    let w = json(&qca(&["dirac-search", "--samples", "5", "--seed", "3", "--k-samples", "10"]));
    assert_eq!(w["variant"], "bcc-a-plus");
    assert!(w.get("best_off_family_residual").is_some());
}
