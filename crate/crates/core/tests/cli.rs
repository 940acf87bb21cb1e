use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;

use qvortex::cli::{
    cmd_build, cmd_evolve, cmd_radiate, cmd_verify, example_ring_config, CliError, Geometry, Invocation, RunConfig,
    SourceConfig, EVOLVE_DIR, POWER_FILE, STATE_FILE, STATE_NU_FILE, STATE_REPORT_FILE,
};
use qvortex::evolution::{parse_monitors_csv, MONITORS_FILE};
use qvortex::grid::read_grid;
use qvortex::Error;

fn ring(gamma: f64, steps: usize) -> RunConfig {
    let mut cfg = example_ring_config();
    if let SourceConfig::Knot { gamma: g, .. } = &mut cfg.source {
        *g = gamma;
    }
    cfg.evolve.as_mut().unwrap().steps = steps;
    cfg
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap()
}

#[test]
fn ring_build_reports_one_quantum() {
    let dir = tempfile::tempdir().unwrap();
    let r = cmd_build(&Invocation::new(ring(2.0 * PI, 20), dir.path())).unwrap();
    assert!(r.metadata.quantization.single_valued);
    assert_eq!(r.metadata.quantization.k_nearest, 1);
    assert_eq!(r.nu, 1.0);
    assert!(r.nodal_ratio.unwrap() < 1e-8);
    for f in [STATE_FILE, STATE_NU_FILE, STATE_REPORT_FILE] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn trefoil_without_mesh_is_a_config_error() {
    let mut cfg = ring(2.0 * PI, 20);
    if let SourceConfig::Knot { geometry, .. } = &mut cfg.source {
        *geometry = Geometry::Trefoil {
            samples: 256,
            scale: 1.0,
            offset: [0.0; 3],
            mesh: None,
        };
    }
    let dir = tempfile::tempdir().unwrap();
    let err = cmd_build(&Invocation::new(cfg, dir.path())).unwrap_err();
    assert!(matches!(err, CliError::Core(Error::MeshRequired)), "{err}");
    assert_eq!(err.exit_code(), 1);
    assert!(err.to_string().contains("mesh required for multi-valued potential"));
}

#[test]
fn rebuild_is_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let inv = Invocation::new(ring(3.0 * PI, 10), d.path());
        cmd_build(&inv).unwrap();
        cmd_evolve(&inv).unwrap();
        cmd_radiate(&inv).unwrap();
    }
    for f in [STATE_FILE, STATE_NU_FILE, STATE_REPORT_FILE, POWER_FILE] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
    let snaps = |d: &Path| {
        let mut v: Vec<_> = fs::read_dir(d.join(EVOLVE_DIR)).unwrap().map(|e| e.unwrap().path()).collect();
        v.sort();
        v.iter().map(|p| fs::read(p).unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(snaps(a.path()), snaps(b.path()));
}

#[test]
fn linear_evolution_conserves_norm() {
    let dir = tempfile::tempdir().unwrap();
    let inv = Invocation::new(ring(2.0 * PI, 20), dir.path());
    cmd_build(&inv).unwrap();
    let m = cmd_evolve(&inv).unwrap();
    assert_eq!(m.nu, 1.0);
    assert_eq!(m.snapshots.len(), 5);
    let text = fs::read_to_string(dir.path().join(EVOLVE_DIR).join(MONITORS_FILE)).unwrap();
    let rows = parse_monitors_csv(&text).unwrap();
    let n0 = rows[0].norm;
    for r in &rows {
        assert!((r.norm - n0).abs() < 1e-10, "{r:?}");
    }
}

#[test]
fn unstable_step_aborts_with_norm_drift() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ring(2.0 * PI, 20);
    cfg.evolve.as_mut().unwrap().dt = 1.0;
    let inv = Invocation::new(cfg, dir.path());
    cmd_build(&inv).unwrap();
    let err = cmd_evolve(&inv).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("norm drift"), "{err}");
}

#[test]
fn resumed_run_matches_uninterrupted() {
    let (full, split) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let gamma = 3.0 * PI;
    let inv = Invocation::new(ring(gamma, 20), full.path());
    cmd_build(&inv).unwrap();
    let m = cmd_evolve(&inv).unwrap();

    let first = Invocation::new(ring(gamma, 10), split.path());
    cmd_build(&first).unwrap();
    cmd_evolve(&first).unwrap();
    let mut cfg = ring(gamma, 20);
    cfg.evolve.as_mut().unwrap().resume = true;
    let resumed = cmd_evolve(&Invocation::new(cfg, split.path())).unwrap();
    assert_eq!(resumed.snapshots, m.snapshots);

    let last = &m.snapshots.last().unwrap().file;
    let a = read_grid(full.path().join(EVOLVE_DIR).join(last)).unwrap();
    let b = read_grid(split.path().join(EVOLVE_DIR).join(last)).unwrap();
    let worst = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-12, "{worst}");
}

fn trapezoid(csv: &str) -> (Vec<f64>, f64) {
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let total = rows.windows(2).map(|w| 0.5 * (w[0][1] + w[1][1]) * (w[1][0] - w[0][0])).sum();
    (rows.iter().map(|r| r[1]).collect(), total)
}

#[test]
fn radiate_vanishes_only_at_unit_nu() {
    for (gamma, expect_zero) in [(2.0 * PI, true), (3.0 * PI, false)] {
        let dir = tempfile::tempdir().unwrap();
        let inv = Invocation::new(ring(gamma, 10), dir.path());
        let report = cmd_build(&inv).unwrap();
        assert_eq!(report.nu, gamma / (2.0 * PI));
        cmd_evolve(&inv).unwrap();
        let s = cmd_radiate(&inv).unwrap();
        let csv = fs::read_to_string(dir.path().join(POWER_FILE)).unwrap();
        assert!(csv.starts_with("t,P,emitted,mask_fraction\n"));
        let (power, total) = trapezoid(&csv);
        assert_eq!(power.len(), s.frames);
        if expect_zero {
            assert!(power.iter().all(|&p| p == 0.0), "{power:?}");
            assert_eq!(s.delta_e, 0.0);
        } else {
            assert!(power.iter().all(|&p| p > 0.0), "{power:?}");
            assert!(s.delta_e > 0.0);
        }
        assert!((s.delta_e - total).abs() <= 1e-12 * total.abs().max(1.0), "{} {total}", s.delta_e);
    }
}

#[test]
fn radiate_without_snapshots_fails() {
    let dir = tempfile::tempdir().unwrap();
    let err = cmd_radiate(&Invocation::new(ring(2.0 * PI, 10), dir.path())).unwrap_err();
    assert_ne!(err.exit_code(), 0);
}

#[test]
fn schema_errors_name_the_path() {
    let mut v = serde_json::to_value(example_ring_config()).unwrap();
    v["source"]["envelope"]["widht"] = 1.0.into();
    let err = RunConfig::from_json(&v.to_string()).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    let msg = err.to_string();
    assert!(msg.contains("at `source`") && msg.contains("widht"), "{msg}");
    let err = RunConfig::from_json("{\"grid\": {\"n\": 32, \"half_width\": 4}}").unwrap_err();
    assert!(err.to_string().contains("source"), "{err}");
}

#[test]
fn config_round_trips_through_json() {
    let cfg = example_ring_config();
    let text = serde_json::to_string_pretty(&cfg).unwrap();
    assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
}

#[test]
fn verify_suite_and_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let mut inv = Invocation::new(example_ring_config(), dir.path());
    let good = cmd_verify(&inv).unwrap();
    assert!(good.passed, "{:?}", good.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
    let again = cmd_verify(&inv).unwrap();
    assert_eq!(
        serde_json::to_string(&good).unwrap(),
        serde_json::to_string(&again).unwrap()
    );

    inv.config.verify.inject_fault = true;
    let bad = cmd_verify(&inv).unwrap();
    assert!(!bad.passed);
    let failed: Vec<_> = bad.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    assert_eq!(failed, ["mesh_orientation"]);
    let names = |r: &qvortex::cli::VerifyReport| r.checks.iter().map(|c| c.name.clone()).collect::<Vec<_>>();
    assert_eq!(names(&good), names(&bad));
}

fn qvortex(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qvortex")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = d.join("run");
    let out = out.to_str().unwrap();

    let cfg = d.join("ring.json");
    fs::write(&cfg, serde_json::to_string(&ring(2.0 * PI, 10)).unwrap()).unwrap();
    let cfg = cfg.to_str().unwrap();
    for cmd in ["build", "evolve", "radiate"] {
        assert_eq!(qvortex(&[cmd, "--config", cfg, "--out", out, "--threads", "1"]).0, 0, "{cmd}");
    }

    let bad = d.join("bad.json");
    fs::write(&bad, "{\"grid\": 1}").unwrap();
    let (code, err) = qvortex(&["build", "--config", bad.to_str().unwrap(), "--out", out]);
    assert_eq!(code, 1, "{err}");
    assert_eq!(qvortex(&["build", "--out", out]).0, 1);
    let (code, _) = qvortex(&["build", "--config", d.join("missing.json").to_str().unwrap(), "--out", out]);
    assert_eq!(code, 3);

    let mut unstable = ring(2.0 * PI, 10);
    unstable.evolve.as_mut().unwrap().dt = 1.0;
    fs::write(&bad, serde_json::to_string(&unstable).unwrap()).unwrap();
    let (code, err) = qvortex(&["evolve", "--config", bad.to_str().unwrap(), "--out", out]);
    assert_eq!(code, 2);
    assert!(err.contains("norm drift"), "{err}");

    let mut faulty = example_ring_config();
    faulty.verify.inject_fault = true;
    fs::write(&bad, serde_json::to_string(&faulty).unwrap()).unwrap();
    let (code, err) = qvortex(&["verify", "--config", bad.to_str().unwrap(), "--out", out, "--seed", "5"]);
    assert_eq!(code, 2);
    assert!(err.contains("mesh_orientation"), "{err}");
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut count = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = RunConfig::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(cfg.evolve.is_some(), "{}", path.display());
        count += 1;
    }
    assert!(count >= 3);
}
