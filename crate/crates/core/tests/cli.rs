use std::path::{Path, PathBuf};
use std::process::Command;

use flexacs::cli::{self, MarginsFile, ProjectConfig, RunOptions};
use flexacs::designer::{DesignMode, OptimizerSettings};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn quick_config() -> ProjectConfig {
    let mut cfg = ProjectConfig::load(&configs().join("reference.json")).unwrap();
    cfg.design.optimizer = OptimizerSettings {
        starts: 6,
        max_evals_per_start: 150,
        polish_starts: 2,
        polish_evals: 400,
        ..OptimizerSettings::default()
    };
    cfg
}

fn opts(out: &Path) -> RunOptions {
    RunOptions {
        out: Some(out.to_path_buf()),
        ..RunOptions::default()
    }
}

fn flexacs(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_flexacs")).args(args).output().unwrap()
}

#[test]
fn shipped_configs_parse() {
    for name in ["reference.json", "three_nodes.json"] {
        let cfg = ProjectConfig::load(&configs().join(name)).unwrap();
        assert!(cfg.context().is_ok(), "{name}");
    }
}

#[test]
fn analyze_writes_one_table_per_check_node() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli::analyze(&quick_config(), &opts(dir.path()), None).unwrap();
    assert_eq!(out.files.len(), 12);
    for i in 0..11 {
        let text = std::fs::read_to_string(dir.path().join(format!("bode_node_{i}.csv"))).unwrap();
        assert_eq!(text.lines().next(), Some("omega_rad_s,mag_dB,phase_deg"));
    }
    let text = std::fs::read_to_string(dir.path().join("margins.json")).unwrap();
    let back: MarginsFile = serde_json::from_str(&text).unwrap();
    assert_eq!(back, out.margins);
    assert_eq!(back.nodes.len(), 11);
}

#[test]
fn missing_avionics_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"vehicle": {"reference": true}, "design": {}}"#).unwrap();
    let out = flexacs(&["analyze", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("avionics") && err.lines().count() == 1, "{err}");
}

#[test]
fn unsupported_order_is_a_usage_error() {
    let cfg = configs().join("reference.json");
    let out = flexacs(&["design", "--config", cfg.to_str().unwrap(), "--order", "7"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--order"));
}

#[test]
fn unreachable_requirements_exit_as_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick_config();
    cfg.design.gm_r_db = 80.0;
    let path = dir.path().join("cfg.json");
    cli::write_json(&path, &cfg).unwrap();
    let out_dir = dir.path().join("out");
    let out = flexacs(&[
        "design",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn repeated_design_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    cli::write_json(&path, &quick_config()).unwrap();
    let run = |sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = flexacs(&[
            "design",
            "--config",
            path.to_str().unwrap(),
            "--mode",
            "integrated",
            "--order",
            "3",
            "--subcase",
            "1",
            "--seed",
            "7",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out_dir
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["design_integrated_3.json", "gains.csv", "filter_bode.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn integrated_design_beats_its_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config();
    let o = RunOptions {
        order: Some(4),
        subcase: Some(1),
        ..opts(dir.path())
    };
    let (tp, _) = cli::design(&cfg, &o, DesignMode::TwoPhase).unwrap();
    let (s1, files) = cli::design(&cfg, &o, DesignMode::Integrated).unwrap();
    assert!(s1.feasible);
    assert!(s1.objective_db <= tp.objective_db + 1e-9);
    let back = cli::read_design(&files[0]).unwrap();
    assert_eq!(back, s1);
    let gains = std::fs::read_to_string(&files[1]).unwrap();
    assert_eq!(gains.lines().next(), Some("t,k_p,k_D"));
    assert_eq!(gains.lines().count(), 12);
}

#[test]
fn compare_table_has_a_row_per_order() {
    let dir = tempfile::tempdir().unwrap();
    let (rows, files) = cli::compare(&quick_config(), &opts(dir.path())).unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(files.len(), 16);
    for r in &rows {
        assert!(r.improvement1_db >= -1e-9, "{r:?}");
        assert!(r.subcase2_db <= r.subcase1_db + 1e-9, "{r:?}");
    }
    let text = std::fs::read_to_string(dir.path().join("fig9_table.csv")).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("order,two_phase_dB,subcase1_dB,subcase2_dB,improvement1_dB,improvement2_dB")
    );
    assert_eq!(text.lines().count(), 6);
}
