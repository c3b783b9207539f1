use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ingress_core::nav::{read_csv, MissionConfig, NavPhase};
use ingress_core::simworld::{ground_truth, UavState, WorldModel};
use nalgebra::{Point2, Point3};

fn ingress(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ingress")).args(args).output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn record_value(record: &str, key: &str) -> Vec<f64> {
    record
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.trim_start().strip_prefix('=')))
        .unwrap_or_else(|| panic!("{key} missing in\n{record}"))
        .split_whitespace()
        .map(|v| v.parse().unwrap())
        .collect()
}

#[test]
fn detect_finds_the_window_in_a_rendered_frame() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", "start.position = 5 0.3 -1.4\nstart.yaw_deg = 4\n");
    let frame = dir.path().join("frame.ppm");
    assert_eq!(ingress(&["--config", p(&cfg), "render", "--output", p(&frame)]).status.code(), Some(0));

    let annotated = dir.path().join("annotated.ppm");
    let out = ingress(&["detect", "--input", p(&frame), "--output", p(&annotated)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(annotated.exists());

    let uav = UavState::new(Point3::new(5.0, 0.3, -1.4), 4f64.to_radians());
    let gt = ground_truth(&WorldModel::default(), &uav, &MissionConfig::default().intrinsics)
        .corners
        .unwrap();
    let centre = nalgebra::center(&gt[0], &gt[2]);
    let record = String::from_utf8(out.stdout).unwrap();
    let c = record_value(&record, "centroid");
    assert!((Point2::new(c[0], c[1]) - centre).norm() < 3.0, "{record}");
    assert_eq!(record_value(&record, "corners").len(), 8);
}

#[test]
fn pose_reports_the_relative_yaw() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", "start.position = 4 -1.5 -1.5\nstart.yaw_deg = 20\n");
    let frame = dir.path().join("frame.ppm");
    ingress(&["--config", p(&cfg), "render", "--output", p(&frame)]);
    let record_path = dir.path().join("pose.txt");
    let out = ingress(&["pose", "--input", p(&frame), "--record", p(&record_path)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let record = std::fs::read_to_string(&record_path).unwrap();
    let uav = UavState::new(Point3::new(4.0, -1.5, -1.5), 20f64.to_radians());
    let truth = ground_truth(&WorldModel::default(), &uav, &MissionConfig::default().intrinsics).relative_yaw;
    let yaw = record_value(&record, "yaw_deg")[0];
    assert!((yaw - truth.to_degrees()).abs() < 2.0, "{yaw} vs {}", truth.to_degrees());
}

#[test]
fn blank_wall_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", "start.position = 6 9 -1.5\nstart.yaw_deg = 0\n");
    let frame = dir.path().join("wall.ppm");
    ingress(&["--config", p(&cfg), "render", "--output", p(&frame)]);
    let out = ingress(&["detect", "--input", p(&frame)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "detected = 0");
}

#[test]
fn malformed_frames_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let truncated = dir.path().join("t.ppm");
    std::fs::write(&truncated, b"P6\n64 48\n255\n\x00\x01\x02").unwrap();
    let out = ingress(&["detect", "--input", p(&truncated)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t.ppm"));
    assert_eq!(ingress(&["detect", "--input", p(&dir.path().join("missing.ppm"))]).status.code(), Some(3));
}

#[test]
fn default_simulation_ingresses() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m.csv");
    let out = ingress(&["simulate", "--output", p(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let records = read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(records.last().unwrap().phase, NavPhase::Ingressed);

    let svg = dir.path().join("m.svg");
    assert_eq!(ingress(&["plot", "--input", p(&csv), "--output", p(&svg)]).status.code(), Some(0));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("<polyline"));
}

#[test]
fn step_limit_exits_one_with_partial_log() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", "max_steps = 1\n");
    let csv = dir.path().join("m.csv");
    let out = ingress(&["--config", p(&cfg), "simulate", "--output", p(&csv)]);
    assert_eq!(out.status.code(), Some(1));
    let records = read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(records.len(), 1);

    let svg = dir.path().join("one.svg");
    assert_eq!(ingress(&["plot", "--input", p(&csv), "--output", p(&svg)]).status.code(), Some(0));
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<circle"));
}

#[test]
fn invalid_configuration_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", "world.window_width = 0\n");
    let out = ingress(&["--config", p(&cfg), "simulate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("world.window_width"));

    let missing = ingress(&["--config", p(&dir.path().join("nope.cfg")), "simulate"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn plot_rejects_a_file_without_columns() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let out = ingress(&["plot", "--input", p(&empty), "--output", p(&dir.path().join("x.svg"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step"));
}

#[test]
fn seed_selects_the_noise() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", "max_steps = 3\nworld.noise_sigma = 2\nseed = 1\n");
    let run = |extra: &[&str]| {
        let mut args = vec!["--config", p(&cfg)];
        args.extend_from_slice(extra);
        args.push("simulate");
        ingress(&args).stdout
    };
    let a = run(&[]);
    assert!(!a.is_empty());
    assert_eq!(a, run(&["--seed", "1"]));
    assert_ne!(a, run(&["--seed", "2"]));
}

#[test]
fn bad_usage_exits_two() {
    assert_eq!(ingress(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ingress(&["detect"]).status.code(), Some(2));
}
