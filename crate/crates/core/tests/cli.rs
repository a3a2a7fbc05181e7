mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nearstokes"))
}

fn scene(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenes").join(name)
}

fn temp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("nearstokes-cli-{}-{name}", std::process::id()))
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// A small sphere scene with every experiment table, for quick runs.
const SMALL: &str = r#"
u_inf = [0.7071067811865476, 0.0, -0.7071067811865476]
layers = "single"
density = "sphere-analytic"

[[bodies]]
axes = [1.0, 1.0, 1.0]
center = [0.0, 0.0, 0.0]
m1 = 10
n1 = 20
m2 = 10
n2 = 20

[trace]
dt = 0.05
t_max = 50.0

[shadow]
normal = [0.7071067811865476, 0.0, -0.7071067811865476]
entry = -1.1
exit = 1.1
e1 = [0.0, 1.0, 0.0]
e2 = [0.7071067811865476, 0.0, 0.7071067811865476]
corner = [0.3, 0.3]
side = 0.6
count = 2
reversible = true

[streamlines]
start = [-2.0, -0.5, 0.1]
end = [-2.0, 0.5, 0.1]
count = 3
normal = [1.0, 0.0, 0.0]
stop = 2.0
stride = 4
"#;

fn small_scene() -> PathBuf {
    let p = temp("small.toml");
    std::fs::write(&p, SMALL).unwrap();
    p
}

#[test]
fn eval_reports_velocity_and_correction() {
    let out = ok(bin().args(["eval"]).arg(scene("sphere.toml")).args(["--at", "0.3,-0.5,0.82"]).output().unwrap());
    let first = out.lines().next().unwrap();
    let v: Vec<f64> = first.split_whitespace().skip(1).map(|s| s.parse().unwrap()).collect();
    let s = 1.0 / 2f64.sqrt();
    let want = common::sphere_flow(1.0, [s, 0.0, -s], [0.3, -0.5, 0.82]);
    for i in 0..3 {
        assert!((v[i] - want[i]).abs() < 1e-6, "{v:?} vs {want:?}");
    }
    assert!(out.contains("correct true"));
    let out = ok(bin().args(["eval", "--no-correction"]).arg(scene("sphere.toml")).args(["--at", "0.3,-0.5,0.82"]).output().unwrap());
    assert!(out.contains("correct false"));
}

#[test]
fn eval_rejects_a_short_point() {
    let out = bin().args(["eval"]).arg(scene("sphere.toml")).args(["--at", "0.3,0.5"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("three values"));
}

#[test]
fn missing_scene_is_an_error() {
    let out = bin().args(["solve", "/nonexistent/scene.toml"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn convergence_writes_one_row_per_resolution_and_distance() {
    let csv = temp("conv.csv");
    ok(bin()
        .args(["convergence"])
        .arg(scene("sphere_dlp.toml"))
        .args(["--resolution", "0.25,0.5", "--out"])
        .arg(&csv)
        .output()
        .unwrap());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,d,err_corrected,err_uncorrected");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|s| s.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().take(4).all(|r| r[0] == 10.0));
    // Corrected beats uncorrected at the smallest distance, and refines.
    assert!(rows[0][2] < rows[0][3]);
    assert!(rows[4][2] < rows[0][2] / 8.0);
    std::fs::remove_file(csv).ok();
}

#[test]
fn solve_then_reuse_the_checkpoint() {
    let text = r#"
u_inf = [1.0, 0.0, 0.0]
[[bodies]]
axes = [1.5, 1.0, 0.8]
center = [0.0, 0.0, 0.0]
angles = ["pi/6", 0.0, 0.0]
m1 = 6
n1 = 24
m2 = 12
n2 = 18
"#;
    let sc = temp("ell.toml");
    std::fs::write(&sc, text).unwrap();
    let ck = temp("ell.bin");
    let out = bin().arg("solve").arg(&sc).args(["--tol", "1e-9", "--out"]).arg(&ck).output().unwrap();
    ok(out.clone());
    assert!(String::from_utf8_lossy(&out.stderr).contains("iterations"));
    let log = std::fs::read_to_string(format!("{}.residuals.csv", ck.display())).unwrap();
    assert!(log.starts_with("iteration,residual\n"));
    let last: f64 = log.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(last <= 1e-9);
    let a = ok(bin().arg("eval").arg(&sc).arg("--density").arg(&ck).args(["--at", "2.0,0.1,0.2"]).output().unwrap());
    let b = ok(bin().arg("eval").arg(&sc).args(["--tol", "1e-9", "--at", "2.0,0.1,0.2"]).output().unwrap());
    assert_eq!(a.lines().next(), b.lines().next());
    for p in [sc, ck] {
        std::fs::remove_file(p).ok();
    }
}

#[test]
fn shadow_and_streamlines_write_csv() {
    let sc = small_scene();
    let out = ok(bin().arg("shadow").arg(&sc).output().unwrap());
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "y0,z0,T_fin,y_fin_1,y_fin_2,status,error");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.contains(",crossed,")));
    let out = ok(bin().arg("streamlines").arg(&sc).args(["--dt", "0.1"]).output().unwrap());
    assert!(out.starts_with("seed,point,x,y,z,status\n"));
    let seeds: std::collections::BTreeSet<&str> = out.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(seeds.len(), 3);
    let ref_csv = temp("ref.csv");
    std::fs::write(&ref_csv, ok(bin().arg("shadow").arg(&sc).args(["--dt", "0.025"]).output().unwrap())).unwrap();
    let out = ok(bin().arg("shadow").arg(&sc).arg("--reference").arg(&ref_csv).output().unwrap());
    for r in out.lines().skip(1) {
        let err: f64 = r.rsplit(',').next().unwrap().parse().unwrap();
        assert!(err < 1e-4);
    }
    std::fs::remove_file(ref_csv).ok();
    std::fs::remove_file(sc).ok();
}
