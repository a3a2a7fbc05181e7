use nearstokes::flowsim::{TraceRecord, TraceStatus};
use nearstokes::geom::{Chart, Pose, StandardEllipsoid};
use nearstokes::io;
use nearstokes::scene::SceneConfig;
use nearstokes::stokes::Body;
use nearstokes::Vec3;

fn temp(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("nearstokes-{}-{name}", std::process::id()))
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let ell = StandardEllipsoid::new(2.0, 1.5, 0.5).unwrap();
    let mut b = Body::new(ell, Pose::new([0.1, -0.2, 3.0], [1.0, 2.0, -3.0]), (12, 5), (10, 6)).unwrap();
    b.set_density_fn(|x| Vec3::new(x.x.exp(), 1.0 / 3.0, -x.z * std::f64::consts::PI));
    let mut buf = Vec::new();
    io::write_checkpoint(&mut buf, std::slice::from_ref(&b)).unwrap();
    assert_eq!(&buf[..4], b"NSDN");
    assert_eq!(buf.len(), 12 + 9 * 8 + 16 + (12 * 6 + 10 * 7) * 24);
    let back = io::read_checkpoint(&mut buf.as_slice()).unwrap();
    assert_eq!(back.len(), 1);
    let r = &back[0];
    assert_eq!(r.pose, b.pose);
    assert_eq!(r.ellipsoid.axes(), b.ellipsoid.axes());
    for chart in [Chart::Grid1, Chart::Grid2] {
        assert_eq!(r.grid(chart), b.grid(chart));
        assert_eq!(r.density(chart), b.density(chart));
    }
}

#[test]
fn foreign_files_are_rejected() {
    assert!(io::read_checkpoint(&mut &b"NOPE\x01\0\0\0\0\0\0\0"[..]).is_err());
    assert!(io::read_checkpoint(&mut &b"NSDN\x02\0\0\0\0\0\0\0"[..]).is_err());
    assert!(io::read_checkpoint(&mut &b"NSDN\x01\0\0\0\x01\0\0\0"[..]).is_err());
}

#[test]
fn trace_csv_round_trip() {
    let recs = vec![
        TraceRecord { y0: 0.03, z0: 0.09, t_fin: 3.25, y_fin: [0.0300000001, 0.09], status: TraceStatus::Crossed, error: Some(1e-10) },
        TraceRecord { y0: 0.1, z0: -0.2, t_fin: 1000.0, y_fin: [5.0, 6.0], status: TraceStatus::TimedOut, error: None },
        TraceRecord { y0: 1.0 / 3.0, z0: 0.0, t_fin: 2.0, y_fin: [0.0, 0.0], status: TraceStatus::EnteredBody, error: None },
    ];
    let p = temp("traces.csv");
    io::write_csv(Some(&p), &io::TRACE_HEADER, io::trace_rows(&recs)).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.starts_with("y0,z0,T_fin,y_fin_1,y_fin_2,status,error\n"));
    assert_eq!(io::read_trace_csv(&p).unwrap(), recs);
    std::fs::remove_file(p).ok();
}

#[test]
fn scene_files_parse() {
    let cfg = SceneConfig::from_toml(
        r#"
        u_inf = [1.0, 0.0, 0.0]
        [[bodies]]
        axes = [3.0, 2.0, 1.0]
        center = [0.0, 0.0, 0.0]
        angles = ["-7pi/8", "2*pi/5", 0.25]
        m1 = 5
        n1 = 20
        m2 = 10
        n2 = 15
        "#,
    )
    .unwrap();
    let a: Vec<f64> = cfg.bodies[0].angles.iter().map(|a| a.0).collect();
    let pi = std::f64::consts::PI;
    assert_eq!(a, vec![-7.0 * pi / 8.0, 2.0 * pi / 5.0, 0.25]);
    let scene = cfg.build(2.0).unwrap();
    assert_eq!(scene.bodies[0].grid(Chart::Grid1).n, 40);
    assert_eq!(scene.bodies[0].grid(Chart::Grid2).m, 20);
    assert!(SceneConfig::from_toml("u_inf = [1.0, 0.0]\n").is_err());
    assert!(cfg.build(0.0).is_err());
}

#[test]
fn overlapping_bodies_are_rejected() {
    let text = |dx: f64| {
        format!(
            "u_inf = [1.0, 0.0, 0.0]\n\
             [[bodies]]\naxes = [1.0, 1.0, 1.0]\ncenter = [0.0, 0.0, 0.0]\nm1 = 8\nn1 = 16\nm2 = 8\nn2 = 16\n\
             [[bodies]]\naxes = [1.0, 1.0, 1.0]\ncenter = [{dx}, 0.0, 0.0]\nm1 = 8\nn1 = 16\nm2 = 8\nn2 = 16\n"
        )
    };
    assert!(SceneConfig::from_toml(&text(1.9)).unwrap().build(1.0).is_err());
    assert!(SceneConfig::from_toml(&text(2.05)).unwrap().build(1.0).is_ok());
}

#[test]
fn every_shipped_scene_loads() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenes");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let cfg = SceneConfig::load(&p).unwrap();
            cfg.build(0.25).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
