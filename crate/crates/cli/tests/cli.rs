use hpscatter_cli::output::{read_grid_header, GRID_HEADER_LEN};
use std::path::Path;
use std::process::{Command, Output};

fn hpscatter(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hpscatter"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("run.toml");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn empty_medium_solve_reproduces_the_incident_wave() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"
        kappa = 20.0
        levels = 3
        probes = [[0.1, -0.2], [0.9, 0.3]]
        directions = [[0.6, 0.8]]
        [potential]
        name = "zero"
    "#;
    let o = hpscatter(&["solve"], Some(cfg), dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    for row in read_csv(&out.join("probes.csv")) {
        let v: Vec<f64> = row.iter().map(|s| s.parse().unwrap_or(f64::NAN)).collect();
        let (x, y, re, im) = (v[3], v[4], v[5], v[6]);
        let phase = 20.0 * (0.6 * x + 0.8 * y);
        let err = (re - phase.cos()).hypot(im - phase.sin());
        assert!(err <= 1e-8, "({x}, {y}): {err:e}");
    }
    let build = read_csv(&out.join("build.csv"));
    assert_eq!(build[0][1], "14641");
    assert!(out.join("config.toml").exists() && out.join("boundary.csv").exists());
}

#[test]
fn grid_output_and_repeatability() {
    let cfg = r#"
        kappa = 10.0
        levels = 2
        probes = [[0.5, 0.0], [0.75, -0.6]]
        [grid]
        bounds = [-0.8, 0.8, -0.6, 0.7]
        nx = 5
        ny = 4
    "#;
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let o = hpscatter(&["solve"], Some(cfg), dir.path());
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
            dir
        })
        .collect();
    let out = runs[0].path().join("out");
    let bytes = std::fs::read(out.join("grid_0.bin")).unwrap();
    let h = read_grid_header(&bytes).unwrap();
    assert_eq!((h.nx, h.ny, h.channels), (5, 4, 4));
    assert_eq!(h.bounds, [-0.8, 0.8, -0.6, 0.7]);
    assert_eq!(bytes.len(), GRID_HEADER_LEN + 20 * 33);
    let rows = read_csv(&out.join("grid_0.csv"));
    assert_eq!(rows.len(), 20);
    // x fastest; region 0 inside the closed box, 2 well outside
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), -0.8);
    assert_eq!(rows[1][0].parse::<f64>().unwrap(), -0.4);
    assert_eq!(rows[1][1].parse::<f64>().unwrap(), -0.6);
    let center = &rows[2 + 5];
    assert_eq!(center[6], "0");
    let re_bin = f64::from_le_bytes(bytes[GRID_HEADER_LEN + 7 * 32..][..8].try_into().unwrap());
    assert_eq!(re_bin, center[2].parse::<f64>().unwrap());

    for file in ["probes.csv", "boundary.csv", "grid_0.csv", "grid_0.bin"] {
        let a = std::fs::read(out.join(file)).unwrap();
        let b = std::fs::read(runs[1].path().join("out").join(file)).unwrap();
        assert!(a == b, "{file} differs between identical runs");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&hpscatter(&["solve"], Some("kappa = -3.0"), p)), 2);
    assert_eq!(code(&hpscatter(&["solve"], Some("bogus = 1"), p)), 2);
    assert_eq!(code(&hpscatter(&["solve", "--levels", "7"], None, p)), 2);
    assert_eq!(code(&hpscatter(&["reference"], Some("[potential]\nname = \"lens\""), p)), 2);
    assert_eq!(code(&hpscatter(&["solve"], Some("[potential]\nname = \"moon\""), p)), 2);
    assert_eq!(code(&hpscatter(&["spectrum", "--levels", "6"], None, p)), 2);

    let resonant = format!("kappa = {}\nlevels = 1\nprobes = [[2.0, 0.0]]\n[potential]\nname = \"zero\"", std::f64::consts::PI * 2f64.sqrt());
    let o = hpscatter(&["solve"], Some(&resonant), p);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("hint:"));

    let o = Command::new(env!("CARGO_BIN_EXE_hpscatter"))
        .args(["reference", "--out"])
        .arg(p.join("t"))
        .env("HPSCATTER_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn reference_command_writes_phases() {
    let dir = tempfile::tempdir().unwrap();
    let o = hpscatter(&["reference", "--kappa", "20"], None, dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&dir.path().join("out").join("phases.csv"));
    assert_eq!(rows.len(), 31);
    for r in rows {
        let a: f64 = r[3].parse().unwrap();
        assert!((a - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn convergence_and_timing_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "kappa = 20.0\nprobes = [[0.25, 0.0], [1.0, 0.5]]";
    let o = hpscatter(&["convergence", "--levels", "2,3"], Some(cfg), dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&dir.path().join("out").join("convergence.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][1].as_str(), rows[1][1].as_str()), ("3721", "14641"));
    // the oracle error column is filled for the radial default potential
    let err: f64 = rows[1][6].parse().unwrap();
    assert!(err < 1e-4, "{err:e}");
    assert!(rows[1][7].is_empty());

    let o = hpscatter(&["timing", "--levels", "1,2"], Some("kappa = 20.0"), dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_csv(&dir.path().join("out").join("timing.csv")).len(), 2);
    assert_eq!(read_csv(&dir.path().join("out").join("timing_summary.csv")).len(), 1);
}
