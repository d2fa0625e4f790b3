use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wcl(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wcl")).args(args).current_dir(dir).env("WCL_THREADS", "1").output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    fs::write(dir.join(name), body).unwrap();
    name.to_string()
}

const MINIMAL: &str = r#"{"statistics": "fermi", "q": 2, "alpha-override": 4.0, "lambda": 0.1, "c": [4, -4, 0]}"#;

#[test]
fn config_errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(wcl(&["alpha", "--config", "missing.json"], d).status.code(), Some(2));
    let empty = write(d, "empty.json", "");
    assert_eq!(wcl(&["alpha", "--config", &empty], d).status.code(), Some(3));
    let bose = write(d, "bose.json", r#"{"statistics": "bose", "beta": 2.0, "mu": 0.1}"#);
    let out = wcl(&["alpha", "--config", &bose], d);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fugacity"));
    let unknown = write(d, "unknown.json", r#"{"temperature": 1.0}"#);
    assert_eq!(wcl(&["alpha", "--config", &unknown], d).status.code(), Some(4));
    let min = write(d, "min.json", MINIMAL);
    assert_eq!(wcl(&["wavepacket", "--config", &min, "--grid", "100"], d).status.code(), Some(4));
}

#[test]
fn wavepacket_writes_sixteen_files_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let min = write(d, "min.json", MINIMAL);
    for out in ["a", "b"] {
        let o = wcl(&["wavepacket", "--config", &min, "--out-dir", out, "--grid", "64"], d);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<String> = fs::read_dir(d.join("a")).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names.iter().filter(|n| n.ends_with(".pgm")).count(), 8);
    assert_eq!(names.iter().filter(|n| n.ends_with(".csv")).count(), 8);
    for n in &names {
        assert_eq!(fs::read(d.join("a").join(n)).unwrap(), fs::read(d.join("b").join(n)).unwrap(), "{n}");
    }
    let pgm = fs::read(d.join("a/modified_t1.500.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n64 64\n255\n"));
    assert_eq!(pgm.len(), 13 + 64 * 64);
    let csv = fs::read_to_string(d.join("a/free_t0.000.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x1,x2,rho"));
    assert_eq!(csv.lines().count(), 1 + 64 * 64);
}

#[test]
fn dyson_writes_rates_with_slope() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = write(d, "d.json", r#"{"t": 6.0, "qmc-points-log2": 12, "replicates": 4}"#);
    let o = wcl(&["dyson", "--config", &cfg, "--lambda-list", "0.4,0.2,0.1,0.05", "--k", "1", "--seed", "5"], d);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rates = fs::read_to_string(d.join("rates.csv")).unwrap();
    let mut lines = rates.lines();
    assert_eq!(lines.next(), Some("gamma,pi,slope,intercept,r_squared"));
    for l in lines {
        let slope: f64 = l.split(',').nth(2).unwrap().parse().unwrap();
        assert!((0.8..1.2).contains(&slope), "{l}");
    }
    let dyson = fs::read_to_string(d.join("dyson.csv")).unwrap();
    assert!(dyson.starts_with("gamma,pi,lambda,re_omega,im_omega,stderr,re_u,im_u,abs_err\n"));
    assert_eq!(dyson.lines().count(), 1 + 2 * 4);
}

#[test]
fn wick_check_and_bounds_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = wcl(&["wick-check", "--seed", "9"], d);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("max deviation"));
    let o = wcl(&["bounds", "--lambda-list", "0.4,0.2,0.1,0.05"], d);
    assert_eq!(o.status.code(), Some(0));
    let b = fs::read_to_string(d.join("bounds.csv")).unwrap();
    assert_eq!(b.lines().count(), 1 + 6 * 3 * 4);
    assert!(b.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn alpha_flags_truncated_half_line_integrals() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // origin-centred bump: slowly decaying correlations leave a large tail bound
    let o = wcl(&["alpha"], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning: half-line integral"));
    let shell = write(
        d,
        "shell.json",
        r#"{"occupation": "maxwell", "form-factor": [{"center": [2, 0, 0], "radius": 1.0}], "out-dir": "shell"}"#,
    );
    // the rigorous tail bound stays conservative here although the value is accurate
    let o = wcl(&["alpha", "--config", &shell], d);
    assert_eq!(o.status.code(), Some(1));
    let csv = fs::read_to_string(d.join("shell/alpha.csv")).unwrap();
    let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[5] - row[9]).abs() < 0.01 * row[5].abs());
}

#[test]
fn corr_writes_one_file_per_index_pair() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = wcl(&["corr"], d);
    assert_eq!(o.status.code(), Some(0));
    let c = fs::read_to_string(d.join("corr_1_1.csv")).unwrap();
    assert_eq!(c.lines().next(), Some("tau,re_c_plus,im_c_plus,re_c_minus,im_c_minus"));
    assert_eq!(c.lines().count(), 502);
}
