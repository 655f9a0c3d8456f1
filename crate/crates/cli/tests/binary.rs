use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hdch::diagnostics::read_csv;
use hdch::Field;
use hdch_cli::config::RunConfig;

const SMALL: &str = r#"
[grid]
nx = 16
ny = 16
lx = 8.0
ly = 8.0

[scenario]
name = "spinodal"
mean = 0.1
amplitude = 0.2
seed = 3

[time]
dt = 1e-3
t_end = 0.02
record_every = 5
"#;

fn hdch(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hdch"));
    cmd.args(args).env_remove("HDCH_OUT");
    if let Some(dir) = out {
        cmd.env("HDCH_OUT", dir);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_echo_diagnostics_and_snapshots() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), "a.toml", &format!("{SMALL}\n[output]\nsnapshots = true\n"));
    let o = hdch(&["run", &cfg], Some(&out));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let echo = RunConfig::from_json(&fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    let mut expected = RunConfig::from_toml(SMALL).unwrap();
    expected.output.snapshots = true;
    assert_eq!(echo.grid, expected.grid);
    assert_eq!(echo.scenario, expected.scenario);
    assert_eq!(echo.output.dir, out);

    let text = fs::read_to_string(out.join("diag.csv")).unwrap();
    assert!(text.starts_with("t,mass,E,E_tilde,grad_mu_l2,u_l2,H,separation,div_res,vort_res\n"));
    let recs = read_csv(text.as_bytes()).unwrap();
    assert_eq!(recs.len(), 5);
    for r in &recs {
        assert!((r.mass - recs[0].mass).abs() < 1e-13);
    }

    for step in [0, 5, 10, 15, 20] {
        let bytes = fs::read(out.join(format!("phi_{step}.hdch"))).unwrap();
        assert_eq!(&bytes[..4], b"HDCH");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(bytes.len(), 32 + 8 * 16 * 16);
        let phi = Field::read_snapshot(&bytes[..]).unwrap();
        assert!(phi.linf() < 1.0);
    }
}

#[test]
fn homogeneous_run_is_steady_and_repeatable() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "flat.toml", &SMALL.replace("amplitude = 0.2", "amplitude = 0.0"));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&hdch(&["run", &cfg], Some(&a))), 0);
    assert_eq!(code(&hdch(&["run", &cfg], Some(&b))), 0);
    let da = fs::read(a.join("diag.csv")).unwrap();
    assert_eq!(da, fs::read(b.join("diag.csv")).unwrap());
    let recs = read_csv(&da[..]).unwrap();
    for r in &recs[1..] {
        assert_eq!(r.energy, recs[0].energy);
        assert_eq!(r.mass, recs[0].mass);
    }
}

#[test]
fn zero_amplitude_comparison_row() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL);
    let out = tmp.path().join("cmp");
    let o = hdch(&["compare", &cfg, "--amps", "0,1e-3"], Some(&out));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("dependence.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "a,R_v0dual,R_l2");
    assert_eq!(lines[1], "0,0,0");
    assert!(lines[2].starts_with("0.001,"));
    assert_eq!(code(&hdch(&["compare", &cfg, "--amps", "x"], Some(&out))), 2);
}

#[test]
fn sweep_makes_one_directory_per_value() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "s.toml", SMALL);
    let out = tmp.path().join("sweep");
    let o = hdch(&["--jobs", "2", "sweep", &cfg, "--param", "nu2=1,2,4"], Some(&out));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for v in ["1", "2", "4"] {
        let dir = out.join(format!("nu2={v}"));
        let recs = read_csv(&fs::read(dir.join("diag.csv")).unwrap()[..]).unwrap();
        assert_eq!(recs.len(), 5);
        let echo = RunConfig::from_json(&fs::read_to_string(dir.join("run.json")).unwrap()).unwrap();
        assert_eq!(echo.viscosity.nu2, v.parse::<f64>().unwrap());
    }
    assert_eq!(code(&hdch(&["sweep", &cfg, "--param", "nope=1"], Some(&out))), 2);
}

#[test]
fn plot_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), "p.toml", &format!("{SMALL}\n[output]\nsnapshots = true\n"));
    assert_eq!(code(&hdch(&["run", &cfg], Some(&out))), 0);
    let figs = tmp.path().join("figs");
    let diag = out.join("diag.csv");
    let o = hdch(&["plot", diag.to_str().unwrap(), "-o", figs.to_str().unwrap()], None);
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(figs.join("diag.svg")).unwrap().contains("<polyline"));
    let snap = out.join("phi_20.hdch");
    assert_eq!(code(&hdch(&["plot", snap.to_str().unwrap()], Some(&figs))), 0);
    let ppm = fs::read(figs.join("phi_20.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n16 16\n255\n"));
    assert_eq!(ppm.len(), 13 + 3 * 256);
}

#[test]
fn verify_exit_codes() {
    let o = hdch(&["verify", "operators"], None);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 5);
    assert!(!stdout.contains("FAIL"));
    assert_eq!(code(&hdch(&["verify", "potential"], None)), 0);
    assert_eq!(code(&hdch(&["verify", "everything"], None)), 2);
}

#[test]
fn usage_config_and_solver_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    assert_eq!(code(&hdch(&[], None)), 2);
    assert_eq!(code(&hdch(&["frobnicate"], None)), 2);
    let missing = tmp.path().join("missing.toml");
    assert_eq!(code(&hdch(&["run", missing.to_str().unwrap()], Some(&out))), 2);
    let bad = write_config(tmp.path(), "bad.toml", "[grid]\nwidth = 3\n");
    assert_eq!(code(&hdch(&["run", &bad], Some(&out))), 2);
    let eps = write_config(tmp.path(), "eps.toml", "[potential]\nmode = \"eps\"\n");
    assert_eq!(code(&hdch(&["run", &eps], Some(&out))), 2);

    let starved = write_config(
        tmp.path(),
        "starved.toml",
        &(SMALL.replace("t_end = 0.02", "t_end = 0.002") + "\n[solver]\npcg_tol = 1e-30\n"),
    );
    let o = hdch(&["run", &starved], Some(&out));
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("run.json").exists());
}
