use hdch_cli::config::{PotentialMode, RunConfig};
use hdch_cli::CliError;

const FULL: &str = r#"
[grid]
nx = 24
ny = 16
lx = 6.0
ly = 4.0

[potential]
theta = 0.8
theta0 = 1.9
mode = "eps"
epsilon = 0.01

[viscosity]
nu1 = 1.0
nu2 = 3.5

[scenario]
name = "bubble"
mean = -0.55
width = 0.7
seed = 11

[time]
dt = 2.5e-4
t_end = 0.1
record_every = 4

[solver]
pcg_tol = 1e-9
newton_tol = 1e-10
clamp = 0.9999
transport = "frozen"

[output]
dir = "somewhere/else"
snapshots = true
"#;

#[test]
fn json_echo_round_trips() {
    let cfg = RunConfig::from_toml(FULL).unwrap();
    assert_eq!(cfg.grid.nx, 24);
    assert_eq!(cfg.potential.mode, PotentialMode::Eps);
    let back = RunConfig::from_json(&cfg.to_json()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.time.dt.to_bits(), cfg.time.dt.to_bits());
}

#[test]
fn defaults_fill_missing_sections() {
    let cfg = RunConfig::from_toml("[time]\ndt = 1e-3\n").unwrap();
    assert_eq!(cfg.grid, RunConfig::default().grid);
    assert_eq!(cfg.time.dt, 1e-3);
    cfg.resolve().unwrap();
}

#[test]
fn unknown_keys_are_rejected() {
    for text in ["[grid]\nnz = 3\n", "[mesh]\nnx = 3\n", "[potential]\nmode = \"quartic\"\n"] {
        let err = RunConfig::from_toml(text).unwrap_err();
        assert!(matches!(err, CliError::Config(_)), "{text}");
        assert_eq!(err.exit_code(), 2);
    }
}

#[test]
fn invalid_values_fail_resolution() {
    let cases = [
        "[potential]\nmode = \"eps\"\n",
        "[potential]\ntheta = 2.0\ntheta0 = 1.0\n",
        "[viscosity]\nnu1 = 0.0\n",
        "[time]\ndt = 0.0\n",
        "[time]\nrecord_every = 0\n",
        "[solver]\nclamp = 1.0\n",
        "[grid]\nnx = 0\n",
        "[scenario]\nprepare_k = -1.0\n",
    ];
    for text in cases {
        let cfg = RunConfig::from_toml(text).unwrap();
        let err = cfg.resolve().unwrap_err();
        assert_eq!(err.exit_code(), 2, "{text}: {err}");
    }
}

#[test]
fn parameters_by_field_or_section() {
    let cfg = RunConfig::default();
    let a = cfg.with_param("nu2", "4").unwrap();
    assert_eq!(a.viscosity.nu2, 4.0);
    let b = cfg.with_param("time.dt", "5e-4").unwrap();
    assert_eq!(b.time.dt, 5e-4);
    let c = cfg.with_param("snapshots", "true").unwrap();
    assert!(c.output.snapshots);
    let d = cfg.with_param("mode", "polynomial").unwrap();
    assert_eq!(d.potential.mode, PotentialMode::Polynomial);
    assert!(matches!(cfg.with_param("bogus", "1"), Err(CliError::Usage(_))));
    assert!(matches!(cfg.with_param("grid.bogus", "1"), Err(CliError::Usage(_))));
    assert!(matches!(cfg.with_param("nx", "many"), Err(CliError::Config(_))));
}
