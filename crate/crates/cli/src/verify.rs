use std::f64::consts::PI;
use std::time::Instant;

use hdch::darcy::{korteweg_residual, pressure_from_velocity, solve_darcy, ViscositySpec};
use hdch::diagnostics::{
    continuous_dependence_experiment, decay_experiment, energy, energy_balance_residual, record_run,
    sandwich_constant, DiagRecord,
};
use hdch::elliptic::{apply_variable_operator, solve_log_elliptic, solve_variable_neumann, NewtonConfig, PcgConfig};
use hdch::potential::{FreeEnergy, PotentialSpec};
use hdch::stepper::{make_scenario, smooth_random_field, Scenario, ScenarioParams, Simulation, StepConfig, Transport};
use hdch::{Field, Grid, Result, Spectral};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult};

pub const SUITES: [&str; 6] = ["operators", "potential", "elliptic", "darcy", "scheme", "theorems"];

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

fn sci(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", items.join(", "))
}

fn standard() -> (PotentialSpec, ViscositySpec) {
    (PotentialSpec::new(1.0, 2.0).expect("valid"), ViscositySpec::new(1.0, 2.0).expect("valid"))
}

fn noise(g: Grid, rng: &mut ChaCha8Rng) -> Field {
    let v = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Field::from_values(g, v).expect("sized")
}

fn operators() -> Result<Vec<Check>> {
    let g = Grid::new(32, 32, 3.0, 2.0)?;
    let ws = Spectral::new(g);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut inv, mut adj, mut dual, mut curl, mut poin, mut interp) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, true, true);
    for _ in 0..10 {
        let (f, h) = (noise(g, &mut rng).mean_free(), noise(g, &mut rng).mean_free());
        let u = ws.inv_neg_laplacian(&f)?;
        inv = inv.max((&ws.neg_laplacian(&u) - &f).l2() / f.l2());
        let (a, b) = (f.dot(&ws.inv_neg_laplacian(&h)?), u.dot(&h));
        adj = adj.max((a - b).abs() / (f.l2() * h.l2()));
        let (gx, gy) = ws.gradient(&f);
        let lhs = gx.dot(&h) + gy.dot(&u);
        let rhs = -f.dot(&ws.divergence(&h, &u));
        dual = dual.max((lhs - rhs).abs() / ((gx.l2() + gy.l2()) * (h.l2() + u.l2())));
        curl = curl.max(ws.curl(&gx, &gy).linf() / ws.neg_laplacian(&f).linf());
        poin &= f.l2() <= ws.h1_semi(&f) / ws.lambda_min().sqrt() * (1.0 + 1e-12);
        interp &= f.l2().powi(2) <= ws.v0_dual(&f)? * ws.h1_semi(&f) * (1.0 + 1e-12);
    }
    let c = Field::constant(g, 2.5);
    let kernel = ws.neg_laplacian(&c).linf();
    Ok(vec![
        check("inverse Laplacian round trip", inv < 1e-10, format!("max rel residual {inv:.2e}")),
        check("inverse Laplacian self-adjoint", adj < 1e-12, format!("max rel asymmetry {adj:.2e}")),
        check("divergence is minus gradient transpose", dual < 1e-12, format!("max rel defect {dual:.2e}")),
        check("curl of gradient vanishes", curl < 1e-10, format!("max rel curl {curl:.2e}")),
        check("Poincaré inequality", poin, "10 random fields".into()),
        check("interpolation inequality", interp, "10 random fields".into()),
        check("constants in the kernel", kernel < 1e-13, format!("|Δc| {kernel:.2e}")),
    ])
}

fn potential() -> Result<Vec<Check>> {
    let spec = PotentialSpec::new(1.0, 2.0)?;
    let root = spec.find_beta()?;
    let n = 20_000;
    let s_grid: Vec<f64> = (1..n).map(|k| -1.0 + 2.0 * k as f64 / n as f64).collect();
    let mut convex = true;
    let mut growth = true;
    let mut odd = true;
    for &s in &s_grid {
        let (f1, f2) = (spec.f_log(s, 1)?, spec.f_log(s, 2)?);
        convex &= f2 >= spec.theta;
        let c = 1f64.max(2.0 / spec.theta).max(spec.theta);
        growth &= f2 <= c * (c * f1.abs()).exp() * (1.0 + 1e-12);
        odd &= spec.f_log(-s, 1)? == -f1;
    }
    let reg = spec.with_epsilon(1e-2)?;
    let mut exact = true;
    let mut reg_convex = f64::INFINITY;
    for k in 0..=n {
        let s = -3.0 + 6.0 * k as f64 / n as f64;
        reg_convex = reg_convex.min(reg.f_eps(s, 2)?);
        if s.abs() <= 0.99 {
            exact &= reg.f_eps(s, 0)? == spec.f_log(s, 0)?;
        }
    }
    let mut fd: f64 = 0.0;
    for &s in s_grid.iter().step_by(97) {
        let h = 1e-5 * (1.0 - s.abs());
        for order in 1..=3u8 {
            let d = (spec.f_log(s + h, order - 1)? - spec.f_log(s - h, order - 1)?) / (2.0 * h);
            let size = spec.theta / (1.0 - s.abs()).powi(order as i32);
            fd = fd.max((d - spec.f_log(s, order)?).abs() / size);
        }
    }
    Ok(vec![
        check(
            "beta solves the minimizer equation",
            root.residual <= 1e-12 && spec.psi(root.beta, 0)? < 0.0,
            format!("β = {:.15}, residual {:.1e}", root.beta, root.residual),
        ),
        check("convexity floor F'' ≥ θ", convex, format!("{} samples", s_grid.len())),
        check("exponential growth bound", growth, "C = max(1, 2/θ, θ)".into()),
        check("odd derivative", odd, "F'(-s) = -F'(s) bitwise".into()),
        check("regularization exact inside", exact, "|s| ≤ 1 - ε".into()),
        check("regularization uniformly convex", reg_convex > 0.0, format!("inf F_ε'' = {reg_convex:.6}")),
        check("derivatives match differences", fd < 1e-6, format!("max scaled defect {fd:.2e}")),
    ])
}

/// `u* = 0.8 tanh(8w)/tanh(8)` with `w = cos(πx)cos(πy)`, as `(u, Δu, |∇w|², ∂u/∂w, w)`.
fn manufactured(x: f64, y: f64) -> (f64, f64, f64, f64, f64) {
    let (cx, sx, cy, sy) = ((PI * x).cos(), (PI * x).sin(), (PI * y).cos(), (PI * y).sin());
    let w = cx * cy;
    let grad2 = PI * PI * (sx * sx * cy * cy + cx * cx * sy * sy);
    let a = 0.8 / 8f64.tanh();
    let z = 8.0 * w;
    let du = a * 8.0 / z.cosh().powi(2);
    let lap = du * (-2.0 * PI * PI * w - 16.0 * z.tanh() * grad2);
    (a * z.tanh(), lap, grad2, du, w)
}

fn manufactured_errors(n: usize, spec: &PotentialSpec) -> Result<(f64, f64)> {
    let g = Grid::square(n, 1.0)?;
    let ws = Spectral::new(g);
    let exact = Field::from_fn(g, |x, y| manufactured(x, y).0);
    let k = Field::from_fn(g, |x, y| 2.0 + (3.0 * manufactured(x, y).4).tanh());
    let f = Field::from_fn(g, |x, y| {
        let (_, lap, grad2, du, w) = manufactured(x, y);
        let z = 3.0 * w;
        -(3.0 / z.cosh().powi(2) * du * grad2 + (2.0 + z.tanh()) * lap)
    });
    let var = solve_variable_neumann(&ws, &k, &f.mean_free(), &PcgConfig { rel_tol: 1e-13, max_iter: None })?;
    let var_err = (&var.u - &exact.mean_free()).linf();
    let rhs = Field::from_fn(g, |x, y| {
        let (u, lap, ..) = manufactured(x, y);
        spec.f_log(u, 1).map(|fp| -lap + fp).unwrap_or(f64::NAN)
    });
    let log = solve_log_elliptic(&ws, spec, &rhs, &NewtonConfig::default())?;
    Ok((var_err, (&log.u - &exact).linf()))
}

fn elliptic() -> Result<Vec<Check>> {
    let spec = PotentialSpec::new(1.0, 2.0)?;
    let g = Grid::square(64, 4.0)?;
    let ws = Spectral::new(g);
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..20 {
        let f = smooth_random_field(g, 100 + seed).scale(3.0).add_scalar(0.3);
        let sol = solve_log_elliptic(&ws, &spec, &f, &NewtonConfig::default())?;
        for p in [2.0, 4.0, 8.0, f64::INFINITY] {
            worst = worst.max(sol.fprime_u.lp(p) / f.lp(p) - 1.0);
        }
    }
    let errs = [32, 64, 128].iter().map(|&n| manufactured_errors(n, &spec)).collect::<Result<Vec<_>>>()?;
    let var: Vec<f64> = errs.iter().map(|e| e.0).collect();
    let log: Vec<f64> = errs.iter().map(|e| e.1).collect();
    let dec = |e: &[f64]| e.windows(2).all(|w| w[1] < w[0]);
    let f = smooth_random_field(g, 9).scale(2.0);
    let cfg = NewtonConfig::default();
    let u1 = solve_log_elliptic(&ws, &spec, &f, &cfg)?.u;
    let u2 = solve_log_elliptic(&ws, &spec, &f.add_scalar(0.5), &cfg)?.u;
    let order = u2.zip_map(&u1, |a, b| a - b).min();
    let k = Field::from_fn(g, |x, y| 1.0 + 99.0 * 0.5 * (1.0 + (PI * x / 4.0).cos() * (PI * y / 4.0).cos()));
    let rhs = smooth_random_field(g, 5);
    let pcg = PcgConfig::default();
    let sol = solve_variable_neumann(&ws, &k, &rhs, &pcg)?;
    let res = (&apply_variable_operator(&ws, &k, &sol.u) - &rhs).l2() / rhs.l2();
    Ok(vec![
        check("L^p bounds on F'(u)", worst <= 1e-8, format!("20 data, max ratio - 1 = {worst:.2e}")),
        check("variable-coefficient refinement", dec(&var), format!("errors {}", sci(&var))),
        check("logarithmic refinement", dec(&log), format!("errors {}", sci(&log))),
        check("comparison principle", order >= -1e-10, format!("min(u₂ - u₁) = {order:.2e}")),
        check(
            "contrast 100 meets tolerance",
            res <= 1.01 * pcg.rel_tol,
            format!("{} iterations, rel residual {res:.2e}", sol.iterations),
        ),
    ])
}

/// Relative vorticity and Korteweg residuals of a generic sharp-interface
/// snapshot on an `n²` grid.
fn snapshot_identities(n: usize) -> Result<(f64, f64)> {
    let (spec, visc) = standard();
    let g = Grid::square(n, 8.0)?;
    let phi0 = smooth_random_field(g, 3).map(|r| 0.9 * (2.0 * r).tanh());
    let mut sim = Simulation::new(phi0, &spec, visc, StepConfig::new(1e-5))?;
    for _ in 0..5 {
        sim.step()?;
    }
    let s = sim.state();
    let ws = sim.workspace();
    let (gx, gy) = ws.gradient(&s.phi);
    let (mx, my) = ws.gradient(&s.mu);
    let torque = (&(&mx * &gy) - &(&my * &gx)).l2();
    let force = ((&s.mu * &gx).l2().powi(2) + (&s.mu * &gy).l2().powi(2)).sqrt();
    Ok((s.vorticity_residual / torque, korteweg_residual(ws, &s.phi, sim.free_energy())? / force))
}

fn darcy() -> Result<Vec<Check>> {
    let g = Grid::square(48, 5.0)?;
    let ws = Spectral::new(g);
    let (kx, ky) = (PI / g.lx, PI / g.ly);
    let phi = Field::from_fn(g, |x, y| 0.5 * (kx * x).cos() * (1.0 + 0.4 * (2.0 * ky * y).cos()));
    let mu = Field::from_fn(g, |x, y| (2.0 * kx * x).cos() + 0.7 * (kx * x).cos() * (ky * y).cos());
    let tight = PcgConfig { rel_tol: 1e-12, max_iter: None };
    let matched = solve_darcy(&ws, &phi, &mu, &ViscositySpec::matched(1.0)?, &tight)?;
    let (gx, gy) = ws.gradient(&phi);
    let oracle = ws.inv_neg_laplacian_projected(&-&ws.divergence(&(&mu * &gx), &(&mu * &gy)));
    let matched_err = (&matched.p - &oracle).linf();
    let visc = ViscositySpec::new(1.0, 5.0)?;
    let out = solve_darcy(&ws, &phi, &mu, &visc, &tight)?;
    let other = pressure_from_velocity(&ws, &phi, &mu, &out.u, &visc);
    let agree = (&out.p - &other).linf() / (1.0 + out.p.linf());
    let nu = visc.field(&phi);
    let diss = (&nu * &(&(&out.u.0 * &out.u.0) + &(&out.u.1 * &out.u.1))).integral();
    let work = (&(&(&mu * &gx) * &out.u.0) + &(&(&mu * &gy) * &out.u.1)).integral();
    let snaps = [32, 64, 128].iter().map(|&n| snapshot_identities(n)).collect::<Result<Vec<_>>>()?;
    let vort: Vec<f64> = snaps.iter().map(|s| s.0).collect();
    let kort: Vec<f64> = snaps.iter().map(|s| s.1).collect();
    let dec = |e: &[f64]| e.windows(2).all(|w| w[1] < w[0]);
    Ok(vec![
        check("matched pressure is a Poisson solve", matched_err < 1e-9, format!("max diff {matched_err:.2e}")),
        check("pressure problems agree", agree < 1e-8, format!("rel diff {agree:.2e}")),
        check("divergence at solver tolerance", out.div_residual <= 1.01 * tight.rel_tol, format!("{:.2e}", out.div_residual)),
        check("dissipation equals work", (diss - work).abs() < 1e-9 * diss, format!("{diss:.6e} vs {work:.6e}")),
        check("vorticity identity refines", dec(&vort), sci(&vort)),
        check("Korteweg identity refines", dec(&kort), sci(&kort)),
    ])
}

fn spinodal(n: usize, amplitude: f64, seed: u64) -> Result<Field> {
    let spec = standard().0;
    let params = ScenarioParams { amplitude, seed, ..Default::default() };
    make_scenario(Scenario::Spinodal, Grid::square(n, 10.0)?, &params, &FreeEnergy::Logarithmic(spec))
}

fn runs(phi0: Field, cfg: StepConfig, t_end: f64) -> Result<Vec<DiagRecord>> {
    let (spec, visc) = standard();
    record_run(phi0, &spec, visc, cfg, t_end, 1)
}

fn scheme() -> Result<Vec<Check>> {
    let (spec, visc) = standard();
    let reference = runs(spinodal(64, 0.2, 7)?, StepConfig::new(1e-4), 0.1)?;
    let m0 = reference[0].mass;
    let drift = reference.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max);
    let up = reference[3..].windows(2).map(|w| w[1].energy - w[0].energy).fold(f64::NEG_INFINITY, f64::max);
    let mut frozen_up = 0;
    for dt in [1e-3, 1e-2, 1e-1] {
        let cfg = StepConfig { transport: Transport::Frozen, ..StepConfig::new(dt) };
        let recs = runs(spinodal(32, 0.3, 2)?, cfg, 10.0 * dt)?;
        frozen_up += recs.windows(2).filter(|w| w[1].energy > w[0].energy).count();
    }
    let beta = spec.find_beta()?.beta;
    let g = Grid::square(16, 10.0)?;
    let mut sim = Simulation::new(Field::constant(g, beta), &spec, visc, StepConfig::new(0.1))?;
    for _ in 0..5 {
        sim.step()?;
    }
    let fixed = (&sim.state().phi - &Field::constant(g, beta)).linf();
    let finals = [2e-3, 1e-3, 5e-4]
        .iter()
        .map(|&dt| {
            let mut sim = Simulation::new(spinodal(32, 0.2, 7)?, &spec, visc, StepConfig::new(dt))?;
            sim.run(0.05, usize::MAX, |_, _| Ok(()))?;
            Ok(sim.state().phi.clone())
        })
        .collect::<Result<Vec<Field>>>()?;
    let rate = ((&finals[0] - &finals[1]).l2() / (&finals[1] - &finals[2]).l2()).log2();
    let sep = reference.iter().map(|r| r.separation).fold(f64::INFINITY, f64::min);
    Ok(vec![
        check("mass conservation", drift <= 1e-12, format!("max drift {drift:.2e}")),
        check("coupled energy after step 3", up <= 1e-10, format!("max increment {up:.2e}")),
        check("pure Cahn-Hilliard energy stability", frozen_up == 0, format!("{frozen_up} increases at dt up to 0.1")),
        check("separation on the reference run", sep > 0.0, format!("min {sep:.3e}")),
        check("β is a fixed point", fixed <= 1e-12, format!("drift {fixed:.1e}")),
        check("first order in time", (0.8..=1.2).contains(&rate), format!("rate {rate:.3}")),
    ])
}

fn theorems() -> Result<Vec<Check>> {
    let (spec, visc) = standard();
    let mut res = Vec::new();
    let mut sep = f64::INFINITY;
    let mut sandwich = true;
    let c = sandwich_constant(&visc);
    for dt in [1e-3, 5e-4, 2.5e-4] {
        let recs = runs(spinodal(64, 0.2, 7)?, StepConfig::new(dt), 0.05)?;
        sep = sep.min(recs.iter().map(|r| r.separation).fold(f64::INFINITY, f64::min));
        for r in &recs {
            let s = r.grad_mu_l2.powi(2) + r.u_l2.powi(2);
            sandwich &= s / c <= r.h && r.h <= c * s;
        }
        res.push(energy_balance_residual(&recs)?);
    }
    let ratios: Vec<f64> = res.windows(2).map(|w| w[0] / w[1]).collect();
    let hot = runs(spinodal(64, 0.95, 7)?, StepConfig::new(1e-3), 0.5)?;
    let hot_sep = hot.iter().map(|r| r.separation).fold(f64::INFINITY, f64::min);
    let base = spinodal(64, 0.2, 7)?;
    let pert = smooth_random_field(*base.grid(), 21);
    let rows = continuous_dependence_experiment(&base, &pert, &[1e-2, 1e-3, 1e-4], 0.1, &spec, visc, StepConfig::new(2.5e-4))?;
    let r: Vec<f64> = rows.iter().map(|row| row.r_v0dual).collect();
    let (lo, hi) = r.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    let g = Grid::square(64, 10.0)?;
    let full = decay_experiment(g, 0.01, 1.0, &spec, visc, StepConfig::new(1e-2), 1)?;
    let half = decay_experiment(g, 0.005, 1.0, &spec, visc, StepConfig::new(1e-2), 1)?;
    let scaling = full.c0 / half.c0;
    let model = FreeEnergy::Logarithmic(spec);
    let shifted_ok = full.records.iter().all(|r| r.shifted_energy >= -1e-10);
    let e0 = energy(&Spectral::new(g), &Field::constant(g, spec.find_beta()?.beta), &model)?;
    Ok(vec![
        check("energy balance is first order", ratios.iter().all(|&q| q >= 1.7), format!("ratios {ratios:.3?}")),
        check("separation on all runs", sep > 0.0 && full.min_separation > 0.0, format!("min {sep:.3e}")),
        check("separation from ‖φ₀‖∞ = 0.95", hot_sep >= 1e-4, format!("min {hot_sep:.3e} to T = 0.5")),
        check("higher-order energy sandwich", sandwich, format!("C = {c}")),
        check("continuous dependence", hi <= 3.0 * lo, format!("V₀' ratios {r:.4?}")),
        check(
            "small-data decay",
            full.rate > 0.0 && full.monotone && (2.5..=6.0).contains(&scaling),
            format!("γ = {:.3}, c₀ ratio {scaling:.3}", full.rate),
        ),
        check("shifted energy nonnegative", shifted_ok && e0 < 0.0, format!("E(β) = {e0:.6}")),
    ])
}

/// Runs a suite, printing one line per property. Fails with the names of the
/// failing properties.
pub fn run_suite(name: &str) -> CliResult<Vec<Check>> {
    let start = Instant::now();
    let checks = match name {
        "operators" => operators(),
        "potential" => potential(),
        "elliptic" => elliptic(),
        "darcy" => darcy(),
        "scheme" => scheme(),
        "theorems" => theorems(),
        other => {
            return Err(CliError::Usage(format!("unknown suite `{other}`; expected one of {}", SUITES.join(", "))))
        }
    }
    .map_err(CliError::Solver)?;
    for c in &checks {
        println!("{} {:<42} {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("suite {name}: {} checks in {:.1?}", checks.len(), start.elapsed());
    let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| c.name.to_string()).collect();
    if failed.is_empty() {
        Ok(checks)
    } else {
        Err(CliError::Property(failed))
    }
}
