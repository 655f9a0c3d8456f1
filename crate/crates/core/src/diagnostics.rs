//! Monitored quantities, the energy and dependence experiments, and the
//! logarithmic Gronwall bounds.

use std::io::{BufRead, Write};

use crate::darcy::ViscositySpec;
use crate::potential::{FreeEnergy, PotentialSpec};
use crate::stepper::{make_scenario, Scenario, ScenarioParams, SimState, Simulation, StepConfig};
use crate::{Error, Field, Grid, Result, Spectral};

pub const CSV_HEADER: &str = "t,mass,E,E_tilde,grad_mu_l2,u_l2,H,separation,div_res,vort_res";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub shifted_energy: f64,
    pub grad_mu_l2: f64,
    pub u_l2: f64,
    pub h: f64,
    /// `1 - ‖φ‖_∞`.
    pub separation: f64,
    pub div_residual: f64,
    pub vorticity_residual: f64,
}

impl DiagRecord {
    fn to_array(self) -> [f64; 10] {
        [
            self.t,
            self.mass,
            self.energy,
            self.shifted_energy,
            self.grad_mu_l2,
            self.u_l2,
            self.h,
            self.separation,
            self.div_residual,
            self.vorticity_residual,
        ]
    }

    fn from_array(a: [f64; 10]) -> Self {
        Self {
            t: a[0],
            mass: a[1],
            energy: a[2],
            shifted_energy: a[3],
            grad_mu_l2: a[4],
            u_l2: a[5],
            h: a[6],
            separation: a[7],
            div_residual: a[8],
            vorticity_residual: a[9],
        }
    }

    /// `‖∇μ‖² + ∫ν|u|² = 2H`.
    pub fn dissipation(&self) -> f64 {
        2.0 * self.h
    }
}

/// `E(φ) = ∫ ½|∇φ|² + Ψ(φ)`.
pub fn energy(ws: &Spectral, phi: &Field, model: &FreeEnergy) -> Result<f64> {
    let grad = ws.h1_semi(phi);
    Ok(0.5 * grad * grad + phi.try_map(|s| model.psi(s, 0))?.integral())
}

/// `Ẽ(φ) = E(φ) + |Ω|·|min Ψ|`, nonnegative up to quadrature error.
pub fn shifted_energy(ws: &Spectral, phi: &Field, model: &FreeEnergy) -> Result<f64> {
    Ok(energy(ws, phi, model)? + ws.grid().area() * model.psi_min()?.abs())
}

fn velocity_terms(state: &SimState, visc: &ViscositySpec) -> (f64, f64) {
    let (ux, uy) = &state.u;
    let speed2 = ux.zip_map(uy, |a, b| a * a + b * b);
    let weighted = speed2.zip_map(&state.phi, |s, p| visc.nu(p) * s).integral();
    (speed2.integral().sqrt(), weighted)
}

/// `H = ½‖∇μ‖² + ½∫ν(φ)|u|²`.
pub fn higher_order_energy(ws: &Spectral, state: &SimState, visc: &ViscositySpec) -> f64 {
    let g = ws.h1_semi(&state.mu);
    let (_, weighted) = velocity_terms(state, visc);
    0.5 * (g * g + weighted)
}

/// `C` with `(‖∇μ‖² + ‖u‖²)/C ≤ H ≤ C(‖∇μ‖² + ‖u‖²)`.
pub fn sandwich_constant(visc: &ViscositySpec) -> f64 {
    2.0 * visc.nu_max().max(1.0) / visc.nu_min().min(1.0)
}

pub fn record(ws: &Spectral, state: &SimState, model: &FreeEnergy, visc: &ViscositySpec) -> Result<DiagRecord> {
    let e = energy(ws, &state.phi, model)?;
    let grad_mu = ws.h1_semi(&state.mu);
    let (u_l2, weighted) = velocity_terms(state, visc);
    Ok(DiagRecord {
        t: state.t,
        mass: state.phi.mean(),
        energy: e,
        shifted_energy: e + ws.grid().area() * model.psi_min()?.abs(),
        grad_mu_l2: grad_mu,
        u_l2,
        h: 0.5 * (grad_mu * grad_mu + weighted),
        separation: 1.0 - state.phi.linf(),
        div_residual: state.div_residual,
        vorticity_residual: state.vorticity_residual,
    })
}

/// Runs to `t_end` and returns the records of the initial state, every
/// `record_every`-th step and the final state.
pub fn record_run(
    phi0: Field,
    spec: &PotentialSpec,
    visc: ViscositySpec,
    cfg: StepConfig,
    t_end: f64,
    record_every: usize,
) -> Result<Vec<DiagRecord>> {
    let mut sim = Simulation::new(phi0, spec, visc, cfg)?;
    let model = *sim.free_energy();
    let mut out = Vec::new();
    sim.run(t_end, record_every, |ws, s| {
        out.push(record(ws, s, &model, &visc)?);
        Ok(())
    })?;
    Ok(out)
}

/// `|E(T) - E(0) + ∫₀ᵀ (‖∇μ‖² + ∫ν|u|²)| / (|E(0)| + 1)`, time integral by
/// the trapezoidal rule over the records.
pub fn energy_balance_residual(records: &[DiagRecord]) -> Result<f64> {
    let (first, last) = match (records.first(), records.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::EmptyTrajectory),
    };
    let dissipated: f64 = records
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].dissipation() + w[1].dissipation()))
        .sum();
    Ok((last.energy - first.energy + dissipated).abs() / (first.energy.abs() + 1.0))
}

/// `%.17g`.
pub fn format_g17(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, v);
        strip_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip_zeros(mant), sign, exp.abs())
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv(mut w: impl Write, records: &[DiagRecord]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        let row: Vec<String> = r.to_array().iter().map(|&v| format_g17(v)).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_csv(r: impl BufRead) -> Result<Vec<DiagRecord>> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != CSV_HEADER {
        return Err(Error::Format("missing diagnostics header".into()));
    }
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut a = [0.0; 10];
        let mut cols = line.split(',');
        for slot in a.iter_mut() {
            let c = cols
                .next()
                .ok_or_else(|| Error::Format(format!("row {}: too few columns", n + 2)))?;
            *slot = c
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("row {}: bad number `{c}`", n + 2)))?;
        }
        if cols.next().is_some() {
            return Err(Error::Format(format!("row {}: too many columns", n + 2)));
        }
        out.push(DiagRecord::from_array(a));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DependenceRow {
    pub a: f64,
    /// `sup_t ‖φ₁ - φ₂‖_{V₀'} / ‖φ₀₁ - φ₀₂‖_{V₀'}`.
    pub r_v0dual: f64,
    pub r_l2: f64,
}

fn trajectory(phi0: Field, spec: &PotentialSpec, visc: ViscositySpec, cfg: StepConfig, t_end: f64) -> Result<Vec<Field>> {
    let mut sim = Simulation::new(phi0, spec, visc, cfg)?;
    let mut out = Vec::new();
    sim.run(t_end, 1, |_, s| {
        out.push(s.phi.clone());
        Ok(())
    })?;
    Ok(out)
}

fn map_amplitudes<T: Send>(amplitudes: &[f64], f: impl Fn(f64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        amplitudes.par_iter().map(|&a| f(a)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        amplitudes.iter().map(|&a| f(a)).collect()
    }
}

/// Runs `base_phi0` and `base_phi0 + a·perturbation` for every amplitude and
/// returns the worst growth of their distance over `[0, t_end]`.
#[allow(clippy::too_many_arguments)]
pub fn continuous_dependence_experiment(
    base_phi0: &Field,
    perturbation: &Field,
    amplitudes: &[f64],
    t_end: f64,
    spec: &PotentialSpec,
    visc: ViscositySpec,
    cfg: StepConfig,
) -> Result<Vec<DependenceRow>> {
    base_phi0.check_same_grid(perturbation)?;
    let ws = Spectral::new(*base_phi0.grid());
    ws.require_mean_zero(perturbation)?;
    let base = trajectory(base_phi0.clone(), spec, visc, cfg, t_end)?;
    map_amplitudes(amplitudes, |a| {
        if a == 0.0 {
            return Ok(DependenceRow { a, r_v0dual: 0.0, r_l2: 0.0 });
        }
        let mut phi0 = base_phi0.clone();
        phi0.axpy(a, perturbation);
        let other = trajectory(phi0, spec, visc, cfg, t_end)?;
        let mut d0 = (0.0, 0.0);
        let mut worst: (f64, f64) = (0.0, 0.0);
        for (k, (p, q)) in base.iter().zip(&other).enumerate() {
            let diff = p - q;
            let d = (ws.v0_dual_projected(&diff), diff.l2());
            if k == 0 {
                d0 = d;
            }
            worst = (worst.0.max(d.0), worst.1.max(d.1));
        }
        Ok(DependenceRow {
            a,
            r_v0dual: worst.0 / d0.0,
            r_l2: worst.1 / d0.1,
        })
    })
}

#[derive(Debug, Clone)]
pub struct DecayFit {
    /// Fitted `γ` in `H(t) ≈ c₀e^{-γt}`; `+∞` when `H ≡ 0`.
    pub rate: f64,
    pub c0: f64,
    /// Root mean square of the residual of the log-linear fit.
    pub fit_residual: f64,
    /// H nonincreasing over the fit window.
    pub monotone: bool,
    pub min_separation: f64,
    pub records: Vec<DiagRecord>,
}

/// Runs `perturbed_beta(a)` to `t_end` and fits `log H` linearly in `t` over
/// the second half of the run.
pub fn decay_experiment(
    grid: Grid,
    a: f64,
    t_end: f64,
    spec: &PotentialSpec,
    visc: ViscositySpec,
    cfg: StepConfig,
    record_every: usize,
) -> Result<DecayFit> {
    let model = cfg.splitting.free_energy(spec)?;
    let params = ScenarioParams {
        amplitude: a,
        ..Default::default()
    };
    let phi0 = make_scenario(Scenario::PerturbedBeta, grid, &params, &model)?;
    let records = record_run(phi0, spec, visc, cfg, t_end, record_every)?;
    let min_separation = records.iter().map(|r| r.separation).fold(f64::INFINITY, f64::min);
    let window: Vec<&DiagRecord> = records.iter().filter(|r| r.t >= 0.5 * t_end).collect();
    let monotone = window.windows(2).all(|w| w[1].h <= w[0].h);
    if window.iter().all(|r| r.h == 0.0) {
        return Ok(DecayFit {
            rate: f64::INFINITY,
            c0: 0.0,
            fit_residual: 0.0,
            monotone,
            min_separation,
            records,
        });
    }
    if window.len() < 2 || window.iter().any(|r| !(r.h > 0.0)) {
        return Err(Error::InvalidParams("decay fit window has too few positive samples".into()));
    }
    let pts: Vec<(f64, f64)> = window.iter().map(|r| (r.t, r.h.ln())).collect();
    let (slope, intercept, rms) = linear_fit(&pts);
    Ok(DecayFit {
        rate: -slope,
        c0: intercept.exp(),
        fit_residual: rms,
        monotone,
        min_separation,
        records,
    })
}

/// Least squares `y ≈ slope·x + intercept`; returns the rms residual too.
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum::<f64>() / n).sqrt();
    (slope, intercept, rms)
}

/// Cumulative trapezoidal integral of `f` sampled at `t`, starting at 0.
pub fn cumulative_trapezoid(f: &[f64], t: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    for k in 0..t.len() {
        if k > 0 {
            acc += 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
        }
        out.push(acc);
    }
    out
}

/// `sup_s ∫_s^{s+r} f` over the windows contained in the sampled interval.
pub fn max_window_integral(f: &[f64], t: &[f64], r: f64) -> f64 {
    let c = cumulative_trapezoid(f, t);
    let mut best: f64 = 0.0;
    let mut hi = 0;
    for lo in 0..t.len() {
        while hi + 1 < t.len() && t[hi + 1] <= t[lo] + r + 1e-12 {
            hi += 1;
        }
        if t[hi] < t[lo] + r - 1e-12 {
            break;
        }
        best = best.max(c[hi] - c[lo]);
    }
    best
}

fn check_samples(name: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::InvalidParams(format!("{name} has {} samples, expected {n}", v.len())));
    }
    if v.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::NegativeInput(name.into()));
    }
    Ok(())
}

/// Bound for positive `f` with `f' ≤ g f log(e + f) + h`:
/// `f(t) ≤ (e + f(0))^{exp G(t)} · exp(∫₀ᵗ e^{G(t) - G(τ)} h(τ) dτ)`,
/// `G(t) = ∫₀ᵗ g`, integrals by the trapezoidal rule on the samples `t`.
pub fn gronwall_log_bound(f0: f64, g: &[f64], h: &[f64], t: &[f64]) -> Result<Vec<f64>> {
    if !(f0 > 0.0) {
        return Err(Error::NegativeInput("f0".into()));
    }
    if t.is_empty() || t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams("time samples must be increasing".into()));
    }
    check_samples("g", g, t.len())?;
    check_samples("h", h, t.len())?;
    let big_g = cumulative_trapezoid(g, t);
    let weighted: Vec<f64> = h.iter().zip(&big_g).map(|(h, gg)| h * (-gg).exp()).collect();
    let inner = cumulative_trapezoid(&weighted, t);
    let s0 = (std::f64::consts::E + f0).ln();
    Ok(big_g
        .iter()
        .zip(&inner)
        .map(|(gg, i)| (gg.exp() * (s0 + i)).exp())
        .collect())
}

/// Uniform bound `f(t) ≤ exp((a₁/r + a₃)e^{a₂})` for `t ≥ r`, where `a₁, a₂, a₃`
/// bound the integrals of `f, g, h` over every window of length `r`.
pub fn gronwall_uniform_bound(a1: f64, a2: f64, a3: f64, r: f64) -> Result<f64> {
    for (name, v) in [("a1", a1), ("a2", a2), ("a3", a3), ("r", r)] {
        if !(v >= 0.0) {
            return Err(Error::NegativeInput(name.into()));
        }
    }
    if r == 0.0 {
        return Err(Error::InvalidParams("window length must be positive".into()));
    }
    Ok(((a1 / r + a3) * a2.exp()).exp())
}
