#![allow(dead_code)]

use std::f64::consts::{E, PI};

use hdch::darcy::{korteweg_residual, ViscositySpec};
use hdch::elliptic::{solve_log_elliptic, solve_variable_neumann, NewtonConfig, PcgConfig};
use hdch::potential::{FreeEnergy, PotentialSpec};
use hdch::stepper::{smooth_random_field, Simulation, StepConfig};
use hdch::{Field, Grid, Spectral};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn standard() -> (PotentialSpec, ViscositySpec) {
    (PotentialSpec::new(1.0, 2.0).unwrap(), ViscositySpec::new(1.0, 2.0).unwrap())
}

/// Relative vorticity and Korteweg residuals of a field with sharp, generic
/// interfaces advanced a few steps on an `n²` grid.
pub fn snapshot_residuals(n: usize) -> (f64, f64) {
    let (spec, visc) = standard();
    let model = FreeEnergy::Logarithmic(spec);
    let g = Grid::square(n, 8.0).unwrap();
    let phi0 = smooth_random_field(g, 3).map(|r| 0.9 * (2.0 * r).tanh());
    let mut sim = Simulation::new(phi0, &spec, visc, StepConfig::new(1e-5)).unwrap();
    for _ in 0..5 {
        sim.step().unwrap();
    }
    let s = sim.state();
    let ws = Spectral::new(g);
    let (gx, gy) = ws.gradient(&s.phi);
    let (mx, my) = ws.gradient(&s.mu);
    let torque = (&(&mx * &gy) - &(&my * &gx)).l2();
    let (dx, dy) = ws.gradient(&s.phi);
    let force = ((&s.mu * &dx).l2().powi(2) + (&s.mu * &dy).l2().powi(2)).sqrt();
    (
        s.vorticity_residual / torque,
        korteweg_residual(&ws, &s.phi, &model).unwrap() / force,
    )
}

/// Classical fourth-order Runge-Kutta for `f' = rhs(t, f)` on the sample times.
pub fn rk4(f0: f64, t: &[f64], rhs: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut out = vec![f0];
    let mut f = f0;
    for w in t.windows(2) {
        let (t0, h) = (w[0], w[1] - w[0]);
        let k1 = rhs(t0, f);
        let k2 = rhs(t0 + 0.5 * h, f + 0.5 * h * k1);
        let k3 = rhs(t0 + 0.5 * h, f + 0.5 * h * k2);
        let k4 = rhs(t0 + h, f + h * k3);
        f += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push(f);
    }
    out
}

/// `w = cos(πx)cos(πy)` on the unit square with its gradient and Laplacian.
pub struct Bump {
    pub w: f64,
    pub grad2: f64,
    pub lap: f64,
}

pub fn bump(x: f64, y: f64) -> Bump {
    let (cx, sx, cy, sy) = ((PI * x).cos(), (PI * x).sin(), (PI * y).cos(), (PI * y).sin());
    Bump {
        w: cx * cy,
        grad2: PI * PI * (sx * sx * cy * cy + cx * cx * sy * sy),
        lap: -2.0 * PI * PI * cx * cy,
    }
}

pub fn sech2(z: f64) -> f64 {
    1.0 / z.cosh().powi(2)
}

pub const STEEP: f64 = 8.0;

/// `u* = 0.8 tanh(c w)/tanh(c)`, returning `(u, |∇u|/|∇w|, Δu)`.
pub fn manufactured(b: &Bump) -> (f64, f64, f64) {
    let a = 0.8 / STEEP.tanh();
    let z = STEEP * b.w;
    let du = a * STEEP * sech2(z);
    let lap = du * (b.lap - 2.0 * STEEP * z.tanh() * b.grad2);
    (a * z.tanh(), du, lap)
}

pub fn coefficient(b: &Bump) -> (f64, f64) {
    let z = 3.0 * b.w;
    (2.0 + z.tanh(), 3.0 * sech2(z))
}

pub fn variable_error(n: usize) -> f64 {
    let g = Grid::square(n, 1.0).unwrap();
    let ws = Spectral::new(g);
    let k = Field::from_fn(g, |x, y| coefficient(&bump(x, y)).0);
    let f = Field::from_fn(g, |x, y| {
        let b = bump(x, y);
        let (_, du, lap) = manufactured(&b);
        let (kv, dk) = coefficient(&b);
        -(dk * du * b.grad2 + kv * lap)
    });
    let exact = Field::from_fn(g, |x, y| manufactured(&bump(x, y)).0).mean_free();
    let cfg = PcgConfig { rel_tol: 1e-13, max_iter: None };
    let sol = solve_variable_neumann(&ws, &k, &f.mean_free(), &cfg).unwrap();
    (&sol.u - &exact).linf()
}

pub fn log_error(n: usize) -> f64 {
    let spec = PotentialSpec::new(1.0, 2.0).unwrap();
    let g = Grid::square(n, 1.0).unwrap();
    let ws = Spectral::new(g);
    let f = Field::from_fn(g, |x, y| {
        let (u, _, lap) = manufactured(&bump(x, y));
        -lap + spec.f_log(u, 1).unwrap()
    });
    let exact = Field::from_fn(g, |x, y| manufactured(&bump(x, y)).0);
    let sol = solve_log_elliptic(&ws, &spec, &f, &NewtonConfig::default()).unwrap();
    (&sol.u - &exact).linf()
}

/// Nonnegative `g`, `h` with random offsets, modulation and frequency.
pub struct Triple {
    pub f0: f64,
    pub g: Box<dyn Fn(f64) -> f64>,
    pub h: Box<dyn Fn(f64) -> f64>,
}

impl Triple {
    pub fn random(rng: &mut ChaCha8Rng, f0_min: f64) -> Self {
        let (g0, gc, gw) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.5..6.0));
        let (h0, hc, hw) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.5..6.0));
        Triple {
            f0: rng.gen_range(f0_min..3.0),
            g: Box::new(move |t: f64| g0 * (1.0 + gc * (gw * t).sin())),
            h: Box::new(move |t: f64| h0 * (1.0 + hc * (hw * t).cos())),
        }
    }

    /// RK4 solution of `f' = g f log(e + f) + h` with the sampled `g`, `h`.
    pub fn solve(&self, t: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let f = rk4(self.f0, t, |s, f| (self.g)(s) * f * (E + f).ln() + (self.h)(s));
        let gs = t.iter().map(|&s| (self.g)(s)).collect();
        let hs = t.iter().map(|&s| (self.h)(s)).collect();
        (f, gs, hs)
    }
}

/// `n + 1` equispaced samples of `[0, 2]`.
pub fn samples(n: usize) -> Vec<f64> {
    (0..=n).map(|k| 2.0 * k as f64 / n as f64).collect()
}
