//! Time integration of the coupled Hele-Shaw-Cahn-Hilliard system
//!
//! ```text
//! ν(φ)u + ∇p = μ∇φ,   div u = 0,
//! ∂ₜφ + u·∇φ = Δμ,    μ = -Δφ + Ψ'(φ)
//! ```
//!
//! One step of size `dt` solves
//!
//! ```text
//! (φ¹ - φ⁰)/dt + div(u⁰φ⁰) = Δμ¹,   μ¹ = -Δφ¹ + F'(φ¹) - κφ⁰
//! ```
//!
//! (convex part implicit, concave part and transport explicit) and then
//! re-solves Darcy's law for the new phase field. Applying `A⁻¹ = (-Δ)⁻¹` to
//! the mean-free update turns the step into the minimization of a strictly
//! convex functional over mean-zero perturbations, whose gradient
//!
//! ```text
//! G(φ) = A⁻¹((φ - φ⁰)/dt + div(u⁰φ⁰)) + Aφ + P₀(F'(φ) - κφ⁰)
//! ```
//!
//! is driven to zero by Newton's method. The zero Fourier mode of every
//! update is exactly zero, so the mass is conserved to rounding.

mod initial;

pub use initial::{make_scenario, prepare_initial_data, smooth_random_field, InitPrep, Scenario, ScenarioParams};

use serde::{Deserialize, Serialize};

use crate::darcy::{solve_darcy, ViscositySpec};
use crate::elliptic::{pcg, NewtonConfig, PcgConfig};
use crate::potential::{FreeEnergy, PotentialSpec};
use crate::{Error, Field, Result, Spectral};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    ConvexSplitLog,
    ConvexSplitEps(f64),
    Polynomial,
}

impl Splitting {
    pub fn free_energy(&self, spec: &PotentialSpec) -> Result<FreeEnergy> {
        Ok(match *self {
            Splitting::ConvexSplitLog => FreeEnergy::Logarithmic(*spec),
            Splitting::ConvexSplitEps(eps) => FreeEnergy::Regularized(spec.with_epsilon(eps)?),
            Splitting::Polynomial => FreeEnergy::Quartic,
        })
    }
}

/// How the advection term enters the step. `Frozen` forces `u = 0` and
/// reduces the system to the Cahn-Hilliard equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transport {
    Explicit,
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    pub dt: f64,
    pub splitting: Splitting,
    pub transport: Transport,
    pub newton: NewtonConfig,
    pub pcg: PcgConfig,
}

impl StepConfig {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            splitting: Splitting::ConvexSplitLog,
            transport: Transport::Explicit,
            newton: NewtonConfig::default(),
            pcg: PcgConfig::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParams(format!("dt must be positive, got {}", self.dt)));
        }
        self.newton.validate()
    }
}

/// Time plus the tuple `(φ, μ, u, p)` and the Darcy solve diagnostics.
#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub phi: Field,
    pub mu: Field,
    pub p: Field,
    pub u: (Field, Field),
    pub div_residual: f64,
    pub vorticity_residual: f64,
    /// Newton iterations spent on the step that produced this state.
    pub newton_iterations: usize,
}

/// `μ = -Δφ + Ψ'(φ)`.
pub fn chemical_potential(ws: &Spectral, phi: &Field, energy: &FreeEnergy) -> Result<Field> {
    Ok(&ws.neg_laplacian(phi) + &phi.try_map(|s| energy.psi(s, 1))?)
}

fn check_phase(phi: &Field, energy: &FreeEnergy) -> Result<()> {
    if !phi.is_finite() {
        return Err(Error::InvalidParams("phase field is not finite".into()));
    }
    if energy.is_singular() {
        if let Some(v) = phi.values().iter().find(|v| !(v.abs() < 1.0)) {
            return Err(Error::OutOfRange { value: *v });
        }
    }
    Ok(())
}

/// Completes a phase field into a state: chemical potential plus Darcy solve.
pub fn complete_state(
    ws: &Spectral,
    t: f64,
    phi: Field,
    energy: &FreeEnergy,
    visc: &ViscositySpec,
    cfg: &StepConfig,
) -> Result<SimState> {
    check_phase(&phi, energy)?;
    let mu = chemical_potential(ws, &phi, energy)?;
    let grid = *phi.grid();
    let (p, u, div_residual, vorticity_residual) = match cfg.transport {
        Transport::Explicit => {
            let d = solve_darcy(ws, &phi, &mu, visc, &cfg.pcg)?;
            (d.p, d.u, d.div_residual, d.vorticity_residual)
        }
        Transport::Frozen => (
            Field::zeros(grid),
            (Field::zeros(grid), Field::zeros(grid)),
            0.0,
            0.0,
        ),
    };
    Ok(SimState {
        t,
        phi,
        mu,
        p,
        u,
        div_residual,
        vorticity_residual,
        newton_iterations: 0,
    })
}

/// Advances `state` by one step of `cfg.dt`.
pub fn step(
    ws: &Spectral,
    state: &SimState,
    cfg: &StepConfig,
    energy: &FreeEnergy,
    visc: &ViscositySpec,
) -> Result<SimState> {
    cfg.validate()?;
    let dt = cfg.dt;
    let phi0 = &state.phi;
    let kappa = energy.concave_coeff();
    let transport = match cfg.transport {
        Transport::Explicit => {
            let fx = &state.u.0 * phi0;
            let fy = &state.u.1 * phi0;
            ws.divergence(&fx, &fy)
        }
        Transport::Frozen => Field::zeros(*phi0.grid()),
    };
    let explicit = phi0.scale(kappa);

    let gradient = |phi: &Field| -> Result<(Field, f64)> {
        let inc = phi.zip_map(phi0, |a, b| (a - b) / dt);
        let w = &inc + &transport;
        let convex = phi.try_map(|s| energy.convex(s, 1))?;
        let local = (&convex - &explicit).mean_free();
        let a_phi = ws.neg_laplacian(phi);
        let g = &(&ws.inv_neg_laplacian_projected(&w) + &a_phi) + &local;
        let scale = 1.0 + a_phi.l2() + local.l2();
        Ok((g, scale))
    };

    // The gradient above is the derivative of this convex functional on the
    // mass-preserving affine space.
    let merit = |phi: &Field| -> Result<f64> {
        let inc = phi.zip_map(phi0, |a, b| (a - b) / dt);
        let w = &inc + &transport;
        let convex = phi.try_map(|s| energy.convex(s, 0))?;
        let inertia = 0.5 * dt * w.dot(&ws.inv_neg_laplacian_projected(&w));
        Ok(inertia + 0.5 * ws.h1_semi(phi).powi(2) + (&convex - &(&explicit * phi)).integral())
    };

    let newton = &cfg.newton;
    let clamp = if energy.is_singular() { newton.clamp } else { f64::INFINITY };
    let mut phi = phi0.clone();
    let (mut g, scale) = gradient(&phi)?;
    // Rounding in φ - φ⁰ is amplified by 1/(dt·λ_min) through A⁻¹.
    let floor = 10.0 * f64::EPSILON * phi0.l2() / (dt * ws.lambda_min());
    let target = (newton.tol * scale).max(floor);
    let mut gnorm = g.l2();
    let mut j = merit(&phi)?;
    let lin_budget = cfg.pcg.iteration_budget(ws);
    let mut iterations = 0;
    let mut converged = gnorm <= target;

    while !converged {
        if iterations == newton.max_iter {
            return Err(Error::NewtonDiverged {
                t: state.t,
                iterations,
                residual: gnorm,
            });
        }
        iterations += 1;
        let fpp = phi.try_map(|s| energy.convex(s, 2))?;
        let shift = fpp.mean();
        let rhs = (-&g).mean_free();
        let lin = pcg(
            |d| {
                let mut out = ws.apply_multiplier(d, |lam| if lam > 0.0 { 1.0 / (dt * lam) + lam } else { 0.0 });
                out.axpy(1.0, &(&fpp * d).mean_free());
                out
            },
            |r| ws.apply_multiplier(r, |lam| if lam > 0.0 { 1.0 / (1.0 / (dt * lam) + lam + shift) } else { 0.0 }),
            &rhs,
            1e-10,
            lin_budget,
        );
        let delta = lin.x;

        let slope = g.dot(&delta);

        let mut t_step: f64 = 1.0;
        if clamp.is_finite() {
            for (&p, &d) in phi.values().iter().zip(delta.values()) {
                if d > 0.0 && p + d >= 1.0 {
                    t_step = t_step.min(0.995 * (1.0 - p) / d);
                } else if d < 0.0 && p + d <= -1.0 {
                    t_step = t_step.min(0.995 * (-1.0 - p) / d);
                }
                if d > 0.0 && p + t_step * d > clamp {
                    t_step = t_step.min((clamp - p) / d);
                } else if d < 0.0 && p + t_step * d < -clamp {
                    t_step = t_step.min((-clamp - p) / d);
                }
            }
        }
        let dmax = delta.linf();
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial = phi.clone();
            trial.axpy(t_step, &delta);
            let (tg, _) = gradient(&trial)?;
            let tnorm = tg.l2();
            let tj = merit(&trial)?;
            if (tj < j && tj <= j + 1e-4 * t_step * slope) || tnorm < gnorm {
                phi = trial;
                g = tg;
                gnorm = tnorm;
                j = tj;
                accepted = true;
                break;
            }
            t_step *= 0.5;
        }
        // A Newton correction at the rounding level of φ means the residual
        // floor of the inverse-Laplacian term has been reached.
        let at_floor = dmax <= 1e-13 * (1.0 + phi.linf());
        if !accepted && !at_floor {
            return Err(Error::NewtonDiverged {
                t: state.t,
                iterations,
                residual: gnorm,
            });
        }
        converged = gnorm <= target || at_floor;
    }

    let mut next = complete_state(ws, state.t + dt, phi, energy, visc, cfg)?;
    next.newton_iterations = iterations;
    Ok(next)
}

/// A single simulation: owns its workspace, model and current state.
#[derive(Debug)]
pub struct Simulation {
    ws: Spectral,
    energy: FreeEnergy,
    visc: ViscositySpec,
    cfg: StepConfig,
    state: SimState,
    steps: usize,
}

impl Simulation {
    pub fn new(phi0: Field, spec: &PotentialSpec, visc: ViscositySpec, cfg: StepConfig) -> Result<Self> {
        cfg.validate()?;
        let energy = cfg.splitting.free_energy(spec)?;
        let ws = Spectral::new(*phi0.grid());
        let state = complete_state(&ws, 0.0, phi0, &energy, &visc, &cfg)?;
        Ok(Self {
            ws,
            energy,
            visc,
            cfg,
            state,
            steps: 0,
        })
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn workspace(&self) -> &Spectral {
        &self.ws
    }

    pub fn free_energy(&self) -> &FreeEnergy {
        &self.energy
    }

    pub fn viscosity(&self) -> &ViscositySpec {
        &self.visc
    }

    pub fn config(&self) -> &StepConfig {
        &self.cfg
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step(&mut self) -> Result<&SimState> {
        self.state = step(&self.ws, &self.state, &self.cfg, &self.energy, &self.visc)?;
        self.steps += 1;
        Ok(&self.state)
    }

    /// Steps until `t_end` (rounded to a whole number of steps), calling
    /// `observe` on the initial state, every `record_every` steps and on the
    /// final state.
    pub fn run(
        &mut self,
        t_end: f64,
        record_every: usize,
        mut observe: impl FnMut(&Spectral, &SimState) -> Result<()>,
    ) -> Result<()> {
        let record_every = record_every.max(1);
        let n = steps_for(t_end, self.cfg.dt);
        observe(&self.ws, &self.state)?;
        for k in 1..=n {
            self.step()?;
            if k % record_every == 0 || k == n {
                observe(&self.ws, &self.state)?;
            }
        }
        Ok(())
    }
}

/// Number of steps of size `dt` covering `[0, t_end]`.
pub fn steps_for(t_end: f64, dt: f64) -> usize {
    if t_end <= 0.0 {
        0
    } else {
        (t_end / dt).round().max(1.0) as usize
    }
}
