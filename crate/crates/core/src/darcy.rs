//! Darcy's law with the Korteweg forcing, `ν(φ)u + ∇p = μ∇φ`, `div u = 0`.
//!
//! The pressure is the mean-zero solution of
//! `-div(ν⁻¹∇p) = -div(ν⁻¹μ∇φ)`; the velocity follows pointwise. Both
//! velocity components carry sine factors along their own direction, so
//! `u·n = 0` on the boundary by construction.

use serde::{Deserialize, Serialize};

use crate::elliptic::{solve_variable_neumann, PcgConfig};
use crate::potential::FreeEnergy;
use crate::spectral::{Axis, Parity, SCALAR};
use crate::{Error, Field, Result, Spectral};

/// `ν(s) = ν₁(1+s̃)/2 + ν₂(1-s̃)/2` with `s̃ = clamp(s, -1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViscositySpec {
    pub nu1: f64,
    pub nu2: f64,
}

/// Half-width of the cubic transition used by the smoothed blend.
const SMOOTH_WIDTH: f64 = 1e-3;

impl ViscositySpec {
    pub fn new(nu1: f64, nu2: f64) -> Result<Self> {
        if !(nu1.is_finite() && nu2.is_finite() && nu1 > 0.0 && nu2 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "viscosities must be positive, got {nu1}, {nu2}"
            )));
        }
        Ok(Self { nu1, nu2 })
    }

    pub fn matched(nu: f64) -> Result<Self> {
        Self::new(nu, nu)
    }

    pub fn nu_min(&self) -> f64 {
        self.nu1.min(self.nu2)
    }

    pub fn nu_max(&self) -> f64 {
        self.nu1.max(self.nu2)
    }

    fn slope(&self) -> f64 {
        0.5 * (self.nu1 - self.nu2)
    }

    pub fn nu(&self, s: f64) -> f64 {
        let s = s.clamp(-1.0, 1.0);
        0.5 * (self.nu1 * (1.0 + s) + self.nu2 * (1.0 - s))
    }

    /// Piecewise-constant derivative of the clamped blend.
    pub fn nu_prime(&self, s: f64) -> f64 {
        if s.abs() < 1.0 {
            self.slope()
        } else {
            0.0
        }
    }

    /// C¹ variant: linear on `|s| ≤ 1 - w`, constant on `|s| ≥ 1 + w`, cubic
    /// Hermite in between (`w = 1e-3`).
    pub fn nu_smooth(&self, s: f64) -> f64 {
        let w = SMOOTH_WIDTH;
        let a = s.abs();
        if a <= 1.0 - w {
            return self.nu(s);
        }
        let end = self.nu(s.signum());
        if a >= 1.0 + w {
            return end;
        }
        // Hermite on [1-w, 1+w] in the variable a, matching value and slope.
        let sgn = s.signum();
        let v0 = self.nu(sgn * (1.0 - w));
        let d0 = self.slope() * sgn;
        let t = (a - (1.0 - w)) / (2.0 * w);
        let h = 2.0 * w;
        let h00 = 2.0 * t.powi(3) - 3.0 * t * t + 1.0;
        let h10 = t.powi(3) - 2.0 * t * t + t;
        let h01 = -2.0 * t.powi(3) + 3.0 * t * t;
        h00 * v0 + h10 * h * d0 + h01 * end
    }

    pub fn nu_smooth_prime(&self, s: f64) -> f64 {
        let w = SMOOTH_WIDTH;
        let a = s.abs();
        if a <= 1.0 - w {
            return self.slope();
        }
        if a >= 1.0 + w {
            return 0.0;
        }
        let sgn = s.signum();
        let v0 = self.nu(sgn * (1.0 - w));
        let end = self.nu(sgn);
        let d0 = self.slope() * sgn;
        let h = 2.0 * w;
        let t = (a - (1.0 - w)) / h;
        let dh00 = 6.0 * t * t - 6.0 * t;
        let dh10 = 3.0 * t * t - 4.0 * t + 1.0;
        let dh01 = -6.0 * t * t + 6.0 * t;
        // d/ds = sgn · d/da, d/da = (1/h) d/dt
        sgn * (dh00 * v0 + dh10 * h * d0 + dh01 * end) / h
    }

    pub fn field(&self, phi: &Field) -> Field {
        phi.map(|s| self.nu(s))
    }
}

#[derive(Debug, Clone)]
pub struct DarcyOutput {
    pub p: Field,
    pub u: (Field, Field),
    /// `‖div u‖ / ‖div(ν⁻¹μ∇φ)‖` (0 when the forcing is a pure gradient).
    pub div_residual: f64,
    pub vorticity_residual: f64,
    pub pcg_iterations: usize,
}

/// Pressure and velocity for the given phase field and chemical potential.
pub fn solve_darcy(
    ws: &Spectral,
    phi: &Field,
    mu: &Field,
    visc: &ViscositySpec,
    cfg: &PcgConfig,
) -> Result<DarcyOutput> {
    phi.check_same_grid(mu)?;
    if !(phi.is_finite() && mu.is_finite()) {
        return Err(Error::InvalidParams("non-finite phase field or potential".into()));
    }
    let grid = *phi.grid();
    let inv_nu = phi.map(|s| 1.0 / visc.nu(s));
    let (gx, gy) = ws.gradient(phi);
    let force = (mu * &gx, mu * &gy);
    let wx = &inv_nu * &force.0;
    let wy = &inv_nu * &force.1;
    let rhs = -&ws.divergence(&wx, &wy);
    let rhs_norm = rhs.l2();
    let (p, iterations) = if rhs_norm == 0.0 {
        (Field::zeros(grid), 0)
    } else {
        // The forcing divergence is mean-free exactly in coefficient space;
        // strip the rounding residue before the precondition check.
        let sol = solve_variable_neumann(ws, &inv_nu, &rhs.mean_free(), cfg)?;
        (sol.u, sol.iterations)
    };
    let (px, py) = ws.gradient(&p);
    let u = (
        inv_nu.zip_map(&(&force.0 - &px), |k, v| k * v),
        inv_nu.zip_map(&(&force.1 - &py), |k, v| k * v),
    );
    let div_residual = if rhs_norm == 0.0 {
        0.0
    } else {
        ws.divergence(&u.0, &u.1).l2() / rhs_norm
    };
    let vorticity_residual = vorticity_residual(ws, phi, mu, &u, visc);
    Ok(DarcyOutput {
        p,
        u,
        div_residual,
        vorticity_residual,
        pcg_iterations: iterations,
    })
}

/// `‖ν(φ) curl u + ν'(φ)∇φ·u^⊥ - ∇μ·(∇φ)^⊥‖` with `v^⊥ = (v₂, -v₁)`, obtained by
/// taking the curl of Darcy's law. `ν'` is taken from the smoothed blend.
pub fn vorticity_residual(
    ws: &Spectral,
    phi: &Field,
    mu: &Field,
    u: &(Field, Field),
    visc: &ViscositySpec,
) -> f64 {
    let curl = ws.curl(&u.0, &u.1);
    let (gx, gy) = ws.gradient(phi);
    let (mx, my) = ws.gradient(mu);
    let grid = *phi.grid();
    let mut out = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let s = phi.values()[idx];
        let (ux, uy) = (u.0.values()[idx], u.1.values()[idx]);
        let (px, py) = (gx.values()[idx], gy.values()[idx]);
        let lhs = visc.nu(s) * curl.values()[idx] + visc.nu_smooth_prime(s) * (px * uy - py * ux);
        let rhs = mx.values()[idx] * py - my.values()[idx] * px;
        out.push(lhs - rhs);
    }
    Field::from_raw(grid, out).l2()
}

/// The pressure read from the second Neumann problem,
/// `p = A⁻¹(-div(-ν(φ)u + μ∇φ))`; used as an oracle for matched viscosities.
pub fn pressure_from_velocity(
    ws: &Spectral,
    phi: &Field,
    mu: &Field,
    u: &(Field, Field),
    visc: &ViscositySpec,
) -> Field {
    let nu = visc.field(phi);
    let (gx, gy) = ws.gradient(phi);
    let wx = &(mu * &gx) - &(&nu * &u.0);
    let wy = &(mu * &gy) - &(&nu * &u.1);
    let rhs = -&ws.divergence(&wx, &wy);
    ws.inv_neg_laplacian_projected(&rhs)
}

/// Norm of `μ∇φ - ∇(½|∇φ|² + Ψ(φ)) + div(∇φ⊗∇φ)` with `μ = -Δφ + Ψ'(φ)`.
/// The identity holds exactly in the continuum; the discrete value measures
/// aliasing in the products.
pub fn korteweg_residual(ws: &Spectral, phi: &Field, energy: &FreeEnergy) -> Result<f64> {
    if energy.is_singular() {
        if let Some(v) = phi.values().iter().find(|v| !(v.abs() < 1.0)) {
            return Err(Error::OutOfRange { value: *v });
        }
    }
    let mu = &ws.neg_laplacian(phi) + &phi.try_map(|s| energy.psi(s, 1))?;
    let (gx, gy) = ws.gradient(phi);
    let density = &(&(&gx * &gx) + &(&gy * &gy)).scale(0.5) + &phi.try_map(|s| energy.psi(s, 0))?;
    let (dx, dy) = ws.gradient(&density);
    let xx = &gx * &gx;
    let xy = &gx * &gy;
    let yy = &gy * &gy;
    let odd_odd = (Parity::Odd, Parity::Odd);
    let div_x = &ws.partial(&xx, SCALAR, Axis::X) + &ws.partial(&xy, odd_odd, Axis::Y);
    let div_y = &ws.partial(&xy, odd_odd, Axis::X) + &ws.partial(&yy, SCALAR, Axis::Y);
    let rx = &(&(&mu * &gx) - &dx) + &div_x;
    let ry = &(&(&mu * &gy) - &dy) + &div_y;
    Ok((rx.dot(&rx) + ry.dot(&ry)).sqrt())
}
