//! Neumann elliptic solves: the variable-coefficient problem
//! `-div(K∇u) = f` and the singular semilinear problem `-Δu + F'(u) = f`.

use serde::{Deserialize, Serialize};

use crate::potential::PotentialSpec;
use crate::{Error, Field, Result, Spectral};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcgConfig {
    pub rel_tol: f64,
    /// `None` means `10·(nx + ny)`.
    pub max_iter: Option<usize>,
}

impl Default for PcgConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: None,
        }
    }
}

impl PcgConfig {
    pub fn iteration_budget(&self, ws: &Spectral) -> usize {
        let g = ws.grid();
        self.max_iter.unwrap_or(10 * (g.nx + g.ny)).max(1)
    }

    fn validate(&self) -> Result<()> {
        if self.rel_tol > 0.0 && self.rel_tol < 1.0 && self.max_iter != Some(0) {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("bad PCG config {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    /// Absolute tolerance on the residual l2 norm, scaled by `1 + ‖f‖`.
    pub tol: f64,
    pub max_iter: usize,
    /// Iterates of the logarithmic problem are kept inside `[-clamp, clamp]`.
    pub clamp: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iter: 50,
            clamp: 1.0 - 1e-12,
        }
    }
}

impl NewtonConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.tol > 0.0 && self.max_iter >= 1 && self.clamp > 0.0 && self.clamp < 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("bad Newton config {self:?}")))
        }
    }
}

pub(crate) struct PcgOutcome {
    pub x: Field,
    pub iterations: usize,
    pub converged: bool,
}

/// Preconditioned conjugate gradients for an SPD operator in the midpoint
/// inner product, starting from zero.
pub(crate) fn pcg(
    apply: impl Fn(&Field) -> Field,
    precond: impl Fn(&Field) -> Field,
    b: &Field,
    rel_tol: f64,
    max_iter: usize,
) -> PcgOutcome {
    let bnorm = b.l2();
    let mut x = Field::zeros(*b.grid());
    if bnorm == 0.0 {
        return PcgOutcome {
            x,
            iterations: 0,
            converged: true,
        };
    }
    let mut r = b.clone();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    for it in 1..=max_iter {
        let ap = apply(&p);
        let pap = p.dot(&ap);
        if !(pap > 0.0) {
            return PcgOutcome {
                x,
                iterations: it,
                converged: false,
            };
        }
        let alpha = rz / pap;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &ap);
        if r.l2() <= rel_tol * bnorm {
            return PcgOutcome {
                x,
                iterations: it,
                converged: true,
            };
        }
        z = precond(&r);
        let rz_new = r.dot(&z);
        let beta = rz_new / rz;
        rz = rz_new;
        p = z.zip_map(&p, |zi, pi| zi + beta * pi);
    }
    PcgOutcome {
        x,
        iterations: max_iter,
        converged: false,
    }
}

/// `-div(K∇u)` with spectral derivatives and pointwise products.
pub fn apply_variable_operator(ws: &Spectral, coeff: &Field, u: &Field) -> Field {
    let (ux, uy) = ws.gradient(u);
    let fx = coeff * &ux;
    let fy = coeff * &uy;
    -&ws.divergence(&fx, &fy)
}

#[derive(Debug, Clone)]
pub struct NeumannSolve {
    pub u: Field,
    pub iterations: usize,
    /// `‖f + div(K∇u)‖ / ‖f‖`, recomputed from the returned `u`.
    pub rel_residual: f64,
}

/// Solves `-div(K∇u) = f`, `∂ₙu = 0`, for mean-zero `f`; the solution is
/// normalized to zero mean. Preconditioned by `(mean(K)·A)⁻¹`.
pub fn solve_variable_neumann(
    ws: &Spectral,
    coeff: &Field,
    f: &Field,
    cfg: &PcgConfig,
) -> Result<NeumannSolve> {
    cfg.validate()?;
    coeff.check_same_grid(f)?;
    let kmin = coeff.min();
    if !(kmin > 0.0) {
        return Err(Error::NotPositiveCoefficient { min: kmin });
    }
    ws.require_mean_zero(f)?;
    let rhs = f.mean_free();
    let kbar = coeff.mean();
    let out = pcg(
        |u| apply_variable_operator(ws, coeff, u),
        |r| ws.inv_neg_laplacian_projected(r).scale(1.0 / kbar),
        &rhs,
        cfg.rel_tol,
        cfg.iteration_budget(ws),
    );
    let u = out.x.mean_free();
    let fnorm = rhs.l2();
    let rel_residual = if fnorm == 0.0 {
        0.0
    } else {
        (&rhs - &apply_variable_operator(ws, coeff, &u)).l2() / fnorm
    };
    if !out.converged && rel_residual > cfg.rel_tol {
        return Err(Error::NoConvergence {
            solver: "variable-coefficient PCG",
            iterations: out.iterations,
            residual: rel_residual,
        });
    }
    Ok(NeumannSolve {
        u,
        iterations: out.iterations,
        rel_residual,
    })
}

#[derive(Debug, Clone)]
pub struct LogEllipticSolve {
    pub u: Field,
    /// `F'(u)`.
    pub fprime_u: Field,
    pub iterations: usize,
    /// `‖-Δu + F'(u) - f‖`.
    pub residual: f64,
}

/// Solves `-Δu + F'(u) = f`, `∂ₙu = 0`, with the logarithmic `F` of `spec`.
///
/// Damped Newton from the clamped solution of `(-Δ + θ)u₀ = f`. Each linear
/// step `(-Δ + F''(u))δ = -R` runs PCG preconditioned by
/// `(-Δ + mean F''(u))⁻¹`; the step is halved until the iterate stays inside
/// `[-clamp, clamp]` and the residual decreases.
pub fn solve_log_elliptic(
    ws: &Spectral,
    spec: &PotentialSpec,
    f: &Field,
    cfg: &NewtonConfig,
) -> Result<LogEllipticSolve> {
    cfg.validate()?;
    if !f.is_finite() {
        return Err(Error::InvalidParams("right-hand side is not finite".into()));
    }
    let theta = spec.theta;
    let clamp = cfg.clamp;
    let fprime = |u: &Field| u.try_map(|s| spec.f_log(s, 1));
    let residual_of = |u: &Field| -> Result<(Field, Field)> {
        let fp = fprime(u)?;
        let r = &(&ws.neg_laplacian(u) + &fp) - f;
        Ok((r, fp))
    };

    let start = clamp.min(0.99);
    let mut u = ws
        .apply_multiplier(f, |lam| 1.0 / (lam + theta))
        .map(|v| v.clamp(-start, start));
    // -Δu + F'(u) = f is the Euler-Lagrange equation of this strictly convex functional.
    let merit = |u: &Field| -> Result<f64> {
        let fu = u.try_map(|s| spec.f_log(s, 0))?;
        Ok(0.5 * ws.h1_semi(u).powi(2) + (&fu - &(f * u)).integral())
    };
    let (mut r, mut fp) = residual_of(&u)?;
    let mut rnorm = r.l2();
    let mut j = merit(&u)?;
    let target = cfg.tol * (1.0 + f.l2());
    let lin_budget = PcgConfig::default().iteration_budget(ws);

    for it in 0..=cfg.max_iter {
        if rnorm <= target {
            return Ok(LogEllipticSolve {
                u,
                fprime_u: fp,
                iterations: it,
                residual: rnorm,
            });
        }
        if it == cfg.max_iter {
            break;
        }
        let fpp = u.try_map(|s| spec.f_log(s, 2))?;
        let shift = fpp.mean();
        let rhs = -&r;
        let lin = pcg(
            |d| &ws.neg_laplacian(d) + &(&fpp * d),
            |q| ws.apply_multiplier(q, |lam| 1.0 / (lam + shift)),
            &rhs,
            1e-12,
            lin_budget,
        );
        let delta = lin.x;
        let slope = r.dot(&delta);

        // Fraction to the boundary of (-1, 1).
        let mut step: f64 = 1.0;
        for (&ui, &di) in u.values().iter().zip(delta.values()) {
            if di > 0.0 && ui + di >= 1.0 {
                step = step.min(0.995 * (1.0 - ui) / di);
            } else if di < 0.0 && ui + di <= -1.0 {
                step = step.min(0.995 * (-1.0 - ui) / di);
            }
        }
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial = u.clone();
            trial.axpy(step, &delta);
            for v in trial.values_mut() {
                *v = v.clamp(-clamp, clamp);
            }
            let (tr, tfp) = residual_of(&trial)?;
            let tnorm = tr.l2();
            let tj = merit(&trial)?;
            if (tj < j && tj <= j + 1e-4 * step * slope) || tnorm < rnorm {
                u = trial;
                r = tr;
                fp = tfp;
                rnorm = tnorm;
                j = tj;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(Error::NoConvergence {
        solver: "logarithmic Newton",
        iterations: cfg.max_iter,
        residual: rnorm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Grid;
    use std::f64::consts::PI;

    fn smooth(g: Grid, seed: f64) -> Field {
        Field::from_fn(g, |x, y| {
            (PI * x / g.lx).cos() * (1.0 + seed)
                + 0.5 * (2.0 * PI * y / g.ly).cos()
                + 0.3 * (PI * x / g.lx).cos() * (3.0 * PI * y / g.ly).cos() * seed
        })
    }

    #[test]
    fn unit_coefficient_reduces_to_inverse_laplacian() {
        let g = Grid::square(32, 1.0).unwrap();
        let ws = Spectral::new(g);
        let f = smooth(g, 0.7).mean_free();
        let sol = solve_variable_neumann(&ws, &Field::constant(g, 1.0), &f, &PcgConfig::default())
            .unwrap();
        let direct = ws.inv_neg_laplacian(&f).unwrap();
        assert!((&sol.u - &direct).linf() < 1e-9);
        assert!(sol.u.mean().abs() < 1e-14);
    }

    #[test]
    fn variable_solver_error_paths() {
        let g = Grid::square(8, 1.0).unwrap();
        let ws = Spectral::new(g);
        let f = smooth(g, 0.1).mean_free();
        let bad = Field::from_fn(g, |x, _| x - 0.5);
        assert!(matches!(
            solve_variable_neumann(&ws, &bad, &f, &PcgConfig::default()),
            Err(Error::NotPositiveCoefficient { .. })
        ));
        assert!(matches!(
            solve_variable_neumann(&ws, &Field::constant(g, 1.0), &f.add_scalar(1.0), &PcgConfig::default()),
            Err(Error::NonZeroMean { .. })
        ));
        let k = Field::from_fn(g, |x, y| 1.0 + 99.0 * (x * y));
        let starved = PcgConfig { rel_tol: 1e-14, max_iter: Some(1) };
        assert!(matches!(
            solve_variable_neumann(&ws, &k, &f, &starved),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn log_elliptic_zero_data() {
        let g = Grid::square(16, 1.0).unwrap();
        let ws = Spectral::new(g);
        let spec = PotentialSpec::new(1.0, 2.0).unwrap();
        let sol = solve_log_elliptic(&ws, &spec, &Field::zeros(g), &NewtonConfig::default()).unwrap();
        assert_eq!(sol.u.linf(), 0.0);
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn log_elliptic_large_data_stays_inside() {
        let g = Grid::square(32, 1.0).unwrap();
        let ws = Spectral::new(g);
        let spec = PotentialSpec::new(1.0, 2.0).unwrap();
        let f = smooth(g, 1.0).scale(4.0);
        let sol = solve_log_elliptic(&ws, &spec, &f, &NewtonConfig::default()).unwrap();
        assert!(sol.u.linf() < 1.0);
        assert!(sol.residual <= 1e-11 * (1.0 + f.l2()));
        // Integrating the equation: mean F'(u) = mean f.
        assert!((sol.fprime_u.mean() - f.mean()).abs() < 1e-10);
    }
}
