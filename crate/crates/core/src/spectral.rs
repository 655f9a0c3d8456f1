//! Cosine-spectral calculus on a cell-centered grid.
//!
//! Scalars (φ, μ, p) are expanded in `cos(πk x/lx) cos(πl y/ly)`, which makes
//! `∂ₙ = 0` hold on the whole boundary. Differentiating along an axis turns
//! the cosine factor into a sine factor and back, so every sample array is
//! interpreted with a [`Parity`] per axis:
//!
//! | quantity            | x    | y    |
//! |---------------------|------|------|
//! | scalar              | Even | Even |
//! | `∂x` / first velocity component  | Odd  | Even |
//! | `∂y` / second velocity component | Even | Odd  |
//! | curl, `∂x∂y`        | Odd  | Odd  |
//!
//! A sine factor vanishes on the matching boundary, so `u·n = 0` holds for any
//! velocity carried in this representation.
//!
//! Even coefficients use modes `k = 0..n-1`; odd ones use `k = 1..n` (stored at
//! index `k-1`). Mode `n` of a sine series is the grid alternation `(-1)^i`;
//! its derivative vanishes at every cell center and is dropped.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};

use crate::{Error, Field, Grid, Result};

/// Cosine (`Even`) or sine (`Odd`) expansion along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// Parity pair of a scalar field.
pub const SCALAR: (Parity, Parity) = (Parity::Even, Parity::Even);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

struct AxisPlan {
    n: usize,
    plan: Arc<dyn TransformType2And3<f64>>,
    /// `πk / l` for `k = 0..=n`.
    wave: Vec<f64>,
}

impl AxisPlan {
    fn new(planner: &mut DctPlanner<f64>, n: usize, l: f64) -> Self {
        Self {
            n,
            plan: planner.plan_dct2(n),
            wave: (0..=n).map(|k| PI * k as f64 / l).collect(),
        }
    }

    fn forward(&self, line: &mut [f64], parity: Parity) {
        let n = self.n as f64;
        match parity {
            Parity::Even => {
                self.plan.process_dct2(line);
                line[0] /= n;
                for c in &mut line[1..] {
                    *c *= 2.0 / n;
                }
            }
            Parity::Odd => {
                self.plan.process_dst2(line);
                let last = self.n - 1;
                for c in &mut line[..last] {
                    *c *= 2.0 / n;
                }
                line[last] /= n;
            }
        }
    }

    fn inverse(&self, line: &mut [f64], parity: Parity) {
        match parity {
            Parity::Even => {
                line[0] *= 2.0;
                self.plan.process_dct3(line);
            }
            Parity::Odd => {
                line[self.n - 1] *= 2.0;
                self.plan.process_dst3(line);
            }
        }
    }

    /// Differentiates coefficients in place; the parity flips.
    fn differentiate(&self, line: &mut [f64], parity: Parity) {
        let n = self.n;
        match parity {
            Parity::Even => {
                // cos(wk x)' = -wk sin(wk x): cosine k lands in sine slot k-1.
                for k in 1..n {
                    line[k - 1] = -self.wave[k] * line[k];
                }
                line[n - 1] = 0.0;
            }
            Parity::Odd => {
                for k in (1..n).rev() {
                    line[k] = self.wave[k] * line[k - 1];
                }
                line[0] = 0.0;
            }
        }
    }
}

/// Transform plans and the Neumann eigenvalue table for one grid.
///
/// Methods take `&self`; scratch space is allocated per call, so a workspace can
/// be shared by reference but is meant to be owned by one simulation.
pub struct Spectral {
    grid: Grid,
    x: AxisPlan,
    y: AxisPlan,
    /// `λ_{k,l} = (πk/lx)² + (πl/ly)²`, indexed like the samples.
    eig: Vec<f64>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let mut planner = DctPlanner::new();
        let x = AxisPlan::new(&mut planner, grid.nx, grid.lx);
        let y = AxisPlan::new(&mut planner, grid.ny, grid.ly);
        let mut eig = vec![0.0; grid.len()];
        for l in 0..grid.ny {
            for k in 0..grid.nx {
                eig[grid.index(k, l)] = x.wave[k].powi(2) + y.wave[l].powi(2);
            }
        }
        Self { grid, x, y, eig }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Neumann eigenvalues, indexed like the coefficients of a scalar.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig
    }

    /// Smallest nonzero eigenvalue; `1/√λ` is the Poincaré constant.
    pub fn lambda_min(&self) -> f64 {
        self.x.wave[1].powi(2).min(self.y.wave[1].powi(2))
    }

    fn check(&self, f: &Field) {
        assert_eq!(f.grid(), &self.grid, "field does not live on this workspace's grid");
    }

    fn along_y(&self, data: &mut [f64], mut op: impl FnMut(&mut [f64])) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut col = vec![0.0; ny];
        for i in 0..nx {
            for j in 0..ny {
                col[j] = data[j * nx + i];
            }
            op(&mut col);
            for j in 0..ny {
                data[j * nx + i] = col[j];
            }
        }
    }

    fn along_x(&self, data: &mut [f64], op: impl FnMut(&mut [f64])) {
        data.chunks_exact_mut(self.grid.nx).for_each(op);
    }

    /// Samples to expansion coefficients.
    pub fn forward(&self, values: &[f64], parity: (Parity, Parity)) -> Vec<f64> {
        assert_eq!(values.len(), self.grid.len());
        let mut c = values.to_vec();
        self.along_x(&mut c, |line| self.x.forward(line, parity.0));
        self.along_y(&mut c, |line| self.y.forward(line, parity.1));
        c
    }

    /// Expansion coefficients to samples.
    pub fn inverse(&self, coeffs: &[f64], parity: (Parity, Parity)) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.grid.len());
        let mut v = coeffs.to_vec();
        self.along_y(&mut v, |line| self.y.inverse(line, parity.1));
        self.along_x(&mut v, |line| self.x.inverse(line, parity.0));
        v
    }

    /// Spectral partial derivative of samples with the given parity. The
    /// result carries the parity flipped along `axis`.
    pub fn partial(&self, f: &Field, parity: (Parity, Parity), axis: Axis) -> Field {
        self.check(f);
        let mut c = self.forward(f.values(), parity);
        let out = match axis {
            Axis::X => {
                self.along_x(&mut c, |line| self.x.differentiate(line, parity.0));
                (parity.0.flip(), parity.1)
            }
            Axis::Y => {
                self.along_y(&mut c, |line| self.y.differentiate(line, parity.1));
                (parity.0, parity.1.flip())
            }
        };
        Field::from_raw(self.grid, self.inverse(&c, out))
    }

    /// Applies the Fourier multiplier `m(λ_{k,l})` to a scalar field.
    pub fn apply_multiplier(&self, f: &Field, m: impl Fn(f64) -> f64) -> Field {
        self.check(f);
        let mut c = self.forward(f.values(), SCALAR);
        for (ci, &lam) in c.iter_mut().zip(&self.eig) {
            *ci *= m(lam);
        }
        Field::from_raw(self.grid, self.inverse(&c, SCALAR))
    }

    /// The nonnegative Neumann operator `A = -Δ`. Constants are in its kernel
    /// and the output has zero mean.
    pub fn neg_laplacian(&self, f: &Field) -> Field {
        self.apply_multiplier(f, |lam| lam)
    }

    /// `A⁻¹` on mean-zero data; the result has zero mean.
    pub fn inv_neg_laplacian(&self, f: &Field) -> Result<Field> {
        self.require_mean_zero(f)?;
        Ok(self.inv_neg_laplacian_projected(f))
    }

    /// `A⁻¹` after discarding the mean of `f`.
    pub fn inv_neg_laplacian_projected(&self, f: &Field) -> Field {
        self.apply_multiplier(f, |lam| if lam > 0.0 { 1.0 / lam } else { 0.0 })
    }

    pub fn require_mean_zero(&self, f: &Field) -> Result<()> {
        let mean = f.mean();
        let norm = f.l2();
        if mean.abs() > 1e-10 * norm {
            Err(Error::NonZeroMean { mean, norm })
        } else {
            Ok(())
        }
    }

    pub fn gradient(&self, f: &Field) -> (Field, Field) {
        (
            self.partial(f, SCALAR, Axis::X),
            self.partial(f, SCALAR, Axis::Y),
        )
    }

    /// Divergence of a flux stored with velocity parities.
    pub fn divergence(&self, vx: &Field, vy: &Field) -> Field {
        let dx = self.partial(vx, (Parity::Odd, Parity::Even), Axis::X);
        let dy = self.partial(vy, (Parity::Even, Parity::Odd), Axis::Y);
        &dx + &dy
    }

    /// Scalar curl `∂x vy - ∂y vx` (sine-sine parity).
    pub fn curl(&self, vx: &Field, vy: &Field) -> Field {
        let a = self.partial(vy, (Parity::Even, Parity::Odd), Axis::X);
        let b = self.partial(vx, (Parity::Odd, Parity::Even), Axis::Y);
        &a - &b
    }

    /// `‖∇f‖`.
    pub fn h1_semi(&self, f: &Field) -> f64 {
        self.neg_laplacian(f).dot(f).max(0.0).sqrt()
    }

    /// `‖f‖_{V₀'} = ‖∇A⁻¹f‖ = ⟨A⁻¹f, f⟩^{1/2}` for mean-zero `f`.
    pub fn v0_dual(&self, f: &Field) -> Result<f64> {
        self.require_mean_zero(f)?;
        Ok(self.v0_dual_projected(f))
    }

    /// `V₀'` norm of the mean-free part of `f`.
    pub fn v0_dual_projected(&self, f: &Field) -> f64 {
        let g = f.mean_free();
        self.inv_neg_laplacian_projected(&g).dot(&g).max(0.0).sqrt()
    }

    /// `H¹` norm `(‖f‖² + ‖∇f‖²)^{1/2}`.
    pub fn h1(&self, f: &Field) -> f64 {
        (f.dot(f) + self.h1_semi(f).powi(2)).sqrt()
    }

    pub fn norms(&self, f: &Field, p: f64) -> Norms {
        Norms {
            l2: f.l2(),
            lp: f.lp(p),
            linf: f.linf(),
            h1_semi: self.h1_semi(f),
            v0_dual: self.v0_dual(f).ok(),
        }
    }
}

/// The norms used by the estimates; `v0_dual` is only defined for mean-zero
/// input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub lp: f64,
    pub linf: f64,
    pub h1_semi: f64,
    pub v0_dual: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid {
        Grid::new(n, n + 4, 2.0, 3.0).unwrap()
    }

    fn basis(g: &Grid, p: (Parity, Parity), k: usize, l: usize) -> Field {
        let fx = move |x: f64| match p.0 {
            Parity::Even => (PI * k as f64 * x / g.lx).cos(),
            Parity::Odd => (PI * k as f64 * x / g.lx).sin(),
        };
        let fy = move |y: f64| match p.1 {
            Parity::Even => (PI * l as f64 * y / g.ly).cos(),
            Parity::Odd => (PI * l as f64 * y / g.ly).sin(),
        };
        Field::from_fn(*g, |x, y| fx(x) * fy(y))
    }

    #[test]
    fn forward_recovers_single_modes() {
        let g = grid(8);
        let ws = Spectral::new(g);
        for parity in [
            (Parity::Even, Parity::Even),
            (Parity::Odd, Parity::Even),
            (Parity::Even, Parity::Odd),
            (Parity::Odd, Parity::Odd),
        ] {
            let ks: Vec<usize> = match parity.0 {
                Parity::Even => vec![0, 3, 7],
                Parity::Odd => vec![1, 4, 8],
            };
            for &k in &ks {
                let l = if parity.1 == Parity::Even { 2 } else { 12 };
                let f = basis(&g, parity, k, l);
                let c = ws.forward(f.values(), parity);
                let slot_k = if parity.0 == Parity::Even { k } else { k - 1 };
                let slot_l = if parity.1 == Parity::Even { l } else { l - 1 };
                for (idx, &v) in c.iter().enumerate() {
                    let expect = if idx == g.index(slot_k, slot_l) { 1.0 } else { 0.0 };
                    assert!((v - expect).abs() < 1e-12, "{parity:?} k={k} idx={idx} v={v}");
                }
            }
        }
    }

    #[test]
    fn neg_laplacian_of_eigenmode() {
        let g = grid(16);
        let ws = Spectral::new(g);
        let f = basis(&g, SCALAR, 1, 0);
        let af = ws.neg_laplacian(&f);
        let w = (PI / g.lx).powi(2);
        for (a, b) in af.values().iter().zip(f.values()) {
            assert!((a - w * b).abs() < 1e-12);
        }
        let c = ws.neg_laplacian(&Field::constant(g, 3.0));
        assert!(c.linf() < 1e-12);
    }

    #[test]
    fn inverse_rejects_nonzero_mean() {
        let g = grid(8);
        let ws = Spectral::new(g);
        let err = ws.inv_neg_laplacian(&Field::constant(g, 1.0)).unwrap_err();
        assert!(matches!(err, Error::NonZeroMean { .. }));
        let z = ws.inv_neg_laplacian(&Field::zeros(g)).unwrap();
        assert_eq!(z.linf(), 0.0);
    }

    #[test]
    fn inverse_divides_eigenmode() {
        let g = grid(16);
        let ws = Spectral::new(g);
        let f = basis(&g, SCALAR, 1, 0);
        let u = ws.inv_neg_laplacian(&f).unwrap();
        let w = (PI / g.lx).powi(2);
        for (a, b) in u.values().iter().zip(f.values()) {
            assert!((a - b / w).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_product_mode() {
        let g = grid(16);
        let ws = Spectral::new(g);
        let (ax, ay) = (PI / g.lx, PI / g.ly);
        let f = Field::from_fn(g, |x, y| (ax * x).cos() * (ay * y).cos());
        let (fx, fy) = ws.gradient(&f);
        let ex = Field::from_fn(g, |x, y| -ax * (ax * x).sin() * (ay * y).cos());
        let ey = Field::from_fn(g, |x, y| -ay * (ax * x).cos() * (ay * y).sin());
        assert!((&fx - &ex).linf() < 1e-12);
        assert!((&fy - &ey).linf() < 1e-12);
        let (cx, cy) = ws.gradient(&Field::constant(g, -2.0));
        assert!(cx.linf() < 1e-13 && cy.linf() < 1e-13);
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        let g = grid(16);
        let ws = Spectral::new(g);
        let f = Field::from_fn(g, |x, y| (x * y).sin() + (x - 0.3).powi(3) * y.cos());
        let (fx, fy) = ws.gradient(&f);
        assert!(ws.curl(&fx, &fy).linf() < 1e-10);
    }

    #[test]
    fn poincare_with_spectral_constant() {
        let g = grid(12);
        let ws = Spectral::new(g);
        let f = Field::from_fn(g, |x, y| (1.3 * x).sin() + y * y * x);
        let cp = 1.0 / ws.lambda_min().sqrt();
        assert!(f.mean_free().l2() <= cp * ws.h1_semi(&f) * (1.0 + 1e-12));
        // Equality for the lowest mode.
        let m = basis(&g, SCALAR, 0, 1);
        assert!((m.l2() - cp * ws.h1_semi(&m)).abs() < 1e-12);
    }

    #[test]
    fn v0_dual_of_eigenmode() {
        let g = grid(16);
        let ws = Spectral::new(g);
        let f = basis(&g, SCALAR, 1, 0);
        let n = ws.norms(&f, 2.0);
        assert!((n.v0_dual.unwrap() - n.l2 / (PI / g.lx)).abs() < 1e-12);
        assert!((n.lp - n.l2).abs() < 1e-12);
        let z = ws.norms(&Field::zeros(g), 4.0);
        assert_eq!((z.l2, z.lp, z.linf, z.h1_semi, z.v0_dual), (0.0, 0.0, 0.0, 0.0, Some(0.0)));
        assert!(ws.v0_dual(&Field::constant(g, 1.0)).is_err());
    }
}
