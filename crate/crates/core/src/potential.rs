//! The logarithmic free energy density
//!
//! ```text
//! Ψ(s) = (θ/2)[(1+s)ln(1+s) + (1-s)ln(1-s)] - (θ₀/2)s²  =  F(s) - (θ₀/2)s²
//! ```
//!
//! with `0 < θ < θ₀`, its regularization `F_ε` (fourth-order Taylor extension
//! of `F` outside `[-1+ε, 1-ε]`) and the symmetric minimizers `±β`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Parameters of the logarithmic potential. `epsilon` selects the
/// regularized family where an operation asks for it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub theta: f64,
    pub theta0: f64,
    pub epsilon: Option<f64>,
}

/// Root of `θ/2·ln((1+β)/(1-β)) = θ₀β` in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaRoot {
    pub beta: f64,
    pub residual: f64,
}

impl PotentialSpec {
    pub fn new(theta: f64, theta0: f64) -> Result<Self> {
        if !(theta.is_finite() && theta0.is_finite() && theta > 0.0 && theta < theta0) {
            return Err(Error::InvalidPotential(format!(
                "need 0 < theta < theta0, got theta = {theta}, theta0 = {theta0}"
            )));
        }
        Ok(Self {
            theta,
            theta0,
            epsilon: None,
        })
    }

    /// Adds the regularization parameter. Construction fails unless `F_ε''`
    /// is verified positive on a dense sample of `[-3, 3]`.
    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidPotential(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        let spec = Self {
            epsilon: Some(epsilon),
            ..self
        };
        let n = 6000;
        for i in 0..=n {
            let s = -3.0 + 6.0 * i as f64 / n as f64;
            if spec.f_eps(s, 2)? <= 0.0 {
                return Err(Error::InvalidPotential(format!(
                    "F_eps'' is not positive at s = {s} for epsilon = {epsilon}"
                )));
            }
        }
        Ok(spec)
    }

    /// `θ₀ - θ`.
    pub fn alpha(&self) -> f64 {
        self.theta0 - self.theta
    }

    /// Derivative `order ∈ 0..=4` of the convex part `F` on `(-1, 1)`.
    pub fn f_log(&self, s: f64, order: u8) -> Result<f64> {
        if !(s.abs() < 1.0) {
            return Err(Error::OutOfRange { value: s });
        }
        let th = self.theta;
        let q = 1.0 - s * s;
        Ok(match order {
            0 => 0.5 * th * ((1.0 + s) * s.ln_1p() + (1.0 - s) * (-s).ln_1p()),
            1 => 0.5 * th * (s.ln_1p() - (-s).ln_1p()),
            2 => th / q,
            3 => 2.0 * th * s / (q * q),
            4 => 2.0 * th * (1.0 + 3.0 * s * s) / (q * q * q),
            _ => panic!("derivative order {order} not available"),
        })
    }

    /// Derivative `order ∈ 0..=4` of the regularized convex part `F_ε`,
    /// defined on all of ℝ.
    pub fn f_eps(&self, s: f64, order: u8) -> Result<f64> {
        let eps = self.epsilon.ok_or(Error::MissingEpsilon)?;
        let edge = 1.0 - eps;
        if s.abs() <= edge {
            return self.f_log(s, order);
        }
        let s0 = edge.copysign(s);
        let d = s - s0;
        // Σ_{j=order}^{4} F^{(j)}(s0) d^{j-order} / (j-order)!
        let mut acc = 0.0;
        let mut pow = 1.0;
        let mut fact = 1.0;
        for j in order..=4 {
            let m = (j - order) as f64;
            if m > 0.0 {
                pow *= d;
                fact *= m;
            }
            acc += self.f_log(s0, j)? * pow / fact;
        }
        Ok(acc)
    }

    /// `Ψ = F - (θ₀/2)s²` and its derivatives.
    pub fn psi(&self, s: f64, order: u8) -> Result<f64> {
        Ok(self.f_log(s, order)? - self.concave_part(s, order))
    }

    /// `Ψ_ε = F_ε - (θ₀/2)s²` and its derivatives.
    pub fn psi_eps(&self, s: f64, order: u8) -> Result<f64> {
        Ok(self.f_eps(s, order)? - self.concave_part(s, order))
    }

    fn concave_part(&self, s: f64, order: u8) -> f64 {
        quadratic(self.theta0, s, order)
    }

    /// The positive minimizer of `Ψ`: bisection on the bracket
    /// `(1e-12, 1 - 1e-12)` followed by two Newton polishing steps.
    pub fn find_beta(&self) -> Result<BetaRoot> {
        if !(self.theta < self.theta0) {
            return Err(Error::NoRoot);
        }
        // g(b) = θ atanh(b) - θ₀ b is negative just right of 0 and → +∞ at 1.
        let g = |b: f64| self.theta * b.atanh() - self.theta0 * b;
        let dg = |b: f64| self.theta / (1.0 - b * b) - self.theta0;
        // Below sqrt(α/θ₀) the function is decreasing, so the root lies above it.
        let mut lo = (self.alpha() / self.theta0).sqrt().max(1e-12);
        let mut hi = 1.0 - 1e-12;
        if g(lo) >= 0.0 {
            lo = 1e-12;
        }
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut beta = 0.5 * (lo + hi);
        for _ in 0..2 {
            let step = g(beta) / dg(beta);
            if step.is_finite() && (beta - step) > 0.0 && (beta - step) < 1.0 {
                beta -= step;
            }
        }
        Ok(BetaRoot {
            beta,
            residual: g(beta).abs(),
        })
    }
}

fn quadratic(c: f64, s: f64, order: u8) -> f64 {
    match order {
        0 => 0.5 * c * s * s,
        1 => c * s,
        2 => c,
        _ => 0.0,
    }
}

/// Free energy density split into a convex part and an explicit concave
/// quadratic `-(κ/2)s²`, as consumed by the time stepper and the energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FreeEnergy {
    /// Singular logarithmic potential; iterates must stay inside `(-1, 1)`.
    Logarithmic(PotentialSpec),
    /// `F_ε`; requires `spec.epsilon`.
    Regularized(PotentialSpec),
    /// `Ψ₀(s) = (s² - 1)²`, split as `(s⁴ + 1) - 2s²`.
    Quartic,
}

impl FreeEnergy {
    /// Convex part derivative of the given order.
    pub fn convex(&self, s: f64, order: u8) -> Result<f64> {
        match self {
            FreeEnergy::Logarithmic(p) => p.f_log(s, order),
            FreeEnergy::Regularized(p) => p.f_eps(s, order),
            FreeEnergy::Quartic => Ok(match order {
                0 => s.powi(4) + 1.0,
                1 => 4.0 * s.powi(3),
                2 => 12.0 * s * s,
                3 => 24.0 * s,
                4 => 24.0,
                _ => panic!("derivative order {order} not available"),
            }),
        }
    }

    /// `κ` in `Ψ = F - (κ/2)s²`.
    pub fn concave_coeff(&self) -> f64 {
        match self {
            FreeEnergy::Logarithmic(p) | FreeEnergy::Regularized(p) => p.theta0,
            FreeEnergy::Quartic => 4.0,
        }
    }

    pub fn psi(&self, s: f64, order: u8) -> Result<f64> {
        Ok(self.convex(s, order)? - quadratic(self.concave_coeff(), s, order))
    }

    /// Whether the convex part blows up at `±1`.
    pub fn is_singular(&self) -> bool {
        matches!(self, FreeEnergy::Logarithmic(_))
    }

    /// Positive minimizer of `Ψ` (for the regularized family: of the
    /// underlying logarithmic `Ψ`, which `Ψ_ε` shares whenever `β ≤ 1-ε`).
    pub fn beta(&self) -> Result<f64> {
        match self {
            FreeEnergy::Logarithmic(p) | FreeEnergy::Regularized(p) => Ok(p.find_beta()?.beta),
            FreeEnergy::Quartic => Ok(1.0),
        }
    }

    /// `Ψ(β)`, the minimum value of the density.
    pub fn psi_min(&self) -> Result<f64> {
        self.psi(self.beta()?, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> PotentialSpec {
        PotentialSpec::new(1.0, 2.0).unwrap()
    }

    #[test]
    fn normalization_at_zero() {
        let p = spec();
        assert_eq!(p.f_log(0.0, 0).unwrap(), 0.0);
        assert_eq!(p.f_log(0.0, 1).unwrap(), 0.0);
        assert_eq!(p.f_log(0.0, 2).unwrap(), p.theta);
        assert_eq!(p.psi(0.0, 0).unwrap(), 0.0);
        assert_eq!(p.psi(0.0, 1).unwrap(), 0.0);
    }

    #[test]
    fn rejects_out_of_range_arguments() {
        let p = spec();
        for s in [1.0, -1.0, 1.5, f64::NAN] {
            assert!(matches!(p.f_log(s, 0), Err(Error::OutOfRange { .. })));
        }
        assert_eq!(p.f_eps(0.3, 0), Err(Error::MissingEpsilon));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PotentialSpec::new(2.0, 2.0).is_err());
        assert!(PotentialSpec::new(0.0, 2.0).is_err());
        assert!(spec().with_epsilon(0.0).is_err());
        assert!(spec().with_epsilon(1.0).is_err());
    }

    #[test]
    fn first_derivative_matches_central_difference_at_half() {
        let p = spec();
        let h = 1e-6;
        let fd = (p.f_log(0.5 + h, 0).unwrap() - p.f_log(0.5 - h, 0).unwrap()) / (2.0 * h);
        assert!((fd - p.f_log(0.5, 1).unwrap()).abs() < 1e-7);
    }

    #[test]
    fn symmetry() {
        let p = spec();
        for s in [0.1, 0.5, 0.93, 0.999] {
            assert_eq!(p.f_log(-s, 0).unwrap(), p.f_log(s, 0).unwrap());
            assert_eq!(p.f_log(-s, 1).unwrap(), -p.f_log(s, 1).unwrap());
        }
    }

    #[test]
    fn regularized_agrees_inside_and_is_c4_at_the_edge() {
        let p = spec().with_epsilon(0.05).unwrap();
        assert_eq!(p.f_eps(0.0, 0).unwrap(), 0.0);
        for s in [-0.95, -0.3, 0.0, 0.7, 0.95] {
            for k in 0..=4 {
                assert_eq!(p.f_eps(s, k).unwrap(), p.f_log(s, k).unwrap());
            }
        }
        for edge in [0.95f64, -0.95] {
            for k in 0..=4 {
                let left = p.f_log(edge, k).unwrap();
                let right = p.f_eps(edge + 1e-15f64.copysign(edge), k).unwrap();
                assert!(
                    (left - right).abs() <= 1e-12 * left.abs().max(1.0) + 1e-9 * (k as f64),
                    "order {k}: {left} vs {right}"
                );
            }
        }
        // Exactly at the junction both branches are the same formula.
        assert!(p.f_eps(2.0, 0).unwrap().is_finite());
    }

    #[test]
    fn beta_root() {
        let r = spec().find_beta().unwrap();
        assert!(r.beta > 0.0 && r.beta < 1.0);
        assert!(r.residual <= 1e-12);
        let p = spec();
        assert!(p.psi(r.beta, 1).unwrap().abs() < 1e-12);
        assert!(p.psi(r.beta, 2).unwrap() > 0.0);
        assert!(p.psi(r.beta, 0).unwrap() < 0.0);
        assert_eq!(
            PotentialSpec { theta: 2.0, theta0: 2.0, epsilon: None }.find_beta(),
            Err(Error::NoRoot)
        );
    }

    #[test]
    fn beta_vanishes_at_the_critical_temperature() {
        let betas: Vec<f64> = [1.9, 1.99, 1.999]
            .iter()
            .map(|&t| PotentialSpec::new(t, 2.0).unwrap().find_beta().unwrap().beta)
            .collect();
        assert!(betas[0] > betas[1] && betas[1] > betas[2] && betas[2] > 0.0);
        assert!(betas[2] < 0.06);
    }

    #[test]
    fn quartic_mode() {
        let q = FreeEnergy::Quartic;
        for s in [-1.3, -0.2, 0.0, 0.8, 2.0] {
            let expect = (s * s - 1.0f64).powi(2);
            assert!((q.psi(s, 0).unwrap() - expect).abs() < 1e-12);
            assert!((q.psi(s, 1).unwrap() - 4.0 * s * (s * s - 1.0)).abs() < 1e-12);
        }
        assert_eq!(q.beta().unwrap(), 1.0);
        assert_eq!(q.psi_min().unwrap(), 0.0);
        assert!(!q.is_singular());
    }
}
