use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::elliptic::{solve_log_elliptic, NewtonConfig};
use crate::potential::{FreeEnergy, PotentialSpec};
use crate::{Error, Field, Grid, Result, Spectral};

const RANDOM_MODES: usize = 6;

#[derive(Debug, Clone)]
pub struct InitPrep {
    pub k: f64,
    pub phi0: Field,
    /// `1 - ‖φ₀ᵏ‖_∞`.
    pub delta: f64,
}

/// Separates near-saturated data: truncates `μ̃₀ = -Δφ₀ + F'(φ₀)` to
/// `[-k, k]` and solves `-Δφ₀ᵏ + F'(φ₀ᵏ) = μ̃₀ᵏ`.
pub fn prepare_initial_data(
    ws: &Spectral,
    phi0_raw: &Field,
    k: f64,
    spec: &PotentialSpec,
    newton: &NewtonConfig,
) -> Result<InitPrep> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParams(format!("truncation level must be positive, got {k}")));
    }
    phi0_raw.check_same_grid(&Field::zeros(*ws.grid()))?;
    let fp = phi0_raw.try_map(|s| spec.f_log(s, 1))?;
    let mu0 = &ws.neg_laplacian(phi0_raw) + &fp;
    let truncated = mu0.map(|v| v.clamp(-k, k));
    let sol = solve_log_elliptic(ws, spec, &truncated, newton)?;
    let delta = 1.0 - sol.u.linf();
    if !(delta > 0.0) {
        return Err(Error::OutOfRange { value: sol.u.linf() });
    }
    Ok(InitPrep { k, phi0: sol.u, delta })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Spinodal,
    Bubble,
    PerturbedBeta,
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spinodal" => Ok(Self::Spinodal),
            "bubble" => Ok(Self::Bubble),
            "perturbed_beta" => Ok(Self::PerturbedBeta),
            other => Err(Error::InvalidParams(format!("unknown scenario `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioParams {
    pub mean: f64,
    pub amplitude: f64,
    pub seed: u64,
    /// Interface width of the bubble profile.
    pub width: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            mean: 0.0,
            amplitude: 0.2,
            seed: 7,
            width: 1.0,
        }
    }
}

/// Mean-free random combination of the cosine modes `1 ≤ k + l`, `k, l ≤ 6`
/// with amplitudes decaying like `1/(1 + k² + l²)`, scaled to unit sup norm.
/// The modes depend only on the seed, not on the resolution.
pub fn smooth_random_field(grid: Grid, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = RANDOM_MODES + 1;
    let mut coef = vec![0.0; n * n];
    for l in 0..n {
        for k in 0..n {
            let c: f64 = rng.gen_range(-1.0..1.0);
            if k + l > 0 {
                coef[l * n + k] = c / (1.0 + (k * k + l * l) as f64);
            }
        }
    }
    let cx: Vec<Vec<f64>> = (0..n)
        .map(|k| (0..grid.nx).map(|i| (k as f64 * PI * grid.x(i) / grid.lx).cos()).collect())
        .collect();
    let cy: Vec<Vec<f64>> = (0..n)
        .map(|l| (0..grid.ny).map(|j| (l as f64 * PI * grid.y(j) / grid.ly).cos()).collect())
        .collect();
    let mut values = vec![0.0; grid.len()];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let mut acc = 0.0;
            for l in 0..n {
                for k in 0..n {
                    acc += coef[l * n + k] * cx[k][i] * cy[l][j];
                }
            }
            values[grid.index(i, j)] = acc;
        }
    }
    let f = Field::from_raw(grid, values).mean_free();
    let m = f.linf();
    if m > 0.0 {
        f.scale(1.0 / m)
    } else {
        f
    }
}

fn admissible(phi: Field, energy: &FreeEnergy) -> Result<Field> {
    if energy.is_singular() {
        if let Some(v) = phi.values().iter().find(|v| !(v.abs() < 1.0)) {
            return Err(Error::InvalidParams(format!("initial datum reaches {v}, outside (-1, 1)")));
        }
    }
    Ok(phi)
}

/// Initial data for the named scenario.
///
/// * spinodal: `m + a·r` with `r` from [`smooth_random_field`];
/// * bubble: a disc of radius `min(lx, ly)/4` at the center, `β` inside and
///   `-β` outside with a tanh transition, shifted to mean `m`;
/// * perturbed_beta: `β + a·cos(πx/lx)cos(πy/ly)` (mean `β`, `m` unused).
pub fn make_scenario(scenario: Scenario, grid: Grid, params: &ScenarioParams, energy: &FreeEnergy) -> Result<Field> {
    let ScenarioParams { mean, amplitude, seed, width } = *params;
    if !mean.is_finite() || !amplitude.is_finite() || amplitude < 0.0 {
        return Err(Error::InvalidParams(format!("bad scenario parameters {params:?}")));
    }
    let phi = match scenario {
        Scenario::Spinodal => {
            if !(mean.abs() + amplitude < 1.0) {
                return Err(Error::InvalidParams(format!("|m| + a = {} must be below 1", mean.abs() + amplitude)));
            }
            if amplitude == 0.0 {
                Field::constant(grid, mean)
            } else {
                smooth_random_field(grid, seed).scale(amplitude).add_scalar(mean)
            }
        }
        Scenario::Bubble => {
            if !(width > 0.0) || !(mean.abs() < 1.0) {
                return Err(Error::InvalidParams(format!("bad bubble parameters {params:?}")));
            }
            let beta = energy.beta()?;
            let r0 = 0.25 * grid.lx.min(grid.ly);
            let (cx, cy) = (0.5 * grid.lx, 0.5 * grid.ly);
            let f = Field::from_fn(grid, |x, y| {
                let r = ((x - cx).powi(2) + (y - cy).powi(2)).sqrt();
                beta * ((r0 - r) / width).tanh()
            });
            let shift = mean - f.mean();
            f.add_scalar(shift)
        }
        Scenario::PerturbedBeta => {
            let beta = energy.beta()?;
            if !(beta + amplitude < 1.0) || !energy.is_singular() && amplitude > 1.0 {
                return Err(Error::InvalidParams(format!("β + a = {} must be below 1", beta + amplitude)));
            }
            Field::from_fn(grid, |x, y| {
                beta + amplitude * (PI * x / grid.lx).cos() * (PI * y / grid.ly).cos()
            })
        }
    };
    admissible(phi, energy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_energy() -> FreeEnergy {
        FreeEnergy::Logarithmic(PotentialSpec::new(1.0, 2.0).unwrap())
    }

    #[test]
    fn spinodal_zero_amplitude_is_constant() {
        let g = Grid::square(16, 10.0).unwrap();
        let p = ScenarioParams { mean: 0.0, amplitude: 0.0, ..Default::default() };
        let phi = make_scenario(Scenario::Spinodal, g, &p, &log_energy()).unwrap();
        assert!(phi.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scenarios_hit_the_mean() {
        let g = Grid::new(32, 16, 10.0, 5.0).unwrap();
        for (sc, m) in [(Scenario::Spinodal, -0.3), (Scenario::Bubble, -0.6)] {
            let p = ScenarioParams { mean: m, ..Default::default() };
            let phi = make_scenario(sc, g, &p, &log_energy()).unwrap();
            assert!((phi.mean() - m).abs() < 1e-12);
            assert!(phi.linf() < 1.0);
        }
    }

    #[test]
    fn random_field_is_normalized_and_reproducible() {
        let g = Grid::square(32, 10.0).unwrap();
        let a = smooth_random_field(g, 3);
        assert!((a.linf() - 1.0).abs() < 1e-15);
        assert_eq!(a.values(), smooth_random_field(g, 3).values());
        assert_ne!(a.values(), smooth_random_field(g, 4).values());
    }

    #[test]
    fn invalid_scenarios() {
        let g = Grid::square(16, 10.0).unwrap();
        let e = log_energy();
        let p = ScenarioParams { mean: 0.9, amplitude: 0.2, ..Default::default() };
        assert!(make_scenario(Scenario::Spinodal, g, &p, &e).is_err());
        let p = ScenarioParams { amplitude: 0.2, ..Default::default() };
        assert!(make_scenario(Scenario::PerturbedBeta, g, &p, &e).is_err());
        assert!("droplet".parse::<Scenario>().is_err());
    }

    #[test]
    fn truncation_is_inactive_for_large_k() {
        let g = Grid::square(32, 10.0).unwrap();
        let ws = Spectral::new(g);
        let spec = PotentialSpec::new(1.0, 2.0).unwrap();
        let phi = smooth_random_field(g, 1).scale(0.5);
        let prep = prepare_initial_data(&ws, &phi, 1e6, &spec, &NewtonConfig::default()).unwrap();
        assert!((&prep.phi0 - &phi).linf() < 1e-9);
        assert!((prep.delta - (1.0 - phi.linf())).abs() < 1e-9);
        assert!(prepare_initial_data(&ws, &phi, 0.0, &spec, &NewtonConfig::default()).is_err());
    }
}
