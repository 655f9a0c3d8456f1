use hdch::darcy::ViscositySpec;
use hdch::diagnostics::record;
use hdch::potential::PotentialSpec;
use hdch::stepper::{make_scenario, Scenario, ScenarioParams, Simulation, StepConfig};
use hdch::{Field, Grid, Result};

/// Phase values painted by a click stay this far inside `(-1, 1)`.
const PAINT_LIMIT: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionParams {
    pub n: usize,
    pub length: f64,
    pub theta: f64,
    pub theta0: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub mean: f64,
    pub amplitude: f64,
    pub seed: u64,
    pub dt: f64,
}

impl Default for SessionParams {
    fn default() -> Self {
        Self {
            n: 64,
            length: 16.0,
            theta: 1.0,
            theta0: 2.0,
            nu1: 1.0,
            nu2: 4.0,
            mean: 0.0,
            amplitude: 0.2,
            seed: 7,
            dt: 2e-3,
        }
    }
}

/// A spinodal simulation that can be advanced and painted on.
#[derive(Debug)]
pub struct Session {
    params: SessionParams,
    spec: PotentialSpec,
    sim: Simulation,
    /// Time accumulated by simulations replaced after painting.
    elapsed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Readout {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub separation: f64,
    pub u_l2: f64,
}

impl Session {
    pub fn new(params: SessionParams) -> Result<Self> {
        let grid = Grid::square(params.n, params.length)?;
        let spec = PotentialSpec::new(params.theta, params.theta0)?;
        let cfg = StepConfig::new(params.dt);
        let energy = cfg.splitting.free_energy(&spec)?;
        let scenario = ScenarioParams {
            mean: params.mean,
            amplitude: params.amplitude,
            seed: params.seed,
            ..ScenarioParams::default()
        };
        let phi0 = make_scenario(Scenario::Spinodal, grid, &scenario, &energy)?;
        let sim = Simulation::new(phi0, &spec, ViscositySpec::new(params.nu1, params.nu2)?, cfg)?;
        Ok(Self { params, spec, sim, elapsed: 0.0 })
    }

    pub fn params(&self) -> &SessionParams {
        &self.params
    }

    pub fn phi(&self) -> &Field {
        &self.sim.state().phi
    }

    pub fn advance(&mut self, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.sim.step()?;
        }
        Ok(())
    }

    /// Sets `φ` to `value` on the disk of radius `r` around `(x, y)` (all in
    /// domain units) and restarts the integrator from the painted field.
    pub fn paint(&mut self, x: f64, y: f64, r: f64, value: f64) -> Result<()> {
        let value = value.clamp(-PAINT_LIMIT, PAINT_LIMIT);
        let old = self.phi();
        let grid = *old.grid();
        let painted = Field::from_fn(grid, |px, py| {
            let d = ((px - x).powi(2) + (py - y).powi(2)).sqrt();
            let w = 0.5 * (1.0 - ((d - r) / 0.5).tanh());
            (1.0 - w) * sample(old, px, py) + w * value
        });
        let t = self.sim.state().t;
        let sim = Simulation::new(painted, &self.spec, *self.sim.viscosity(), *self.sim.config())?;
        self.elapsed += t;
        self.sim = sim;
        Ok(())
    }

    pub fn readout(&self) -> Result<Readout> {
        let r = record(self.sim.workspace(), self.sim.state(), self.sim.free_energy(), self.sim.viscosity())?;
        Ok(Readout {
            t: self.elapsed + r.t,
            mass: r.mass,
            energy: r.energy,
            separation: r.separation,
            u_l2: r.u_l2,
        })
    }

    /// RGBA pixels, first row at the top of the domain.
    pub fn rgba(&self) -> Vec<u8> {
        let phi = self.phi();
        let g = phi.grid();
        let mut out = Vec::with_capacity(4 * g.len());
        for j in (0..g.ny).rev() {
            for i in 0..g.nx {
                let [r, gr, b] = colormap(phi.get(i, j));
                out.extend_from_slice(&[r, gr, b, 255]);
            }
        }
        out
    }
}

fn sample(f: &Field, x: f64, y: f64) -> f64 {
    let g = f.grid();
    let i = ((x / g.hx()) as usize).min(g.nx - 1);
    let j = ((y / g.hy()) as usize).min(g.ny - 1);
    f.get(i, j)
}

/// Blue-white-red map of `[-1, 1]`.
pub fn colormap(v: f64) -> [u8; 3] {
    let v = v.clamp(-1.0, 1.0);
    let fade = |t: f64| (255.0 * t).round() as u8;
    if v < 0.0 {
        [fade(1.0 + v), fade(1.0 + v), 255]
    } else {
        [255, fade(1.0 - v), fade(1.0 - v)]
    }
}

/// `(s, Ψ(s))` on `samples` equispaced interior points of `(-1, 1)`.
pub fn potential_curve(theta: f64, theta0: f64, samples: usize) -> Result<Vec<(f64, f64)>> {
    let spec = PotentialSpec::new(theta, theta0)?;
    (1..=samples)
        .map(|k| {
            let s = -1.0 + 2.0 * k as f64 / (samples + 1) as f64;
            Ok((s, spec.psi(s, 0)?))
        })
        .collect()
}

/// The positive minimizer `β` of `Ψ`.
pub fn minimizer(theta: f64, theta0: f64) -> Result<f64> {
    Ok(PotentialSpec::new(theta, theta0)?.find_beta()?.beta)
}
