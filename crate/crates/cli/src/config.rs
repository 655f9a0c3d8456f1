use std::path::{Path, PathBuf};

use hdch::darcy::ViscositySpec;
use hdch::elliptic::{NewtonConfig, PcgConfig};
use hdch::potential::PotentialSpec;
use hdch::stepper::{Scenario, ScenarioParams, Splitting, StepConfig, Transport};
use hdch::Grid;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const OUT_ENV: &str = "HDCH_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { nx: 64, ny: 64, lx: 10.0, ly: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialMode {
    Log,
    Eps,
    Polynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialSection {
    pub theta: f64,
    pub theta0: f64,
    pub mode: PotentialMode,
    /// Required by `mode = "eps"`.
    pub epsilon: Option<f64>,
}

impl Default for PotentialSection {
    fn default() -> Self {
        Self { theta: 1.0, theta0: 2.0, mode: PotentialMode::Log, epsilon: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ViscositySection {
    pub nu1: f64,
    pub nu2: f64,
}

impl Default for ViscositySection {
    fn default() -> Self {
        Self { nu1: 1.0, nu2: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub name: Scenario,
    pub mean: f64,
    pub amplitude: f64,
    pub seed: u64,
    /// Interface width of the bubble.
    pub width: f64,
    /// Truncation level; when set the datum goes through `prepare_initial_data`.
    pub prepare_k: Option<f64>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        let p = ScenarioParams::default();
        Self {
            name: Scenario::Spinodal,
            mean: p.mean,
            amplitude: p.amplitude,
            seed: p.seed,
            width: p.width,
            prepare_k: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self { dt: 1e-4, t_end: 0.1, record_every: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub pcg_tol: f64,
    pub newton_tol: f64,
    pub clamp: f64,
    pub transport: Transport,
}

impl Default for SolverSection {
    fn default() -> Self {
        let n = NewtonConfig::default();
        Self {
            pcg_tol: PcgConfig::default().rel_tol,
            newton_tol: n.tol,
            clamp: n.clamp,
            transport: Transport::Explicit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub snapshots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), snapshots: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid: GridSection,
    pub potential: PotentialSection,
    pub viscosity: ViscositySection,
    pub scenario: ScenarioSection,
    pub time: TimeSection,
    pub solver: SolverSection,
    pub output: OutputSection,
}

/// The model objects a config resolves to.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub grid: Grid,
    pub spec: PotentialSpec,
    pub visc: ViscositySpec,
    pub step: StepConfig,
    pub params: ScenarioParams,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Applies the `HDCH_OUT` override.
    pub fn with_env_output(mut self) -> Self {
        if let Some(dir) = std::env::var_os(OUT_ENV) {
            self.output.dir = PathBuf::from(dir);
        }
        self
    }

    pub fn splitting(&self) -> CliResult<Splitting> {
        match (self.potential.mode, self.potential.epsilon) {
            (PotentialMode::Log, _) => Ok(Splitting::ConvexSplitLog),
            (PotentialMode::Polynomial, _) => Ok(Splitting::Polynomial),
            (PotentialMode::Eps, Some(eps)) => Ok(Splitting::ConvexSplitEps(eps)),
            (PotentialMode::Eps, None) => Err(CliError::Config("potential.mode = \"eps\" needs potential.epsilon".into())),
        }
    }

    pub fn resolve(&self) -> CliResult<Resolved> {
        let cfg = |e: hdch::Error| CliError::Config(e.to_string());
        let g = &self.grid;
        let grid = Grid::new(g.nx, g.ny, g.lx, g.ly).map_err(cfg)?;
        let spec = PotentialSpec::new(self.potential.theta, self.potential.theta0).map_err(cfg)?;
        let splitting = self.splitting()?;
        splitting.free_energy(&spec).map_err(cfg)?;
        let visc = ViscositySpec::new(self.viscosity.nu1, self.viscosity.nu2).map_err(cfg)?;
        let t = &self.time;
        if !(t.t_end >= 0.0 && t.t_end.is_finite()) {
            return Err(CliError::Config(format!("time.t_end must be nonnegative, got {}", t.t_end)));
        }
        if t.record_every == 0 {
            return Err(CliError::Config("time.record_every must be at least 1".into()));
        }
        let s = &self.solver;
        let step = StepConfig {
            dt: t.dt,
            splitting,
            transport: s.transport,
            newton: NewtonConfig { tol: s.newton_tol, clamp: s.clamp, ..NewtonConfig::default() },
            pcg: PcgConfig { rel_tol: s.pcg_tol, max_iter: None },
        };
        if !(t.dt > 0.0 && t.dt.is_finite()) {
            return Err(CliError::Config(format!("time.dt must be positive, got {}", t.dt)));
        }
        if !(s.pcg_tol > 0.0 && s.pcg_tol < 1.0) || !(s.newton_tol > 0.0) || !(s.clamp > 0.0 && s.clamp < 1.0) {
            return Err(CliError::Config("solver tolerances must lie in (0, 1)".into()));
        }
        if let Some(k) = self.scenario.prepare_k {
            if !(k > 0.0) {
                return Err(CliError::Config(format!("scenario.prepare_k must be positive, got {k}")));
            }
            if splitting == Splitting::Polynomial {
                return Err(CliError::Config("initial-data preparation needs the logarithmic potential".into()));
            }
        }
        let sc = &self.scenario;
        let params = ScenarioParams { mean: sc.mean, amplitude: sc.amplitude, seed: sc.seed, width: sc.width };
        Ok(Resolved { grid, spec, visc, step, params })
    }

    /// Sets `key` (`section.field` or a field name unique across sections)
    /// from its textual value.
    pub fn with_param(&self, key: &str, value: &str) -> CliResult<Self> {
        let mut tree = serde_json::to_value(self).expect("config serializes");
        let sections = tree.as_object_mut().expect("config is a table");
        let (section, field) = match key.split_once('.') {
            Some((s, f)) => (s.to_string(), f.to_string()),
            None => {
                let owners: Vec<&String> =
                    sections.iter().filter(|(_, v)| v.get(key).is_some()).map(|(k, _)| k).collect();
                match owners.as_slice() {
                    [one] => ((*one).clone(), key.to_string()),
                    [] => return Err(CliError::Usage(format!("unknown parameter `{key}`"))),
                    _ => return Err(CliError::Usage(format!("ambiguous parameter `{key}`; use section.{key}"))),
                }
            }
        };
        let slot = sections
            .get_mut(&section)
            .and_then(|s| s.as_object_mut())
            .and_then(|s| s.get_mut(&field))
            .ok_or_else(|| CliError::Usage(format!("unknown parameter `{key}`")))?;
        *slot = parse_value(value);
        serde_json::from_value(tree).map_err(|e| CliError::Config(format!("{key} = {value}: {e}")))
    }
}

fn parse_value(v: &str) -> serde_json::Value {
    if let Ok(i) = v.parse::<i64>() {
        return i.into();
    }
    if let Ok(x) = v.parse::<f64>() {
        if let Some(n) = serde_json::Number::from_f64(x) {
            return n.into();
        }
    }
    match v {
        "true" => true.into(),
        "false" => false.into(),
        _ => v.into(),
    }
}
