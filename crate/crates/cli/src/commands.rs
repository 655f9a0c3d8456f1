use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hdch::diagnostics::{continuous_dependence_experiment, format_g17, record, write_csv, DiagRecord};
use hdch::stepper::{make_scenario, prepare_initial_data, smooth_random_field, Simulation};
use hdch::{Field, Spectral};
use rayon::prelude::*;

use crate::config::{Resolved, RunConfig};
use crate::error::{CliError, CliResult};

pub const DIAG_FILE: &str = "diag.csv";
pub const CONFIG_ECHO: &str = "run.json";
pub const DEPENDENCE_FILE: &str = "dependence.csv";

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub records: Vec<DiagRecord>,
    pub snapshots: usize,
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> CliResult<()> {
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(CliError::io(path))
}

fn write_echo(cfg: &RunConfig, dir: &Path) -> CliResult<()> {
    write_file(&dir.join(CONFIG_ECHO), |w| writeln!(w, "{}", cfg.to_json()))
}

/// The scenario datum, passed through `prepare_initial_data` when requested.
pub fn initial_field(cfg: &RunConfig, r: &Resolved) -> CliResult<Field> {
    let energy = r.step.splitting.free_energy(&r.spec).map_err(CliError::setup)?;
    let phi0 = make_scenario(cfg.scenario.name, r.grid, &r.params, &energy).map_err(CliError::setup)?;
    match cfg.scenario.prepare_k {
        None => Ok(phi0),
        Some(k) => {
            let ws = Spectral::new(r.grid);
            Ok(prepare_initial_data(&ws, &phi0, k, &r.spec, &r.step.newton).map_err(CliError::setup)?.phi0)
        }
    }
}

/// Runs one configuration into `cfg.output.dir`: `run.json`, `diag.csv` and
/// optional `phi_<step>.hdch` snapshots.
pub fn run(cfg: &RunConfig) -> CliResult<RunSummary> {
    let r = cfg.resolve()?;
    let dir = cfg.output.dir.clone();
    create_dir(&dir)?;
    write_echo(cfg, &dir)?;
    let phi0 = initial_field(cfg, &r)?;
    let mut sim = Simulation::new(phi0, &r.spec, r.visc, r.step).map_err(CliError::setup)?;
    let model = *sim.free_energy();
    let mut records = Vec::new();
    let mut snapshots = 0;
    let dt = r.step.dt;
    let outcome = sim.run(cfg.time.t_end, cfg.time.record_every, |ws, s| {
        records.push(record(ws, s, &model, &r.visc)?);
        if cfg.output.snapshots {
            let step = (s.t / dt).round() as u64;
            let path = dir.join(format!("phi_{step}.hdch"));
            let mut w = BufWriter::new(File::create(&path)?);
            s.phi.write_snapshot(&mut w)?;
            w.flush()?;
            snapshots += 1;
        }
        Ok(())
    });
    let diag = dir.join(DIAG_FILE);
    write_file(&diag, |w| write_csv(w, &records).map_err(|e| std::io::Error::other(e.to_string())))?;
    match outcome {
        Ok(()) => Ok(RunSummary { dir, records, snapshots }),
        Err(hdch::Error::Io(msg)) => Err(CliError::Config(format!("writing snapshots: {msg}"))),
        Err(e) => Err(CliError::Solver(e)),
    }
}

/// Writes `dependence.csv` for the configured base datum perturbed by a
/// seeded mean-free smooth field (seed + 1) at each amplitude.
pub fn compare(cfg: &RunConfig, amplitudes: &[f64]) -> CliResult<PathBuf> {
    if amplitudes.is_empty() {
        return Err(CliError::Usage("compare needs at least one amplitude".into()));
    }
    let r = cfg.resolve()?;
    let dir = cfg.output.dir.clone();
    create_dir(&dir)?;
    write_echo(cfg, &dir)?;
    let base = initial_field(cfg, &r)?;
    let pert = smooth_random_field(r.grid, cfg.scenario.seed.wrapping_add(1));
    let rows = continuous_dependence_experiment(&base, &pert, amplitudes, cfg.time.t_end, &r.spec, r.visc, r.step)
        .map_err(CliError::Solver)?;
    let path = dir.join(DEPENDENCE_FILE);
    write_file(&path, |w| {
        writeln!(w, "a,R_v0dual,R_l2")?;
        for row in &rows {
            writeln!(w, "{},{},{}", format_g17(row.a), format_g17(row.r_v0dual), format_g17(row.r_l2))?;
        }
        Ok(())
    })?;
    Ok(path)
}

/// `key=v1,v2,...` into the key and its values.
pub fn parse_sweep(spec: &str) -> CliResult<(String, Vec<String>)> {
    let (key, values) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("expected key=v1,v2,..., got `{spec}`")))?;
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
    if key.trim().is_empty() || values.is_empty() {
        return Err(CliError::Usage(format!("expected key=v1,v2,..., got `{spec}`")));
    }
    Ok((key.trim().to_string(), values))
}

/// One run directory `<dir>/<key>=<value>` per value, run in parallel.
pub fn sweep(cfg: &RunConfig, key: &str, values: &[String]) -> CliResult<Vec<RunSummary>> {
    let configs = values
        .iter()
        .map(|v| {
            let mut c = cfg.with_param(key, v)?;
            c.output.dir = cfg.output.dir.join(format!("{key}={v}"));
            c.resolve()?;
            Ok(c)
        })
        .collect::<CliResult<Vec<_>>>()?;
    configs.par_iter().map(run).collect()
}

pub fn parse_amplitudes(list: &str) -> CliResult<Vec<f64>> {
    list.split(',')
        .map(|a| a.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad amplitude `{a}`"))))
        .collect()
}
