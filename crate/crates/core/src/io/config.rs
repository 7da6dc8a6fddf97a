//! Run configuration: a flat `key = value` file (TOML syntax), one setting per line.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::solver::{Model, SolverConfig};
use crate::spectral::{build_basis, Basis, SpectralState};
use crate::types::{
    default_delta, validate_params, AnisotropySpec, CurrentSpec, ModelParams, ScalarField,
    TensorGrid, DEFAULT_CUTOFF, DEFAULT_D0_FLOOR,
};
use crate::vec3::Vec3;

use super::preset::{preset_initial, PresetOptions};
use super::snapshot::read_snapshot;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dim: usize,
    lengths: Vec<f64>,
    points: Vec<usize>,
    modes: Vec<usize>,
    alpha: f64,
    theta: f64,
    t_end: f64,
    dt: f64,
    initial: String,

    delta: Option<f64>,
    #[serde(default = "one")]
    d0: f64,
    #[serde(default = "default_floor")]
    d0_floor: f64,
    #[serde(default = "none_str")]
    anisotropy: String,
    #[serde(default = "e3")]
    aniso_axis: Vec3,
    #[serde(default = "one")]
    aniso_strength: f64,
    #[serde(default = "default_cutoff")]
    aniso_cutoff: f64,
    #[serde(default)]
    je: Vec3,
    #[serde(default)]
    je_switch_times: Vec<f64>,
    #[serde(default)]
    je_values: Vec<Vec3>,
    #[serde(default)]
    demag: bool,

    #[serde(default = "two")]
    dealias_factor: usize,
    #[serde(default = "one_usize")]
    diagnostics_stride: usize,
    #[serde(default)]
    snapshot_stride: usize,
    #[serde(default)]
    unsafe_dt: bool,

    #[serde(default = "default_tilt")]
    tilt_amplitude: f64,
    #[serde(default = "e1")]
    tilt_axis: Vec3,
    #[serde(default = "e3")]
    direction: Vec3,
    spin_amplitude: Option<f64>,
    spin_direction: Option<Vec3>,
    #[serde(default = "default_random_modes")]
    random_modes: usize,
    #[serde(default = "default_random_amplitude")]
    random_amplitude: f64,
    initial_snapshot: Option<PathBuf>,
    #[serde(default)]
    seed: u64,

    #[serde(default = "default_output")]
    output_dir: PathBuf,
    #[serde(default = "default_drift")]
    drift_limit: f64,
    #[serde(default = "default_compat_tol")]
    compat_tol: f64,
    #[serde(default = "default_oracle_tol")]
    oracle_tol: f64,
    convergence_dts: Option<Vec<f64>>,
    convergence_modes: Option<Vec<usize>>,
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn two() -> usize {
    2
}
fn default_floor() -> f64 {
    DEFAULT_D0_FLOOR
}
fn default_cutoff() -> f64 {
    DEFAULT_CUTOFF
}
fn none_str() -> String {
    "none".into()
}
fn e1() -> Vec3 {
    [1.0, 0.0, 0.0]
}
fn e3() -> Vec3 {
    [0.0, 0.0, 1.0]
}
fn default_tilt() -> f64 {
    0.1
}
fn default_random_modes() -> usize {
    3
}
fn default_random_amplitude() -> f64 {
    0.3
}
fn default_output() -> PathBuf {
    PathBuf::from("output")
}
fn default_drift() -> f64 {
    crate::diagnostics::DEFAULT_DRIFT_LIMIT
}
fn default_compat_tol() -> f64 {
    crate::compat::DEFAULT_COMPAT_TOL
}
fn default_oracle_tol() -> f64 {
    1e-3
}

/// Where the initial state comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Preset {
        name: String,
        options: PresetOptions,
    },
    /// Prefix of a `u`/`s` snapshot pair written by `run` (`<prefix>_u.meta`, `<prefix>_s.meta`).
    Snapshot(PathBuf),
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: TensorGrid,
    pub modes: Vec<usize>,
    pub params: ModelParams,
    pub solver: SolverConfig,
    pub initial: InitialSpec,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Steps between snapshots; 0 writes only the initial and terminal states.
    pub snapshot_stride: usize,
    pub drift_limit: f64,
    pub compat_tol: f64,
    pub oracle_tol: f64,
    pub convergence_dts: Vec<f64>,
    /// First-axis mode counts; the last entry is the reference.
    pub convergence_modes: Vec<usize>,
}

impl RunConfig {
    pub fn basis(&self) -> Result<Basis> {
        build_basis(&self.grid, &self.modes)
    }

    pub fn model(&self) -> Result<Model> {
        Model::new(self.params.clone(), self.basis()?)
    }

    /// The same physics on another grid (requires a spatially uniform `D₀`).
    pub fn params_on(&self, grid: &TensorGrid) -> Result<ModelParams> {
        let d0 = self
            .params
            .d0
            .uniform_value()
            .ok_or_else(|| Error::Config("re-gridding needs a uniform d0".into()))?;
        let mut p = self.params.clone();
        p.d0 = ScalarField::constant(grid, d0);
        validate_params(p)
    }

    /// Model and initial state with `modes` per axis on a dealiased grid.
    pub fn model_with_modes(&self, modes: &[usize]) -> Result<(Model, SpectralState)> {
        let points: Vec<usize> = modes
            .iter()
            .map(|m| m * self.solver.dealias_factor)
            .collect();
        let grid = TensorGrid::new(self.grid.lengths(), &points)?;
        let basis = build_basis(&grid, modes)?;
        let model = Model::new(self.params_on(&grid)?, basis)?;
        let y0 = self.initial_state(&model)?;
        Ok((model, y0))
    }

    pub fn initial_state(&self, model: &Model) -> Result<SpectralState> {
        match &self.initial {
            InitialSpec::Preset { name, options } => {
                preset_initial(name, options, model.basis(), self.seed)
            }
            InitialSpec::Snapshot(prefix) => {
                let load = |role: &str| -> Result<_> {
                    let mut path = prefix.clone().into_os_string();
                    path.push(format!("_{role}.meta"));
                    read_snapshot(Path::new(&path))
                };
                let (u, s) = (load("u")?, load("s")?);
                if u.field.grid() != model.basis().grid() || s.field.grid() != model.basis().grid()
                {
                    return Err(Error::GridMismatch(
                        "initial snapshot grid differs from the configured grid".into(),
                    ));
                }
                let mut y = SpectralState::from_fields(model.basis(), &u.field, &s.field)?;
                y.time = 0.0;
                Ok(y)
            }
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn key_line(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}

fn backticked(message: &str) -> Option<&str> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(&message[start..start + len])
}

fn syntax_error(text: &str, e: &toml::de::Error) -> Error {
    let message = e.message().trim().to_string();
    let line = e
        .span()
        .map(|s| line_of(text, s.start))
        .or_else(|| backticked(&message).and_then(|k| key_line(text, k)));
    match line {
        Some(line) => Error::ConfigSyntax { line, message },
        None => Error::Config(message),
    }
}

/// Parses a configuration file body.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with_overrides(text, &[])
}

/// Parses `text`, then applies `key=value` overrides (values in the same syntax;
/// bare words are taken as strings).
pub fn parse_config_with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let raw: RawConfig = if overrides.is_empty() {
        toml::from_str(text).map_err(|e| syntax_error(text, &e))?
    } else {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| syntax_error(text, &e))?;
        for o in overrides {
            let (key, value) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{o}` is not key=value")))?;
            let (key, value) = (key.trim(), value.trim());
            let parsed = toml::from_str::<toml::Table>(&format!("{key} = {value}"))
                .ok()
                .and_then(|mut t| t.remove(key))
                .unwrap_or_else(|| toml::Value::String(value.to_string()));
            table.insert(key.to_string(), parsed);
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| syntax_error(text, &e))?
    };
    build(raw)
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_with_overrides(&text, overrides)
}

fn build(raw: RawConfig) -> Result<RunConfig> {
    let dim = raw.dim;
    for (name, len) in [
        ("lengths", raw.lengths.len()),
        ("points", raw.points.len()),
        ("modes", raw.modes.len()),
    ] {
        if len != dim {
            return Err(Error::Config(format!(
                "{name} has {len} entries but dim = {dim}"
            )));
        }
    }
    let grid = TensorGrid::new(&raw.lengths, &raw.points)?;
    if !(raw.theta > 0.0 && raw.theta < 1.0) {
        return Err(Error::Params(format!(
            "theta = {} outside (0,1)",
            raw.theta
        )));
    }
    let delta = match raw.delta {
        Some(d) => d,
        None => default_delta(raw.theta)?,
    };
    let anisotropy = match raw.anisotropy.as_str() {
        "none" => AnisotropySpec::none(),
        "uniaxial" => AnisotropySpec::uniaxial(raw.aniso_axis, raw.aniso_strength)?
            .with_cutoff(raw.aniso_cutoff),
        other => {
            return Err(Error::Config(format!(
                "anisotropy `{other}` is not one of none, uniaxial"
            )))
        }
    };
    let je = if raw.je_switch_times.is_empty() && raw.je_values.is_empty() {
        if raw.je == [0.0; 3] {
            CurrentSpec::Zero
        } else {
            CurrentSpec::Constant(raw.je)
        }
    } else {
        if raw.je != [0.0; 3] {
            return Err(Error::Config(
                "give either je or je_switch_times/je_values, not both".into(),
            ));
        }
        CurrentSpec::PiecewiseConstant {
            switch_times: raw.je_switch_times,
            values: raw.je_values,
        }
    };
    let params = validate_params(ModelParams {
        alpha: raw.alpha,
        theta: raw.theta,
        delta,
        d0: ScalarField::constant(&grid, raw.d0),
        d0_floor: raw.d0_floor,
        anisotropy,
        je,
        demag_enabled: raw.demag,
    })?;

    let solver = SolverConfig {
        dt: raw.dt,
        t_end: raw.t_end,
        scheme: Default::default(),
        dealias_factor: raw.dealias_factor,
        diagnostics_stride: raw.diagnostics_stride,
        check_stability: !raw.unsafe_dt,
    };

    let initial =
        if raw.initial == "snapshot" {
            InitialSpec::Snapshot(raw.initial_snapshot.ok_or_else(|| {
                Error::Config("initial = \"snapshot\" needs initial_snapshot".into())
            })?)
        } else {
            if !super::preset::PRESETS.contains(&raw.initial.as_str()) {
                return Err(Error::UnknownPreset(raw.initial));
            }
            let spin_default = if raw.initial == "spin_cosine" {
                1.0
            } else {
                0.0
            };
            InitialSpec::Preset {
                options: PresetOptions {
                    tilt_amplitude: raw.tilt_amplitude,
                    tilt_axis: raw.tilt_axis,
                    direction: raw.direction,
                    spin_amplitude: raw.spin_amplitude.unwrap_or(spin_default),
                    spin_direction: raw.spin_direction.unwrap_or(raw.direction),
                    random_modes: raw.random_modes,
                    random_amplitude: raw.random_amplitude,
                },
                name: raw.initial,
            }
        };

    let convergence_dts = raw
        .convergence_dts
        .unwrap_or_else(|| (0..4).map(|i| raw.dt / f64::from(1u32 << i)).collect());
    let m0 = raw.modes[0];
    let convergence_modes = raw
        .convergence_modes
        .unwrap_or_else(|| vec![(m0 / 4).max(2), (m0 / 2).max(3), m0, 2 * m0]);
    for (name, v) in [
        ("drift_limit", raw.drift_limit),
        ("compat_tol", raw.compat_tol),
        ("oracle_tol", raw.oracle_tol),
    ] {
        if !(v > 0.0) {
            return Err(Error::Config(format!("{name} = {v} must be positive")));
        }
    }

    Ok(RunConfig {
        grid,
        modes: raw.modes,
        params,
        solver,
        initial,
        seed: raw.seed,
        output_dir: raw.output_dir,
        snapshot_stride: raw.snapshot_stride,
        drift_limit: raw.drift_limit,
        compat_tol: raw.compat_tol,
        oracle_tol: raw.oracle_tol,
        convergence_dts,
        convergence_modes,
    })
}
