//! Named initial data, all built from cosine data so they satisfy the Neumann condition.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::{Basis, SpectralState};
use crate::types::VectorField;
use crate::vec3::{self, Vec3};

pub const PRESETS: [&str; 4] = ["constant", "cosine_tilt", "random_lowmode", "spin_cosine"];

#[derive(Debug, Clone, PartialEq)]
pub struct PresetOptions {
    /// `a` in `normalize(direction + a·cos(πx₁/L₁)·tilt_axis)`.
    pub tilt_amplitude: f64,
    pub tilt_axis: Vec3,
    /// Base direction of `u₀`.
    pub direction: Vec3,
    /// `σ` in `s₀ = σ·cos(πx₁/L₁)·spin_direction`.
    pub spin_amplitude: f64,
    pub spin_direction: Vec3,
    /// Wavenumbers `< random_modes` per axis are randomized.
    pub random_modes: usize,
    pub random_amplitude: f64,
}

impl Default for PresetOptions {
    fn default() -> Self {
        Self {
            tilt_amplitude: 0.1,
            tilt_axis: [1.0, 0.0, 0.0],
            direction: [0.0, 0.0, 1.0],
            spin_amplitude: 0.0,
            spin_direction: [0.0, 0.0, 1.0],
            random_modes: 3,
            random_amplitude: 0.3,
        }
    }
}

fn normalize(v: Vec3) -> Result<Vec3> {
    let n = vec3::norm_sq(v).sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Config(format!("cannot normalize {v:?}")));
    }
    Ok(vec3::scale(1.0 / n, v))
}

fn normalize_nodes(field: &VectorField) -> Result<VectorField> {
    let values = field
        .values()
        .iter()
        .map(|v| normalize(*v))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(field.grid().clone(), values)
}

/// Builds initial coefficients for preset `name`; `seed` only affects `random_lowmode`.
pub fn preset_initial(
    name: &str,
    options: &PresetOptions,
    basis: &Basis,
    seed: u64,
) -> Result<SpectralState> {
    let grid = basis.grid();
    let l1 = grid.lengths()[0];
    let dir = normalize(options.direction)?;
    let u0 = match name {
        "constant" | "spin_cosine" => VectorField::constant(grid, dir),
        "cosine_tilt" => {
            let (a, t) = (options.tilt_amplitude, options.tilt_axis);
            let values = (0..grid.len())
                .map(|n| {
                    let c = a * (PI * grid.node(n)[0] / l1).cos();
                    normalize(vec3::add(dir, vec3::scale(c, t)))
                })
                .collect::<Result<Vec<_>>>()?;
            VectorField::new(grid.clone(), values)?
        }
        "random_lowmode" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut coeffs = vec![[0.0; 3]; basis.len()];
            for (i, c) in coeffs.iter_mut().enumerate() {
                let k = basis.mode_index(i);
                if k.iter().any(|&ki| ki >= options.random_modes) {
                    continue;
                }
                if i == 0 {
                    *c = vec3::scale(grid.volume().sqrt(), dir);
                } else {
                    let w =
                        options.random_amplitude * grid.volume().sqrt() / basis.eigenvalues()[i];
                    *c = [
                        w * rng.gen_range(-1.0..1.0),
                        w * rng.gen_range(-1.0..1.0),
                        w * rng.gen_range(-1.0..1.0),
                    ];
                }
            }
            normalize_nodes(&basis.to_grid(&coeffs))?
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    let sigma = options.spin_amplitude;
    let e = if sigma == 0.0 {
        [0.0; 3]
    } else {
        normalize(options.spin_direction)?
    };
    let s0 = VectorField::from_fn(grid, |x| vec3::scale(sigma * (PI * x[0] / l1).cos(), e));
    SpectralState::from_fields(basis, &u0, &s0)
}
