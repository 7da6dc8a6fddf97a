//! Pointwise and nonlocal constitutive pieces of the model.

pub mod anisotropy;
pub mod demag;

pub use anisotropy::{anisotropy_value_grad_hess, AnisotropyEval};
pub use demag::DemagOperator;

use crate::error::{Error, Result};
use crate::par;
use crate::spectral::Basis;
use crate::types::{ModelParams, VectorField};
use crate::vec3::{self, Mat3, Vec3};

/// `𝔍(u) = √(1+δ)/√(δ+|u|²) · u`.
pub fn regularize(u: Vec3, delta: f64) -> Vec3 {
    let c = ((1.0 + delta) / (delta + vec3::norm_sq(u))).sqrt();
    vec3::scale(c, u)
}

/// Directional derivative `D𝔍(u)·v`.
pub fn regularize_tangent(u: Vec3, v: Vec3, delta: f64) -> Vec3 {
    let denom = delta + vec3::norm_sq(u);
    let c = ((1.0 + delta) / denom).sqrt();
    let k = vec3::dot(u, v) / denom;
    vec3::scale(c, vec3::sub(v, vec3::scale(k, u)))
}

/// `A(m) = −D₀ (I − θ m mᵀ)`.
pub fn spin_matrix(m: Vec3, theta: f64, d0: f64) -> Mat3 {
    let mut a = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { 1.0 } else { 0.0 };
            a[i][j] = -d0 * (id - theta * m[i] * m[j]);
        }
    }
    a
}

/// Derivative of `A` along `m₁`: `θ D₀ (m₁ mᵀ + m m₁ᵀ)`.
pub fn spin_matrix_tangent(m: Vec3, m1: Vec3, theta: f64, d0: f64) -> Mat3 {
    let mut a = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = theta * d0 * (m1[i] * m[j] + m[i] * m1[j]);
        }
    }
    a
}

/// Effective fields with their parts kept for diagnostics.
#[derive(Debug, Clone)]
pub struct EffectiveFieldBundle {
    /// `h = Δu + h̃`.
    pub h: VectorField,
    /// `h̃ = h_d − ∇Φ̃(𝔍(u))`.
    pub h_tilde: VectorField,
    pub laplacian: VectorField,
    pub demag: VectorField,
    pub anisotropy_grad: VectorField,
}

pub(crate) fn demag_values(
    values: &[Vec3],
    params: &ModelParams,
    demag: Option<&DemagOperator>,
) -> Result<Option<Vec<Vec3>>> {
    if !params.demag_enabled {
        return Ok(None);
    }
    let grid = params.grid();
    if grid.dim() != 3 {
        return Err(Error::DemagDimension(grid.dim()));
    }
    let op = demag
        .ok_or_else(|| Error::Params("demag enabled but no demag operator supplied".into()))?;
    if op.grid() != grid {
        return Err(Error::GridMismatch(
            "demag operator built on another grid".into(),
        ));
    }
    Ok(Some(op.apply_values(values)))
}

/// `∇Φ̃(𝔍(u))` at every node.
pub(crate) fn anisotropy_gradients(values: &[Vec3], params: &ModelParams) -> Vec<Vec3> {
    if params.anisotropy.is_none() {
        return vec![[0.0; 3]; values.len()];
    }
    par::map_range(values.len(), |i| {
        let m = regularize(values[i], params.delta);
        anisotropy::eval_unchecked(m, vec3::norm_sq(m), &params.anisotropy).grad
    })
}

/// Effective fields of `u`; the Laplacian is spectral, `∇Φ̃` is taken at `𝔍(u)`.
pub fn effective_fields(
    u: &VectorField,
    params: &ModelParams,
    basis: &Basis,
    demag: Option<&DemagOperator>,
) -> Result<EffectiveFieldBundle> {
    let grid = basis.grid();
    let laplacian = basis.grid_laplacian(u)?;
    let hd = demag_values(u.values(), params, demag)?.unwrap_or_else(|| vec![[0.0; 3]; grid.len()]);
    let grad_phi = anisotropy_gradients(u.values(), params);
    let h_tilde: Vec<Vec3> = hd
        .iter()
        .zip(&grad_phi)
        .map(|(d, g)| vec3::sub(*d, *g))
        .collect();
    let h: Vec<Vec3> = h_tilde
        .iter()
        .zip(laplacian.values())
        .map(|(t, l)| vec3::add(*t, *l))
        .collect();
    Ok(EffectiveFieldBundle {
        h: VectorField::from_raw(grid, h),
        h_tilde: VectorField::from_raw(grid, h_tilde),
        laplacian,
        demag: VectorField::from_raw(grid, hd),
        anisotropy_grad: VectorField::from_raw(grid, grad_phi),
    })
}

/// Spin current `J_s = u⊗J_e + A(𝔍(u))∇s`; entry `i` holds the column
/// `(J_s)_{·,i}` for spatial axis `i`.
pub fn spin_current(
    u: &VectorField,
    s: &VectorField,
    je: Vec3,
    params: &ModelParams,
    basis: &Basis,
) -> Result<Vec<VectorField>> {
    let grad_s = basis.gradient(s)?;
    let grid = basis.grid();
    let d0 = params.d0.values();
    Ok(grad_s
        .iter()
        .enumerate()
        .map(|(axis, gs)| {
            let values = par::map_range(grid.len(), |n| {
                let m = regularize(u.values()[n], params.delta);
                let a = spin_matrix(m, params.theta, d0[n]);
                vec3::add(
                    vec3::scale(je[axis], u.values()[n]),
                    vec3::mat_vec(&a, gs.values()[n]),
                )
            });
            VectorField::from_raw(grid, values)
        })
        .collect())
}
