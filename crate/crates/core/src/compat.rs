//! First-order compatibility data and Neumann-trace vetting of initial data.

use std::fmt;

use crate::error::{Error, Result};
use crate::par;
use crate::physics::{self, effective_fields};
use crate::solver::Model;
use crate::spectral::neumann_residual;
use crate::types::VectorField;
use crate::vec3;

pub const DEFAULT_COMPAT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompatVerdict {
    FailsOrder0,
    PassesOrder0Only,
    PassesOrder1,
}

impl fmt::Display for CompatVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompatVerdict::FailsOrder0 => "fails order 0",
            CompatVerdict::PassesOrder0Only => "passes order 0 only",
            CompatVerdict::PassesOrder1 => "passes order 1",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatReport {
    pub residual_u0: f64,
    pub residual_s0: f64,
    pub residual_v1: f64,
    pub residual_w1: f64,
    pub verdict: CompatVerdict,
    pub tolerance: f64,
}

impl CompatReport {
    /// `key = value` lines, one per field.
    pub fn to_text(&self) -> String {
        format!(
            "residual_u0 = {:.16e}\nresidual_s0 = {:.16e}\nresidual_V1 = {:.16e}\nresidual_W1 = {:.16e}\ntolerance = {:.16e}\nverdict = \"{}\"\n",
            self.residual_u0, self.residual_s0, self.residual_v1, self.residual_w1, self.tolerance, self.verdict
        )
    }
}

/// `(V₁, W₁) = (∂t u, ∂t s)` at `t = 0`, assembled from the effective field
/// and spin current of the initial data.
pub fn compute_v1_w1(
    model: &Model,
    u0: &VectorField,
    s0: &VectorField,
) -> Result<(VectorField, VectorField)> {
    let params = model.params();
    let basis = model.basis();
    let grid = basis.grid();
    let fields = effective_fields(u0, params, basis, model.demag())?;
    let grads = basis.gradient(u0)?;
    let alpha = params.alpha;
    let (u, s) = (u0.values(), s0.values());
    if s0.grid() != grid {
        return Err(Error::GridMismatch(
            "s₀ and u₀ live on different grids".into(),
        ));
    }

    let v1 = par::map_range(grid.len(), |n| {
        let grad_sq: f64 = grads.iter().map(|g| vec3::norm_sq(g.values()[n])).sum();
        let lap = fields.laplacian.values()[n];
        let ht_s = vec3::add(fields.h_tilde.values()[n], s[n]);
        let inner = vec3::add(
            vec3::add(lap, vec3::scale(grad_sq, u[n])),
            vec3::scale(-1.0, vec3::cross(u[n], vec3::cross(u[n], ht_s))),
        );
        vec3::sub(
            vec3::scale(alpha, inner),
            vec3::cross(u[n], vec3::add(lap, ht_s)),
        )
    });

    // div J_s with J_s = u⊗J_e + A(𝔍(u))∇s, split as in the solver.
    let je = params.je.value_at(0.0);
    let grads_s = basis.gradient(s0)?;
    let d0 = params.d0.values();
    let fluxes: Vec<Vec<_>> = grads_s
        .iter()
        .map(|gs| {
            par::map_range(grid.len(), |n| {
                let m = physics::regularize(u[n], params.delta);
                vec3::mat_vec(
                    &physics::spin_matrix(m, params.theta, d0[n]),
                    gs.values()[n],
                )
            })
        })
        .collect();
    let div = basis.flux_divergence(&fluxes);
    let w1 = par::map_range(grid.len(), |n| {
        let mut div_js = div.values()[n];
        for (axis, g) in grads.iter().enumerate() {
            div_js = vec3::add(div_js, vec3::scale(je[axis], g.values()[n]));
        }
        let reaction = vec3::scale(d0[n], vec3::add(s[n], vec3::cross(s[n], u[n])));
        vec3::scale(-1.0, vec3::add(div_js, reaction))
    });
    Ok((
        VectorField::from_raw(grid, v1),
        VectorField::from_raw(grid, w1),
    ))
}

/// Normal-derivative residuals of `u₀, s₀, V₁, W₁` and the verdict at `tol`.
pub fn check_compat(
    model: &Model,
    u0: &VectorField,
    s0: &VectorField,
    tol: f64,
) -> Result<CompatReport> {
    if !(tol > 0.0) {
        return Err(Error::Params(format!(
            "compatibility tolerance {tol} must be positive"
        )));
    }
    let (v1, w1) = compute_v1_w1(model, u0, s0)?;
    let residual_u0 = neumann_residual(u0)?;
    let residual_s0 = neumann_residual(s0)?;
    let residual_v1 = neumann_residual(&v1)?;
    let residual_w1 = neumann_residual(&w1)?;
    let verdict = if residual_u0 > tol || residual_s0 > tol {
        CompatVerdict::FailsOrder0
    } else if residual_v1 > tol || residual_w1 > tol {
        CompatVerdict::PassesOrder0Only
    } else {
        CompatVerdict::PassesOrder1
    };
    Ok(CompatReport {
        residual_u0,
        residual_s0,
        residual_v1,
        residual_w1,
        verdict,
        tolerance: tol,
    })
}
