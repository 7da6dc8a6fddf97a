//! Galerkin right-hand sides of the regularized system and their time integration.
//!
//! ```text
//! ∂t u = α(Δu + |∇u|²u − u×(u×(h̃+s))) − u×(h+s)
//! ∂t s = −div(A(𝔍(u))∇s + u⊗J_e) − D₀ s − D₀ s×u
//! ```
//!
//! Nonlinear terms are evaluated pointwise on the collocation grid (which
//! must oversample the retained modes by the dealias factor) and projected
//! back onto the retained modes.

mod integrate;
mod tangent;

pub use integrate::{
    integrate, integrate_observed, integrate_tangent, stability_bound, Scheme, SolverConfig,
    Trajectory, STABILITY_SAFETY,
};

use crate::error::{Error, Result};
use crate::par;
use crate::physics::{self, DemagOperator};
use crate::spectral::{Basis, SpectralState};
use crate::types::{ModelParams, VectorField};
use crate::vec3::{self, Vec3};

/// Parameters, basis and (optional) demag operator of one simulation.
#[derive(Debug, Clone)]
pub struct Model {
    params: ModelParams,
    basis: Basis,
    demag: Option<DemagOperator>,
}

impl Model {
    /// Validates the parameters and builds the demag operator when enabled.
    pub fn new(params: ModelParams, basis: Basis) -> Result<Self> {
        let params = crate::types::validate_params(params)?;
        if params.grid() != basis.grid() {
            return Err(Error::GridMismatch(
                "D₀ and the basis live on different grids".into(),
            ));
        }
        let demag = if params.demag_enabled {
            Some(DemagOperator::new(basis.grid())?)
        } else {
            None
        };
        Ok(Self {
            params,
            basis,
            demag,
        })
    }

    /// Reuses an existing demag operator (it must match the grid).
    pub fn with_demag(
        params: ModelParams,
        basis: Basis,
        demag: Option<DemagOperator>,
    ) -> Result<Self> {
        let params = crate::types::validate_params(params)?;
        if params.grid() != basis.grid() {
            return Err(Error::GridMismatch(
                "D₀ and the basis live on different grids".into(),
            ));
        }
        let demag = match (params.demag_enabled, demag) {
            (false, _) => None,
            (true, Some(op)) if op.grid() == basis.grid() => Some(op),
            (true, _) => Some(DemagOperator::new(basis.grid())?),
        };
        Ok(Self {
            params,
            basis,
            demag,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn demag(&self) -> Option<&DemagOperator> {
        self.demag.as_ref()
    }

    /// `∂t u` at the grid nodes for grid data `(u, s)`.
    pub fn rhs_u(&self, u: &VectorField, s: &VectorField) -> Result<VectorField> {
        let basis = &self.basis;
        let lap = basis.grid_laplacian(u)?;
        let grads = basis.gradient(u)?;
        let hd = physics::demag_values(u.values(), &self.params, self.demag.as_ref())?;
        let gphi = physics::anisotropy_gradients(u.values(), &self.params);
        let alpha = self.params.alpha;
        let (uv, sv, lv) = (u.values(), s.values(), lap.values());
        let values = par::map_range(uv.len(), |n| {
            let u = uv[n];
            let s = sv[n];
            let grad_sq: f64 = grads.iter().map(|g| vec3::norm_sq(g.values()[n])).sum();
            let hd = hd.as_ref().map_or([0.0; 3], |h| h[n]);
            let ht = vec3::sub(hd, gphi[n]);
            let ht_s = vec3::add(ht, s);
            let h_s = vec3::add(lv[n], ht_s);
            let damping = vec3::sub(
                vec3::add(lv[n], vec3::scale(grad_sq, u)),
                vec3::cross(u, vec3::cross(u, ht_s)),
            );
            vec3::sub(vec3::scale(alpha, damping), vec3::cross(u, h_s))
        });
        Ok(VectorField::from_raw(basis.grid(), values))
    }

    /// `∂t s` at the grid nodes for grid data `(u, s)` and current `je`.
    pub fn rhs_s(&self, u: &VectorField, s: &VectorField, je: Vec3) -> Result<VectorField> {
        let basis = &self.basis;
        let grid = basis.grid();
        let grads_s = basis.gradient(s)?;
        let (uv, sv) = (u.values(), s.values());
        let d0 = self.params.d0.values();
        let (theta, delta) = (self.params.theta, self.params.delta);
        let fluxes: Vec<Vec<Vec3>> = grads_s
            .iter()
            .map(|gs| {
                par::map_range(uv.len(), |n| {
                    let a = physics::spin_matrix(physics::regularize(uv[n], delta), theta, d0[n]);
                    vec3::mat_vec(&a, gs.values()[n])
                })
            })
            .collect();
        let div = basis.flux_divergence(&fluxes);
        let transport = self.current_transport(u, je)?;
        let values = par::map_range(uv.len(), |n| {
            let reaction = vec3::scale(d0[n], vec3::add(sv[n], vec3::cross(sv[n], uv[n])));
            let mut r = vec3::scale(-1.0, vec3::add(div.values()[n], reaction));
            if let Some(t) = &transport {
                r = vec3::sub(r, t[n]);
            }
            r
        });
        Ok(VectorField::from_raw(grid, values))
    }

    /// `div(u⊗J_e) = Σᵢ J_e,i ∂ᵢu` for a spatially constant current.
    fn current_transport(&self, u: &VectorField, je: Vec3) -> Result<Option<Vec<Vec3>>> {
        let dim = self.basis.grid().dim();
        if je[..dim].iter().all(|&j| j == 0.0) {
            return Ok(None);
        }
        let grads = self.basis.gradient(u)?;
        let mut acc = vec![[0.0; 3]; u.values().len()];
        for (axis, g) in grads.iter().enumerate() {
            if je[axis] != 0.0 {
                for (a, v) in acc.iter_mut().zip(g.values()) {
                    *a = vec3::add(*a, vec3::scale(je[axis], *v));
                }
            }
        }
        Ok(Some(acc))
    }

    /// `P_n` of both right-hand sides for the synthesized state: the
    /// coefficient ODE `dG/dt = F(t, G)`.
    pub fn galerkin_rhs(&self, state: &SpectralState) -> Result<SpectralState> {
        let u = self.basis.to_grid(&state.u);
        let s = self.basis.to_grid(&state.s);
        let je = self.params.je.value_at(state.time);
        let du = self.rhs_u(&u, &s)?;
        let ds = self.rhs_s(&u, &s, je)?;
        Ok(SpectralState {
            u: self.basis.vector_apply_coeffs(du.values()),
            s: self.basis.vector_apply_coeffs(ds.values()),
            time: state.time,
        })
    }

    /// Diagonal linear parts removed by the integrating factor, per mode:
    /// `−α(λ_k − 1)` for `u`, and `−D₀λ_k` for `s` when `D₀` is uniform.
    pub fn linear_rates(&self) -> (Vec<f64>, Vec<f64>) {
        let alpha = self.params.alpha;
        let lam = self.basis.eigenvalues();
        let ru = lam.iter().map(|l| -alpha * (l - 1.0)).collect();
        let rs = match self.params.d0.uniform_value() {
            Some(d0) => lam.iter().map(|l| -d0 * l).collect(),
            None => vec![0.0; lam.len()],
        };
        (ru, rs)
    }

    pub fn tangent_rhs(
        &self,
        state: &SpectralState,
        tangent: &SpectralState,
    ) -> Result<SpectralState> {
        tangent::tangent_rhs(self, state, tangent)
    }
}
