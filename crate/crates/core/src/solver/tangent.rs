//! Linearization of the Galerkin right-hand side along a direction `(u₁, s₁)`.
//!
//! ```text
//! ∂t u₁ = αΔu₁ − u×Δu₁ + K₁ + L₁
//! ∂t s₁ = −div(A(m)∇s₁) + Q̂₁ + T₁,      m = 𝔍(u)
//! ```
//!
//! with `K₁ = 2α(∇u₁·∇u)u`, `h̄(u₁) = h_d(u₁) − ∇²Φ̃(m)·m₁`, `m₁ = D𝔍(u)u₁`,
//! `L₁` the remaining zeroth-order terms, `Q̂₁ = −div(u₁⊗J_e)` (piecewise
//! constant currents have `∂t J_e = 0`) and `T₁` the linearized `A` and
//! reaction terms. Every term is the exact derivative of what
//! [`Model::galerkin_rhs`] evaluates, including the chain rule through `𝔍`.

use super::Model;
use crate::error::Result;
use crate::par;
use crate::physics::{self, anisotropy};
use crate::spectral::SpectralState;
use crate::vec3::{self, Vec3};

pub(super) fn tangent_rhs(
    model: &Model,
    state: &SpectralState,
    tangent: &SpectralState,
) -> Result<SpectralState> {
    let basis = model.basis();
    let params = model.params();
    let (alpha, theta, delta) = (params.alpha, params.theta, params.delta);
    let d0 = params.d0.values();
    let je = params.je.value_at(state.time);
    let dim = basis.grid().dim();

    let u = basis.to_grid(&state.u);
    let s = basis.to_grid(&state.s);
    let u1 = basis.to_grid(&tangent.u);
    let s1 = basis.to_grid(&tangent.s);

    let lap = basis.to_grid(&basis.laplacian(&state.u));
    let lap1 = basis.to_grid(&basis.laplacian(&tangent.u));
    let gu = basis.gradient(&u)?;
    let gu1 = basis.gradient(&u1)?;
    let gs = basis.gradient(&s)?;
    let gs1 = basis.gradient(&s1)?;

    let hd = physics::demag_values(u.values(), params, model.demag())?;
    let hd1 = physics::demag_values(u1.values(), params, model.demag())?;

    let (uv, sv, u1v, s1v) = (u.values(), s.values(), u1.values(), s1.values());
    let n_nodes = uv.len();

    struct Node {
        m: Vec3,
        m1: Vec3,
        du: Vec3,
    }

    let nodes: Vec<Node> = par::map_range(n_nodes, |n| {
        let (u, s, u1, s1) = (uv[n], sv[n], u1v[n], s1v[n]);
        let m = physics::regularize(u, delta);
        let m1 = physics::regularize_tangent(u, u1, delta);
        let aniso = anisotropy::eval_unchecked(m, vec3::norm_sq(m), &params.anisotropy);
        let hd = hd.as_ref().map_or([0.0; 3], |h| h[n]);
        let hd1 = hd1.as_ref().map_or([0.0; 3], |h| h[n]);
        let ht = vec3::sub(hd, aniso.grad);
        let hbar = vec3::sub(hd1, vec3::mat_vec(&aniso.hess, m1));
        let (l, l1) = (lap.values()[n], lap1.values()[n]);

        let mut grad_sq = 0.0;
        let mut grad_dot = 0.0;
        for a in 0..dim {
            let g = gu[a].values()[n];
            grad_sq += vec3::norm_sq(g);
            grad_dot += vec3::dot(g, gu1[a].values()[n]);
        }
        let ht_s = vec3::add(ht, s);
        let hbar_s1 = vec3::add(hbar, s1);
        // K₁
        let k1 = vec3::scale(2.0 * grad_dot, u);
        // α-part of L₁
        let damp = [
            vec3::scale(grad_sq, u1),
            vec3::scale(-1.0, vec3::cross(u1, vec3::cross(u, ht_s))),
            vec3::scale(-1.0, vec3::cross(u, vec3::cross(u1, ht_s))),
            vec3::scale(-1.0, vec3::cross(u, vec3::cross(u, hbar_s1))),
        ]
        .into_iter()
        .fold(vec3::add(l1, k1), vec3::add);
        let h_s = vec3::add(l, ht_s);
        let prec = vec3::add(vec3::cross(u1, h_s), vec3::cross(u, vec3::add(l1, hbar_s1)));
        Node {
            m,
            m1,
            du: vec3::sub(vec3::scale(alpha, damp), prec),
        }
    });

    let fluxes: Vec<Vec<Vec3>> = (0..dim)
        .map(|a| {
            par::map_range(n_nodes, |n| {
                let node = &nodes[n];
                let am = physics::spin_matrix(node.m, theta, d0[n]);
                let am1 = physics::spin_matrix_tangent(node.m, node.m1, theta, d0[n]);
                vec3::add(
                    vec3::mat_vec(&am, gs1[a].values()[n]),
                    vec3::mat_vec(&am1, gs[a].values()[n]),
                )
            })
        })
        .collect();
    let div = basis.flux_divergence(&fluxes);

    let ds: Vec<Vec3> = par::map_range(n_nodes, |n| {
        let (u, s, u1, s1) = (uv[n], sv[n], u1v[n], s1v[n]);
        let reaction = vec3::scale(
            d0[n],
            vec3::add(s1, vec3::add(vec3::cross(s1, u), vec3::cross(s, u1))),
        );
        let mut transport = [0.0; 3];
        for a in 0..dim {
            if je[a] != 0.0 {
                transport = vec3::add(transport, vec3::scale(je[a], gu1[a].values()[n]));
            }
        }
        vec3::scale(
            -1.0,
            vec3::add(div.values()[n], vec3::add(reaction, transport)),
        )
    });
    let du: Vec<Vec3> = nodes.into_iter().map(|n| n.du).collect();

    Ok(SpectralState {
        u: basis.vector_apply_coeffs(&du),
        s: basis.vector_apply_coeffs(&ds),
        time: state.time,
    })
}
