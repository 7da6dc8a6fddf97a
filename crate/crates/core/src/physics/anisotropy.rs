//! Anisotropy density extended from the sphere into the ball `|z|² ≤ 1 + δ`.
//!
//! `Φ̃(z) = ζ(|z|²) Φ(z/|z|)` where `ζ` is a degree-7 smoothstep rising from
//! 0 at `2δ₀` to 1 at `|z|² = 1`.

use crate::error::{Error, Result};
use crate::types::{AnisotropyKind, AnisotropySpec};
use crate::vec3::{Mat3, Vec3};

/// Value, gradient and Hessian of the extended density at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisotropyEval {
    pub value: f64,
    pub grad: Vec3,
    pub hess: Mat3,
}

impl AnisotropyEval {
    const ZERO: Self = Self {
        value: 0.0,
        grad: [0.0; 3],
        hess: [[0.0; 3]; 3],
    };
}

/// `ζ(r)` and its first two derivatives.
pub fn cutoff(r: f64, cutoff: f64) -> (f64, f64, f64) {
    let a = 2.0 * cutoff;
    if r <= a {
        return (0.0, 0.0, 0.0);
    }
    if r >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let w = 1.0 - a;
    let s = (r - a) / w;
    let t = 1.0 - s;
    let s2 = s * s;
    let s3 = s2 * s;
    let z = s3 * s * (35.0 - 84.0 * s + 70.0 * s2 - 20.0 * s3);
    let dz = 140.0 * s3 * t * t * t / w;
    let d2z = 420.0 * s2 * t * t * (1.0 - 2.0 * s) / (w * w);
    (z, dz, d2z)
}

/// Evaluates `Φ̃`, `∇Φ̃` and `∇²Φ̃` at `z`; `delta` bounds the domain.
pub fn anisotropy_value_grad_hess(
    z: Vec3,
    spec: &AnisotropySpec,
    delta: f64,
) -> Result<AnisotropyEval> {
    let r = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
    let limit = 1.0 + delta;
    if r > limit * (1.0 + 1e-12) {
        return Err(Error::ExtensionDomain { norm_sq: r, limit });
    }
    Ok(eval_unchecked(z, r, spec))
}

pub(crate) fn eval_unchecked(z: Vec3, r: f64, spec: &AnisotropySpec) -> AnisotropyEval {
    let (axis, k) = match spec.kind {
        AnisotropyKind::None => return AnisotropyEval::ZERO,
        AnisotropyKind::Uniaxial { axis, strength } => (axis, strength),
    };
    let (zeta, dzeta, d2zeta) = cutoff(r, spec.cutoff);
    if zeta == 0.0 && dzeta == 0.0 && d2zeta == 0.0 || k == 0.0 {
        return AnisotropyEval::ZERO;
    }
    let p = z[0] * axis[0] + z[1] * axis[1] + z[2] * axis[2];
    // g(z) = 1 − p²/r  (Φ(z/|z|) = K/2 · g)
    let g = 1.0 - p * p / r;
    let mut grad_g = [0.0; 3];
    for i in 0..3 {
        grad_g[i] = -2.0 * p * axis[i] / r + 2.0 * p * p * z[i] / (r * r);
    }
    let half_k = 0.5 * k;
    let mut grad = [0.0; 3];
    for i in 0..3 {
        grad[i] = half_k * (2.0 * dzeta * z[i] * g + zeta * grad_g[i]);
    }
    let mut hess = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let delta_ij = if i == j { 1.0 } else { 0.0 };
            let hg = -2.0 * axis[i] * axis[j] / r
                + 4.0 * p * (axis[i] * z[j] + z[i] * axis[j]) / (r * r)
                + 2.0 * p * p * delta_ij / (r * r)
                - 8.0 * p * p * z[i] * z[j] / (r * r * r);
            let hzeta = 4.0 * d2zeta * z[i] * z[j] + 2.0 * dzeta * delta_ij;
            hess[i][j] = half_k
                * (g * hzeta + 2.0 * dzeta * (z[i] * grad_g[j] + grad_g[i] * z[j]) + zeta * hg);
        }
    }
    AnisotropyEval {
        value: half_k * zeta * g,
        grad,
        hess,
    }
}
