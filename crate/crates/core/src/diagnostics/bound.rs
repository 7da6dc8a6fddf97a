//! Maximal solution of the comparison problem `z′ = C(1+z)⁵, z(0) = z₀`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    pub c: f64,
    pub z0: f64,
    /// Blow-up time `T* = 1/(4C(1+z₀)⁴)`.
    pub t_star: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl BoundCurve {
    /// `z(t) = ((1+z₀)⁻⁴ − 4Ct)^{−1/4} − 1` for `0 ≤ t < T*`, `+∞` from `T*` on.
    pub fn z(&self, t: f64) -> f64 {
        let base = (1.0 + self.z0).powi(-4) - 4.0 * self.c * t;
        if base <= 0.0 {
            f64::INFINITY
        } else {
            base.powf(-0.25) - 1.0
        }
    }

    /// `z′(t) = C(1+z)⁵` evaluated through the closed form.
    pub fn dz(&self, t: f64) -> f64 {
        let base = (1.0 + self.z0).powi(-4) - 4.0 * self.c * t;
        self.c * base.powf(-1.25)
    }
}

/// Samples the curve at `T*(1 − 2^{−i})`, `i = 0..samples`.
pub fn blowup_bound(c: f64, z0: f64) -> Result<BoundCurve> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Params(format!(
            "comparison constant C = {c} must be positive"
        )));
    }
    if !(z0 >= 0.0 && z0.is_finite()) {
        return Err(Error::Params(format!("z₀ = {z0} must be nonnegative")));
    }
    let t_star = 1.0 / (4.0 * c * (1.0 + z0).powi(4));
    let mut curve = BoundCurve {
        c,
        z0,
        t_star,
        times: Vec::new(),
        values: Vec::new(),
    };
    for i in 0..40 {
        let t = t_star * (1.0 - 0.5f64.powi(i));
        curve.times.push(t);
        curve.values.push(curve.z(t));
    }
    Ok(curve)
}

/// Heuristic `C` from one observed sample of `z` and `dz/dt`.
pub fn fit_constant(z: f64, dz: f64) -> f64 {
    dz / (1.0 + z).powi(5)
}
