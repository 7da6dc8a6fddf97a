//! Shared domain, grid, field and parameter types.

use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

/// Axis-aligned box `Π (0, L_i)` sampled at midpoint (cell-centred) nodes
/// `x_j = (j + 1/2) L_i / N_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    lengths: Vec<f64>,
    points: Vec<usize>,
}

impl TensorGrid {
    pub fn new(lengths: &[f64], points: &[usize]) -> Result<Self> {
        if lengths.is_empty() || lengths.len() > 3 {
            return Err(Error::Grid(format!(
                "dimension must be 1, 2 or 3, got {}",
                lengths.len()
            )));
        }
        if lengths.len() != points.len() {
            return Err(Error::Grid(format!(
                "{} lengths but {} point counts",
                lengths.len(),
                points.len()
            )));
        }
        if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::Grid(format!("edge length {l} is not positive")));
        }
        if let Some(n) = points.iter().find(|&&n| n < 4) {
            return Err(Error::Grid(format!("{n} points per axis, need at least 4")));
        }
        Ok(Self {
            lengths: lengths.to_vec(),
            points: points.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.points[axis] as f64
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Volume of one cell, i.e. the midpoint quadrature weight.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Flat index stride of `axis` (x fastest).
    pub fn stride(&self, axis: usize) -> usize {
        self.points[..axis].iter().product()
    }

    /// Per-axis indices of a flat node index.
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for (a, &n) in self.points.iter().enumerate() {
            idx[a] = flat % n;
            flat /= n;
        }
        idx
    }

    pub fn coordinate(&self, axis: usize, j: usize) -> f64 {
        (j as f64 + 0.5) * self.spacing(axis)
    }

    /// Node position padded with zeros beyond `dim`.
    pub fn node(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut x = [0.0; 3];
        for a in 0..self.dim() {
            x[a] = self.coordinate(a, idx[a]);
        }
        x
    }
}

/// ℝ³-valued samples on a grid, x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: TensorGrid,
    values: Vec<Vec3>,
}

impl VectorField {
    pub fn new(grid: TensorGrid, values: Vec<Vec3>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !vec3::is_finite(*v)) {
            return Err(Error::Params(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &TensorGrid) -> Self {
        Self::constant(grid, [0.0; 3])
    }

    pub fn constant(grid: &TensorGrid, v: Vec3) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![v; grid.len()],
        }
    }

    /// Sample `f` at every node.
    pub fn from_fn(grid: &TensorGrid, f: impl Fn([f64; 3]) -> Vec3) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    /// Wrap values produced internally; lengths are the caller's contract.
    pub(crate) fn from_raw(grid: &TensorGrid, values: Vec<Vec3>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Vec3] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Vec3] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Vec3> {
        self.values
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[c]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| vec3::is_finite(*v))
    }

    /// `L²(Ω)` norm by midpoint quadrature.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.values.iter().map(|v| vec3::norm_sq(*v)).sum::<f64>())
            .sqrt()
    }

    /// `L²(Ω)` inner product by midpoint quadrature.
    pub fn inner(&self, other: &VectorField) -> f64 {
        self.grid.cell_volume()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| vec3::dot(*a, *b))
                .sum::<f64>()
    }

    /// `a·self + b·other`.
    pub fn lincomb(&self, a: f64, other: &VectorField, b: f64) -> VectorField {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| vec3::add(vec3::scale(a, *x), vec3::scale(b, *y)))
            .collect();
        VectorField::from_raw(&self.grid, values)
    }
}

/// Real-valued samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: TensorGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: TensorGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::Params("non-finite scalar value".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: &TensorGrid, value: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![value; grid.len()],
        }
    }

    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Some(value)` when every node holds the same value.
    pub fn uniform_value(&self) -> Option<f64> {
        let first = *self.values.first()?;
        self.values.iter().all(|&x| x == first).then_some(first)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnisotropyKind {
    None,
    /// `Φ(m) = (K/2)(1 − (m·e)²)`.
    Uniaxial {
        axis: Vec3,
        strength: f64,
    },
}

/// Anisotropy density together with the cutoff `δ₀` of its extension off the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisotropySpec {
    pub kind: AnisotropyKind,
    pub cutoff: f64,
}

pub const DEFAULT_CUTOFF: f64 = 0.1;

impl AnisotropySpec {
    pub fn none() -> Self {
        Self {
            kind: AnisotropyKind::None,
            cutoff: DEFAULT_CUTOFF,
        }
    }

    /// Uniaxial anisotropy; the axis is normalized here.
    pub fn uniaxial(axis: Vec3, strength: f64) -> Result<Self> {
        let n = vec3::norm_sq(axis).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Params(
                "anisotropy axis must be a nonzero vector".into(),
            ));
        }
        if !(strength.is_finite() && strength >= 0.0) {
            return Err(Error::Params(format!(
                "anisotropy strength {strength} must be nonnegative"
            )));
        }
        Ok(Self {
            kind: AnisotropyKind::Uniaxial {
                axis: vec3::scale(1.0 / n, axis),
                strength,
            },
            cutoff: DEFAULT_CUTOFF,
        })
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn is_none(&self) -> bool {
        matches!(self.kind, AnisotropyKind::None)
            || matches!(self.kind, AnisotropyKind::Uniaxial { strength, .. } if strength == 0.0)
    }

    fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0 && 2.0 * self.cutoff < 1.0) {
            return Err(Error::Params(format!(
                "anisotropy cutoff {} must satisfy 0 < 2·δ₀ < 1",
                self.cutoff
            )));
        }
        if let AnisotropyKind::Uniaxial { axis, strength } = self.kind {
            if (vec3::norm_sq(axis) - 1.0).abs() > 1e-12 {
                return Err(Error::Params("anisotropy axis is not normalized".into()));
            }
            if !(strength.is_finite() && strength >= 0.0) {
                return Err(Error::Params(
                    "anisotropy strength must be nonnegative".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Spatially constant applied current, piecewise constant in time.
#[derive(Debug, Clone, PartialEq)]
pub enum CurrentSpec {
    Zero,
    Constant(Vec3),
    /// `values[0]` before `switch_times[0]`, `values[i]` on `[t_{i-1}, t_i)`.
    PiecewiseConstant {
        switch_times: Vec<f64>,
        values: Vec<Vec3>,
    },
}

impl CurrentSpec {
    pub fn value_at(&self, t: f64) -> Vec3 {
        match self {
            CurrentSpec::Zero => [0.0; 3],
            CurrentSpec::Constant(v) => *v,
            CurrentSpec::PiecewiseConstant {
                switch_times,
                values,
            } => {
                let seg = switch_times.iter().take_while(|&&s| s <= t).count();
                values[seg]
            }
        }
    }

    /// True when the current vanishes for all time.
    pub fn is_zero(&self) -> bool {
        match self {
            CurrentSpec::Zero => true,
            CurrentSpec::Constant(v) => *v == [0.0; 3],
            CurrentSpec::PiecewiseConstant { values, .. } => values.iter().all(|v| *v == [0.0; 3]),
        }
    }

    /// Switch times strictly inside `(t0, t1)`.
    pub fn switches_within(&self, t0: f64, t1: f64) -> Vec<f64> {
        match self {
            CurrentSpec::PiecewiseConstant { switch_times, .. } => switch_times
                .iter()
                .copied()
                .filter(|&s| s > t0 && s < t1)
                .collect(),
            _ => Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CurrentSpec::Zero => Ok(()),
            CurrentSpec::Constant(v) => {
                if vec3::is_finite(*v) {
                    Ok(())
                } else {
                    Err(Error::Params("current value is not finite".into()))
                }
            }
            CurrentSpec::PiecewiseConstant {
                switch_times,
                values,
            } => {
                if values.len() != switch_times.len() + 1 {
                    return Err(Error::Params(format!(
                        "{} switch times need {} current values, got {}",
                        switch_times.len(),
                        switch_times.len() + 1,
                        values.len()
                    )));
                }
                if switch_times.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::Params(
                        "switch times must be strictly increasing".into(),
                    ));
                }
                if switch_times.iter().any(|t| !t.is_finite())
                    || values.iter().any(|v| !vec3::is_finite(*v))
                {
                    return Err(Error::Params(
                        "current schedule contains non-finite entries".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Physical and regularization parameters of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Gilbert damping α.
    pub alpha: f64,
    /// Spin polarization θ ∈ (0, 1).
    pub theta: f64,
    /// Regularization δ, admissible iff δ < 1/θ − 1.
    pub delta: f64,
    /// Diffusion coefficient D₀ at the grid nodes.
    pub d0: ScalarField,
    /// Floor c₀ > 0 that D₀ must respect.
    pub d0_floor: f64,
    pub anisotropy: AnisotropySpec,
    pub je: CurrentSpec,
    pub demag_enabled: bool,
}

pub const DEFAULT_D0_FLOOR: f64 = 1e-6;

impl ModelParams {
    /// Parameters with uniform `D₀`, no anisotropy, zero current, demag off,
    /// and `δ = default_delta(θ)`.
    pub fn uniform(grid: &TensorGrid, alpha: f64, theta: f64, d0: f64) -> Result<Self> {
        validate_params(Self {
            alpha,
            theta,
            delta: default_delta(theta)?,
            d0: ScalarField::constant(grid, d0),
            d0_floor: DEFAULT_D0_FLOOR.min(d0.abs()),
            anisotropy: AnisotropySpec::none(),
            je: CurrentSpec::Zero,
            demag_enabled: false,
        })
    }

    pub fn grid(&self) -> &TensorGrid {
        self.d0.grid()
    }

    /// `1 − θ(1+δ)`, the coercivity margin of `−A(𝔍(u))`.
    pub fn coercivity_margin(&self) -> f64 {
        1.0 - self.theta * (1.0 + self.delta)
    }
}

/// Checks every standing hypothesis and hands the parameters back unchanged.
pub fn validate_params(params: ModelParams) -> Result<ModelParams> {
    if !(params.alpha.is_finite() && params.alpha > 0.0) {
        return Err(Error::Params(format!(
            "alpha = {} must be positive",
            params.alpha
        )));
    }
    if !(params.theta > 0.0 && params.theta < 1.0) {
        return Err(Error::Params(format!(
            "theta = {} outside (0,1)",
            params.theta
        )));
    }
    if !(params.delta.is_finite() && params.delta > 0.0) {
        return Err(Error::Params(format!(
            "delta = {} must be positive",
            params.delta
        )));
    }
    let limit = 1.0 / params.theta - 1.0;
    if params.delta >= limit {
        return Err(Error::Params(format!(
            "delta violates δ < 1/θ − 1 ({} ≥ {limit}): regularization not coercive",
            params.delta
        )));
    }
    if !(params.d0_floor.is_finite() && params.d0_floor > 0.0) {
        return Err(Error::Params(format!(
            "D₀ floor c₀ = {} must be positive",
            params.d0_floor
        )));
    }
    let d0_min = params.d0.min();
    if d0_min < params.d0_floor {
        return Err(Error::Params(format!(
            "D₀ floor violated: min D₀ = {d0_min} < c₀ = {}",
            params.d0_floor
        )));
    }
    params.anisotropy.validate()?;
    params.je.validate()?;
    Ok(params)
}

/// Midpoint of the admissible interval `(0, 1/θ − 1)`.
pub fn default_delta(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Params(format!("theta = {theta} outside (0,1)")));
    }
    Ok(0.5 * (1.0 / theta - 1.0))
}
