//! Neumann eigenbasis of `Δ − I` on a box and the transforms around it.
//!
//! Basis functions are products of `c_k cos(kπx/L)`, with `c_0 = L^{-1/2}` and
//! `c_k = (2/L)^{1/2}`. On midpoint nodes the cosine transform is exact for
//! every mode `k < N`, so quadrature, projection and synthesis agree to
//! rounding. Cosine series differentiate into sine series, which are
//! evaluated with the odd companion transform on the same nodes.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::par;
use crate::types::{TensorGrid, VectorField};
use crate::vec3::{self, Vec3};

/// Per-axis transform kind applied along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AxisOp {
    AnalyzeCos,
    AnalyzeSin,
    SynthCos,
    SynthSin,
}

/// Cosine/sine transforms of one axis via a zero-padded `2N` complex FFT.
#[derive(Clone)]
struct AxisTransform {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `exp(-iπk/(2N))`, `k = 0..=N`.
    twiddle: Vec<Complex64>,
}

impl std::fmt::Debug for AxisTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AxisTransform").field("n", &self.n).finish()
    }
}

impl AxisTransform {
    fn new(n: usize, planner: &mut FftPlanner<f64>) -> Self {
        let twiddle = (0..=n)
            .map(|k| Complex64::from_polar(1.0, -PI * k as f64 / (2 * n) as f64))
            .collect();
        Self {
            n,
            forward: planner.plan_fft_forward(2 * n),
            inverse: planner.plan_fft_inverse(2 * n),
            twiddle,
        }
    }

    /// Interpolant coefficients from node values (or node values from
    /// coefficients). Sine coefficients for `k = 1..=N` live at slot `k − 1`.
    fn apply(&self, op: AxisOp, input: &[f64], out: &mut [f64]) {
        let n = self.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); 2 * n];
        match op {
            AxisOp::AnalyzeCos | AxisOp::AnalyzeSin => {
                for (b, &x) in buf.iter_mut().zip(input) {
                    b.re = x;
                }
                self.forward.process(&mut buf);
                let inv_n = 1.0 / n as f64;
                if op == AxisOp::AnalyzeCos {
                    out[0] = (buf[0] * self.twiddle[0]).re * inv_n;
                    for k in 1..n {
                        out[k] = 2.0 * (buf[k] * self.twiddle[k]).re * inv_n;
                    }
                } else {
                    for k in 1..=n {
                        let w = if k == n { inv_n } else { 2.0 * inv_n };
                        out[k - 1] = -(buf[k] * self.twiddle[k]).im * w;
                    }
                }
            }
            AxisOp::SynthCos => {
                for k in 0..n {
                    buf[k] = self.twiddle[k].conj() * input[k];
                }
                self.inverse.process(&mut buf);
                for (o, b) in out.iter_mut().zip(&buf) {
                    *o = b.re;
                }
            }
            AxisOp::SynthSin => {
                for k in 1..=n {
                    buf[k] = self.twiddle[k].conj() * input[k - 1];
                }
                self.inverse.process(&mut buf);
                for (o, b) in out.iter_mut().zip(&buf) {
                    *o = b.im;
                }
            }
        }
    }
}

/// Retained Neumann eigenmodes on a grid.
#[derive(Debug, Clone)]
pub struct Basis {
    grid: TensorGrid,
    modes: Vec<usize>,
    axes: Vec<AxisTransform>,
    eigenvalues: Vec<f64>,
    norms: Vec<f64>,
}

/// Builds the basis keeping `modes[i]` cosine modes along axis `i`.
pub fn build_basis(grid: &TensorGrid, modes: &[usize]) -> Result<Basis> {
    if modes.len() != grid.dim() {
        return Err(Error::Basis(format!(
            "{} mode counts for a {}-dimensional grid",
            modes.len(),
            grid.dim()
        )));
    }
    for (a, (&m, &n)) in modes.iter().zip(grid.points()).enumerate() {
        if m == 0 || m > n {
            return Err(Error::Basis(format!(
                "axis {a}: {m} modes exceed grid resolution of {n} points"
            )));
        }
    }
    let mut planner = FftPlanner::new();
    let axes = grid
        .points()
        .iter()
        .map(|&n| AxisTransform::new(n, &mut planner))
        .collect();
    let count: usize = modes.iter().product();
    let mut eigenvalues = Vec::with_capacity(count);
    let mut norms = Vec::with_capacity(count);
    for flat in 0..count {
        let k = unravel(modes, flat);
        let mut lambda = 1.0;
        let mut c = 1.0;
        for (a, &len) in grid.lengths().iter().enumerate() {
            let w = k[a] as f64 * PI / len;
            lambda += w * w;
            c *= if k[a] == 0 {
                (1.0 / len).sqrt()
            } else {
                (2.0 / len).sqrt()
            };
        }
        eigenvalues.push(lambda);
        norms.push(c);
    }
    Ok(Basis {
        grid: grid.clone(),
        modes: modes.to_vec(),
        axes,
        eigenvalues,
        norms,
    })
}

fn unravel(shape: &[usize], mut flat: usize) -> [usize; 3] {
    let mut idx = [0usize; 3];
    for (a, &n) in shape.iter().enumerate() {
        idx[a] = flat % n;
        flat /= n;
    }
    idx
}

impl Basis {
    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `λ_k = 1 + Σ (k_i π / L_i)²` for every retained mode.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(1.0, f64::max)
    }

    /// Per-axis wavenumbers of retained mode `i`.
    pub fn mode_index(&self, i: usize) -> [usize; 3] {
        unravel(&self.modes, i)
    }

    /// Flat position of a multi-index, if retained.
    pub fn mode_position(&self, k: &[usize]) -> Option<usize> {
        let mut flat = 0;
        let mut stride = 1;
        for (a, &m) in self.modes.iter().enumerate() {
            let ka = k.get(a).copied().unwrap_or(0);
            if ka >= m {
                return None;
            }
            flat += ka * stride;
            stride *= m;
        }
        Some(flat)
    }

    /// Value of basis function `i` at point `x`.
    pub fn eval_mode(&self, i: usize, x: [f64; 3]) -> f64 {
        let k = self.mode_index(i);
        let mut v = self.norms[i];
        for (a, &len) in self.grid.lengths().iter().enumerate() {
            v *= (k[a] as f64 * PI * x[a] / len).cos();
        }
        v
    }

    fn check_grid(&self, grid: &TensorGrid) -> Result<()> {
        if grid != &self.grid {
            return Err(Error::GridMismatch(
                "field grid differs from the basis grid".into(),
            ));
        }
        Ok(())
    }

    fn along_axis(&self, data: &[f64], axis: usize, op: AxisOp) -> Vec<f64> {
        let n = self.grid.points()[axis];
        let stride = self.grid.stride(axis);
        let total = data.len();
        let t = &self.axes[axis];
        if stride == 1 {
            let mut out = vec![0.0; total];
            let mut outs = out.chunks_mut(n).collect::<Vec<_>>();
            let lines = data.chunks(n).collect::<Vec<_>>();
            if par::enabled() && total >= 8192 && lines.len() > 1 {
                let results = par::map_range_min(lines.len(), 1, |l| {
                    let mut o = vec![0.0; n];
                    t.apply(op, lines[l], &mut o);
                    o
                });
                for (o, r) in outs.iter_mut().zip(results) {
                    o.copy_from_slice(&r);
                }
            } else {
                for (o, l) in outs.iter_mut().zip(lines) {
                    t.apply(op, l, o);
                }
            }
            return out;
        }
        let block = stride * n;
        let nlines = total / n;
        let line_start = |l: usize| (l / stride) * block + l % stride;
        let min_len = if total >= 8192 { 1 } else { usize::MAX };
        let results = par::map_range_min(nlines, min_len, |l| {
            let start = line_start(l);
            let input: Vec<f64> = (0..n).map(|j| data[start + j * stride]).collect();
            let mut o = vec![0.0; n];
            t.apply(op, &input, &mut o);
            o
        });
        let mut out = vec![0.0; total];
        for (l, r) in results.into_iter().enumerate() {
            let start = line_start(l);
            for (j, v) in r.into_iter().enumerate() {
                out[start + j * stride] = v;
            }
        }
        out
    }

    fn wavenumber(&self, axis: usize, k: usize) -> f64 {
        k as f64 * PI / self.grid.lengths()[axis]
    }

    /// Orthonormal coefficients `<f, f_k>` of the retained modes (scalar data).
    pub fn scalar_to_coeffs(&self, values: &[f64]) -> Vec<f64> {
        let mut data = values.to_vec();
        for a in 0..self.grid.dim() {
            data = self.along_axis(&data, a, AxisOp::AnalyzeCos);
        }
        (0..self.len())
            .map(|i| {
                let k = self.mode_index(i);
                let flat: usize = (0..self.grid.dim())
                    .map(|a| k[a] * self.grid.stride(a))
                    .sum();
                data[flat] / self.norms[i]
            })
            .collect()
    }

    /// Node values of `Σ c_k f_k` (scalar data).
    pub fn scalar_to_grid(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut data = vec![0.0; self.grid.len()];
        for (i, &c) in coeffs.iter().enumerate() {
            let k = self.mode_index(i);
            let flat: usize = (0..self.grid.dim())
                .map(|a| k[a] * self.grid.stride(a))
                .sum();
            data[flat] = c * self.norms[i];
        }
        for a in 0..self.grid.dim() {
            data = self.along_axis(&data, a, AxisOp::SynthCos);
        }
        data
    }

    /// Orthonormal coefficients of a vector field on the retained modes.
    pub fn to_coeffs(&self, field: &VectorField) -> Result<Vec<Vec3>> {
        self.check_grid(field.grid())?;
        Ok(self.vector_apply_coeffs(field.values()))
    }

    pub(crate) fn vector_apply_coeffs(&self, values: &[Vec3]) -> Vec<Vec3> {
        let comps: Vec<Vec<f64>> = (0..3)
            .map(|c| {
                let comp: Vec<f64> = values.iter().map(|v| v[c]).collect();
                self.scalar_to_coeffs(&comp)
            })
            .collect();
        zip3(&comps)
    }

    /// Synthesizes `Σ c_k f_k` at the grid nodes.
    pub fn to_grid(&self, coeffs: &[Vec3]) -> VectorField {
        let comps: Vec<Vec<f64>> = (0..3)
            .map(|c| {
                let comp: Vec<f64> = coeffs.iter().map(|v| v[c]).collect();
                self.scalar_to_grid(&comp)
            })
            .collect();
        VectorField::from_raw(&self.grid, zip3(&comps))
    }

    /// Galerkin projection `P_n` onto the retained modes.
    pub fn project(&self, field: &VectorField) -> Result<VectorField> {
        Ok(self.to_grid(&self.to_coeffs(field)?))
    }

    /// `Δ` on retained coefficients: multiply by `1 − λ_k`.
    pub fn laplacian(&self, coeffs: &[Vec3]) -> Vec<Vec3> {
        coeffs
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, &l)| vec3::scale(1.0 - l, *c))
            .collect()
    }

    /// `∂/∂x_axis` of the full-resolution cosine interpolant, at the nodes.
    pub fn scalar_derivative(&self, values: &[f64], axis: usize) -> Vec<f64> {
        let n = self.grid.points()[axis];
        let coeffs = self.along_axis(values, axis, AxisOp::AnalyzeCos);
        let stride = self.grid.stride(axis);
        // cos slot k -> sin slot k-1; the k = N sine slot stays empty
        let mut shifted = vec![0.0; coeffs.len()];
        for flat in 0..coeffs.len() {
            let k = (flat / stride) % n;
            if k >= 1 {
                shifted[flat - stride] = -self.wavenumber(axis, k) * coeffs[flat];
            }
        }
        self.along_axis(&shifted, axis, AxisOp::SynthSin)
    }

    /// `∂/∂x_axis` of a flux component treated as a sine series along `axis`
    /// (zero at both faces), evaluated at the nodes.
    pub fn scalar_flux_derivative(&self, values: &[f64], axis: usize) -> Vec<f64> {
        let n = self.grid.points()[axis];
        let stride = self.grid.stride(axis);
        let coeffs = self.along_axis(values, axis, AxisOp::AnalyzeSin);
        let mut shifted = vec![0.0; coeffs.len()];
        for flat in 0..coeffs.len() {
            let slot = (flat / stride) % n;
            let k = slot + 1;
            // k = N: cos(Nπx_j/L) vanishes at every midpoint node
            if k < n {
                shifted[flat + stride] = self.wavenumber(axis, k) * coeffs[flat];
            }
        }
        self.along_axis(&shifted, axis, AxisOp::SynthCos)
    }

    /// Full-resolution spectral Laplacian of node data.
    pub fn scalar_laplacian(&self, values: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; values.len()];
        for axis in 0..self.grid.dim() {
            let n = self.grid.points()[axis];
            let stride = self.grid.stride(axis);
            let mut coeffs = self.along_axis(values, axis, AxisOp::AnalyzeCos);
            for (flat, c) in coeffs.iter_mut().enumerate() {
                let w = self.wavenumber(axis, (flat / stride) % n);
                *c *= -w * w;
            }
            let d2 = self.along_axis(&coeffs, axis, AxisOp::SynthCos);
            for (a, d) in acc.iter_mut().zip(d2) {
                *a += d;
            }
        }
        acc
    }

    /// Per-axis gradient fields `∂u/∂x_i`.
    pub fn gradient(&self, field: &VectorField) -> Result<Vec<VectorField>> {
        self.check_grid(field.grid())?;
        Ok((0..self.grid.dim())
            .map(|a| self.map_components(field.values(), |c| self.scalar_derivative(c, a)))
            .collect())
    }

    /// Full-resolution spectral Laplacian of a vector field.
    pub fn grid_laplacian(&self, field: &VectorField) -> Result<VectorField> {
        self.check_grid(field.grid())?;
        Ok(self.map_components(field.values(), |c| self.scalar_laplacian(c)))
    }

    /// `Σ_i ∂_i F_i` for per-axis flux fields that vanish on the faces normal to `i`.
    pub fn flux_divergence(&self, fluxes: &[Vec<Vec3>]) -> VectorField {
        let mut acc = vec![[0.0; 3]; self.grid.len()];
        for (axis, flux) in fluxes.iter().enumerate() {
            let d = self.map_components(flux, |c| self.scalar_flux_derivative(c, axis));
            for (a, v) in acc.iter_mut().zip(d.values()) {
                *a = vec3::add(*a, *v);
            }
        }
        VectorField::from_raw(&self.grid, acc)
    }

    pub(crate) fn map_components(
        &self,
        values: &[Vec3],
        f: impl Fn(&[f64]) -> Vec<f64>,
    ) -> VectorField {
        let comps: Vec<Vec<f64>> = (0..3)
            .map(|c| {
                let comp: Vec<f64> = values.iter().map(|v| v[c]).collect();
                f(&comp)
            })
            .collect();
        VectorField::from_raw(&self.grid, zip3(&comps))
    }
}

fn zip3(comps: &[Vec<f64>]) -> Vec<Vec3> {
    (0..comps[0].len())
        .map(|i| [comps[0][i], comps[1][i], comps[2][i]])
        .collect()
}

/// Galerkin unknowns: coefficients of `u` and `s` on the retained modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub u: Vec<Vec3>,
    pub s: Vec<Vec3>,
    pub time: f64,
}

impl SpectralState {
    pub fn zeros(modes: usize) -> Self {
        Self {
            u: vec![[0.0; 3]; modes],
            s: vec![[0.0; 3]; modes],
            time: 0.0,
        }
    }

    pub fn from_fields(basis: &Basis, u: &VectorField, s: &VectorField) -> Result<Self> {
        Ok(Self {
            u: basis.to_coeffs(u)?,
            s: basis.to_coeffs(s)?,
            time: 0.0,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.s).all(|v| vec3::is_finite(*v))
    }

    /// `self + k·other` on coefficients; time is kept.
    pub fn axpy(&self, k: f64, other: &SpectralState) -> SpectralState {
        let comb = |a: &[Vec3], b: &[Vec3]| -> Vec<Vec3> {
            a.iter()
                .zip(b)
                .map(|(x, y)| vec3::add(*x, vec3::scale(k, *y)))
                .collect()
        };
        SpectralState {
            u: comb(&self.u, &other.u),
            s: comb(&self.s, &other.s),
            time: self.time,
        }
    }

    pub fn scaled(&self, k: f64) -> SpectralState {
        SpectralState {
            u: self.u.iter().map(|v| vec3::scale(k, *v)).collect(),
            s: self.s.iter().map(|v| vec3::scale(k, *v)).collect(),
            time: self.time,
        }
    }

    /// Combined coefficient `ℓ²` norm, equal to the `L²` norm of `(u, s)`.
    pub fn norm(&self) -> f64 {
        self.u
            .iter()
            .chain(&self.s)
            .map(|v| vec3::norm_sq(*v))
            .sum::<f64>()
            .sqrt()
    }

    pub fn u_norm(&self) -> f64 {
        coeff_norm(&self.u)
    }

    pub fn s_norm(&self) -> f64 {
        coeff_norm(&self.s)
    }

    pub fn distance(&self, other: &SpectralState) -> f64 {
        self.axpy(-1.0, other).norm()
    }
}

pub fn coeff_norm(c: &[Vec3]) -> f64 {
    c.iter().map(|v| vec3::norm_sq(*v)).sum::<f64>().sqrt()
}

/// Finite-difference weights for the `order`-th derivative at `x0` through
/// `nodes` (Fornberg's recursion).
pub fn fd_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Nodes used by the one-sided boundary stencil (sixth order).
pub const NEUMANN_STENCIL: usize = 7;

/// Largest `|∂f/∂ν|` over all boundary faces, estimated with one-sided
/// differences through the nodes nearest each face (up to
/// [`NEUMANN_STENCIL`] of them).
pub fn neumann_residual(field: &VectorField) -> Result<f64> {
    let grid = field.grid();
    if let Some(&n) = grid.points().iter().find(|&&n| n < 6) {
        return Err(Error::Grid(format!(
            "boundary stencil needs at least 6 points per axis, got {n}"
        )));
    }
    let values = field.values();
    let mut worst: f64 = 0.0;
    for axis in 0..grid.dim() {
        let n = grid.points()[axis];
        let width = NEUMANN_STENCIL.min(n);
        let offsets: Vec<f64> = (0..width).map(|j| j as f64 + 0.5).collect();
        let w = fd_weights(0.0, &offsets, 1);
        let stride = grid.stride(axis);
        let h = grid.spacing(axis);
        let block = stride * n;
        for l in 0..grid.len() / n {
            let start = (l / stride) * block + l % stride;
            for c in 0..3 {
                let lo: f64 = (0..width)
                    .map(|j| w[j] * values[start + j * stride][c])
                    .sum::<f64>()
                    / h;
                let hi: f64 = (0..width)
                    .map(|j| w[j] * values[start + (n - 1 - j) * stride][c])
                    .sum::<f64>()
                    / h;
                worst = worst.max(lo.abs()).max(hi.abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn basis_1d(n: usize, m: usize) -> Basis {
        build_basis(&TensorGrid::new(&[1.0], &[n]).unwrap(), &[m]).unwrap()
    }

    #[test]
    fn eigenvalues_match_formula() {
        let b = basis_1d(16, 4);
        assert_eq!(b.eigenvalues()[0], 1.0);
        assert_relative_eq!(b.eigenvalues()[1], 1.0 + PI * PI, epsilon = 1e-14);
        assert_relative_eq!(
            b.eval_mode(1, [0.3, 0.0, 0.0]),
            2f64.sqrt() * (0.3 * PI).cos()
        );
        let g = TensorGrid::new(&[1.0, 2.0], &[8, 8]).unwrap();
        let b2 = build_basis(&g, &[3, 3]).unwrap();
        let i = b2.mode_position(&[1, 1]).unwrap();
        assert_relative_eq!(
            b2.eigenvalues()[i],
            1.0 + PI * PI + PI * PI / 4.0,
            epsilon = 1e-14
        );
        assert!(build_basis(&g, &[9, 3]).is_err());
    }

    #[test]
    fn gram_matrix_is_identity() {
        let g = TensorGrid::new(&[1.0, 1.5], &[10, 8]).unwrap();
        let b = build_basis(&g, &[6, 5]).unwrap();
        let w = g.cell_volume();
        for i in 0..b.len() {
            for j in 0..b.len() {
                let q: f64 = (0..g.len())
                    .map(|p| b.eval_mode(i, g.node(p)) * b.eval_mode(j, g.node(p)))
                    .sum::<f64>()
                    * w;
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((q - expect).abs() < 1e-12, "({i},{j}) -> {q}");
            }
        }
    }

    #[test]
    fn unit_mode_and_constant_coefficients() {
        let b = basis_1d(16, 8);
        let g = b.grid().clone();
        let f = VectorField::from_fn(&g, |x| [b.eval_mode(3, x), 0.0, 0.0]);
        let c = b.to_coeffs(&f).unwrap();
        for (i, v) in c.iter().enumerate() {
            let e = if i == 3 { 1.0 } else { 0.0 };
            assert!((v[0] - e).abs() < 1e-14 && v[1] == 0.0);
        }
        let g3 = TensorGrid::new(&[1.0, 2.0, 0.5], &[4, 6, 4]).unwrap();
        let b3 = build_basis(&g3, &[2, 3, 2]).unwrap();
        let c = b3
            .to_coeffs(&VectorField::constant(&g3, [1.0, 0.0, 0.0]))
            .unwrap();
        assert_relative_eq!(c[0][0], 1.0f64.sqrt(), epsilon = 1e-14);
        assert!(c[1..].iter().all(|v| v[0].abs() < 1e-14));
    }

    #[test]
    fn laplacian_multipliers() {
        let b = basis_1d(16, 4);
        let c = vec![[1.0, 1.0, 1.0]; 4];
        let l = b.laplacian(&c);
        assert_eq!(l[0], [0.0; 3]);
        assert_relative_eq!(l[1][0], -PI * PI, epsilon = 1e-13);
        let ll = b.laplacian(&l);
        for (i, v) in ll.iter().enumerate() {
            let lam = b.eigenvalues()[i];
            assert_relative_eq!(v[2], (1.0 - lam).powi(2), max_relative = 1e-14);
        }
    }

    #[test]
    fn derivative_of_cosine() {
        let b = basis_1d(32, 32);
        let g = b.grid().clone();
        let f: Vec<f64> = (0..32).map(|j| (PI * g.coordinate(0, j)).cos()).collect();
        let d = b.scalar_derivative(&f, 0);
        for j in 0..32 {
            let x = g.coordinate(0, j);
            assert!((d[j] + PI * (PI * x).sin()).abs() < 1e-12);
        }
        let c: Vec<f64> = vec![2.5; 32];
        assert!(b.scalar_derivative(&c, 0).iter().all(|x| x.abs() < 1e-13));
    }

    #[test]
    fn dirichlet_energy_of_cos2pi() {
        // ∫₀¹ (2π sin 2πx)² dx = 2π²
        let b = basis_1d(32, 32);
        let g = b.grid().clone();
        let f: Vec<f64> = (0..32)
            .map(|j| (2.0 * PI * g.coordinate(0, j)).cos())
            .collect();
        let d = b.scalar_derivative(&f, 0);
        let e: f64 = d.iter().map(|x| x * x).sum::<f64>() * g.cell_volume();
        assert_relative_eq!(e, 2.0 * PI * PI, max_relative = 1e-13);
    }

    #[test]
    fn flux_divergence_inverts_gradient() {
        let g = TensorGrid::new(&[1.0, 2.0], &[16, 12]).unwrap();
        let b = build_basis(&g, &[8, 6]).unwrap();
        let f = VectorField::from_fn(&g, |x| {
            [
                (PI * x[0]).cos() * (PI * x[1] / 2.0).cos(),
                (2.0 * PI * x[0]).cos(),
                (3.0 * PI * x[1] / 2.0).cos() + 0.5,
            ]
        });
        let grads = b.gradient(&f).unwrap();
        let fluxes: Vec<Vec<Vec3>> = grads.into_iter().map(|v| v.into_values()).collect();
        let div = b.flux_divergence(&fluxes);
        let lap = b.grid_laplacian(&f).unwrap();
        for (a, l) in div.values().iter().zip(lap.values()) {
            for c in 0..3 {
                assert!((a[c] - l[c]).abs() < 1e-11, "{} vs {}", a[c], l[c]);
            }
        }
    }

    #[test]
    fn projection_is_idempotent_and_nonexpansive() {
        let b = basis_1d(32, 10);
        let g = b.grid().clone();
        let f = VectorField::from_fn(&g, |x| {
            [x[0] * x[0], (5.0 * x[0]).sin(), 1.0 / (1.0 + x[0])]
        });
        let p = b.project(&f).unwrap();
        let pp = b.project(&p).unwrap();
        for (a, c) in p.values().iter().zip(pp.values()) {
            for k in 0..3 {
                assert!((a[k] - c[k]).abs() < 1e-12);
            }
        }
        assert!(p.l2_norm() <= f.l2_norm());
    }

    #[test]
    fn neumann_residual_of_cosine_and_sine() {
        let g = TensorGrid::new(&[1.0], &[64]).unwrap();
        let f = VectorField::from_fn(&g, |x| [(PI * x[0]).cos(), 0.0, 0.0]);
        assert!(neumann_residual(&f).unwrap() <= 1e-8);
        let f2 = VectorField::from_fn(&g, |x| {
            [(PI * x[0]).cos() + 0.1 * (PI * x[0]).sin(), 0.0, 0.0]
        });
        assert!((neumann_residual(&f2).unwrap() - 0.1 * PI).abs() < 1e-3);
        let c = VectorField::constant(&g, [1.0, -2.0, 3.0]);
        assert!(neumann_residual(&c).unwrap() < 1e-12);
        let small = TensorGrid::new(&[1.0], &[5]).unwrap();
        assert!(neumann_residual(&VectorField::zeros(&small)).is_err());
    }

    #[test]
    fn fornberg_weights_reproduce_polynomials() {
        let nodes = [0.5, 1.5, 2.5, 3.5, 4.5];
        let w = fd_weights(0.0, &nodes, 1);
        for p in 0..5 {
            let d: f64 = nodes.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let expect = if p == 1 { 1.0 } else { 0.0 };
            assert!((d - expect).abs() < 1e-12, "p={p}: {d}");
        }
    }

    proptest! {
        #[test]
        fn roundtrip_in_span(coeffs in proptest::collection::vec(-1.0f64..1.0, 3 * 12)) {
            let g = TensorGrid::new(&[1.0, 0.7], &[8, 6]).unwrap();
            let b = build_basis(&g, &[4, 3]).unwrap();
            let c: Vec<Vec3> = coeffs.chunks(3).map(|w| [w[0], w[1], w[2]]).collect();
            let back = b.to_coeffs(&b.to_grid(&c)).unwrap();
            for (x, y) in c.iter().zip(&back) {
                for k in 0..3 {
                    prop_assert!((x[k] - y[k]).abs() < 1e-12);
                }
            }
            // Parseval
            let f = b.to_grid(&c);
            let lhs = f.l2_norm().powi(2);
            let rhs = coeff_norm(&c).powi(2);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-300));
        }
    }
}
