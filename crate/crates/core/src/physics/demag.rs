//! Demagnetizing field `h_d = −∇w` as a discrete convolution with the
//! cell-averaged demagnetizing tensor.
//!
//! Each kernel entry is the field of a uniformly magnetized source cell,
//! computed in closed form from its surface charges, averaged over the target
//! cell with tensor Gauss–Legendre quadrature. The convolution runs on a
//! zero-padded `2N` grid so the result is the open-boundary (non-periodic)
//! field restricted to the box.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::par;
use crate::types::{TensorGrid, VectorField};
use crate::vec3::Vec3;

const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
];
const GAUSS2: [(f64, f64); 2] = [
    (-0.577_350_269_189_625_8, 1.0),
    (0.577_350_269_189_625_8, 1.0),
];

/// Offsets (in cells, max-norm) that get the finer quadrature.
const NEAR_FIELD: usize = 2;

/// Tensor entries in the order xx, yy, zz, xy, xz, yz.
const PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

/// `ln(Z + R)` without cancellation for negative `Z`.
fn log_z_plus_r(rho_sq: f64, z: f64, r: f64) -> f64 {
    if z >= 0.0 {
        (z + r).ln()
    } else {
        (rho_sq / (r - z)).ln()
    }
}

/// Demagnetizing tensor `N(x)` of a box centred at the origin with half-widths
/// `half`, such that `H(x) = −N(x) M`. `x` must not lie on the box surface.
pub fn box_point_tensor(x: Vec3, half: Vec3) -> [[f64; 3]; 3] {
    let mut n = [[0.0; 3]; 3];
    for p in 0..3 {
        let q = (p + 1) % 3;
        let r = (p + 2) % 3;
        let mut h = [0.0; 3];
        for (face, sigma) in [(half[p], 1.0), (-half[p], -1.0)] {
            let xx = x[p] - face;
            for (yq, sy) in [(half[q], 1.0), (-half[q], -1.0)] {
                for (zr, sz) in [(half[r], 1.0), (-half[r], -1.0)] {
                    let y = yq - x[q];
                    let z = zr - x[r];
                    let rr = (xx * xx + y * y + z * z).sqrt();
                    let w = sigma * sy * sz;
                    h[p] += w * (y * z / (xx * rr)).atan();
                    h[q] += w * log_z_plus_r(xx * xx + y * y, z, rr);
                    h[r] += w * log_z_plus_r(xx * xx + z * z, y, rr);
                }
            }
        }
        for a in 0..3 {
            n[a][p] = -h[a] / (4.0 * PI);
        }
    }
    n
}

/// Average of the point tensor over the cell centred at `center`.
fn cell_average(center: Vec3, cell: Vec3, rule: &[(f64, f64)]) -> [f64; 6] {
    let half = [cell[0] / 2.0, cell[1] / 2.0, cell[2] / 2.0];
    let mut acc = [0.0; 6];
    let norm: f64 = rule.iter().map(|g| g.1).sum::<f64>().powi(3);
    for &(xi, wi) in rule {
        for &(yj, wj) in rule {
            for &(zk, wk) in rule {
                let x = [
                    center[0] + xi * half[0],
                    center[1] + yj * half[1],
                    center[2] + zk * half[2],
                ];
                let t = box_point_tensor(x, half);
                let w = wi * wj * wk / norm;
                for (e, &(a, b)) in PAIRS.iter().enumerate() {
                    acc[e] += w * 0.5 * (t[a][b] + t[b][a]);
                }
            }
        }
    }
    acc
}

/// Precomputed demag convolution on a 3D grid.
#[derive(Clone)]
pub struct DemagOperator {
    grid: TensorGrid,
    padded: [usize; 3],
    kernel_hat: Vec<[Complex64; 6]>,
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
}

impl std::fmt::Debug for DemagOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DemagOperator")
            .field("points", &self.grid.points())
            .field("padded", &self.padded)
            .finish()
    }
}

impl DemagOperator {
    pub fn new(grid: &TensorGrid) -> Result<Self> {
        if grid.dim() != 3 {
            return Err(Error::DemagDimension(grid.dim()));
        }
        let pts = [grid.points()[0], grid.points()[1], grid.points()[2]];
        let cell = [grid.spacing(0), grid.spacing(1), grid.spacing(2)];
        let padded = [2 * pts[0], 2 * pts[1], 2 * pts[2]];

        // Nonnegative-octant offsets; the rest follows from parity.
        let octant = pts[0] * pts[1] * pts[2];
        let entries = par::map_range_min(octant, 64, |flat| {
            let i = flat % pts[0];
            let j = (flat / pts[0]) % pts[1];
            let k = flat / (pts[0] * pts[1]);
            let center = [i as f64 * cell[0], j as f64 * cell[1], k as f64 * cell[2]];
            let rule: &[(f64, f64)] = if i.max(j).max(k) <= NEAR_FIELD {
                &GAUSS4
            } else {
                &GAUSS2
            };
            cell_average(center, cell, rule)
        });

        let total = padded[0] * padded[1] * padded[2];
        let mut kernel: Vec<[Complex64; 6]> = vec![[Complex64::new(0.0, 0.0); 6]; total];
        for k in 0..pts[2] {
            for j in 0..pts[1] {
                for i in 0..pts[0] {
                    let e = entries[i + pts[0] * (j + pts[1] * k)];
                    for (si, sj, sk) in signs(i, j, k) {
                        let pi = wrap(si * i as isize, padded[0]);
                        let pj = wrap(sj * j as isize, padded[1]);
                        let pk = wrap(sk * k as isize, padded[2]);
                        let s = [si as f64, sj as f64, sk as f64];
                        let slot = &mut kernel[pi + padded[0] * (pj + padded[1] * pk)];
                        for (c, &(a, b)) in PAIRS.iter().enumerate() {
                            let parity = if a == b { 1.0 } else { s[a] * s[b] };
                            slot[c] = Complex64::new(parity * e[c], 0.0);
                        }
                    }
                }
            }
        }

        let mut planner = FftPlanner::new();
        let forward = padded.map(|n| planner.plan_fft_forward(n));
        let inverse = padded.map(|n| planner.plan_fft_inverse(n));
        let mut op = Self {
            grid: grid.clone(),
            padded,
            kernel_hat: Vec::new(),
            forward,
            inverse,
        };
        let mut comps: Vec<Vec<Complex64>> = (0..6)
            .map(|c| kernel.iter().map(|e| e[c]).collect())
            .collect();
        for comp in comps.iter_mut() {
            op.fft3(comp, true);
        }
        op.kernel_hat = (0..total)
            .map(|n| std::array::from_fn(|c| comps[c][n]))
            .collect();
        Ok(op)
    }

    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    fn fft3(&self, data: &mut [Complex64], forward: bool) {
        let dims = self.padded;
        for axis in 0..3 {
            let n = dims[axis];
            let stride: usize = dims[..axis].iter().product();
            let block = stride * n;
            let nlines = data.len() / n;
            let plan = if forward {
                &self.forward[axis]
            } else {
                &self.inverse[axis]
            };
            let start = |l: usize| (l / stride) * block + l % stride;
            let src: &[Complex64] = data;
            let lines = par::map_range_min(nlines, 16, |l| {
                let s = start(l);
                let mut buf: Vec<Complex64> = (0..n).map(|j| src[s + j * stride]).collect();
                plan.process(&mut buf);
                buf
            });
            for (l, buf) in lines.into_iter().enumerate() {
                let s = start(l);
                for (j, v) in buf.into_iter().enumerate() {
                    data[s + j * stride] = v;
                }
            }
        }
    }

    /// `h_d(u)` at the grid nodes.
    pub fn apply(&self, u: &VectorField) -> Result<VectorField> {
        if u.grid() != &self.grid {
            return Err(Error::GridMismatch(
                "field grid differs from the demag grid".into(),
            ));
        }
        Ok(VectorField::from_raw(
            &self.grid,
            self.apply_values(u.values()),
        ))
    }

    pub(crate) fn apply_values(&self, values: &[Vec3]) -> Vec<Vec3> {
        let pts = self.grid.points();
        let p = self.padded;
        let total = p[0] * p[1] * p[2];
        let mut m: Vec<Vec<Complex64>> = (0..3)
            .map(|c| {
                let mut buf = vec![Complex64::new(0.0, 0.0); total];
                for (flat, v) in values.iter().enumerate() {
                    let i = flat % pts[0];
                    let j = (flat / pts[0]) % pts[1];
                    let k = flat / (pts[0] * pts[1]);
                    buf[i + p[0] * (j + p[1] * k)].re = v[c];
                }
                buf
            })
            .collect();
        for comp in m.iter_mut() {
            self.fft3(comp, true);
        }
        let mut h: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); total]; 3];
        for n in 0..total {
            let k = &self.kernel_hat[n];
            let (mx, my, mz) = (m[0][n], m[1][n], m[2][n]);
            h[0][n] = -(k[0] * mx + k[3] * my + k[4] * mz);
            h[1][n] = -(k[3] * mx + k[1] * my + k[5] * mz);
            h[2][n] = -(k[4] * mx + k[5] * my + k[2] * mz);
        }
        for comp in h.iter_mut() {
            self.fft3(comp, false);
        }
        let scale = 1.0 / total as f64;
        (0..values.len())
            .map(|flat| {
                let i = flat % pts[0];
                let j = (flat / pts[0]) % pts[1];
                let k = flat / (pts[0] * pts[1]);
                let n = i + p[0] * (j + p[1] * k);
                [h[0][n].re * scale, h[1][n].re * scale, h[2][n].re * scale]
            })
            .collect()
    }
}

fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

/// Distinct sign patterns `(±i, ±j, ±k)` for a nonnegative offset.
fn signs(i: usize, j: usize, k: usize) -> Vec<(isize, isize, isize)> {
    let opts = |v: usize| if v == 0 { vec![1] } else { vec![1, -1] };
    let mut out = Vec::new();
    for &a in &opts(i) {
        for &b in &opts(j) {
            for &c in &opts(k) {
                out.push((a, b, c));
            }
        }
    }
    out
}
