//! Second-order finite-difference discretization of the same system on the
//! cell-centred nodes, used as an independent cross-check.
//!
//! Gradients live on cell faces; boundary faces carry zero flux, which is
//! the ghost-cell reflection `f₋₁ = f₀`, `f_N = f_{N−1}`. Pointwise physics
//! (`𝔍`, `A`, `Φ̃`, demag) is shared with the spectral solver, so only the
//! differential operators differ.

use crate::error::{Error, Result};
use crate::physics::{self, DemagOperator};
use crate::types::{ModelParams, TensorGrid, VectorField};
use crate::vec3::{self, Vec3};

/// Per-axis face values: the extent along `axis` is `points + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField {
    axis: usize,
    shape: [usize; 3],
    values: Vec<Vec3>,
}

impl FaceField {
    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn values(&self) -> &[Vec3] {
        &self.values
    }

    fn flat(&self, i: [usize; 3]) -> usize {
        i[0] + self.shape[0] * (i[1] + self.shape[1] * i[2])
    }

    /// Face-weighted inner product `Σ F·G · cell volume`.
    pub fn inner(&self, other: &FaceField, grid: &TensorGrid) -> f64 {
        grid.cell_volume()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| vec3::dot(*a, *b))
                .sum::<f64>()
    }
}

fn shape3(grid: &TensorGrid) -> [usize; 3] {
    let mut s = [1; 3];
    s[..grid.dim()].copy_from_slice(grid.points());
    s
}

fn check_points(grid: &TensorGrid) -> Result<()> {
    match grid.points().iter().find(|&&n| n < 4) {
        Some(n) => Err(Error::Grid(format!(
            "finite differences need at least 4 points per axis, got {n}"
        ))),
        None => Ok(()),
    }
}

fn node_flat(shape: [usize; 3], i: [usize; 3]) -> usize {
    i[0] + shape[0] * (i[1] + shape[1] * i[2])
}

fn indices(shape: [usize; 3]) -> impl Iterator<Item = [usize; 3]> {
    (0..shape[2])
        .flat_map(move |k| (0..shape[1]).flat_map(move |j| (0..shape[0]).map(move |i| [i, j, k])))
}

/// Face differences `(f_j − f_{j−1})/h`, zero on boundary faces.
fn face_gradient(grid: &TensorGrid, values: &[Vec3], axis: usize) -> FaceField {
    let nodes = shape3(grid);
    let mut shape = nodes;
    shape[axis] += 1;
    let h = grid.spacing(axis);
    let n = nodes[axis];
    let values = indices(shape)
        .map(|f| {
            let j = f[axis];
            if j == 0 || j == n {
                return [0.0; 3];
            }
            let mut lo = f;
            lo[axis] = j - 1;
            let d = vec3::sub(values[node_flat(nodes, f)], values[node_flat(nodes, lo)]);
            vec3::scale(1.0 / h, d)
        })
        .collect();
    FaceField {
        axis,
        shape,
        values,
    }
}

pub fn fd_gradient(field: &VectorField) -> Result<Vec<FaceField>> {
    let grid = field.grid();
    check_points(grid)?;
    Ok((0..grid.dim())
        .map(|a| face_gradient(grid, field.values(), a))
        .collect())
}

/// `Σ_a (F_{j+1} − F_j)/h_a` at every node.
pub fn fd_divergence(grid: &TensorGrid, faces: &[FaceField]) -> Result<VectorField> {
    check_points(grid)?;
    let nodes = shape3(grid);
    let mut out = vec![[0.0; 3]; grid.len()];
    for face in faces {
        let a = face.axis;
        let mut want = nodes;
        want[a] += 1;
        if face.shape != want {
            return Err(Error::GridMismatch(format!(
                "face field on axis {a} has the wrong shape"
            )));
        }
        let h = grid.spacing(a);
        for (i, o) in indices(nodes).zip(out.iter_mut()) {
            let mut hi = i;
            hi[a] += 1;
            let d = vec3::sub(face.values[face.flat(hi)], face.values[face.flat(i)]);
            *o = vec3::add(*o, vec3::scale(1.0 / h, d));
        }
    }
    Ok(VectorField::from_raw(grid, out))
}

/// 3-point Laplacian with ghost reflection.
pub fn fd_laplacian(field: &VectorField) -> Result<VectorField> {
    let grid = field.grid();
    check_points(grid)?;
    let nodes = shape3(grid);
    let v = field.values();
    let out = indices(nodes)
        .map(|i| {
            let c = v[node_flat(nodes, i)];
            let mut acc = [0.0; 3];
            for a in 0..grid.dim() {
                let h2 = grid.spacing(a).powi(2);
                let mut lo = i;
                let mut hi = i;
                lo[a] = i[a].saturating_sub(1);
                hi[a] = (i[a] + 1).min(nodes[a] - 1);
                let s = vec3::add(v[node_flat(nodes, lo)], v[node_flat(nodes, hi)]);
                acc = vec3::add(
                    acc,
                    vec3::scale(1.0 / h2, vec3::sub(s, vec3::scale(2.0, c))),
                );
            }
            acc
        })
        .collect();
    Ok(VectorField::from_raw(grid, out))
}

/// Node average of the two adjacent face values along the face axis.
fn face_to_node(grid: &TensorGrid, face: &FaceField, f: impl Fn(Vec3) -> Vec3) -> Vec<Vec3> {
    let nodes = shape3(grid);
    let a = face.axis;
    indices(nodes)
        .map(|i| {
            let mut hi = i;
            hi[a] += 1;
            vec3::scale(
                0.5,
                vec3::add(f(face.values[face.flat(i)]), f(face.values[face.flat(hi)])),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdState {
    pub u: VectorField,
    pub s: VectorField,
    pub time: f64,
}

impl FdState {
    pub fn new(u: VectorField, s: VectorField) -> Result<Self> {
        if u.grid() != s.grid() {
            return Err(Error::GridMismatch(
                "u and s live on different grids".into(),
            ));
        }
        Ok(Self { u, s, time: 0.0 })
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.s.is_finite()
    }

    fn axpy(&self, k: f64, d: &(Vec<Vec3>, Vec<Vec3>)) -> FdState {
        let step = |f: &VectorField, g: &[Vec3]| {
            let v = f
                .values()
                .iter()
                .zip(g)
                .map(|(a, b)| vec3::add(*a, vec3::scale(k, *b)))
                .collect();
            VectorField::from_raw(f.grid(), v)
        };
        FdState {
            u: step(&self.u, &d.0),
            s: step(&self.s, &d.1),
            time: self.time,
        }
    }
}

/// `dt ≤ safety·h_min²/(2d·max(α, 1, D₀max))`; the 1 covers the explicit
/// precession term `u×Δu`.
pub fn fd_stability_bound(params: &ModelParams) -> f64 {
    let grid = params.grid();
    let hmin = (0..grid.dim())
        .map(|a| grid.spacing(a))
        .fold(f64::INFINITY, f64::min);
    let c = params.alpha.max(1.0).max(params.d0.max());
    crate::solver::STABILITY_SAFETY * hmin * hmin / (2.0 * grid.dim() as f64 * c)
}

/// Right-hand side of both equations at `state`.
pub fn fd_rhs(
    params: &ModelParams,
    demag: Option<&DemagOperator>,
    state: &FdState,
) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
    let grid = params.grid();
    let (u, s) = (state.u.values(), state.s.values());
    let lap = fd_laplacian(&state.u)?;
    let gu = fd_gradient(&state.u)?;
    let gs = fd_gradient(&state.s)?;
    let hd = physics::demag_values(u, params, demag)?;
    let gphi = physics::anisotropy_gradients(u, params);
    let je = params.je.value_at(state.time);
    let d0 = params.d0.values();

    let mut grad_sq = vec![0.0; grid.len()];
    let mut transport = vec![[0.0; 3]; grid.len()];
    for g in &gu {
        let sq = face_to_node(grid, g, |v| [vec3::norm_sq(v), 0.0, 0.0]);
        for (acc, v) in grad_sq.iter_mut().zip(&sq) {
            *acc += v[0];
        }
        if je[g.axis] != 0.0 {
            let d = face_to_node(grid, g, |v| v);
            for (t, v) in transport.iter_mut().zip(&d) {
                *t = vec3::add(*t, vec3::scale(je[g.axis], *v));
            }
        }
    }

    let du: Vec<Vec3> = (0..grid.len())
        .map(|n| {
            let hd = hd.as_ref().map_or([0.0; 3], |h| h[n]);
            let ht_s = vec3::add(vec3::sub(hd, gphi[n]), s[n]);
            let h_s = vec3::add(lap.values()[n], ht_s);
            let damp = vec3::sub(
                vec3::add(lap.values()[n], vec3::scale(grad_sq[n], u[n])),
                vec3::cross(u[n], vec3::cross(u[n], ht_s)),
            );
            vec3::sub(vec3::scale(params.alpha, damp), vec3::cross(u[n], h_s))
        })
        .collect();

    let a_nodes: Vec<_> = (0..grid.len())
        .map(|n| physics::spin_matrix(physics::regularize(u[n], params.delta), params.theta, d0[n]))
        .collect();
    let nodes = shape3(grid);
    let fluxes: Vec<FaceField> = gs
        .iter()
        .map(|g| {
            let a = g.axis;
            let values = indices(g.shape)
                .zip(&g.values)
                .map(|(f, gv)| {
                    if f[a] == 0 || f[a] == nodes[a] {
                        return [0.0; 3];
                    }
                    let mut lo = f;
                    lo[a] -= 1;
                    let (al, ah) = (
                        &a_nodes[node_flat(nodes, lo)],
                        &a_nodes[node_flat(nodes, f)],
                    );
                    vec3::scale(
                        0.5,
                        vec3::add(vec3::mat_vec(al, *gv), vec3::mat_vec(ah, *gv)),
                    )
                })
                .collect();
            FaceField {
                axis: a,
                shape: g.shape,
                values,
            }
        })
        .collect();
    let div = fd_divergence(grid, &fluxes)?;
    let ds = (0..grid.len())
        .map(|n| {
            let reaction = vec3::scale(d0[n], vec3::add(s[n], vec3::cross(s[n], u[n])));
            vec3::scale(
                -1.0,
                vec3::add(vec3::add(div.values()[n], transport[n]), reaction),
            )
        })
        .collect();
    Ok((du, ds))
}

/// Classical explicit RK4; returns the states every `stride` steps plus the
/// terminal state.
pub fn fd_integrate(
    params: &ModelParams,
    demag: Option<&DemagOperator>,
    initial: &FdState,
    dt: f64,
    t_end: f64,
    stride: usize,
    check_stability: bool,
) -> Result<Vec<FdState>> {
    if initial.u.grid() != params.grid() {
        return Err(Error::GridMismatch(
            "initial data and parameters live on different grids".into(),
        ));
    }
    if !(dt > 0.0 && t_end >= dt) {
        return Err(Error::SolverConfig(format!(
            "need 0 < dt ≤ t_end, got dt = {dt}, t_end = {t_end}"
        )));
    }
    if check_stability {
        let bound = fd_stability_bound(params);
        if dt > bound {
            return Err(Error::StepTooLarge { dt, bound });
        }
    }
    let stride = stride.max(1);
    let steps = (t_end / dt).round().max(1.0) as usize;
    if ((steps as f64) * dt - t_end).abs() > 1e-9 * t_end {
        return Err(Error::SolverConfig(format!(
            "t_end = {t_end} is not a multiple of dt = {dt}"
        )));
    }
    let t0 = initial.time;
    let mut y = initial.clone();
    let mut out = vec![y.clone()];
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let at = |mut s: FdState, t: f64| {
            s.time = t;
            s
        };
        y.time = t;
        let k1 = fd_rhs(params, demag, &y)?;
        let k2 = fd_rhs(params, demag, &at(y.axpy(0.5 * dt, &k1), t + 0.5 * dt))?;
        let k3 = fd_rhs(params, demag, &at(y.axpy(0.5 * dt, &k2), t + 0.5 * dt))?;
        let k4 = fd_rhs(params, demag, &at(y.axpy(dt, &k3), t + dt))?;
        let combine = |a: &[Vec3], b: &[Vec3], c: &[Vec3], d: &[Vec3]| -> Vec<Vec3> {
            (0..a.len())
                .map(|n| {
                    vec3::add(
                        vec3::add(a[n], d[n]),
                        vec3::scale(2.0, vec3::add(b[n], c[n])),
                    )
                })
                .collect()
        };
        let incr = (
            combine(&k1.0, &k2.0, &k3.0, &k4.0),
            combine(&k1.1, &k2.1, &k3.1, &k4.1),
        );
        y = y.axpy(dt / 6.0, &incr);
        y.time = t0 + (k + 1) as f64 * dt;
        if !y.is_finite() {
            return Err(Error::BlowUp { time: y.time });
        }
        if (k + 1) % stride == 0 || k + 1 == steps {
            out.push(y.clone());
        }
    }
    Ok(out)
}
