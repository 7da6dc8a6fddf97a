use super::Model;
use crate::error::{Error, Result};
use crate::spectral::{Basis, SpectralState};
use crate::types::ModelParams;
use crate::vec3::{self, Vec3};

/// Safety factor applied to the RK4 stability radius.
pub const STABILITY_SAFETY: f64 = 0.5;
/// Extent of the classical RK4 stability region along the real and imaginary axes.
const RK4_RADIUS: f64 = 2.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Classical RK4 on the remainder after an exact diagonal integrating factor.
    #[default]
    Rk4IntegratingFactor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub dealias_factor: usize,
    pub diagnostics_stride: usize,
    /// Reject `dt` above [`stability_bound`]. Disabled by `--unsafe-dt`.
    pub check_stability: bool,
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            scheme: Scheme::default(),
            dealias_factor: 2,
            diagnostics_stride: 1,
            check_stability: true,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.diagnostics_stride = stride;
        self
    }

    pub fn unchecked(mut self) -> Self {
        self.check_stability = false;
        self
    }

    /// Number of steps; the last one is shortened if `t_end` is not a multiple of `dt`.
    pub fn steps(&self) -> usize {
        let n = self.t_end / self.dt;
        let rounded = n.round();
        if (n - rounded).abs() <= 1e-9 * n.max(1.0) {
            rounded.max(1.0) as usize
        } else {
            n.ceil() as usize
        }
    }

    /// Start time of step `k` relative to the initial time.
    fn step_start(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    fn step_length(&self, k: usize) -> f64 {
        let n = self.steps();
        if k + 1 == n {
            self.t_end - self.step_start(k)
        } else {
            self.dt
        }
    }

    pub fn validate(&self, model: &Model) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::SolverConfig(format!(
                "dt = {} must be positive",
                self.dt
            )));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return Err(Error::SolverConfig(format!(
                "t_end = {} must be at least dt = {}",
                self.t_end, self.dt
            )));
        }
        if self.diagnostics_stride == 0 {
            return Err(Error::SolverConfig(
                "diagnostics_stride must be at least 1".into(),
            ));
        }
        if self.dealias_factor < 2 {
            return Err(Error::SolverConfig(
                "dealias_factor must be at least 2".into(),
            ));
        }
        let basis = model.basis();
        let points = basis.grid().points();
        for (axis, (&m, &p)) in basis.modes().iter().zip(points).enumerate() {
            if p < self.dealias_factor * m {
                return Err(Error::SolverConfig(format!(
                    "axis {axis}: {p} grid points cannot dealias {m} modes (need {})",
                    self.dealias_factor * m
                )));
            }
        }
        if self.check_stability {
            let bound = stability_bound(model.params(), basis);
            if self.dt > bound {
                return Err(Error::StepTooLarge { dt: self.dt, bound });
            }
        }
        Ok(())
    }
}

/// Largest `dt` the explicit remainder tolerates: `0.5·2.8/(c·max(λ−1))`, where `c`
/// bounds the explicit second-order coefficients (`α`, the unit precession
/// `u×Δu`, and whatever part of the spin diffusion the integrating factor leaves).
pub fn stability_bound(params: &ModelParams, basis: &Basis) -> f64 {
    let spread = (basis.max_eigenvalue() - 1.0).max(f64::MIN_POSITIVE);
    let s_coeff = match params.d0.uniform_value() {
        Some(d0) => params.theta * (1.0 + params.delta) * d0,
        None => params.d0.max(),
    };
    let c = params.alpha.max(1.0).max(s_coeff);
    STABILITY_SAFETY * RK4_RADIUS / (c * spread)
}

/// States sampled every `stride` steps, starting with the initial state and
/// always ending with the terminal state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<SpectralState>,
    pub stride: usize,
    pub dt: f64,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    pub fn initial(&self) -> &SpectralState {
        &self.samples[0]
    }

    pub fn terminal(&self) -> &SpectralState {
        self.samples.last().expect("trajectory is never empty")
    }
}

/// Diagonal propagators `e^{r·h}` and `e^{r·h/2}` for both unknowns.
struct Factors {
    ru: Vec<f64>,
    rs: Vec<f64>,
    full_u: Vec<f64>,
    half_u: Vec<f64>,
    full_s: Vec<f64>,
    half_s: Vec<f64>,
}

impl Factors {
    fn new(model: &Model, h: f64) -> Self {
        let (ru, rs) = model.linear_rates();
        let exp = |r: &[f64], t: f64| r.iter().map(|x| (x * t).exp()).collect::<Vec<_>>();
        Self {
            full_u: exp(&ru, h),
            half_u: exp(&ru, 0.5 * h),
            full_s: exp(&rs, h),
            half_s: exp(&rs, 0.5 * h),
            ru,
            rs,
        }
    }

    fn full(&self, y: &SpectralState) -> SpectralState {
        apply(y, &self.full_u, &self.full_s)
    }

    fn half(&self, y: &SpectralState) -> SpectralState {
        apply(y, &self.half_u, &self.half_s)
    }

    /// `F(y) − L·y`.
    fn remainder(&self, f: SpectralState, y: &SpectralState) -> SpectralState {
        let sub = |a: Vec<Vec3>, b: &[Vec3], r: &[f64]| -> Vec<Vec3> {
            a.into_iter()
                .zip(b.iter().zip(r))
                .map(|(fa, (yb, rk))| vec3::sub(fa, vec3::scale(*rk, *yb)))
                .collect()
        };
        SpectralState {
            u: sub(f.u, &y.u, &self.ru),
            s: sub(f.s, &y.s, &self.rs),
            time: f.time,
        }
    }
}

fn apply(y: &SpectralState, fu: &[f64], fs: &[f64]) -> SpectralState {
    let scale = |c: &[Vec3], f: &[f64]| -> Vec<Vec3> {
        c.iter().zip(f).map(|(v, k)| vec3::scale(*k, *v)).collect()
    };
    SpectralState {
        u: scale(&y.u, fu),
        s: scale(&y.s, fs),
        time: y.time,
    }
}

fn at(mut y: SpectralState, t: f64) -> SpectralState {
    y.time = t;
    y
}

/// The four Lawson stage states of one step; `eval` maps (stage state, stage
/// index) to the remainder `N`. Returns the stage states and the updated state.
fn lawson_step(
    y: &SpectralState,
    t: f64,
    h: f64,
    fac: &Factors,
    mut eval: impl FnMut(usize, &SpectralState) -> Result<SpectralState>,
) -> Result<SpectralState> {
    let th = t + 0.5 * h;
    let y1 = at(y.clone(), t);
    let k1 = eval(0, &y1)?;
    let y2 = at(fac.half(&y1.axpy(0.5 * h, &k1)), th);
    let k2 = eval(1, &y2)?;
    let y3 = at(fac.half(&y1).axpy(0.5 * h, &k2), th);
    let k3 = eval(2, &y3)?;
    let y4 = at(fac.full(&y1).axpy(h, &fac.half(&k3)), t + h);
    let k4 = eval(3, &y4)?;
    let incr = fac
        .full(&k1)
        .axpy(2.0, &fac.half(&k2.axpy(1.0, &k3)))
        .axpy(1.0, &k4);
    Ok(at(fac.full(&y1).axpy(h / 6.0, &incr), t + h))
}

fn base_step(
    model: &Model,
    y: &SpectralState,
    t: f64,
    h: f64,
    fac: &Factors,
) -> Result<SpectralState> {
    lawson_step(y, t, h, fac, |_, stage| {
        Ok(fac.remainder(model.galerkin_rhs(stage)?, stage))
    })
}

/// Integrates and calls `observe(step, state)` for the initial state (step 0)
/// and after every step. Returns the terminal state.
pub fn integrate_observed(
    model: &Model,
    initial: &SpectralState,
    config: &SolverConfig,
    mut observe: impl FnMut(usize, &SpectralState) -> Result<()>,
) -> Result<SpectralState> {
    config.validate(model)?;
    check_shape(model, initial)?;
    if !initial.is_finite() {
        return Err(Error::SolverConfig("initial data is not finite".into()));
    }
    let t0 = initial.time;
    let steps = config.steps();
    let regular = Factors::new(model, config.dt);
    let last_len = config.step_length(steps - 1);
    let last = (last_len != config.dt).then(|| Factors::new(model, last_len));

    let mut y = initial.clone();
    observe(0, &y)?;
    for k in 0..steps {
        let h = config.step_length(k);
        let fac = match (&last, k + 1 == steps) {
            (Some(f), true) => f,
            _ => &regular,
        };
        let t = t0 + config.step_start(k);
        let next = base_step(model, &y, t, h, fac);
        y = match next {
            Ok(next) if next.is_finite() => next,
            Ok(_) | Err(Error::BlowUp { .. }) => return Err(Error::BlowUp { time: t + h }),
            Err(e) => return Err(e),
        };
        y.time = if k + 1 == steps {
            t0 + config.t_end
        } else {
            t0 + config.step_start(k + 1)
        };
        observe(k + 1, &y)?;
    }
    Ok(y)
}

/// Fixed-step integrating-factor RK4 from `initial` over `[t₀, t₀ + t_end]`.
pub fn integrate(
    model: &Model,
    initial: &SpectralState,
    config: &SolverConfig,
) -> Result<Trajectory> {
    let stride = config.diagnostics_stride.max(1);
    let steps = config.steps();
    let mut samples = Vec::with_capacity(steps / stride + 2);
    integrate_observed(model, initial, config, |k, state| {
        if k % stride == 0 || k == steps {
            samples.push(state.clone());
        }
        Ok(())
    })?;
    Ok(Trajectory {
        samples,
        stride,
        dt: config.dt,
    })
}

/// Exact discrete tangent of [`integrate`] along `base`, started from
/// `tangent0`. The base must be sampled every step.
pub fn integrate_tangent(
    model: &Model,
    base: &Trajectory,
    tangent0: &SpectralState,
    config: &SolverConfig,
) -> Result<Trajectory> {
    if base.stride != 1 || config.diagnostics_stride != 1 {
        return Err(Error::SolverConfig(format!(
            "tangent integration needs diagnostics_stride = 1 (base has {}, config has {})",
            base.stride, config.diagnostics_stride
        )));
    }
    if base.dt != config.dt {
        return Err(Error::SolverConfig(format!(
            "base trajectory step {} differs from dt = {}",
            base.dt, config.dt
        )));
    }
    let steps = config.steps();
    if base.samples.len() != steps + 1 {
        return Err(Error::SolverConfig(format!(
            "base trajectory has {} samples, expected {}",
            base.samples.len(),
            steps + 1
        )));
    }
    config.validate(model)?;
    check_shape(model, tangent0)?;
    let t0 = base.initial().time;
    let switches = model.params().je.switches_within(t0, t0 + config.t_end);
    if !switches.is_empty() {
        return Err(Error::SolverConfig(format!(
            "current switches at t = {switches:?} inside the tangent run"
        )));
    }

    let regular = Factors::new(model, config.dt);
    let last_len = config.step_length(steps - 1);
    let last = (last_len != config.dt).then(|| Factors::new(model, last_len));

    let mut v = at(tangent0.clone(), t0);
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(v.clone());
    for k in 0..steps {
        let h = config.step_length(k);
        let fac = match (&last, k + 1 == steps) {
            (Some(f), true) => f,
            _ => &regular,
        };
        let t = t0 + config.step_start(k);
        // Base stages are replayed in the same order so that each tangent stage
        // is linearized about exactly the state the base step used.
        let mut base_stages: Vec<SpectralState> = Vec::with_capacity(4);
        lawson_step(&base.samples[k], t, h, fac, |_, stage| {
            base_stages.push(stage.clone());
            Ok(fac.remainder(model.galerkin_rhs(stage)?, stage))
        })?;
        let mut idx = 0;
        let next = lawson_step(&v, t, h, fac, |_, tstage| {
            let b = &base_stages[idx];
            idx += 1;
            Ok(fac.remainder(model.tangent_rhs(b, tstage)?, tstage))
        })?;
        if !next.is_finite() {
            return Err(Error::BlowUp { time: t + h });
        }
        v = at(next, base.samples[k + 1].time);
        samples.push(v.clone());
    }
    Ok(Trajectory {
        samples,
        stride: 1,
        dt: config.dt,
    })
}

fn check_shape(model: &Model, state: &SpectralState) -> Result<()> {
    let n = model.basis().len();
    if state.u.len() != n || state.s.len() != n {
        return Err(Error::GridMismatch(format!(
            "state has {}/{} coefficients, basis has {n}",
            state.u.len(),
            state.s.len()
        )));
    }
    Ok(())
}
