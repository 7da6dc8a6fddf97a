//! Study drivers: tangent consistency, perturbation growth, convergence ladders.
//! Independent runs fan out over rayon; results are gathered in input order.

use crate::error::{Error, Result};
use crate::par;
use crate::solver::{integrate, integrate_tangent, Model, SolverConfig};
use crate::spectral::{Basis, SpectralState};
use crate::vec3::Vec3;

/// Errors against a control parameter and the least-squares slope of
/// `log(error)` against `log(parameter)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub rows: Vec<(f64, f64)>,
    pub slope: f64,
}

fn fit_slope(rows: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(x, e)| *x > 0.0 && *e > 0.0)
        .map(|(x, e)| (x.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn relative(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// For each `ε`: relative distance between `(Φ(y₀+εv) − Φ(y₀))/ε` and the
/// tangent flow applied to `v`, at `t_end`. Expected slope 1.
pub fn tangent_consistency(
    model: &Model,
    initial: &SpectralState,
    perturbation: &SpectralState,
    config: &SolverConfig,
    epsilons: &[f64],
) -> Result<OrderFit> {
    if epsilons.is_empty() || epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Params("epsilons must be positive".into()));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Params("epsilons must be decreasing".into()));
    }
    let config = config.clone().with_stride(1);
    let base = integrate(model, initial, &config)?;
    let tangent = integrate_tangent(model, &base, perturbation, &config)?;
    let t = tangent.terminal();
    let runs = par::map_range_min(epsilons.len(), 1, |i| {
        let eps = epsilons[i];
        let cfg = config.clone().with_stride(usize::MAX);
        let pert = integrate(model, &initial.axpy(eps, perturbation), &cfg)?;
        let quotient = pert
            .terminal()
            .axpy(-1.0, base.terminal())
            .scaled(1.0 / eps);
        Ok((eps, relative(quotient.distance(t), t.norm())))
    });
    let rows = runs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(OrderFit {
        slope: fit_slope(&rows),
        rows,
    })
}

/// For each `dt`: the tangent flow started from `F(y₀)` against central
/// differences of the base trajectory, worst relative error over interior
/// samples. Expected slope 2.
pub fn time_derivative_consistency(
    model: &Model,
    initial: &SpectralState,
    t_end: f64,
    dts: &[f64],
) -> Result<OrderFit> {
    let f0 = model.galerkin_rhs(initial)?;
    let runs = par::map_range_min(dts.len(), 1, |i| {
        let dt = dts[i];
        let cfg = SolverConfig::new(dt, t_end);
        let base = integrate(model, initial, &cfg)?;
        let tan = integrate_tangent(model, &base, &f0, &cfg)?;
        let s = &base.samples;
        let worst = (1..s.len() - 1)
            .map(|k| {
                let cd = s[k + 1].axpy(-1.0, &s[k - 1]).scaled(0.5 / dt);
                relative(cd.distance(&tan.samples[k]), tan.samples[k].norm())
            })
            .fold(0.0, f64::max);
        Ok((dt, worst))
    });
    let rows = runs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(OrderFit {
        slope: fit_slope(&rows),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub times: Vec<f64>,
    /// `‖y_ε(t) − y(t)‖ / ‖y(t)‖`.
    pub separation: Vec<f64>,
    /// Smallest `κ` with `separation(t)/separation(0) ≤ e^{κt}` on the samples.
    pub kappa: f64,
    /// Largest ratio between consecutive separations.
    pub max_jump: f64,
    /// True when both runs produced bit-identical samples.
    pub identical: bool,
}

impl StabilityReport {
    pub fn terminal(&self) -> f64 {
        *self.separation.last().expect("nonempty")
    }

    pub fn bound_holds(&self) -> bool {
        let s0 = self.separation[0];
        s0 == 0.0
            || self
                .times
                .iter()
                .zip(&self.separation)
                .all(|(t, s)| *s <= s0 * (self.kappa * t).exp() * (1.0 + 1e-12))
    }
}

/// Runs `initial` and `initial + size·d/‖d‖` and tracks their separation.
pub fn stability_study(
    model: &Model,
    initial: &SpectralState,
    config: &SolverConfig,
    direction: &SpectralState,
    size: f64,
) -> Result<StabilityReport> {
    if !(size >= 0.0) {
        return Err(Error::Params(format!(
            "perturbation size {size} must be nonnegative"
        )));
    }
    let norm = direction.norm();
    let shift = if norm > 0.0 { size / norm } else { 0.0 };
    let perturbed = initial.axpy(shift, direction);
    let starts = [initial, &perturbed];
    let mut runs = par::map_range_min(2, 1, |i| integrate(model, starts[i], config)).into_iter();
    let base = runs.next().expect("two runs")?;
    let pert = runs.next().expect("two runs")?;
    let times = base.times();
    let separation: Vec<f64> = base
        .samples
        .iter()
        .zip(&pert.samples)
        .map(|(a, b)| relative(a.distance(b), a.norm()))
        .collect();
    let s0 = separation[0];
    let kappa = if s0 > 0.0 {
        times
            .iter()
            .zip(&separation)
            .skip(1)
            .map(|(t, s)| (s / s0).ln() / t)
            .fold(f64::NEG_INFINITY, f64::max)
    } else {
        0.0
    };
    let max_jump = separation
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| (w[1] / w[0]).max(w[0] / w[1]))
        .fold(1.0, f64::max);
    Ok(StabilityReport {
        times,
        kappa,
        max_jump,
        identical: base == pert,
        separation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    /// `dt`, or the number of modes along the first axis.
    pub level: f64,
    pub error: f64,
    /// Error of the previous (coarser) level divided by this one.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub reference: f64,
}

impl ConvergenceTable {
    fn from_errors(levels: &[f64], errors: Vec<f64>, reference: f64) -> Self {
        let rows = levels
            .iter()
            .zip(&errors)
            .enumerate()
            .map(|(i, (&level, &error))| ConvergenceRow {
                level,
                error,
                ratio: if i == 0 {
                    f64::NAN
                } else {
                    errors[i - 1] / error
                },
            })
            .collect();
        Self { rows, reference }
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }
}

/// Terminal-state errors of each `dt` against the last (finest) entry of `dts`.
pub fn convergence_in_time(
    model: &Model,
    initial: &SpectralState,
    t_end: f64,
    dts: &[f64],
    check_stability: bool,
) -> Result<ConvergenceTable> {
    if dts.len() < 3 {
        return Err(Error::Params("a dt ladder needs at least 3 levels".into()));
    }
    let runs = par::map_range_min(dts.len(), 1, |i| {
        let mut cfg = SolverConfig::new(dts[i], t_end).with_stride(usize::MAX);
        cfg.check_stability = check_stability;
        integrate(model, initial, &cfg).map(|t| t.terminal().clone())
    });
    let terminals = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let reference = terminals.last().expect("nonempty");
    let n = dts.len() - 1;
    let errors = terminals[..n]
        .iter()
        .map(|t| t.distance(reference))
        .collect();
    Ok(ConvergenceTable::from_errors(&dts[..n], errors, dts[n]))
}

/// Terminal-state errors of each mode level against the last entry of
/// `ladder`. `build` returns the model and its projected initial data.
pub fn convergence_in_modes<B>(
    build: B,
    ladder: &[Vec<usize>],
    config: &SolverConfig,
) -> Result<ConvergenceTable>
where
    B: Fn(&[usize]) -> Result<(Model, SpectralState)> + Sync + Send,
{
    if ladder.len() < 3 {
        return Err(Error::Params(
            "a mode ladder needs at least 3 levels".into(),
        ));
    }
    let cfg = config.clone().with_stride(usize::MAX);
    let runs = par::map_range_min(ladder.len(), 1, |i| {
        let (model, y0) = build(&ladder[i])?;
        let y = integrate(&model, &y0, &cfg)?.terminal().clone();
        Ok((model.basis().clone(), y))
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let (fine_basis, fine) = runs.last().expect("nonempty");
    let n = ladder.len() - 1;
    let errors = runs[..n]
        .iter()
        .map(|(basis, y)| {
            let du = embed_difference(basis, &y.u, fine_basis, &fine.u);
            let ds = embed_difference(basis, &y.s, fine_basis, &fine.s);
            (du + ds).sqrt()
        })
        .collect();
    let levels: Vec<f64> = ladder[..n].iter().map(|m| m[0] as f64).collect();
    Ok(ConvergenceTable::from_errors(
        &levels,
        errors,
        ladder[n][0] as f64,
    ))
}

/// `‖coarse − fine‖²` after placing coarse coefficients on the fine mode set.
/// The orthonormal basis functions do not depend on the grid, so matching
/// wavenumbers carry the same function.
fn embed_difference(coarse: &Basis, c: &[Vec3], fine: &Basis, f: &[Vec3]) -> f64 {
    let dim = fine.grid().dim();
    let mut embedded = vec![[0.0; 3]; f.len()];
    for (i, v) in c.iter().enumerate() {
        let k = coarse.mode_index(i);
        if let Some(j) = fine.mode_position(&k[..dim]) {
            embedded[j] = *v;
        }
    }
    embedded
        .iter()
        .zip(f)
        .map(|(a, b)| (0..3).map(|q| (a[q] - b[q]).powi(2)).sum::<f64>())
        .sum()
}
