//! Energies, norms, invariant monitors, the comparison bound and study drivers.

mod bound;
mod studies;

pub use bound::{blowup_bound, fit_constant, BoundCurve};
pub use studies::{
    convergence_in_modes, convergence_in_time, stability_study, tangent_consistency,
    time_derivative_consistency, ConvergenceRow, ConvergenceTable, OrderFit, StabilityReport,
};

use std::fmt;

use crate::error::Result;
use crate::physics::{self, anisotropy, DemagOperator};
use crate::solver::{Model, Trajectory};
use crate::spectral::{coeff_norm, Basis, SpectralState};
use crate::types::{ModelParams, VectorField};
use crate::vec3::{self, Vec3};

pub const DEFAULT_DRIFT_LIMIT: f64 = 1e-3;
/// Allowed per-sample relative growth of `‖s‖_{L²}` when `J_e ≡ 0`.
pub const S_L2_TOL: f64 = 1e-12;
/// Allowed per-sample relative growth of the energy when `s ≡ 0`, `J_e ≡ 0`.
pub const ENERGY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    pub exchange: f64,
    pub anisotropy: f64,
    pub demag: f64,
    pub total: f64,
}

/// Landau–Lifshitz energy by nodal quadrature: `½∫|∇u|² + ∫Φ̃(𝔍(u)) − ½∫h_d·u`.
pub fn ll_energy(
    u: &VectorField,
    params: &ModelParams,
    basis: &Basis,
    demag: Option<&DemagOperator>,
) -> Result<EnergyParts> {
    let grid = basis.grid();
    let dv = grid.cell_volume();
    let grads = basis.gradient(u)?;
    let exchange = 0.5
        * dv
        * grads
            .iter()
            .flat_map(|g| g.values().iter().map(|v| vec3::norm_sq(*v)))
            .sum::<f64>();
    let anisotropy = if params.anisotropy.is_none() {
        0.0
    } else {
        dv * u
            .values()
            .iter()
            .map(|&v| {
                let m = physics::regularize(v, params.delta);
                anisotropy::eval_unchecked(m, vec3::norm_sq(m), &params.anisotropy).value
            })
            .sum::<f64>()
    };
    let demag = match physics::demag_values(u.values(), params, demag)? {
        Some(hd) => {
            -0.5 * dv
                * hd.iter()
                    .zip(u.values())
                    .map(|(h, v)| vec3::dot(*h, *v))
                    .sum::<f64>()
        }
        None => 0.0,
    };
    Ok(EnergyParts {
        exchange,
        anisotropy,
        demag,
        total: exchange + anisotropy + demag,
    })
}

/// `½Σ(λ_m − 1)|c_m|²`: the exchange energy of an in-band field.
pub fn exchange_energy_spectral(coeffs: &[Vec3], basis: &Basis) -> f64 {
    0.5 * coeffs
        .iter()
        .zip(basis.eigenvalues())
        .map(|(c, l)| (l - 1.0) * vec3::norm_sq(*c))
        .sum::<f64>()
}

/// `max_x ||u(x)|² − 1|`.
pub fn sphere_drift(u: &VectorField) -> f64 {
    u.values()
        .iter()
        .map(|v| (vec3::norm_sq(*v) - 1.0).abs())
        .fold(0.0, f64::max)
}

/// `(Σ λ_m^k |c_m|²)^{1/2}`, equivalent to the `H^{2⌈k/2⌉}` norm on the retained modes.
pub fn spectral_sobolev(coeffs: &[Vec3], basis: &Basis, k: u32) -> f64 {
    coeffs
        .iter()
        .zip(basis.eigenvalues())
        .map(|(c, l)| l.powi(k as i32) * vec3::norm_sq(*c))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub exchange: f64,
    pub anisotropy: f64,
    pub demag: f64,
    pub total_energy: f64,
    pub l2_u: f64,
    pub l2_s: f64,
    pub h2spec_u: f64,
    pub h2spec_s: f64,
    pub sphere_drift: f64,
    /// Change of `‖s‖_{L²}` since the previous record (0 for the first).
    pub s_l2_delta: f64,
}

impl DiagnosticsRecord {
    pub const COLUMNS: [&'static str; 11] = [
        "t",
        "exchange",
        "aniso",
        "demag",
        "total_energy",
        "l2_u",
        "l2_s",
        "h2spec_u",
        "h2spec_s",
        "sphere_drift",
        "s_l2_delta",
    ];

    pub fn values(&self) -> [f64; 11] {
        [
            self.t,
            self.exchange,
            self.anisotropy,
            self.demag,
            self.total_energy,
            self.l2_u,
            self.l2_s,
            self.h2spec_u,
            self.h2spec_s,
            self.sphere_drift,
            self.s_l2_delta,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// Diagnostics of one state; `prev_l2_s` feeds `s_l2_delta`.
pub fn record(
    model: &Model,
    state: &SpectralState,
    prev_l2_s: Option<f64>,
) -> Result<DiagnosticsRecord> {
    let basis = model.basis();
    let u = basis.to_grid(&state.u);
    let e = ll_energy(&u, model.params(), basis, model.demag())?;
    let l2_s = coeff_norm(&state.s);
    Ok(DiagnosticsRecord {
        t: state.time,
        exchange: e.exchange,
        anisotropy: e.anisotropy,
        demag: e.demag,
        total_energy: e.total,
        l2_u: coeff_norm(&state.u),
        l2_s,
        h2spec_u: spectral_sobolev(&state.u, basis, 2),
        h2spec_s: spectral_sobolev(&state.s, basis, 2),
        sphere_drift: sphere_drift(&u),
        s_l2_delta: prev_l2_s.map_or(0.0, |p| l2_s - p),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    SpinNormIncrease,
    EnergyIncrease,
    DriftExceeded,
    NonFinite,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::SpinNormIncrease => "s-L2 increase",
            ViolationKind::EnergyIncrease => "energy increase",
            ViolationKind::DriftExceeded => "sphere drift above limit",
            ViolationKind::NonFinite => "non-finite diagnostics",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub sample: usize,
    pub time: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorOptions {
    pub drift_limit: f64,
    pub s_l2_tol: f64,
    pub energy_tol: f64,
}

impl Default for MonitorOptions {
    fn default() -> Self {
        Self {
            drift_limit: DEFAULT_DRIFT_LIMIT,
            s_l2_tol: S_L2_TOL,
            energy_tol: ENERGY_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport {
    pub records: Vec<DiagnosticsRecord>,
    pub violations: Vec<Violation>,
}

impl MonitorReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self, kind: ViolationKind) -> Option<&Violation> {
        self.violations.iter().find(|v| v.kind == kind)
    }

    /// `"clean"` or one line per violated kind with its first occurrence.
    pub fn summary(&self) -> String {
        if self.is_clean() {
            return "clean".into();
        }
        let mut seen = Vec::new();
        let mut lines = Vec::new();
        for v in &self.violations {
            if !seen.contains(&v.kind) {
                seen.push(v.kind);
                let count = self.violations.iter().filter(|w| w.kind == v.kind).count();
                lines.push(format!(
                    "{}: first at t = {:.16e} (sample {}, value {:.6e}), {count} occurrence(s)",
                    v.kind, v.time, v.sample, v.value
                ));
            }
        }
        lines.join("\n")
    }
}

/// Incremental form of [`monitor_run`] for streaming use during integration.
pub struct Monitor<'a> {
    model: &'a Model,
    options: MonitorOptions,
    spin_free_current: bool,
    report: MonitorReport,
}

impl<'a> Monitor<'a> {
    pub fn new(model: &'a Model, options: MonitorOptions) -> Self {
        Self {
            model,
            options,
            spin_free_current: model.params().je.is_zero(),
            report: MonitorReport {
                records: Vec::new(),
                violations: Vec::new(),
            },
        }
    }

    pub fn observe(&mut self, state: &SpectralState) -> Result<&DiagnosticsRecord> {
        let prev = self.report.records.last().copied();
        let rec = record(self.model, state, prev.map(|p| p.l2_s))?;
        self.push(rec, state.s.iter().all(|v| *v == [0.0; 3]));
        Ok(self.report.records.last().expect("just pushed"))
    }

    fn push(&mut self, rec: DiagnosticsRecord, s_vanishes: bool) {
        let sample = self.report.records.len();
        let mut flag = |kind, value| {
            self.report.violations.push(Violation {
                kind,
                sample,
                time: rec.t,
                value,
            })
        };
        if !rec.is_finite() {
            flag(ViolationKind::NonFinite, f64::NAN);
        }
        if rec.sphere_drift > self.options.drift_limit {
            flag(ViolationKind::DriftExceeded, rec.sphere_drift);
        }
        if let Some(prev) = self.report.records.last() {
            if self.spin_free_current && rec.l2_s - prev.l2_s > self.options.s_l2_tol * prev.l2_s {
                flag(ViolationKind::SpinNormIncrease, rec.l2_s - prev.l2_s);
            }
            let de = rec.total_energy - prev.total_energy;
            let scale = prev.total_energy.abs().max(f64::EPSILON);
            if self.spin_free_current && s_vanishes && de > self.options.energy_tol * scale {
                flag(ViolationKind::EnergyIncrease, de);
            }
        }
        self.report.records.push(rec);
    }

    pub fn finish(self) -> MonitorReport {
        self.report
    }
}

/// Diagnostics of every sample of `traj` with the invariant flags.
pub fn monitor_run(
    model: &Model,
    traj: &Trajectory,
    options: MonitorOptions,
) -> Result<MonitorReport> {
    let mut monitor = Monitor::new(model, options);
    for state in &traj.samples {
        monitor.observe(state)?;
    }
    Ok(monitor.finish())
}

/// Re-checks precomputed records (used on corrupted or replayed data).
pub fn flag_records(
    model: &Model,
    records: &[DiagnosticsRecord],
    s_vanishes: bool,
    options: MonitorOptions,
) -> MonitorReport {
    let mut monitor = Monitor::new(model, options);
    for r in records {
        monitor.push(*r, s_vanishes);
    }
    monitor.finish()
}
