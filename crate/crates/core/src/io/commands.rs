//! Command drivers behind the CLI. Each writes its artifacts and a `run.log`
//! into the output directory and reports an exit status.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::compat::{check_compat, CompatVerdict};
use crate::diagnostics::{convergence_in_modes, convergence_in_time, Monitor, MonitorOptions};
use crate::error::{Error, Result};
use crate::fd::{fd_integrate, fd_stability_bound, FdState};
use crate::solver::{integrate, integrate_observed, stability_bound, SolverConfig};
use crate::vec3;

use super::config::RunConfig;
use super::snapshot::write_snapshot;
use super::table::{format_float, write_diagnostics_csv, write_table};

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub exit_code: i32,
    pub summary: String,
}

impl Outcome {
    fn clean(summary: impl Into<String>) -> Self {
        Self {
            exit_code: EXIT_CLEAN,
            summary: summary.into(),
        }
    }

    fn violation(summary: impl Into<String>) -> Self {
        Self {
            exit_code: EXIT_VIOLATION,
            summary: summary.into(),
        }
    }
}

struct RunLog {
    path: PathBuf,
    text: String,
}

impl RunLog {
    fn new(dir: &Path, command: &str) -> Self {
        Self {
            path: dir.join("run.log"),
            text: format!("command = {command}\n"),
        }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn finish(mut self, result: Result<Outcome>) -> Result<Outcome> {
        match &result {
            Ok(o) => {
                self.line(format!("exit = {}", o.exit_code));
                self.line(&o.summary);
            }
            Err(e) => self.line(format!("error: {e}")),
        }
        std::fs::write(&self.path, &self.text).map_err(|e| Error::io(&self.path, e))?;
        result
    }
}

fn prepare(cfg: &RunConfig, command: &str) -> Result<RunLog> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut log = RunLog::new(dir, command);
    log.line(format!(
        "grid lengths = {:?}, points = {:?}, modes = {:?}",
        cfg.grid.lengths(),
        cfg.grid.points(),
        cfg.modes
    ));
    log.line(format!(
        "alpha = {}, theta = {}, delta = {}, dt = {}, t_end = {}, seed = {}",
        cfg.params.alpha,
        cfg.params.theta,
        cfg.params.delta,
        cfg.solver.dt,
        cfg.solver.t_end,
        cfg.seed
    ));
    Ok(log)
}

/// Integrates the configured run, writing `diagnostics.csv` and snapshots.
pub fn run_command(cfg: &RunConfig) -> Result<Outcome> {
    let mut log = prepare(cfg, "run")?;
    let result = run_inner(cfg, &mut log);
    log.finish(result)
}

fn run_inner(cfg: &RunConfig, log: &mut RunLog) -> Result<Outcome> {
    let model = cfg.model()?;
    let basis = model.basis();
    let y0 = cfg.initial_state(&model)?;
    log.line(format!(
        "stability bound = {:e}",
        stability_bound(model.params(), basis)
    ));
    let snap_dir = cfg.output_dir.join("snapshots");
    std::fs::create_dir_all(&snap_dir).map_err(|e| Error::io(&snap_dir, e))?;

    let steps = cfg.solver.steps();
    let diag_stride = cfg.solver.diagnostics_stride.max(1);
    let options = MonitorOptions {
        drift_limit: cfg.drift_limit,
        ..MonitorOptions::default()
    };
    let mut monitor = Monitor::new(&model, options);
    let result = integrate_observed(&model, &y0, &cfg.solver, |k, state| {
        if k % diag_stride == 0 || k == steps {
            monitor.observe(state)?;
        }
        let snap = match cfg.snapshot_stride {
            0 => k == 0 || k == steps,
            n => k % n == 0 || k == steps,
        };
        if snap {
            let base = snap_dir.join(format!("step_{k:08}"));
            let with_role = |role: &str, coeffs: &[vec3::Vec3]| {
                let mut name = base.clone().into_os_string();
                name.push(format!("_{role}"));
                write_snapshot(Path::new(&name), &basis.to_grid(coeffs), role, state.time)
            };
            with_role("u", &state.u)?;
            with_role("s", &state.s)?;
        }
        Ok(())
    });
    let report = monitor.finish();
    write_diagnostics_csv(&cfg.output_dir.join("diagnostics.csv"), &report.records)?;
    log.line(format!("records = {}", report.records.len()));
    match result {
        Ok(_) if report.is_clean() => Ok(Outcome::clean("invariants clean")),
        Ok(_) => Ok(Outcome::violation(format!(
            "invariant violation\n{}",
            report.summary()
        ))),
        Err(Error::BlowUp { time }) => Ok(Outcome {
            exit_code: EXIT_BLOWUP,
            summary: format!(
                "numerical blow-up: non-finite coefficients at t = {}",
                format_float(time)
            ),
        }),
        Err(e) => Err(e),
    }
}

/// Writes `compat_report.txt`; exit 2 when the initial data fail order 0.
pub fn compat_command(cfg: &RunConfig) -> Result<Outcome> {
    let log = prepare(cfg, "compat-check")?;
    let result = (|| {
        let model = cfg.model()?;
        let y0 = cfg.initial_state(&model)?;
        let (u0, s0) = (model.basis().to_grid(&y0.u), model.basis().to_grid(&y0.s));
        let report = check_compat(&model, &u0, &s0, cfg.compat_tol)?;
        let path = cfg.output_dir.join("compat_report.txt");
        std::fs::write(&path, report.to_text()).map_err(|e| Error::io(&path, e))?;
        let summary = format!("compatibility: {}", report.verdict);
        Ok(match report.verdict {
            CompatVerdict::FailsOrder0 => Outcome::violation(summary),
            _ => Outcome::clean(summary),
        })
    })();
    log.finish(result)
}

/// Step for the FD oracle: the largest `t_end/n` under its stability bound.
pub fn oracle_dt(cfg: &RunConfig) -> Result<f64> {
    let bound = fd_stability_bound(&cfg.params).min(cfg.solver.dt);
    let n = (cfg.solver.t_end / bound).ceil().max(1.0);
    Ok(cfg.solver.t_end / n)
}

/// Relative L² distance of `(u, s)` between spectral and FD solutions on the
/// shared nodes at `t = 0` and `t_end`; writes `oracle_compare.csv`.
pub fn oracle_compare_command(cfg: &RunConfig) -> Result<Outcome> {
    let log = prepare(cfg, "oracle-compare")?;
    let result = (|| {
        let model = cfg.model()?;
        let basis = model.basis();
        let y0 = cfg.initial_state(&model)?;
        let spectral = integrate(&model, &y0, &cfg.solver.clone().with_stride(usize::MAX))?;
        let fd_dt = oracle_dt(cfg)?;
        let fd0 = FdState::new(basis.to_grid(&y0.u), basis.to_grid(&y0.s))?;
        let fd = fd_integrate(
            model.params(),
            model.demag(),
            &fd0,
            fd_dt,
            cfg.solver.t_end,
            usize::MAX,
            cfg.solver.check_stability,
        )?;
        let pairs = [
            (spectral.initial(), &fd[0]),
            (spectral.terminal(), fd.last().expect("nonempty")),
        ];
        let mut rows = Vec::new();
        let mut worst: f64 = 0.0;
        for (s, f) in pairs {
            let (u, sp) = (basis.to_grid(&s.u), basis.to_grid(&s.s));
            let diff = sq_dist(u.values(), f.u.values()) + sq_dist(sp.values(), f.s.values());
            let zeros = vec![[0.0; 3]; u.values().len()];
            let norm = sq_dist(u.values(), &zeros) + sq_dist(sp.values(), &zeros);
            let rel = if norm > 0.0 {
                (diff / norm).sqrt()
            } else {
                diff.sqrt()
            };
            let dist = (diff * cfg.grid.cell_volume()).sqrt();
            worst = worst.max(rel);
            rows.push(vec![s.time, dist, rel, cfg.solver.dt, fd_dt]);
        }
        write_table(
            &cfg.output_dir.join("oracle_compare.csv"),
            &[
                "t",
                "l2_distance",
                "relative_distance",
                "spectral_dt",
                "fd_dt",
            ],
            &rows,
        )?;
        let summary = format!(
            "spectral vs finite differences: relative L2 distance {}",
            format_float(worst)
        );
        Ok(if worst <= cfg.oracle_tol {
            Outcome::clean(summary)
        } else {
            Outcome::violation(format!("{summary} exceeds {}", cfg.oracle_tol))
        })
    })();
    log.finish(result)
}

fn sq_dist(a: &[vec3::Vec3], b: &[vec3::Vec3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| vec3::norm_sq(vec3::sub(*x, *y)))
        .sum()
}

/// Temporal and spatial ladders; writes `convergence_time.csv` and
/// `convergence_space.csv`. Exit 2 when an error ladder fails to decrease.
pub fn convergence_command(cfg: &RunConfig) -> Result<Outcome> {
    let log = prepare(cfg, "convergence")?;
    let result = (|| {
        let model = cfg.model()?;
        let y0 = cfg.initial_state(&model)?;
        let time = convergence_in_time(
            &model,
            &y0,
            cfg.solver.t_end,
            &cfg.convergence_dts,
            cfg.solver.check_stability,
        )?;

        let m0 = cfg.modes[0];
        let ladder: Vec<Vec<usize>> = cfg
            .convergence_modes
            .iter()
            .map(|&m| cfg.modes.iter().map(|&mi| ((mi * m) / m0).max(2)).collect())
            .collect();
        let finest = ladder
            .last()
            .ok_or_else(|| Error::Config("empty convergence_modes".into()))?;
        let (fine_model, _) = cfg.model_with_modes(finest)?;
        let bound = stability_bound(fine_model.params(), fine_model.basis());
        let dt = if cfg.solver.dt <= bound || !cfg.solver.check_stability {
            cfg.solver.dt
        } else {
            cfg.solver.t_end / (cfg.solver.t_end / bound).ceil()
        };
        let mut space_cfg = SolverConfig::new(dt, cfg.solver.t_end);
        space_cfg.dealias_factor = cfg.solver.dealias_factor;
        space_cfg.check_stability = cfg.solver.check_stability;
        let space = convergence_in_modes(|m| cfg.model_with_modes(m), &ladder, &space_cfg)?;

        let rows = |t: &crate::diagnostics::ConvergenceTable| -> Vec<Vec<f64>> {
            t.rows
                .iter()
                .map(|r| vec![r.level, r.error, r.ratio])
                .collect()
        };
        write_table(
            &cfg.output_dir.join("convergence_time.csv"),
            &["dt", "error", "ratio"],
            &rows(&time),
        )?;
        write_table(
            &cfg.output_dir.join("convergence_space.csv"),
            &["modes", "error", "ratio"],
            &rows(&space),
        )?;

        let mut summary = String::new();
        for r in &time.rows {
            let _ = writeln!(
                summary,
                "dt = {:e}: error {:e}, ratio {:.3}",
                r.level, r.error, r.ratio
            );
        }
        for r in &space.rows {
            let _ = writeln!(summary, "modes = {}: error {:e}", r.level, r.error);
        }
        let _ = write!(summary, "spatial step dt = {dt:e}");
        Ok(
            if time.strictly_decreasing() && space.strictly_decreasing() {
                Outcome::clean(summary)
            } else {
                Outcome::violation(format!("non-monotone error ladder\n{summary}"))
            },
        )
    })();
    log.finish(result)
}
