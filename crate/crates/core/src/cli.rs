//! Experiment drivers: single runs with energy traces and refinement studies
//! with observed orders, both written as CSV.
//!
//! Trace CSV columns: `n, t, u..., energy, energy_residual, newton_iters`
//! (one row per interval end, `n = 1..N`). For the ODE the solution column
//! is `u`; for KdV it is `u_<dof>` for every `subsample`-th coordinate.
//!
//! Convergence CSV columns: `level, tau, nodal_error, interior_error,
//! nodal_order, interior_order, below_floor`. Empty fields mean "not
//! applicable" (the first row has no order; KdV has no interior error).

use std::io::Write;
use std::ops::RangeInclusive;

use crate::dgrad::DiscreteGradient;
use crate::error::{Error, Result};
use crate::problems::{build_kdv_problem, interpolate_initial, scalar_ode_exact, CnoidalWave, KdvProblem, ScalarOdeProblem};
use crate::stepper::{energy_identity_residual, integrate_with, DgScheme, JacobianMode, NewtonOptions, TimeMesh, Trajectory};
use crate::system::{GradientSystem, StateVector};

/// Samples per interval for interior (time) errors.
pub const INTERIOR_SAMPLES: usize = 33;
/// Spatial samples per cell, per unit of element degree, for KdV errors.
pub const SAMPLES_PER_CELL_PER_DEGREE: usize = 10;
/// Errors below `FLOOR_FACTOR * newton_tol` are flagged as unreliable.
pub const FLOOR_FACTOR: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Ode,
    Kdv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DgradKind {
    Gonzalez,
    Avf,
    ItohAbe,
    ClosedForm,
    WeakForm,
}

impl DgradKind {
    fn resolve(self) -> DiscreteGradient {
        match self {
            DgradKind::Gonzalez => DiscreteGradient::Gonzalez,
            DgradKind::Avf => DiscreteGradient::avf(),
            DgradKind::ItohAbe => DiscreteGradient::itoh_abe(),
            DgradKind::ClosedForm | DgradKind::WeakForm => DiscreteGradient::Native,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub k: usize,
    /// Defaults to closed-form (ODE) or weak-form (KdV).
    pub dgrad: Option<DgradKind>,
    /// Defaults to 20 (ODE) or one temporal period of the wave (KdV).
    pub final_time: Option<f64>,
    pub nt: usize,
    pub u0: f64,
    pub nx: usize,
    /// Element degree; defaults to `2k`.
    pub l: Option<usize>,
    pub wave: CnoidalWave,
    pub newton_tol: f64,
    /// Time quadrature points; defaults to `2k + 1`.
    pub quad: Option<usize>,
    /// Defaults to full Newton (ODE) or a reused Jacobian (KdV).
    pub jacobian: Option<JacobianMode>,
    /// Scale the Newton tolerance by the state size (see [`NewtonOptions`]).
    pub state_relative_tol: bool,
    /// KdV: write every `subsample`-th coordinate; 0 writes none.
    pub subsample: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Ode,
            k: 1,
            dgrad: None,
            final_time: None,
            nt: 8,
            u0: 1e-5,
            nx: 32,
            l: None,
            wave: CnoidalWave::default(),
            newton_tol: 1e-12,
            quad: None,
            jacobian: None,
            state_relative_tol: false,
            subsample: 0,
        }
    }
}

enum Built {
    Ode(ScalarOdeProblem),
    Kdv(KdvProblem),
}

impl RunConfig {
    pub fn element_degree(&self) -> usize {
        self.l.unwrap_or(2 * self.k).max(1)
    }

    pub fn dgrad_kind(&self) -> DgradKind {
        self.dgrad.unwrap_or(match self.problem {
            ProblemKind::Ode => DgradKind::ClosedForm,
            ProblemKind::Kdv => DgradKind::WeakForm,
        })
    }

    pub fn resolved_final_time(&self) -> Result<f64> {
        match (self.final_time, self.problem) {
            (Some(t), _) => Ok(t),
            (None, ProblemKind::Ode) => Ok(20.0),
            (None, ProblemKind::Kdv) => self.wave.temporal_period(),
        }
    }

    pub fn newton_options(&self) -> NewtonOptions {
        NewtonOptions {
            abs_tol: self.newton_tol,
            jacobian_mode: self.jacobian.unwrap_or(match self.problem {
                ProblemKind::Ode => JacobianMode::FiniteDifference,
                ProblemKind::Kdv => JacobianMode::ReusePerInterval,
            }),
            state_relative: self.state_relative_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.nt < 1 {
            return bad("--nt must be at least 1".into());
        }
        if !(self.newton_tol > 0.0) {
            return bad("--newton-tol must be positive".into());
        }
        if let Some(t) = self.final_time {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("--T must be positive, got {t}"));
            }
        }
        if self.quad == Some(0) {
            return bad("--quad must be at least 1".into());
        }
        match self.problem {
            ProblemKind::Ode => {
                if self.dgrad_kind() == DgradKind::WeakForm {
                    return bad("weak-form discrete gradient applies to kdv only".into());
                }
                if !self.u0.is_finite() {
                    return bad("--u0 must be finite".into());
                }
            }
            ProblemKind::Kdv => {
                if self.dgrad_kind() != DgradKind::WeakForm {
                    return bad("kdv requires the weak-form discrete gradient".into());
                }
                if self.nx < 3 {
                    return bad("--nx must be at least 3".into());
                }
                if self.l == Some(0) {
                    return bad("--l must be at least 1".into());
                }
                if !(self.wave.modulus >= 0.0 && self.wave.modulus < 1.0 && self.wave.kappa > 0.0) {
                    return bad("cnoidal wave needs 0 <= modulus < 1 and kappa > 0".into());
                }
            }
        }
        Ok(())
    }

    fn scheme(&self) -> Result<DgScheme> {
        DgScheme::with_quadrature(self.k, self.quad.unwrap_or(2 * self.k + 1))
    }

    fn build(&self) -> Result<(Built, StateVector)> {
        match self.problem {
            ProblemKind::Ode => Ok((Built::Ode(ScalarOdeProblem), StateVector::new(vec![self.u0])?)),
            ProblemKind::Kdv => {
                let period = self.wave.spatial_period()?;
                let problem = build_kdv_problem(self.nx, self.element_degree(), period)?;
                let wave = self.wave;
                let mut bad = None;
                let u0 = interpolate_initial(&problem, |x| {
                    wave.eval(x, 0.0).unwrap_or_else(|e| {
                        bad = Some(e);
                        f64::NAN
                    })
                });
                if let Some(e) = bad {
                    return Err(e);
                }
                Ok((Built::Kdv(problem), StateVector::new(u0)?))
            }
        }
    }
}

/// One row of a run trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub t: f64,
    pub coords: Vec<f64>,
    pub energy: f64,
    pub energy_residual: f64,
    pub newton_iters: usize,
}

/// Result of a single run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub rows: Vec<TraceRow>,
    pub coord_labels: Vec<String>,
    pub initial_energy: f64,
    /// `∫ u dx` at every node `n = 0..=N` (KdV only).
    pub mass: Option<Vec<f64>>,
}

fn trace<P: GradientSystem>(problem: &P, traj: &Trajectory, pick: &[usize]) -> Result<Vec<TraceRow>> {
    (1..=traj.mesh.intervals())
        .map(|n| {
            let u = traj.nodal_value(n);
            Ok(TraceRow {
                n,
                t: traj.mesh.nodes()[n],
                coords: pick.iter().map(|&i| u[i]).collect(),
                energy: problem.energy(u)?,
                energy_residual: energy_identity_residual(problem, traj, n)?,
                newton_iters: traj.intervals[n - 1].newton_iters,
            })
        })
        .collect()
}

fn solve(config: &RunConfig) -> Result<(Built, Trajectory)> {
    config.validate()?;
    let (built, u0) = config.build()?;
    let mesh = TimeMesh::uniform(config.resolved_final_time()?, config.nt)?;
    let scheme = config.scheme()?;
    let dgrad = config.dgrad_kind().resolve();
    let opts = config.newton_options();
    let traj = match &built {
        Built::Ode(p) => integrate_with(p, dgrad, &u0, &mesh, &scheme, &opts)?,
        Built::Kdv(p) => integrate_with(p, dgrad, &u0, &mesh, &scheme, &opts)?,
    };
    Ok((built, traj))
}

/// Runs one configuration and returns its trace.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let (built, traj) = solve(config)?;
    match &built {
        Built::Ode(p) => Ok(RunOutput {
            rows: trace(p, &traj, &[0])?,
            coord_labels: vec!["u".into()],
            initial_energy: p.energy(&traj.u0)?,
            mass: None,
        }),
        Built::Kdv(p) => {
            let pick: Vec<usize> = if config.subsample == 0 {
                Vec::new()
            } else {
                (0..p.dim()).step_by(config.subsample).collect()
            };
            let mass = (0..=traj.mesh.intervals()).map(|n| p.mass_integral(traj.nodal_value(n))).collect();
            Ok(RunOutput {
                rows: trace(p, &traj, &pick)?,
                coord_labels: pick.iter().map(|i| format!("u_{i}")).collect(),
                initial_energy: p.energy(&traj.u0)?,
                mass: Some(mass),
            })
        }
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trace<W: Write>(out: &RunOutput, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["n".to_string(), "t".to_string()];
    header.extend(out.coord_labels.iter().cloned());
    header.extend(["energy", "energy_residual", "newton_iters"].map(String::from));
    w.write_record(&header)?;
    for row in &out.rows {
        let mut rec = vec![row.n.to_string(), fmt(row.t)];
        rec.extend(row.coords.iter().map(|&v| fmt(v)));
        rec.push(fmt(row.energy));
        rec.push(fmt(row.energy_residual));
        rec.push(row.newton_iters.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs a configuration and writes its CSV trace.
pub fn cmd_run<W: Write>(config: &RunConfig, sink: W) -> Result<RunOutput> {
    let out = run(config)?;
    write_trace(&out, sink)?;
    Ok(out)
}

/// `log2(e_i / e_{i+1})` for each consecutive pair.
pub fn observed_order(errors: &[f64]) -> Result<Vec<f64>> {
    if errors.len() < 2 {
        return Err(Error::InvalidArgument("need at least two errors".into()));
    }
    if errors.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidArgument("errors must be positive".into()));
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

/// Least-squares slope of `log(error)` against `log(tau)`.
pub fn fitted_order(taus: &[f64], errors: &[f64]) -> Result<f64> {
    if taus.len() != errors.len() || taus.len() < 2 {
        return Err(Error::InvalidArgument("need at least two (tau, error) pairs".into()));
    }
    if errors.iter().chain(taus).any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidArgument("taus and errors must be positive".into()));
    }
    let xs: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub level: u32,
    pub tau: f64,
    pub nodal_error: f64,
    pub interior_error: Option<f64>,
    pub nodal_order: Option<f64>,
    pub interior_order: Option<f64>,
    pub below_floor: bool,
}

/// `u_τ` on interval `n` at reference coordinate `s ∈ [0, 1]` (so `s = 0`
/// is the right limit `u^{n-1,+}`).
fn interval_value(traj: &Trajectory, n: usize, s: f64) -> Vec<f64> {
    let w = traj.scheme.basis().eval(s);
    let coeffs = &traj.intervals[n - 1].u_coeffs;
    let mut out = vec![0.0; coeffs[0].len()];
    for (wj, c) in w.iter().zip(coeffs) {
        for (o, x) in out.iter_mut().zip(c.iter()) {
            *o += wj * x;
        }
    }
    out
}

/// Relative nodal and interior errors of a scalar ODE run.
pub fn ode_errors(traj: &Trajectory, u0: f64) -> Result<(f64, f64)> {
    let nodes = traj.mesh.nodes();
    let mut nodal: f64 = 0.0;
    for n in 1..nodes.len() {
        let exact = scalar_ode_exact(u0, nodes[n])?;
        nodal = nodal.max((traj.nodal_value(n)[0] - exact).abs() / exact.abs());
    }
    let (mut diff, mut size) = (0.0_f64, 0.0_f64);
    for n in 1..nodes.len() {
        for j in 0..INTERIOR_SAMPLES {
            let s = j as f64 / (INTERIOR_SAMPLES - 1) as f64;
            let t = nodes[n - 1] + s * traj.mesh.tau(n);
            let exact = scalar_ode_exact(u0, t)?;
            diff = diff.max((interval_value(traj, n, s)[0] - exact).abs());
            size = size.max(exact.abs());
        }
    }
    Ok((nodal, diff / size))
}

/// `max_n ||u^n - u_ex(t_n)||_∞ / ||u_ex(t_n)||_∞` with the spatial norm
/// sampled `10 l` times per cell.
pub fn kdv_nodal_error(problem: &KdvProblem, traj: &Trajectory, wave: &CnoidalWave) -> Result<f64> {
    let asm = problem.assembly();
    let per_cell = SAMPLES_PER_CELL_PER_DEGREE * asm.degree();
    let mut worst: f64 = 0.0;
    for n in 1..=traj.mesh.intervals() {
        let t = traj.mesh.nodes()[n];
        let u = traj.nodal_value(n);
        let (mut diff, mut size) = (0.0_f64, 0.0_f64);
        for c in 0..asm.cells() {
            for j in 0..per_cell {
                let x = (c as f64 + j as f64 / per_cell as f64) * asm.h();
                let exact = wave.eval(x, t)?;
                diff = diff.max((asm.eval(u, x) - exact).abs());
                size = size.max(exact.abs());
            }
        }
        worst = worst.max(diff / size);
    }
    Ok(worst)
}

/// Runs `config` at `N_t = 2^i` (and `N_x = 2^i` for KdV) for every level.
pub fn converge(config: &RunConfig, levels: RangeInclusive<u32>) -> Result<Vec<ConvergenceRow>> {
    let levels: Vec<u32> = levels.collect();
    if levels.len() < 3 {
        return Err(Error::InvalidArgument("a convergence study needs at least 3 levels".into()));
    }
    if levels.iter().any(|&i| i > 24) {
        return Err(Error::InvalidArgument("refinement level too large".into()));
    }
    if config.problem == ProblemKind::Ode && !(config.u0 > 0.0) {
        return Err(Error::InvalidArgument("ODE convergence study needs u0 > 0".into()));
    }
    let floor = FLOOR_FACTOR * config.newton_tol;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels.len());
    for &i in &levels {
        let mut cfg = config.clone();
        cfg.nt = 1 << i;
        if cfg.problem == ProblemKind::Kdv {
            cfg.nx = 1 << i;
        }
        let (built, traj) = solve(&cfg)?;
        let (nodal, interior) = match &built {
            Built::Ode(_) => {
                let (a, b) = ode_errors(&traj, cfg.u0)?;
                (a, Some(b))
            }
            Built::Kdv(p) => (kdv_nodal_error(p, &traj, &cfg.wave)?, None),
        };
        let order = |prev: Option<f64>, cur: Option<f64>| match (prev, cur) {
            (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some((a / b).log2()),
            _ => None,
        };
        let prev = rows.last();
        rows.push(ConvergenceRow {
            level: i,
            tau: traj.mesh.max_tau(),
            nodal_error: nodal,
            interior_error: interior,
            nodal_order: order(prev.map(|r| r.nodal_error), Some(nodal)),
            interior_order: order(prev.and_then(|r| r.interior_error), interior),
            below_floor: nodal < floor || interior.is_some_and(|e| e < floor),
        });
    }
    Ok(rows)
}

pub fn write_convergence<W: Write>(rows: &[ConvergenceRow], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "level",
        "tau",
        "nodal_error",
        "interior_error",
        "nodal_order",
        "interior_order",
        "below_floor",
    ])?;
    let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.level.to_string(),
            fmt(r.tau),
            fmt(r.nodal_error),
            opt(r.interior_error),
            opt(r.nodal_order),
            opt(r.interior_order),
            r.below_floor.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs a convergence study and writes its CSV table.
pub fn cmd_converge<W: Write>(config: &RunConfig, levels: RangeInclusive<u32>, sink: W) -> Result<Vec<ConvergenceRow>> {
    let rows = converge(config, levels)?;
    write_convergence(&rows, sink)?;
    Ok(rows)
}

/// Parses `"a..b"` (inclusive) into a level range.
pub fn parse_levels(spec: &str) -> Result<RangeInclusive<u32>> {
    let bad = || Error::InvalidArgument(format!("expected levels as i_min..i_max, got {spec:?}"));
    let (a, b) = spec.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok(a..=b)
}
