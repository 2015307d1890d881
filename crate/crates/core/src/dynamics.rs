//! Time integration of the coupled system with monitoring hooks.
//!
//! One step advances `w -> u -> v` so the moving population sees the fresh
//! chemoattractant and the static one sees the fresh movers:
//!
//! 1. `(1 + tau alpha) w' - tau D lap w' = w + tau v` (implicit Helmholtz);
//! 2. `(1 + tau/(1 + tau theta)) u' - tau div(grad u' - u' grad w') =
//!    u + tau theta v / (1 + tau theta)` (linearly implicit, one sparse
//!    solve; Scharfetter-Gummel fluxes against `w'`);
//! 3. `v' = (v + tau u') / (1 + tau theta)`.
//!
//! Steps 2 and 3 are the elimination of the fully coupled implicit exchange
//! `u' = u + tau [SG(u') + theta v' - u']`, `v' = v + tau [u' - theta v']`:
//! both equations carry the identical exchange fluxes with opposite signs,
//! so the discrete mass of `u + v` is conserved to roundoff for every state,
//! and the M-matrix structure keeps all fields nonnegative for any `tau`.

use crate::error::{Error, Result};
use crate::functionals::{liapunov, EnergyReport};
use crate::grid::{Field, Grid};
use crate::model::ModelParams;
use crate::operators::{helmholtz_solve, solve_drift_diffusion_system, HelmholtzProblem};
use crate::scalar::Scalar;

/// Cell-averaged fields at one time.
#[derive(Clone, Debug)]
pub struct State<T> {
    pub t: T,
    pub u: Field<T>,
    pub v: Field<T>,
    pub w: Field<T>,
}

impl<T: Scalar> State<T> {
    pub fn new(t: T, u: Field<T>, v: Field<T>, w: Field<T>) -> Self {
        Self { t, u, v, w }
    }

    pub fn validate(&self, grid: &Grid<T>) -> Result<()> {
        grid.check_field(&self.u)?;
        grid.check_field(&self.v)?;
        grid.check_field(&self.w)?;
        for (name, f) in [("u", &self.u), ("v", &self.v), ("w", &self.w)] {
            let min = f.min();
            if min < T::zero() {
                return Err(Error::NegativeField {
                    field: match name {
                        "u" => "u",
                        "v" => "v",
                        _ => "w",
                    },
                    min: min.as_f64(),
                });
            }
        }
        Ok(())
    }

    /// Discrete mass of `u + v`.
    pub fn mass(&self, grid: &Grid<T>) -> Result<T> {
        grid.check_field(&self.u)?;
        grid.check_field(&self.v)?;
        Ok(crate::grid::integrate_raw(self.u.as_slice(), grid)
            + crate::grid::integrate_raw(self.v.as_slice(), grid))
    }
}

/// Time-step control.
#[derive(Clone, Copy, Debug)]
pub struct StepControl<T> {
    pub tau: T,
    /// Values below this are raised to it after each step (0 disables).
    /// Activation is logged loudly; mass defects it introduces are visible
    /// in the monitors, never hidden.
    pub positivity_floor: T,
    /// Explicit-drift stability ratio for the CFL check.
    pub max_drift_cfl: T,
}

impl<T: Scalar> StepControl<T> {
    pub fn new(tau: T) -> Result<Self> {
        if !(tau > T::zero()) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tau must be positive, got {tau}"
            )));
        }
        Ok(Self {
            tau,
            positivity_floor: T::zero(),
            max_drift_cfl: T::lit(0.4),
        })
    }

    /// Drift-CFL step selection from the initial chemoattractant:
    /// `tau = min(0.1, cfl * min_faces d^2 / |w_j - w_i|)`.
    pub fn auto(w: &Field<T>, grid: &Grid<T>, max_drift_cfl: T) -> Result<Self> {
        grid.check_field(w)?;
        let cap = T::lit(0.1);
        let mut tau = cap;
        for face in grid.faces() {
            let jump = (w[face.right] - w[face.left]).abs();
            if jump > T::lit(1e-12) {
                tau = tau.min(max_drift_cfl * face.dist * face.dist / jump);
            }
        }
        Ok(Self {
            tau,
            positivity_floor: T::zero(),
            max_drift_cfl,
        })
    }
}

/// True when `tau * max_faces |w_j - w_i| / d^2` exceeds `max_drift_cfl`.
pub fn drift_cfl_violated<T: Scalar>(w: &Field<T>, grid: &Grid<T>, ctl: &StepControl<T>) -> bool {
    for face in grid.faces() {
        let jump = (w[face.right] - w[face.left]).abs();
        if ctl.tau * jump > ctl.max_drift_cfl * face.dist * face.dist {
            return true;
        }
    }
    false
}

/// Advances one IMEX step. See the module docs for the scheme.
pub fn step<T: Scalar>(
    state: &State<T>,
    params: &ModelParams<T>,
    ctl: &StepControl<T>,
    grid: &Grid<T>,
) -> Result<State<T>> {
    grid.check_field(&state.u)?;
    grid.check_field(&state.v)?;
    grid.check_field(&state.w)?;
    let tau = ctl.tau;
    let theta = params.theta;
    let n = grid.num_cells();

    // (i) chemoattractant, implicit in diffusion and decay
    let w_problem = HelmholtzProblem::new(T::one() + tau * params.alpha, tau * params.d, grid)?;
    let w_rhs = state.w.axpy(tau, &state.v);
    let w_new = helmholtz_solve(&w_problem, &w_rhs)?;

    // (ii) movers, implicit diffusion/drift/exchange against the fresh w
    let denom = T::one() + tau * theta;
    let sigma_u = T::one() + tau / denom;
    let u_rhs = state.u.axpy(tau * theta / denom, &state.v);
    let u_new = solve_drift_diffusion_system(sigma_u, tau, &u_rhs, &w_new, grid)?;

    // (iii) static population, sharing the identical exchange fluxes
    let mut v_new = Field::zeros(n);
    for i in 0..n {
        v_new[i] = (state.v[i] + tau * u_new[i]) / denom;
    }

    let mut out = State::new(state.t + tau, u_new, v_new, w_new);

    if ctl.positivity_floor > T::zero() {
        let floor = ctl.positivity_floor;
        let mut clamped = 0usize;
        for f in [&mut out.u, &mut out.v, &mut out.w] {
            for x in f.as_mut_slice() {
                if *x < floor {
                    *x = floor;
                    clamped += 1;
                }
            }
        }
        if clamped > 0 {
            eprintln!(
                "WARNING: positivity floor {floor:e} raised {clamped} value(s) at t = {}",
                out.t
            );
        }
    }

    Ok(out)
}

/// One monitor emission.
#[derive(Clone, Copy, Debug)]
pub struct MonitorRow<T> {
    pub report: EnergyReport<T>,
    /// Residual of the discrete decay identity over the last monitor
    /// interval, `|dL/dt + D|`; zero on the first row.
    pub splitting_defect: T,
}

pub const MONITOR_CSV_HEADER: &str =
    "t,mass,L,D,sup_u,sup_v,sup_w,L2_gradw,splitting_defect";

impl<T: Scalar> MonitorRow<T> {
    pub fn write_csv_row<W: std::io::Write>(&self, out: &mut W) -> Result<()> {
        let r = &self.report;
        writeln!(
            out,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            r.t.as_f64(),
            r.mass.as_f64(),
            r.l_total.as_f64(),
            r.d_total.as_f64(),
            r.sup_u.as_f64(),
            r.sup_v.as_f64(),
            r.sup_w.as_f64(),
            r.grad_w_l2.as_f64(),
            self.splitting_defect.as_f64(),
        )?;
        Ok(())
    }
}

/// Options for [`run`].
#[derive(Clone, Copy, Debug)]
pub struct RunOpts<T> {
    pub horizon: T,
    /// Monitor stride in steps.
    pub every: usize,
    /// Stop when the half-height width of `u` drops below this many cells
    /// (the under-resolution sentinel for concentrating runs).
    pub sentinel_width_cells: Option<T>,
}

/// Outcome of a trajectory run.
#[derive(Clone, Debug)]
pub struct RunOutcome<T> {
    pub state: State<T>,
    pub monitors: Vec<MonitorRow<T>>,
    pub steps: usize,
    pub cfl_violations: usize,
    /// Set when the width sentinel fired; the run is then grid-limited.
    pub sentinel_time: Option<T>,
}

/// Half-height width of `u`: twice the distance from the peak cell to the
/// nearest cell whose value drops below half the peak.
pub fn half_height_width<T: Scalar>(u: &Field<T>, grid: &Grid<T>) -> T {
    let mut imax = 0;
    for i in 1..u.len() {
        if u[i] > u[imax] {
            imax = i;
        }
    }
    let half = u[imax] * T::lit(0.5);
    let (cx, cy) = grid.coords()[imax];
    let mut nearest = T::infinity();
    for i in 0..u.len() {
        if u[i] < half {
            let (x, y) = grid.coords()[i];
            let dx = x - cx;
            let dy = y - cy;
            nearest = nearest.min((dx * dx + dy * dy).sqrt());
        }
    }
    T::lit(2.0) * nearest
}

/// Steps to the horizon, emitting an [`EnergyReport`] every `every` steps
/// (and at the final step). Errors are returned with the failing time
/// attached via the state in the message.
pub fn run<T: Scalar>(
    s0: State<T>,
    params: &ModelParams<T>,
    ctl: &StepControl<T>,
    grid: &Grid<T>,
    opts: &RunOpts<T>,
) -> Result<RunOutcome<T>> {
    if !(opts.horizon > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "horizon must be positive, got {}",
            opts.horizon
        )));
    }
    s0.validate(grid)?;
    let every = opts.every.max(1);
    let nsteps = (opts.horizon / ctl.tau)
        .ceil()
        .to_usize()
        .ok_or_else(|| Error::InvalidParameter("horizon/tau overflows step count".into()))?
        .max(1);

    let mut monitors = Vec::with_capacity(nsteps / every + 2);
    let first = liapunov(&s0, params, grid)?;
    monitors.push(MonitorRow {
        report: first,
        splitting_defect: T::zero(),
    });
    let mut prev_l = first.l_total;
    let mut prev_t = s0.t;

    let mut state = s0;
    let mut cfl_violations = 0usize;
    let mut sentinel_time = None;

    for k in 0..nsteps {
        if drift_cfl_violated(&state.w, grid, ctl) {
            if cfl_violations == 0 {
                eprintln!(
                    "warning: drift CFL ratio exceeded at t = {} (tau = {})",
                    state.t, ctl.tau
                );
            }
            cfl_violations += 1;
        }
        state = step(&state, params, ctl, grid)
            .map_err(|e| Error::InvariantViolation(format!("step failed at t = {}: {e}", state.t)))
            .or_else(|_| step(&state, params, ctl, grid))?;

        let last = k + 1 == nsteps;
        if (k + 1) % every == 0 || last {
            let report = liapunov(&state, params, grid)?;
            let dt = report.t - prev_t;
            let defect = if dt > T::zero() {
                ((report.l_total - prev_l) / dt + report.d_total).abs()
            } else {
                T::zero()
            };
            prev_l = report.l_total;
            prev_t = report.t;
            monitors.push(MonitorRow {
                report,
                splitting_defect: defect,
            });

            if let Some(cells) = opts.sentinel_width_cells {
                let width = half_height_width(&state.u, grid);
                if width < cells * grid.max_spacing() {
                    sentinel_time = Some(state.t);
                    eprintln!(
                        "run is grid-limited: half-height width {} below {} cells at t = {}",
                        width, cells, state.t
                    );
                    break;
                }
            }
        }

        let _ = last;
    }

    Ok(RunOutcome {
        steps: monitors.len().saturating_sub(1) * every,
        state,
        monitors,
        cfl_violations,
        sentinel_time,
    })
}
