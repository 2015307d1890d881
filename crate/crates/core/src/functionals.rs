//! The energy machinery: the Liapunov functional, its dissipation rate, and
//! the reduced free energy of zero-mean potentials.
//!
//! The Liapunov functional is
//!
//! ```text
//! L(u,v,w) = int ( L(u) + L_theta(v) - (u+v) w )
//!          + (1+theta)/2 ( D ||grad w||^2 + alpha ||w||^2 )
//!          + 1/2 || D lap w - alpha w + v ||^2
//! ```
//!
//! and decreases along solutions at rate
//!
//! ```text
//! D(u,v,w) = int u |grad(ln u - w)|^2
//!          + int (theta v - u)(ln(theta v) - ln u)
//!          + D ||grad(D lap w - alpha w + v)||^2
//!          + (1+theta+alpha) || D lap w - alpha w + v ||^2  >= 0.
//! ```
//!
//! Discretization choices: `||grad w||^2` is the face-based Dirichlet form
//! consistent with the Neumann Laplacian (summation by parts is exact); the
//! residual inside `L` uses the boundary-extrapolated Laplacian so that
//! concentrated initial data, which need not satisfy the no-flux condition,
//! are scored by their true elliptic residual; the dissipation keeps the
//! Neumann Laplacian, matching the evolution operator along trajectories.

use crate::dynamics::State;
use crate::error::{Error, Result};
use crate::grid::{integrate_raw, Field, Grid};
use crate::model::{entropy_l_raw, entropy_l_theta_raw, ModelParams};
use crate::operators::{dirichlet_energy_raw, free_laplacian_raw, neumann_laplacian_raw};
use crate::scalar::Scalar;

/// Cells with smaller `u` are skipped in the dissipation's gradient term.
const DEGENERATE_FLOOR: f64 = 1e-30;
/// Replacement for the cross-entropy term when exactly one of
/// `{theta v, u}` vanishes.
const CROSS_ENTROPY_CAP: f64 = 1e30;

/// Energy diagnostics at one instant.
#[derive(Clone, Copy, Debug)]
pub struct EnergyReport<T> {
    pub t: T,
    pub mass: T,
    pub l_total: T,
    /// entropy of `u`, entropy of `v`, interaction `-int (u+v) w`,
    /// quadratic `w` terms, and squared elliptic residual.
    pub l_terms: [T; 5],
    pub d_total: T,
    pub sup_u: T,
    pub sup_v: T,
    pub sup_w: T,
    /// Discrete `||grad w||_2`, reported alongside the monitors.
    pub grad_w_l2: T,
}

impl<T: Scalar> EnergyReport<T> {
    /// CSV header matching [`EnergyReport::write_csv_row`].
    pub const CSV_HEADER: &'static str =
        "t,mass,L,L_entropy_u,L_entropy_v,L_interaction,L_quadratic_w,L_residual,D,sup_u,sup_v,sup_w,L2_gradw";

    pub fn write_csv_row<W: std::io::Write>(&self, out: &mut W) -> Result<()> {
        writeln!(
            out,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            self.t.as_f64(),
            self.mass.as_f64(),
            self.l_total.as_f64(),
            self.l_terms[0].as_f64(),
            self.l_terms[1].as_f64(),
            self.l_terms[2].as_f64(),
            self.l_terms[3].as_f64(),
            self.l_terms[4].as_f64(),
            self.d_total.as_f64(),
            self.sup_u.as_f64(),
            self.sup_v.as_f64(),
            self.sup_w.as_f64(),
            self.grad_w_l2.as_f64(),
        )?;
        Ok(())
    }
}

fn check_nonnegative<T: Scalar>(f: &Field<T>, name: &'static str) -> Result<()> {
    let min = f.min();
    if min < T::zero() {
        return Err(Error::NegativeField {
            field: name,
            min: min.as_f64(),
        });
    }
    Ok(())
}

/// Evaluates the Liapunov functional and fills a full [`EnergyReport`]
/// (including the dissipation).
pub fn liapunov<T: Scalar>(
    state: &State<T>,
    params: &ModelParams<T>,
    grid: &Grid<T>,
) -> Result<EnergyReport<T>> {
    grid.check_field(&state.u)?;
    grid.check_field(&state.v)?;
    grid.check_field(&state.w)?;
    check_nonnegative(&state.u, "u")?;
    check_nonnegative(&state.v, "v")?;

    let (u, v, w) = (&state.u, &state.v, &state.w);
    let vols = grid.volumes();
    let theta = params.theta;
    let half = T::lit(0.5);

    let mut entropy_u = T::zero();
    let mut entropy_v = T::zero();
    let mut interaction = T::zero();
    let mut w_sq = T::zero();
    let mut mass = T::zero();
    for i in 0..grid.num_cells() {
        let vol = vols[i];
        entropy_u += entropy_l_raw(u[i]) * vol;
        entropy_v += entropy_l_theta_raw(v[i], theta) * vol;
        interaction -= (u[i] + v[i]) * w[i] * vol;
        w_sq += w[i] * w[i] * vol;
        mass += (u[i] + v[i]) * vol;
    }

    let grad_w_sq = dirichlet_energy_raw(w, grid);
    let quadratic =
        (T::one() + theta) * half * (params.d * grad_w_sq + params.alpha * w_sq);

    let lap = free_laplacian_raw(w, grid);
    let mut residual_sq = T::zero();
    for i in 0..grid.num_cells() {
        let r = params.d * lap[i] - params.alpha * w[i] + v[i];
        residual_sq += r * r * vols[i];
    }
    let residual_term = half * residual_sq;

    let l_terms = [entropy_u, entropy_v, interaction, quadratic, residual_term];
    let l_total = l_terms.iter().copied().sum();
    let d_total = dissipation(state, params, grid)?;

    Ok(EnergyReport {
        t: state.t,
        mass,
        l_total,
        l_terms,
        d_total,
        sup_u: u.max(),
        sup_v: v.max(),
        sup_w: w.max(),
        grad_w_l2: grad_w_sq.sqrt(),
    })
}

/// Evaluates the dissipation rate; nonnegative on every admissible state.
///
/// Degenerate cells: the gradient term uses harmonic-mean `u` on faces and
/// skips faces where either side is below `1e-30`; the cross-entropy term
/// uses `(a-b)(ln a - ln b) = 0` when both vanish and a capped large value
/// when exactly one does (counted and reported on stderr).
pub fn dissipation<T: Scalar>(
    state: &State<T>,
    params: &ModelParams<T>,
    grid: &Grid<T>,
) -> Result<T> {
    grid.check_field(&state.u)?;
    grid.check_field(&state.v)?;
    grid.check_field(&state.w)?;
    check_nonnegative(&state.u, "u")?;
    check_nonnegative(&state.v, "v")?;

    let (u, v, w) = (&state.u, &state.v, &state.w);
    let vols = grid.volumes();
    let theta = params.theta;
    let floor = T::lit(DEGENERATE_FLOOR);
    let cap = T::lit(CROSS_ENTROPY_CAP);

    // int u |grad(ln u - w)|^2 via harmonic-mean face values
    let mut grad_term = T::zero();
    for face in grid.faces() {
        let (i, j) = (face.left, face.right);
        if u[i] <= floor || u[j] <= floor {
            continue;
        }
        let u_face = T::lit(2.0) * u[i] * u[j] / (u[i] + u[j]);
        let g = (u[j].ln() - w[j]) - (u[i].ln() - w[i]);
        let slope = g / face.dist;
        grad_term += face.area * face.dist * u_face * slope * slope;
    }

    let mut cross_term = T::zero();
    let mut capped = 0usize;
    for i in 0..grid.num_cells() {
        let a = theta * v[i];
        let b = u[i];
        let val = if a > T::zero() && b > T::zero() {
            (a - b) * (a.ln() - b.ln())
        } else if a == b {
            T::zero()
        } else {
            capped += 1;
            cap
        };
        cross_term += val * vols[i];
    }
    if capped > 0 {
        eprintln!(
            "warning: dissipation cross-entropy capped at {CROSS_ENTROPY_CAP:.0e} in {capped} cell(s)"
        );
    }

    let lap = neumann_laplacian_raw(w, grid);
    let mut rho = Field::zeros(grid.num_cells());
    for i in 0..grid.num_cells() {
        rho[i] = params.d * lap[i] - params.alpha * w[i] + v[i];
    }
    let rho_sq = {
        let mut acc = T::zero();
        for i in 0..grid.num_cells() {
            acc += rho[i] * rho[i] * vols[i];
        }
        acc
    };
    let total = grad_term
        + cross_term
        + params.d * dirichlet_energy_raw(&rho, grid)
        + (T::one() + theta + params.alpha) * rho_sq;
    debug_assert!(total >= T::zero(), "dissipation must be nonnegative");
    Ok(total)
}

/// Reduced free energy of a potential `W`:
///
/// ```text
/// F(W) = (1+theta)|O| / (2M) ( D ||grad W||^2 + alpha ||W||^2 )
///      - |O| ln( ||e^W||_1 / |O| )
/// ```
///
/// Intended for zero-mean `W`; a nonzero mean only triggers a warning.
pub fn free_energy<T: Scalar>(
    w: &Field<T>,
    params: &ModelParams<T>,
    grid: &Grid<T>,
) -> Result<T> {
    grid.check_field(w)?;
    let area = grid.area();
    let mean = integrate_raw(w.as_slice(), grid);
    let scale = T::one() + w.max().abs().max(w.min().abs());
    if mean.abs() > T::lit(1e-8) * area * scale {
        eprintln!(
            "warning: free_energy called with nonzero-mean W (int W = {:.3e})",
            mean.as_f64()
        );
    }
    let grad_sq = dirichlet_energy_raw(w, grid);
    let mut w_sq = T::zero();
    let mut exp_int = T::zero();
    for i in 0..grid.num_cells() {
        let vol = grid.volumes()[i];
        w_sq += w[i] * w[i] * vol;
        exp_int += w[i].exp() * vol;
    }
    let quad = (T::one() + params.theta) * area / (T::lit(2.0) * params.mass)
        * (params.d * grad_sq + params.alpha * w_sq);
    Ok(quad - area * (exp_int / area).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::State;
    use crate::grid::{build_radial_grid, build_rect_grid};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn params(mass: f64) -> ModelParams<f64> {
        ModelParams::new(1.0, 1.0, 1.0, mass).unwrap()
    }

    #[test]
    fn liapunov_of_zero_fields() {
        // L(0) = 1 and L_theta(0) = 1/theta cellwise, everything else zero,
        // so L = |O| (1 + 1/theta)
        let grid = build_radial_grid(1.0, 64).unwrap();
        let theta = 0.8;
        let p = ModelParams::new(1.0, 1.0, theta, 1.0).unwrap();
        let n = grid.num_cells();
        let s = State::new(0.0, Field::zeros(n), Field::zeros(n), Field::zeros(n));
        let rep = liapunov(&s, &p, &grid).unwrap();
        assert_relative_eq!(
            rep.l_total,
            PI * (1.0 + 1.0 / theta),
            max_relative = 1e-12
        );
        assert_relative_eq!(rep.d_total, PI * (1.0 / theta) * 0.0 + 0.0, epsilon = 1e-12);
    }

    #[test]
    fn liapunov_homogeneous_matches_scalar_oracle() {
        // theta = D = alpha = 1, disk R = 1, M = 1: the homogeneous steady
        // state is u = v = w = 1/(2 pi); closed-form energy evaluated with
        // scalar arithmetic.
        let grid = build_radial_grid(1.0, 1024).unwrap();
        let p = params(1.0);
        let c = 1.0 / (2.0 * PI);
        let n = grid.num_cells();
        let s = State::new(
            0.0,
            Field::constant(n, c),
            Field::constant(n, c),
            Field::constant(n, c),
        );
        let rep = liapunov(&s, &p, &grid).unwrap();
        let oracle = {
            let m: f64 = 1.0;
            // M ln(theta M/(theta+1)) - M ln ||e^{w}||_1 - M + |O|(1+1/theta)
            //   + (1+theta)/2 (D ||grad w||^2 + alpha ||w||^2)
            m * (m / 2.0).ln() - m * (PI * c.exp()).ln() - m + 2.0 * PI + PI * c * c
        };
        assert_relative_eq!(oracle, 3.365730769, max_relative = 1e-9);
        assert!((rep.l_total - oracle).abs() < 1e-3);
        assert!((rep.l_total - oracle).abs() < 1e-9, "exact for constants");
        assert!(rep.d_total.abs() < 1e-20);
    }

    #[test]
    fn liapunov_terms_sum_to_total() {
        let grid = build_rect_grid(1.0, 1.0, 10, 10).unwrap();
        let p = params(2.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let n = grid.num_cells();
        let mk = |rng: &mut rand_chacha::ChaCha8Rng, lo: f64, hi: f64| {
            Field::from_vec((0..n).map(|_| rng.gen_range(lo..hi)).collect())
        };
        let s = State::new(
            0.0,
            mk(&mut rng, 0.0, 2.0),
            mk(&mut rng, 0.0, 2.0),
            mk(&mut rng, 0.0, 1.0),
        );
        let rep = liapunov(&s, &p, &grid).unwrap();
        let sum: f64 = rep.l_terms.iter().sum();
        assert_relative_eq!(rep.l_total, sum, max_relative = 1e-12);
    }

    #[test]
    fn liapunov_rejects_negative_populations() {
        let grid = build_radial_grid(1.0, 8).unwrap();
        let n = grid.num_cells();
        let mut u = Field::constant(n, 1.0);
        u[0] = -1e-9;
        let s = State::new(0.0, u, Field::zeros(n), Field::zeros(n));
        assert!(matches!(
            liapunov(&s, &params(1.0), &grid),
            Err(Error::NegativeField { .. })
        ));
    }

    #[test]
    fn dissipation_constant_fields_oracle() {
        // u = 2 theta v (v constant), w = 0:
        //   gradient term 0; cross term int theta v ln 2; residual rho = v
        let grid = build_radial_grid(1.0, 256).unwrap();
        let theta = 0.7;
        let alpha = 1.3;
        let p = ModelParams::new(1.0, alpha, theta, 1.0).unwrap();
        let vbar = 0.9;
        let n = grid.num_cells();
        let s = State::new(
            0.0,
            Field::constant(n, 2.0 * theta * vbar),
            Field::constant(n, vbar),
            Field::zeros(n),
        );
        let d = dissipation(&s, &p, &grid).unwrap();
        let oracle =
            theta * vbar * 2.0f64.ln() * PI + (1.0 + theta + alpha) * vbar * vbar * PI;
        assert_relative_eq!(d, oracle, max_relative = 1e-12);
    }

    #[test]
    fn dissipation_zero_on_homogeneous_steady_state() {
        let grid = build_rect_grid(2.0, 1.0, 12, 8).unwrap();
        let theta = 1.5;
        let alpha = 0.6;
        let p = ModelParams::new(0.8, alpha, theta, 1.0).unwrap();
        let area = 2.0;
        let vbar = p.mass / ((1.0 + theta) * area);
        let n = grid.num_cells();
        let s = State::new(
            0.0,
            Field::constant(n, theta * vbar),
            Field::constant(n, vbar),
            Field::constant(n, vbar / alpha),
        );
        let d = dissipation(&s, &p, &grid).unwrap();
        assert!(d.abs() < 1e-12, "D = {d}");
    }

    #[test]
    fn free_energy_special_values() {
        let grid = build_radial_grid(1.0, 128).unwrap();
        let p = params(3.0);
        let n = grid.num_cells();
        assert!(free_energy(&Field::zeros(n), &p, &grid).unwrap().abs() < 1e-12);

        // constant W = c: F = |O| ( (1+theta)|O| alpha c^2 / (2M) - c )
        let c = 0.4;
        let f = free_energy(&Field::constant(n, c), &p, &grid).unwrap();
        let area = PI;
        let oracle = area * ((1.0 + p.theta) * area * p.alpha * c * c / (2.0 * p.mass) - c);
        assert_relative_eq!(f, oracle, max_relative = 1e-12);
    }

    #[test]
    fn free_energy_decreases_along_bubble_shrink() {
        let grid = build_radial_grid(1.0, 512).unwrap();
        let p = params(2.0 * 16.0 * PI);
        let area = PI;
        let mut prev = f64::INFINITY;
        for eta in [0.4, 0.2, 0.1] {
            let xi = Field::from_fn(&grid, |r, _| {
                2.0 * (eta / (eta * eta + PI * r * r)).ln()
            });
            let mean = crate::grid::integrate(&xi, &grid).unwrap() / area;
            let cap = xi.map(|x| x - mean);
            let f = free_energy(&cap, &p, &grid).unwrap();
            assert!(f < prev, "F(eta={eta}) = {f} not below {prev}");
            prev = f;
        }
    }

    #[test]
    fn zero_scaling_reproduces_trivial_case() {
        let grid = build_radial_grid(1.0, 32).unwrap();
        let theta = 2.0;
        let p = ModelParams::new(1.0, 1.0, theta, 1.0).unwrap();
        let n = grid.num_cells();
        let w = Field::from_fn(&grid, |r, _| r).scale(0.0);
        let s = State::new(0.0, Field::zeros(n), Field::zeros(n), w);
        let rep = liapunov(&s, &p, &grid).unwrap();
        assert_relative_eq!(
            rep.l_total,
            PI * (1.0 + 1.0 / theta),
            max_relative = 1e-13
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn dissipation_nonnegative(seed in 0u64..400) {
            let grid = build_radial_grid(1.0, 24).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = grid.num_cells();
            let mut mk = |lo: f64, hi: f64| {
                Field::from_vec((0..n).map(|_| rng.gen_range(lo..hi)).collect())
            };
            let s = State::new(0.0, mk(0.0, 3.0), mk(0.0, 3.0), mk(0.0, 2.0));
            let p = ModelParams::new(0.7, 1.1, 1.4, 1.0).unwrap();
            let d = dissipation(&s, &p, &grid).unwrap();
            prop_assert!(d >= 0.0);
        }

        #[test]
        fn report_terms_always_sum(seed in 0u64..400) {
            let grid = build_rect_grid(1.0, 1.0, 6, 6).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = grid.num_cells();
            let mut mk = |lo: f64, hi: f64| {
                Field::from_vec((0..n).map(|_| rng.gen_range(lo..hi)).collect())
            };
            let s = State::new(0.0, mk(0.0, 2.0), mk(0.0, 2.0), mk(0.0, 1.5));
            let p = ModelParams::new(1.2, 0.5, 0.9, 1.0).unwrap();
            let rep = liapunov(&s, &p, &grid).unwrap();
            let sum: f64 = rep.l_terms.iter().sum();
            prop_assert!((rep.l_total - sum).abs() <= 1e-12 * (1.0 + sum.abs()));
        }
    }
}
