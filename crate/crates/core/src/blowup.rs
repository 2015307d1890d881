//! Concentrated "bubble" initial data and energy sweeps demonstrating that
//! the Liapunov functional is unbounded below for supercritical mass.
//!
//! The profile `xi_eta(x) = 2 ln(eta / (eta^2 + pi |x|^2))` solves
//! `-lap xi_eta = 8 pi e^{xi_eta}`. Its zero-mean shift `Xi_eta`, raised by
//! a variant-specific constant `nu` that keeps `w >= 0`, together with
//!
//! ```text
//! u_eta = U_eta e^{xi}/||e^{xi}||,  v_eta = V_eta e^{xi}/||e^{xi}||,
//! U_eta = M - 8 pi D ||e^{xi}||_1,  V_eta = 8 pi D ||e^{xi}||_1,
//! ```
//!
//! yields admissible states of exact mass `M` whose energy diverges to
//! `-infinity` as `eta -> 0` once `M` exceeds the critical threshold.
//! `||e^{xi}||_1` is evaluated with the grid quadrature, not the closed
//! form, so mass membership is exact at the discrete level.

use crate::dynamics::State;
use crate::error::{Error, Result};
use crate::functionals::{free_energy, liapunov};
use crate::grid::{integrate_raw, Field, Grid};
use crate::model::{critical_mass, DomainSpec, ModelParams};
use crate::scalar::Scalar;

/// Bubble placement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BubbleVariant {
    /// Centered in the radial disk.
    DiskCenter,
    /// Centered at the midpoint of the bottom edge of the rectangle (the
    /// flat-boundary specialization of the general boundary construction).
    FlatBoundary,
}

impl BubbleVariant {
    /// Bubble center in grid coordinates.
    pub fn center<T: Scalar>(&self, grid: &Grid<T>) -> Result<(T, T)> {
        match (self, grid.domain()) {
            (BubbleVariant::DiskCenter, DomainSpec::RadialDisk { .. }) => {
                Ok((T::zero(), T::zero()))
            }
            (BubbleVariant::FlatBoundary, DomainSpec::Rectangle { lx, .. }) => {
                Ok((*lx * T::lit(0.5), T::zero()))
            }
            _ => Err(Error::InvalidParameter(
                "DiskCenter requires a radial grid, FlatBoundary a rectangle".into(),
            )),
        }
    }

    /// Whether the relevant critical mass is the radial one.
    pub fn radial(&self) -> bool {
        matches!(self, BubbleVariant::DiskCenter)
    }
}

/// Concentrated initial data with its construction metadata.
#[derive(Clone, Debug)]
pub struct BubbleData<T> {
    pub eta: T,
    pub variant: BubbleVariant,
    /// Additive shift keeping `w` nonnegative.
    pub nu_shift: T,
    /// Mass of the `u` component.
    pub u_mass: T,
    /// Mass of the `v` component.
    pub v_mass: T,
    pub state: State<T>,
}

/// Pointwise profile value at squared distance `r2` from the center.
#[inline]
pub fn xi_eta<T: Scalar>(eta: T, r2: T) -> T {
    T::lit(2.0) * (eta / (eta * eta + T::PI() * r2)).ln()
}

/// Samples `xi_eta` at cell centers and its zero-mean shift computed with
/// the discrete mean.
pub fn bubble_profile<T: Scalar>(
    eta: T,
    center: (T, T),
    grid: &Grid<T>,
) -> Result<(Field<T>, Field<T>)> {
    if !(eta > T::zero() && eta < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "eta must lie in (0, 1), got {eta}"
        )));
    }
    if grid.domain().is_radial() && (center.0 != T::zero() || center.1 != T::zero()) {
        return Err(Error::InvalidParameter(
            "radial grids only support the centered bubble".into(),
        ));
    }
    let (cx, cy) = center;
    let xi = Field::from_fn(grid, |x, y| {
        let dx = x - cx;
        let dy = y - cy;
        xi_eta(eta, dx * dx + dy * dy)
    });
    let mean = integrate_raw(xi.as_slice(), grid) / grid.area();
    let capital = xi.map(|v| v - mean);
    Ok((xi, capital))
}

/// Shift constant for the disk: `nu_4 = 2 ln(1 + pi R^2) + 2/(pi R^2)`.
fn disk_shift<T: Scalar>(radius: T) -> T {
    let pr2 = T::PI() * radius * radius;
    T::lit(2.0) * (T::one() + pr2).ln() + T::lit(2.0) / pr2
}

/// Shift constant and patch radius for the flat-boundary variant:
/// `nu_1 = 2 ln(1 + 4 pi Rt^2) + (1/|O|)(1 + M/(16 pi D)) + 4 |ln a|`
/// with `Rt = diam(O)/2` and `a` the largest patch radius compatible with
/// the smallness conditions `eta0^2 + pi a^2 < 1` and
/// `eta0^2 < (M - 4 pi D) pi a^4 / (32 D |O|)` that also fits the edge.
fn flat_shift<T: Scalar>(
    params: &ModelParams<T>,
    grid: &Grid<T>,
    eta0: T,
) -> Result<(T, T)> {
    let DomainSpec::Rectangle { lx, ly } = *grid.domain() else {
        return Err(Error::InvalidParameter(
            "flat-boundary shift needs a rectangle".into(),
        ));
    };
    let pi = T::PI();
    let area = grid.area();
    let four_pi_d = T::lit(4.0) * pi * params.d;
    if params.mass <= four_pi_d {
        return Err(Error::InvalidParameter(format!(
            "flat-boundary bubble needs M > 4 pi D = {}, got {}",
            four_pi_d.as_f64(),
            params.mass
        )));
    }
    let a_cap = ((T::one() - eta0 * eta0) / pi).sqrt() * T::lit(0.99);
    let a = a_cap.min(lx * T::lit(0.5)).min(ly);
    let lhs = eta0 * eta0;
    let rhs = (params.mass - four_pi_d) * pi * a.powi(4) / (T::lit(32.0) * params.d * area);
    if lhs >= rhs {
        return Err(Error::InvalidParameter(format!(
            "smallness condition fails: eta0^2 = {} >= {} with patch radius a = {}",
            lhs.as_f64(),
            rhs.as_f64(),
            a.as_f64()
        )));
    }
    let diam = (lx * lx + ly * ly).sqrt();
    let rt = diam * T::lit(0.5);
    let nu1 = T::lit(2.0) * (T::one() + T::lit(4.0) * pi * rt * rt).ln()
        + (T::one() + params.mass / (T::lit(16.0) * pi * params.d)) / area
        + T::lit(4.0) * a.ln().abs();
    eprintln!(
        "flat-boundary bubble: patch radius a = {:.6}, nu_1 = {:.6}",
        a.as_f64(),
        nu1.as_f64()
    );
    Ok((a, nu1))
}

/// Assembles `(u_eta, v_eta, w_eta)` of exact discrete mass `M`.
///
/// `eta0` is the smallest concentration scale the construction must cover;
/// sweeps pass their final `eta` so all rows share one shift constant.
pub fn bubble_initial_data_with_eta0<T: Scalar>(
    eta: T,
    eta0: T,
    params: &ModelParams<T>,
    grid: &Grid<T>,
    variant: BubbleVariant,
) -> Result<BubbleData<T>> {
    params.validate()?;
    let center = variant.center(grid)?;
    let (xi, capital_xi) = bubble_profile(eta, center, grid)?;

    let m_c = critical_mass(params, variant.radial());
    if params.mass <= m_c {
        eprintln!(
            "note: mass {} is at or below the {} threshold {:.6}; bubble data exist but \
             energy divergence is not guaranteed",
            params.mass,
            if variant.radial() { "radial" } else { "general-domain" },
            m_c.as_f64()
        );
    }

    let nu = match variant {
        BubbleVariant::DiskCenter => {
            let DomainSpec::RadialDisk { radius } = *grid.domain() else {
                unreachable!("checked by center()");
            };
            disk_shift(radius)
        }
        BubbleVariant::FlatBoundary => flat_shift(params, grid, eta0)?.1,
    };

    let exp_xi = xi.map(T::exp);
    let quad = integrate_raw(exp_xi.as_slice(), grid);
    let v_mass = T::lit(8.0) * T::PI() * params.d * quad;
    let u_mass = params.mass - v_mass;
    if u_mass <= T::zero() {
        return Err(Error::MassInfeasible {
            eta: eta.as_f64(),
            u_mass: u_mass.as_f64(),
        });
    }

    let profile = exp_xi.scale(T::one() / quad);
    let u = profile.scale(u_mass);
    let v = profile.scale(v_mass);
    let w = capital_xi.map(|x| x + nu);

    let w_min = w.min();
    if w_min < T::zero() {
        return Err(Error::InvariantViolation(format!(
            "bubble chemoattractant dips below zero (min = {:.3e}); shift nu = {} too small",
            w_min.as_f64(),
            nu.as_f64()
        )));
    }

    let state = State::new(T::zero(), u, v, w);
    let mass = state.mass(grid)?;
    let rel = ((mass - params.mass) / params.mass).abs();
    if rel > T::lit(1e-10) {
        return Err(Error::InvariantViolation(format!(
            "bubble mass {} deviates from M = {} by {:.3e} relative",
            mass.as_f64(),
            params.mass.as_f64(),
            rel.as_f64()
        )));
    }

    Ok(BubbleData {
        eta,
        variant,
        nu_shift: nu,
        u_mass,
        v_mass,
        state,
    })
}

/// [`bubble_initial_data_with_eta0`] with `eta0 = eta`.
pub fn bubble_initial_data<T: Scalar>(
    eta: T,
    params: &ModelParams<T>,
    grid: &Grid<T>,
    variant: BubbleVariant,
) -> Result<BubbleData<T>> {
    bubble_initial_data_with_eta0(eta, eta, params, grid, variant)
}

/// One row of an eta sweep.
#[derive(Clone, Copy, Debug)]
pub struct SweepRow<T> {
    pub eta: T,
    pub liapunov: T,
    /// Free energy of the zero-mean profile `Xi_eta`.
    pub free_energy: T,
    pub u_mass: T,
    pub v_mass: T,
    pub min_w: T,
}

pub const SWEEP_CSV_HEADER: &str = "eta,L,F,U_eta,V_eta,min_w";

impl<T: Scalar> SweepRow<T> {
    pub fn write_csv_row<W: std::io::Write>(&self, out: &mut W) -> Result<()> {
        writeln!(
            out,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            self.eta.as_f64(),
            self.liapunov.as_f64(),
            self.free_energy.as_f64(),
            self.u_mass.as_f64(),
            self.v_mass.as_f64(),
            self.min_w.as_f64(),
        )?;
        Ok(())
    }
}

/// Evaluates the energy of the bubble family down a strictly decreasing
/// eta list. For supercritical mass the Liapunov column must decrease
/// strictly; a violation is reported as an invariant failure. Rows are
/// independent and evaluated on `jobs` threads.
pub fn eta_sweep<T: Scalar>(
    etas: &[T],
    params: &ModelParams<T>,
    grid: &Grid<T>,
    variant: BubbleVariant,
    jobs: usize,
) -> Result<Vec<SweepRow<T>>> {
    if etas.is_empty() {
        return Err(Error::NonDescendingEtas);
    }
    for pair in etas.windows(2) {
        if !(pair[1] < pair[0]) {
            return Err(Error::NonDescendingEtas);
        }
    }
    if !(etas[0] < T::one() && etas[etas.len() - 1] > T::zero()) {
        return Err(Error::NonDescendingEtas);
    }
    let eta_min = etas[etas.len() - 1];
    let h = grid.max_spacing();
    let required = eta_min / T::lit(8.0);
    if h > required {
        let cells = (T::lit(8.0) / eta_min
            * match *grid.domain() {
                DomainSpec::RadialDisk { radius } => radius,
                DomainSpec::Rectangle { lx, ly } => lx.max(ly),
            })
        .ceil();
        return Err(Error::UnderResolved {
            eta: eta_min.as_f64(),
            h: h.as_f64(),
            required: required.as_f64(),
            required_cells: cells.to_usize().unwrap_or(usize::MAX),
        });
    }

    let evaluate = |&eta: &T| -> Result<SweepRow<T>> {
        let data = bubble_initial_data_with_eta0(eta, eta_min, params, grid, variant)?;
        let report = liapunov(&data.state, params, grid)?;
        let center = variant.center(grid)?;
        let (_, capital_xi) = bubble_profile(eta, center, grid)?;
        let f = free_energy(&capital_xi, params, grid)?;
        Ok(SweepRow {
            eta,
            liapunov: report.l_total,
            free_energy: f,
            u_mass: data.u_mass,
            v_mass: data.v_mass,
            min_w: data.state.w.min(),
        })
    };

    let jobs = jobs.max(1).min(etas.len());
    let rows: Vec<SweepRow<T>> = if jobs == 1 {
        etas.iter().map(|e| evaluate(e)).collect::<Result<_>>()?
    } else {
        let mut slots: Vec<Option<Result<SweepRow<T>>>> = Vec::new();
        slots.resize_with(etas.len(), || None);
        std::thread::scope(|scope| {
            let chunk = etas.len().div_ceil(jobs);
            for (band, slot_band) in etas.chunks(chunk).zip(slots.chunks_mut(chunk)) {
                scope.spawn(|| {
                    for (eta, slot) in band.iter().zip(slot_band.iter_mut()) {
                        *slot = Some(evaluate(eta));
                    }
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.expect("sweep row evaluated"))
            .collect::<Result<_>>()?
    };

    let supercritical = params.mass > critical_mass(params, variant.radial());
    if supercritical {
        for pair in rows.windows(2) {
            if !(pair[1].liapunov < pair[0].liapunov) {
                return Err(Error::InvariantViolation(format!(
                    "supercritical sweep not strictly decreasing: L({}) = {} vs L({}) = {}",
                    pair[0].eta.as_f64(),
                    pair[0].liapunov.as_f64(),
                    pair[1].eta.as_f64(),
                    pair[1].liapunov.as_f64()
                )));
            }
        }
    }

    Ok(rows)
}
