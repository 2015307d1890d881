//! Physical parameters, entropy functions, and critical-mass thresholds.
//!
//! The model couples a moving population `u`, a static population `v`, and a
//! chemoattractant `w`:
//!
//! ```text
//! du/dt = div(grad u - u grad w) + theta*v - u
//! dv/dt = u - theta*v
//! dw/dt = D lap w - alpha*w + v
//! ```
//!
//! with no-flux boundaries. The total population mass `M = ||u + v||_1` is
//! conserved and separates two regimes: below `4*pi*(1+theta)*D` (general
//! domains) or `8*pi*(1+theta)*D` (radially symmetric data in a disk) all
//! solutions stay bounded; above, unbounded solutions exist.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default relative tolerance for flagging masses near an excluded multiple.
pub const EXCLUDED_MASS_REL_TOL: f64 = 1e-6;

/// Physical constants and total population mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<T> {
    /// Diffusion coefficient of the chemoattractant.
    pub d: T,
    /// Decay rate of the chemoattractant.
    pub alpha: T,
    /// Exchange rate from the static to the moving population.
    pub theta: T,
    /// Total mass of `u + v`.
    pub mass: T,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(d: T, alpha: T, theta: T, mass: T) -> Result<Self> {
        let p = Self {
            d,
            alpha,
            theta,
            mass,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("D", self.d),
            ("alpha", self.alpha),
            ("theta", self.theta),
            ("M", self.mass),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Supported computational domains.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainSpec<T> {
    RadialDisk { radius: T },
    Rectangle { lx: T, ly: T },
}

impl<T: Scalar> DomainSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DomainSpec::RadialDisk { radius } => radius > T::zero() && radius.is_finite(),
            DomainSpec::Rectangle { lx, ly } => {
                lx > T::zero() && ly > T::zero() && lx.is_finite() && ly.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "domain lengths must be positive: {self:?}"
            )))
        }
    }

    pub fn area(&self) -> T {
        match *self {
            DomainSpec::RadialDisk { radius } => T::PI() * radius * radius,
            DomainSpec::Rectangle { lx, ly } => lx * ly,
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self, DomainSpec::RadialDisk { .. })
    }
}

/// Entropy `L(r) = r ln r - r + 1`, with the continuous extension `0 ln 0 = 0`.
///
/// Nonnegative, convex, and zero exactly at `r = 1`.
pub fn entropy_l<T: Scalar>(r: T) -> Result<T> {
    if r < T::zero() {
        return Err(Error::InvalidParameter(format!(
            "entropy argument must be nonnegative, got {r}"
        )));
    }
    Ok(entropy_l_raw(r))
}

/// `entropy_l` without the domain check; callers guarantee `r >= 0`.
#[inline]
pub(crate) fn entropy_l_raw<T: Scalar>(r: T) -> T {
    if r > T::zero() {
        r * r.ln() - r + T::one()
    } else {
        T::one()
    }
}

/// Scaled entropy `L_theta(r) = L(theta r) / theta`, zero exactly at `r = 1/theta`.
pub fn entropy_l_theta<T: Scalar>(r: T, theta: T) -> Result<T> {
    if !(theta > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "theta must be positive, got {theta}"
        )));
    }
    if r < T::zero() {
        return Err(Error::InvalidParameter(format!(
            "entropy argument must be nonnegative, got {r}"
        )));
    }
    Ok(entropy_l_theta_raw(r, theta))
}

#[inline]
pub(crate) fn entropy_l_theta_raw<T: Scalar>(r: T, theta: T) -> T {
    entropy_l_raw(theta * r) / theta
}

/// Mass threshold separating guaranteed boundedness from existence of
/// unbounded solutions: `4 pi (1+theta) D` on general domains, twice that
/// for radially symmetric data in a disk.
pub fn critical_mass<T: Scalar>(params: &ModelParams<T>, radial: bool) -> T {
    let base = T::lit(4.0) * T::PI() * (T::one() + params.theta) * params.d;
    if radial {
        T::lit(2.0) * base
    } else {
        base
    }
}

/// True when `mass` lies within relative distance `rel_tol` of an integer
/// multiple of `4 pi (1+theta) D`. The general-domain blowup result excludes
/// exactly those multiples, so experiment drivers warn about them.
pub fn is_near_excluded_multiple<T: Scalar>(
    params: &ModelParams<T>,
    mass: T,
    rel_tol: T,
) -> bool {
    let base = critical_mass(params, false);
    let k = (mass / base).round();
    if k < T::one() {
        return false;
    }
    let nearest = k * base;
    (mass - nearest).abs() <= rel_tol * nearest
}
