//! Finite-volume geometry and quadrature for the two supported domains.
//!
//! Radial grids are genuine 2-D annuli: cell volumes carry the `2 pi r`
//! weight, so 1-D radial runs report true 2-D masses and energies. All
//! functionals use midpoint (cell-average) quadrature.

use crate::error::{Error, Result};
use crate::model::DomainSpec;
use crate::scalar::Scalar;
use std::io::Write;

/// Interior face between two cells. No-flux boundary faces are not stored;
/// omitting them is exactly the zero-flux condition.
#[derive(Clone, Copy, Debug)]
pub struct Face<T> {
    pub left: usize,
    pub right: usize,
    /// Face area (length in 2-D, lateral area `2 pi r` on radial grids).
    pub area: T,
    /// Distance between the adjacent cell centers.
    pub dist: T,
}

/// Boundary face with the three cells marching inward from the wall,
/// used to extrapolate a one-sided normal derivative.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryFace<T> {
    /// `cells[0]` touches the wall; `cells[1]`, `cells[2]` lie behind it.
    pub cells: [usize; 3],
    pub area: T,
    /// Cell spacing normal to the wall.
    pub dist: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    Radial { n: usize },
    Rect { nx: usize, ny: usize },
}

/// Immutable finite-volume grid.
#[derive(Clone, Debug)]
pub struct Grid<T> {
    domain: DomainSpec<T>,
    kind: GridKind,
    volumes: Vec<T>,
    faces: Vec<Face<T>>,
    boundary: Vec<BoundaryFace<T>>,
    coords: Vec<(T, T)>,
    max_spacing: T,
}

/// Annular-cell grid for the disk of radius `radius`, cells at
/// `r_i = (i + 1/2) h` with `h = radius / n`. Total volume is `pi radius^2`
/// exactly (telescoping annuli). The `r = 0` face has zero area, so the
/// symmetry condition is automatic.
pub fn build_radial_grid<T: Scalar>(radius: T, n: usize) -> Result<Grid<T>> {
    let domain = DomainSpec::RadialDisk { radius };
    domain.validate()?;
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "radial grid needs n >= 4 cells, got {n}"
        )));
    }
    let h = radius / T::from_usize(n).unwrap();
    let pi = T::PI();
    let two = T::lit(2.0);
    let mut volumes = Vec::with_capacity(n);
    let mut coords = Vec::with_capacity(n);
    let mut faces = Vec::with_capacity(n - 1);
    for i in 0..n {
        let fi = T::from_usize(i).unwrap();
        // pi ((i+1)h)^2 - pi (ih)^2 = pi h^2 (2i + 1)
        volumes.push(pi * h * h * (two * fi + T::one()));
        coords.push(((fi + T::lit(0.5)) * h, T::zero()));
        if i > 0 {
            faces.push(Face {
                left: i - 1,
                right: i,
                area: two * pi * fi * h,
                dist: h,
            });
        }
    }
    let boundary = vec![BoundaryFace {
        cells: [n - 1, n - 2, n - 3],
        area: two * pi * radius,
        dist: h,
    }];
    Ok(Grid {
        domain,
        kind: GridKind::Radial { n },
        volumes,
        faces,
        boundary,
        coords,
        max_spacing: h,
    })
}

/// Uniform tensor grid on `[0, lx] x [0, ly]`; cell `(ix, iy)` has index
/// `iy * nx + ix`.
pub fn build_rect_grid<T: Scalar>(lx: T, ly: T, nx: usize, ny: usize) -> Result<Grid<T>> {
    let domain = DomainSpec::Rectangle { lx, ly };
    domain.validate()?;
    if nx < 4 || ny < 4 {
        return Err(Error::InvalidParameter(format!(
            "rectangle grid needs nx, ny >= 4, got {nx} x {ny}"
        )));
    }
    let hx = lx / T::from_usize(nx).unwrap();
    let hy = ly / T::from_usize(ny).unwrap();
    let half = T::lit(0.5);
    let idx = |ix: usize, iy: usize| iy * nx + ix;

    let volumes = vec![hx * hy; nx * ny];
    let mut coords = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            coords.push((
                (T::from_usize(ix).unwrap() + half) * hx,
                (T::from_usize(iy).unwrap() + half) * hy,
            ));
        }
    }

    let mut faces = Vec::with_capacity(ny * (nx - 1) + nx * (ny - 1));
    for iy in 0..ny {
        for ix in 1..nx {
            faces.push(Face {
                left: idx(ix - 1, iy),
                right: idx(ix, iy),
                area: hy,
                dist: hx,
            });
        }
    }
    for iy in 1..ny {
        for ix in 0..nx {
            faces.push(Face {
                left: idx(ix, iy - 1),
                right: idx(ix, iy),
                area: hx,
                dist: hy,
            });
        }
    }

    let mut boundary = Vec::with_capacity(2 * (nx + ny));
    for iy in 0..ny {
        boundary.push(BoundaryFace {
            cells: [idx(0, iy), idx(1, iy), idx(2, iy)],
            area: hy,
            dist: hx,
        });
        boundary.push(BoundaryFace {
            cells: [idx(nx - 1, iy), idx(nx - 2, iy), idx(nx - 3, iy)],
            area: hy,
            dist: hx,
        });
    }
    for ix in 0..nx {
        boundary.push(BoundaryFace {
            cells: [idx(ix, 0), idx(ix, 1), idx(ix, 2)],
            area: hx,
            dist: hy,
        });
        boundary.push(BoundaryFace {
            cells: [idx(ix, ny - 1), idx(ix, ny - 2), idx(ix, ny - 3)],
            area: hx,
            dist: hy,
        });
    }

    Ok(Grid {
        domain,
        kind: GridKind::Rect { nx, ny },
        volumes,
        faces,
        boundary,
        coords,
        max_spacing: hx.max(hy),
    })
}

impl<T: Scalar> Grid<T> {
    pub fn domain(&self) -> &DomainSpec<T> {
        &self.domain
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn num_cells(&self) -> usize {
        self.volumes.len()
    }

    pub fn volumes(&self) -> &[T] {
        &self.volumes
    }

    pub fn faces(&self) -> &[Face<T>] {
        &self.faces
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace<T>] {
        &self.boundary
    }

    /// Cell centers: `(r, 0)` on radial grids, `(x, y)` on rectangles.
    pub fn coords(&self) -> &[(T, T)] {
        &self.coords
    }

    pub fn area(&self) -> T {
        self.domain.area()
    }

    /// Largest cell spacing, the resolution measure for bubble profiles.
    pub fn max_spacing(&self) -> T {
        self.max_spacing
    }

    pub fn check_field(&self, f: &Field<T>) -> Result<()> {
        if f.len() == self.num_cells() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: self.num_cells(),
                got: f.len(),
            })
        }
    }
}

/// Cell-averaged scalar field; one value per grid cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T>(Vec<T>);

impl<T: Scalar> Field<T> {
    pub fn from_vec(values: Vec<T>) -> Self {
        Field(values)
    }

    pub fn constant(n: usize, value: T) -> Self {
        Field(vec![value; n])
    }

    pub fn zeros(n: usize) -> Self {
        Field(vec![T::zero(); n])
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(grid: &Grid<T>, f: impl Fn(T, T) -> T) -> Self {
        Field(grid.coords().iter().map(|&(x, y)| f(x, y)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.0.iter()
    }

    pub fn min(&self) -> T {
        self.0.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.0.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Field(self.0.iter().map(|&x| f(x)).collect())
    }

    /// Componentwise `self + c * other`.
    pub fn axpy(&self, c: T, other: &Field<T>) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Field(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| a + c * b)
                .collect(),
        )
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|x| c * x)
    }
}

impl<T> std::ops::Index<usize> for Field<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> std::ops::IndexMut<usize> for Field<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

/// Midpoint quadrature `sum_i f_i V_i`.
pub fn integrate<T: Scalar>(f: &Field<T>, grid: &Grid<T>) -> Result<T> {
    grid.check_field(f)?;
    Ok(integrate_raw(f.as_slice(), grid))
}

#[inline]
pub(crate) fn integrate_raw<T: Scalar>(f: &[T], grid: &Grid<T>) -> T {
    f.iter()
        .zip(grid.volumes())
        .map(|(&fi, &vi)| fi * vi)
        .sum()
}

/// Discrete L1, L2, and sup norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms<T> {
    pub l1: T,
    pub l2: T,
    pub linf: T,
}

pub fn norms<T: Scalar>(f: &Field<T>, grid: &Grid<T>) -> Result<Norms<T>> {
    grid.check_field(f)?;
    let mut l1 = T::zero();
    let mut l2 = T::zero();
    let mut linf = T::zero();
    for (&fi, &vi) in f.iter().zip(grid.volumes()) {
        l1 += fi.abs() * vi;
        l2 += fi * fi * vi;
        linf = linf.max(fi.abs());
    }
    Ok(Norms {
        l1,
        l2: l2.sqrt(),
        linf,
    })
}

/// One CSV row per cell: `index,x,y,value`. Radial grids write `(r, 0)`.
pub fn write_field_csv<T: Scalar, W: Write>(
    out: &mut W,
    f: &Field<T>,
    grid: &Grid<T>,
) -> Result<()> {
    grid.check_field(f)?;
    writeln!(out, "index,x,y,value")?;
    for (i, (&(x, y), &v)) in grid.coords().iter().zip(f.iter()).enumerate() {
        writeln!(out, "{i},{:.17e},{:.17e},{:.17e}", x.as_f64(), y.as_f64(), v.as_f64())?;
    }
    Ok(())
}
