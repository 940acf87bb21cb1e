//! Uniform periodic Cartesian grids.
//!
//! Values are stored row-major with x fastest: the flat index of node
//! `(i, j, k)` is `i + nx * (j + ny * k)`. The same layout is used by the
//! QVG1 file format in [`io`].

mod io;
mod spectral;

pub use io::{read_grid, write_grid, QVG_MAGIC, QVG_VERSION};
pub use spectral::{integrate, integrate_real, spectral_gradient, spectral_laplacian, Spectral};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

/// Shape, placement and spacing of a uniform grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dims: [usize; 3],
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
}

impl GridSpec {
    pub fn new(dims: [usize; 3], origin: [f64; 3], spacing: [f64; 3]) -> Result<Self> {
        let spec = GridSpec {
            dims,
            origin,
            spacing,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Cubic box `[-half_width, half_width)^3` with `n` nodes per axis,
    /// offset by half a cell so no node sits on a coordinate plane.
    pub fn centered(n: usize, half_width: f64) -> Result<Self> {
        let h = 2.0 * half_width / n as f64;
        Self::new([n; 3], [-half_width + 0.5 * h; 3], [h; 3])
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&d| d < 4) {
            return Err(Error::InvalidGrid(format!(
                "every dimension must be >= 4, got {:?}",
                self.dims
            )));
        }
        if self.spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidGrid(format!(
                "spacing must be positive and finite, got {:?}",
                self.spacing
            )));
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        self.dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or(Error::DimsOverflow)?;
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    /// Edge lengths of the periodic box.
    pub fn extent(&self) -> [f64; 3] {
        [
            self.dims[0] as f64 * self.spacing[0],
            self.dims[1] as f64 * self.spacing[1],
            self.dims[2] as f64 * self.spacing[2],
        ]
    }

    pub fn volume(&self) -> f64 {
        let e = self.extent();
        e[0] * e[1] * e[2]
    }

    /// Smallest spacing over the three axes.
    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let nx = self.dims[0];
        let ny = self.dims[1];
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    #[inline]
    pub fn position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        Vec3::new(
            self.origin[0] + i as f64 * self.spacing[0],
            self.origin[1] + j as f64 * self.spacing[1],
            self.origin[2] + k as f64 * self.spacing[2],
        )
    }

    #[inline]
    pub fn position_of(&self, idx: usize) -> Vec3 {
        let [i, j, k] = self.coords(idx);
        self.position(i, j, k)
    }

    /// Lower and upper corner of the sampled node range.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let lo = Vec3::from(self.origin);
        let hi = self.position(self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1);
        (lo, hi)
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        let (lo, hi) = self.bounds();
        (0..3).all(|a| p[a] >= lo[a] && p[a] <= hi[a])
    }

    /// Flat indices of every node on one of the six box faces.
    pub fn is_boundary(&self, idx: usize) -> bool {
        let c = self.coords(idx);
        (0..3).any(|a| c[a] == 0 || c[a] == self.dims[a] - 1)
    }
}

/// Scalar field on a [`GridSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct Grid3<T> {
    spec: GridSpec,
    values: Vec<T>,
}

pub type ComplexGrid3 = Grid3<Complex64>;
pub type RealGrid3 = Grid3<f64>;

impl<T: Copy + Send + Sync> Grid3<T> {
    pub fn from_values(spec: GridSpec, values: Vec<T>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} points",
                values.len(),
                spec.len()
            )));
        }
        Ok(Grid3 { spec, values })
    }

    pub fn filled(spec: GridSpec, value: T) -> Self {
        Grid3 {
            values: vec![value; spec.len()],
            spec,
        }
    }

    /// Samples `f` at every node. Evaluation runs in parallel; the output
    /// order is fixed by the node index.
    pub fn from_fn<F>(spec: GridSpec, f: F) -> Self
    where
        F: Fn(Vec3) -> T + Sync,
    {
        use rayon::prelude::*;
        let values = (0..spec.len())
            .into_par_iter()
            .map(|idx| f(spec.position_of(idx)))
            .collect();
        Grid3 { spec, values }
    }

    #[inline]
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.values[self.spec.index(i, j, k)]
    }

    pub fn map<U: Copy + Send + Sync>(&self, f: impl Fn(T) -> U) -> Grid3<U> {
        Grid3 {
            spec: self.spec,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map<U: Copy + Send + Sync, V: Copy + Send + Sync>(
        &self,
        other: &Grid3<U>,
        f: impl Fn(T, U) -> V,
    ) -> Result<Grid3<V>> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch);
        }
        Ok(Grid3 {
            spec: self.spec,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

impl ComplexGrid3 {
    pub fn check_finite(&self) -> Result<()> {
        match self
            .values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        let sum = spectral::neumaier_sum(self.values.iter().map(|v| v.norm_sqr()));
        sum * self.spec.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Scales to unit L² norm; returns the norm before scaling.
    pub fn normalize(&mut self) -> f64 {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            self.values.iter_mut().for_each(|v| *v *= inv);
        }
        norm
    }

    pub fn abs(&self) -> RealGrid3 {
        self.map(|v| v.norm())
    }

    pub fn re(&self) -> RealGrid3 {
        self.map(|v| v.re)
    }

    /// `<self|other>` with the cell-volume measure.
    pub fn inner(&self, other: &ComplexGrid3) -> Result<Complex64> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch);
        }
        let re = spectral::neumaier_sum(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a.conj() * b).re),
        );
        let im = spectral::neumaier_sum(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a.conj() * b).im),
        );
        Ok(Complex64::new(re, im) * self.spec.cell_volume())
    }
}

impl RealGrid3 {
    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn to_complex(&self) -> ComplexGrid3 {
        self.map(|v| Complex64::new(v, 0.0))
    }
}

/// Real 3-vector field, one component array per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorGrid3 {
    spec: GridSpec,
    components: [Vec<f64>; 3],
}

impl VectorGrid3 {
    pub fn new(spec: GridSpec, components: [Vec<f64>; 3]) -> Result<Self> {
        spec.validate()?;
        if components.iter().any(|c| c.len() != spec.len()) {
            return Err(Error::InvalidGrid(
                "vector component lengths differ from the grid size".into(),
            ));
        }
        Ok(VectorGrid3 { spec, components })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        let n = spec.len();
        VectorGrid3 {
            spec,
            components: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        }
    }

    pub fn from_fn<F>(spec: GridSpec, f: F) -> Self
    where
        F: Fn(Vec3) -> Vec3 + Sync,
    {
        use rayon::prelude::*;
        let v: Vec<Vec3> = (0..spec.len())
            .into_par_iter()
            .map(|idx| f(spec.position_of(idx)))
            .collect();
        VectorGrid3 {
            spec,
            components: [
                v.iter().map(|p| p.x).collect(),
                v.iter().map(|p| p.y).collect(),
                v.iter().map(|p| p.z).collect(),
            ],
        }
    }

    #[inline]
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    #[inline]
    pub fn component(&self, axis: usize) -> &[f64] {
        &self.components[axis]
    }

    #[inline]
    pub fn component_mut(&mut self, axis: usize) -> &mut [f64] {
        &mut self.components[axis]
    }

    #[inline]
    pub fn at(&self, idx: usize) -> Vec3 {
        Vec3::new(
            self.components[0][idx],
            self.components[1][idx],
            self.components[2][idx],
        )
    }

    pub fn check_finite(&self) -> Result<()> {
        for c in &self.components {
            if let Some(index) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(())
    }

    pub fn max_norm(&self) -> f64 {
        (0..self.spec.len())
            .map(|i| self.at(i).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_dims_and_bad_spacing() {
        assert!(GridSpec::new([3, 8, 8], [0.0; 3], [1.0; 3]).is_err());
        assert!(GridSpec::new([8, 8, 8], [0.0; 3], [1.0, 0.0, 1.0]).is_err());
        assert!(matches!(
            GridSpec::new([usize::MAX / 2, 4, 4], [0.0; 3], [1.0; 3]),
            Err(Error::DimsOverflow)
        ));
    }

    #[test]
    fn index_layout_is_x_fastest() {
        let spec = GridSpec::new([4, 5, 6], [0.0; 3], [1.0; 3]).unwrap();
        assert_eq!(spec.index(1, 0, 0), 1);
        assert_eq!(spec.index(0, 1, 0), 4);
        assert_eq!(spec.index(0, 0, 1), 20);
        for idx in [0, 7, 33, 119] {
            let [i, j, k] = spec.coords(idx);
            assert_eq!(spec.index(i, j, k), idx);
        }
    }

    #[test]
    fn centered_grid_avoids_coordinate_planes() {
        let spec = GridSpec::centered(8, 2.0).unwrap();
        for idx in 0..spec.len() {
            let p = spec.position_of(idx);
            assert!(p.x.abs() > 1e-12 && p.y.abs() > 1e-12 && p.z.abs() > 1e-12);
        }
        let (lo, hi) = spec.bounds();
        assert!((lo.x + hi.x).abs() < 1e-12);
    }

    #[test]
    fn value_count_must_match() {
        let spec = GridSpec::new([4, 4, 4], [0.0; 3], [1.0; 3]).unwrap();
        assert!(RealGrid3::from_values(spec, vec![0.0; 63]).is_err());
        assert!(RealGrid3::from_values(spec, vec![0.0; 64]).is_ok());
    }
}
