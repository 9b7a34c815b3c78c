//! Uniform N×N grid on the unit torus and the field containers that live on it.
//!
//! The fundamental cell is [−1/2, 1/2)² with node coordinates
//! x_ij = h·(i − n/2, j − n/2), h = 1/n, so node (n/2, n/2) is the origin.
//! All fields are stored row-major by (i, j): index = i·n + j.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Minimum grid size accepted by [`GridSpec::new`].
pub const MIN_GRID: usize = 8;

/// Grid geometry: size, spacing, and the node coordinate map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    n: usize,
}

impl GridSpec {
    /// Build a grid with `n` nodes per axis; `n` must be a power of two ≥ 8.
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_GRID {
            return Err(Error::Grid(format!("n = {n} is below the minimum {MIN_GRID}")));
        }
        if !n.is_power_of_two() {
            return Err(Error::Grid(format!("n = {n} is not a power of two")));
        }
        Ok(GridSpec { n })
    }

    /// Nodes per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid spacing h = 1/n (exact in binary arithmetic for power-of-two n).
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Coordinate of node (i, j): h·(i − n/2, j − n/2) ∈ [−1/2, 1/2)².
    pub fn coord(&self, i: usize, j: usize) -> (f64, f64) {
        let half = self.n as f64 / 2.0;
        (self.h() * (i as f64 - half), self.h() * (j as f64 - half))
    }

    /// Row-major storage index of node (i, j).
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// Integer Fourier mode associated with storage index `idx` along one axis:
    /// m = idx for idx < n/2, m = idx − n otherwise, so m ∈ {−n/2, …, n/2−1}.
    #[inline]
    pub fn mode(&self, idx: usize) -> i64 {
        if idx < self.n / 2 {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    /// Storage index along one axis of mode m ∈ {−n/2, …, n/2−1}.
    #[inline]
    pub fn mode_idx(&self, m: i64) -> usize {
        if m >= 0 {
            m as usize
        } else {
            (m + self.n as i64) as usize
        }
    }
}

/// Real scalar samples on the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    /// Zero field.
    pub fn zeros(grid: GridSpec) -> Self {
        ScalarField {
            grid,
            values: vec![0.0; grid.n() * grid.n()],
        }
    }

    /// Sample a function of the node coordinate.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (x, y) = grid.coord(i, j);
                values.push(f(x, y));
            }
        }
        ScalarField { grid, values }
    }

    /// Wrap an existing value vector; length must be n².
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        let n = grid.n();
        if values.len() != n * n {
            return Err(Error::GridMismatch(format!(
                "expected {} values for n = {n}, got {}",
                n * n,
                values.len()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.grid.idx(i, j);
        self.values[idx] = v;
    }

    /// Flat row-major view of the samples.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Largest absolute sample.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// True when every sample is finite.
    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Velocity samples (u₁, u₂) on the grid nodes, stored as two scalar planes.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: GridSpec,
    u1: Vec<f64>,
    u2: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        let len = grid.n() * grid.n();
        VectorField {
            grid,
            u1: vec![0.0; len],
            u2: vec![0.0; len],
        }
    }

    /// Sample a vector function of the node coordinate.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(f64, f64) -> (f64, f64)) -> Self {
        let n = grid.n();
        let mut u1 = Vec::with_capacity(n * n);
        let mut u2 = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (x, y) = grid.coord(i, j);
                let (a, b) = f(x, y);
                u1.push(a);
                u2.push(b);
            }
        }
        VectorField { grid, u1, u2 }
    }

    /// Assemble from component planes; lengths must be n².
    pub fn from_components(grid: GridSpec, u1: Vec<f64>, u2: Vec<f64>) -> Result<Self> {
        let len = grid.n() * grid.n();
        if u1.len() != len || u2.len() != len {
            return Err(Error::GridMismatch(format!(
                "expected {len} values per component, got {} and {}",
                u1.len(),
                u2.len()
            )));
        }
        Ok(VectorField { grid, u1, u2 })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> (f64, f64) {
        let idx = self.grid.idx(i, j);
        (self.u1[idx], self.u2[idx])
    }

    pub fn u1(&self) -> &[f64] {
        &self.u1
    }

    pub fn u2(&self) -> &[f64] {
        &self.u2
    }

    /// Maximum of |u₁| + |u₂| over the nodes (the advective speed used for CFL).
    pub fn max_speed(&self) -> f64 {
        self.u1
            .iter()
            .zip(&self.u2)
            .fold(0.0, |a, (p, q)| a.max(p.abs() + q.abs()))
    }

    /// True when both components are free of NaN/Inf.
    pub fn all_finite(&self) -> bool {
        self.u1.iter().chain(&self.u2).all(|v| v.is_finite())
    }
}

/// Complex Fourier coefficients indexed by integer mode m ∈ {−n/2, …, n/2−1}²;
/// the physical wavenumber is k = 2π·m. Storage order matches the DFT layout:
/// axis index i holds mode [`GridSpec::mode`]`(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeff: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralField {
            grid,
            coeff: vec![Complex64::new(0.0, 0.0); grid.n() * grid.n()],
        }
    }

    /// Wrap an existing coefficient vector; length must be n².
    pub fn from_coeff(grid: GridSpec, coeff: Vec<Complex64>) -> Result<Self> {
        let n = grid.n();
        if coeff.len() != n * n {
            return Err(Error::GridMismatch(format!(
                "expected {} coefficients for n = {n}, got {}",
                n * n,
                coeff.len()
            )));
        }
        Ok(SpectralField { grid, coeff })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Coefficient of mode m = (m1, m2), each in {−n/2, …, n/2−1}.
    pub fn coeff(&self, m1: i64, m2: i64) -> Complex64 {
        let i = self.grid.mode_idx(m1);
        let j = self.grid.mode_idx(m2);
        self.coeff[self.grid.idx(i, j)]
    }

    /// Set the coefficient of mode m = (m1, m2).
    pub fn set_coeff(&mut self, m1: i64, m2: i64, v: Complex64) {
        let i = self.grid.mode_idx(m1);
        let j = self.grid.mode_idx(m2);
        let idx = self.grid.idx(i, j);
        self.coeff[idx] = v;
    }

    /// Flat row-major coefficient storage (axis order matches the real fields).
    pub fn raw(&self) -> &[Complex64] {
        &self.coeff
    }

    pub fn raw_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeff
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(GridSpec::new(12).is_err(), "12 is not a power of two");
        assert!(GridSpec::new(4).is_err(), "below minimum size");
        assert!(GridSpec::new(0).is_err());
        assert!(GridSpec::new(8).is_ok());
        assert!(GridSpec::new(1024).is_ok());
    }

    #[test]
    fn grid_spacing_and_coords() {
        let g = GridSpec::new(8).unwrap();
        assert_eq!(g.h(), 0.125);
        assert_eq!(g.coord(0, 0), (-0.5, -0.5));
        assert_eq!(g.coord(4, 4), (0.0, 0.0), "node (n/2, n/2) is the origin");
        assert_eq!(g.coord(7, 0).0, 0.375);

        let g = GridSpec::new(1024).unwrap();
        assert_eq!(g.h(), 0.0009765625);
        // h * n is exactly 1 for power-of-two n.
        assert_eq!(g.h() * g.n() as f64, 1.0);
    }

    #[test]
    fn mode_index_round_trip() {
        let g = GridSpec::new(16).unwrap();
        for idx in 0..16 {
            let m = g.mode(idx);
            assert!((-8..8).contains(&m));
            assert_eq!(g.mode_idx(m), idx);
        }
        assert_eq!(g.mode(0), 0);
        assert_eq!(g.mode(7), 7);
        assert_eq!(g.mode(8), -8, "Nyquist index maps to -n/2");
        assert_eq!(g.mode(15), -1);
    }

    #[test]
    fn scalar_field_round_trip() {
        let g = GridSpec::new(8).unwrap();
        let f = ScalarField::from_fn(g, |x, y| x + 2.0 * y);
        assert_eq!(f.get(4, 4), 0.0);
        assert_eq!(f.get(0, 0), -1.5);
        assert_eq!(f.values().len(), 64);
        assert!(ScalarField::from_values(g, vec![0.0; 63]).is_err());
    }

    #[test]
    fn vector_field_max_speed() {
        let g = GridSpec::new(8).unwrap();
        let u = VectorField::from_fn(g, |x, _| (x, -2.0 * x));
        // Largest |x| on the grid is 0.5 at the i=0 column.
        assert_eq!(u.max_speed(), 0.5 + 1.0);
        assert_eq!(VectorField::zeros(g).max_speed(), 0.0);
    }
}
