//! Spectral and physical vector fields on a [`Grid`].
//!
//! Spectral coefficients use the continuum scaling of the whole-space Fourier
//! transform, `u_hat(xi) = (L/n)^3 * sum_x u(x) exp(-i xi.x)`, with inverse
//! `u(x) = L^-3 * sum_xi u_hat(xi) exp(i xi.x)`. Parseval then reads
//! `(L/n)^3 * sum_x |u|^2 = L^-3 * sum_xi |u_hat|^2`, and every spectral norm
//! in this crate carries the `L^-3` weight so that it equals the physical
//! `L^2` norm.

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::Grid;

/// Three-component field of Fourier coefficients over the full lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    comps: [Vec<Complex64>; 3],
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        let zero = vec![Complex64::default(); grid.len()];
        Self {
            grid,
            comps: [zero.clone(), zero.clone(), zero],
        }
    }

    pub fn from_components(grid: Grid, comps: [Vec<Complex64>; 3]) -> Result<Self> {
        for c in &comps {
            if c.len() != grid.len() {
                return Err(crate::Error::InvalidGrid(format!(
                    "component length {} does not match lattice size {}",
                    c.len(),
                    grid.len()
                )));
            }
        }
        Ok(Self { grid, comps })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn component(&self, i: usize) -> &[Complex64] {
        &self.comps[i]
    }

    #[inline]
    pub fn component_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.comps[i]
    }

    pub fn components(&self) -> &[Vec<Complex64>; 3] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [Vec<Complex64>; 3] {
        &mut self.comps
    }

    pub fn into_components(self) -> [Vec<Complex64>; 3] {
        self.comps
    }

    #[inline]
    pub fn mode(&self, idx: usize) -> [Complex64; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    #[inline]
    pub fn set_mode(&mut self, idx: usize, v: [Complex64; 3]) {
        for (c, vi) in self.comps.iter_mut().zip(v) {
            c[idx] = vi;
        }
    }

    /// `sum_j |u_hat_j(xi)|^2` at one mode.
    #[inline]
    pub fn mode_energy(&self, idx: usize) -> f64 {
        self.comps.iter().map(|c| c[idx].norm_sqr()).sum()
    }

    /// Per-mode `|u_hat(xi)|^2`, in storage order.
    pub fn mode_energies(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.mode_energy(i)).collect()
    }

    /// Physical `L^2` norm squared.
    pub fn norm_sq(&self) -> f64 {
        let sum: f64 = (0..self.grid.len()).map(|i| self.mode_energy(i)).sum();
        sum * self.grid.spectral_weight()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Real `L^2` inner product `<self, other>`.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        let sum: f64 = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum::<f64>())
            .sum();
        Ok(sum * self.grid.spectral_weight())
    }

    /// Largest coefficient magnitude `max_xi |u_hat(xi)|`.
    pub fn max_mode_norm(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| self.mode_energy(i).sqrt())
            .fold(0.0, f64::max)
    }

    /// `max_xi |xi . u_hat(xi)|`.
    pub fn max_divergence(&self) -> f64 {
        let k = self.grid.axis_wavenumbers();
        let n = self.grid.n();
        let mut worst = 0.0f64;
        for idx in 0..self.grid.len() {
            let [ix, iy, iz] = [idx / (n * n), (idx / n) % n, idx % n];
            let d = self.comps[0][idx] * k[ix] + self.comps[1][idx] * k[iy] + self.comps[2][idx] * k[iz];
            worst = worst.max(d.norm());
        }
        worst
    }

    /// `max_xi |u_hat(-xi) - conj(u_hat(xi))|`; zero for real physical data.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for idx in 0..self.grid.len() {
            let c = self.grid.conjugate_index(idx);
            for comp in &self.comps {
                worst = worst.max((comp[c] - comp[idx].conj()).norm());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    pub fn scale(&mut self, factor: f64) {
        for c in &mut self.comps {
            for z in c.iter_mut() {
                *z *= factor;
            }
        }
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.scale(factor);
        self
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, factor: f64, other: &SpectralField) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y * factor;
            }
        }
        Ok(())
    }

    /// Max-norm distance over all modes and components.
    pub fn max_abs_diff(&self, other: &SpectralField) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        let mut worst = 0.0f64;
        for (a, b) in self.comps.iter().zip(&other.comps) {
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y).norm());
            }
        }
        Ok(worst)
    }

    /// Multiplies every component by a real per-mode multiplier.
    pub fn apply_multiplier(&mut self, m: &Multiplier) -> Result<()> {
        self.grid.ensure_same(&m.grid)?;
        for c in &mut self.comps {
            for (z, &f) in c.iter_mut().zip(&m.values) {
                *z *= f;
            }
        }
        Ok(())
    }
}

/// Real-valued samples of a vector field at the collocation points
/// `x = (L/n) * (ix, iy, iz)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    comps: [Vec<f64>; 3],
}

impl PhysicalField {
    pub fn zeros(grid: Grid) -> Self {
        let zero = vec![0.0; grid.len()];
        Self {
            grid,
            comps: [zero.clone(), zero.clone(), zero],
        }
    }

    pub fn from_components(grid: Grid, comps: [Vec<f64>; 3]) -> Result<Self> {
        for c in &comps {
            if c.len() != grid.len() {
                return Err(crate::Error::InvalidGrid(format!(
                    "component length {} does not match lattice size {}",
                    c.len(),
                    grid.len()
                )));
            }
        }
        Ok(Self { grid, comps })
    }

    /// Samples `f(x, y, z)` at every collocation point.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        let h = grid.box_length() / grid.n() as f64;
        for idx in 0..grid.len() {
            let [ix, iy, iz] = grid.positions(idx);
            let v = f([ix as f64 * h, iy as f64 * h, iz as f64 * h]);
            for (c, x) in out.comps.iter_mut().zip(v) {
                c[idx] = x;
            }
        }
        out
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn component(&self, i: usize) -> &[f64] {
        &self.comps[i]
    }

    #[inline]
    pub fn component_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.comps[i]
    }

    /// Physical `L^2` norm squared by the rectangle rule (exact for trigonometric
    /// polynomials resolved by the grid).
    pub fn norm_sq(&self) -> f64 {
        let sum: f64 = self
            .comps
            .iter()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>())
            .sum();
        sum * self.grid.cell_volume()
    }
}

/// Scalar field of Fourier coefficients (pressure).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSpectral {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl ScalarSpectral {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(crate::Error::InvalidGrid(format!(
                "coefficient length {} does not match lattice size {}",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Real per-mode Fourier multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct Multiplier {
    grid: Grid,
    values: Vec<f64>,
}

impl Multiplier {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(crate::Error::InvalidGrid(format!(
                "multiplier length {} does not match lattice size {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(usize) -> f64) -> Self {
        Self {
            values: (0..grid.len()).map(f).collect(),
            grid,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise product of two multipliers.
    pub fn product(&self, other: &Multiplier) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }
}
