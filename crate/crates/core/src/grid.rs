//! Periodic box discretization and its wavenumber lattice.
//!
//! A [`Grid`] of `n` modes per axis on a box of side `L` carries the angular
//! wavevectors `xi = 2*pi*k/L` with integer `k` in `-n/2..n/2`. Storage order
//! for every lattice array is x-major with z fastest:
//! `index = (ix * n + iy) * n + iz`, where axis index `i` stores `k = i` for
//! `i < n/2` and `k = i - n` otherwise.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial dimension of every grid. Fixed at three.
pub const DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    box_length: f64,
}

impl Grid {
    pub fn new(n: usize, box_length: f64) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "modes per axis must be even and at least 4, got {n}"
            )));
        }
        if !(box_length > 0.0) || !box_length.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive and finite, got {box_length}"
            )));
        }
        Ok(Self { n, box_length })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    #[inline]
    pub fn dim(&self) -> usize {
        DIM
    }

    /// Number of lattice points, `n^3`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lattice spacing in wavenumber space, `2*pi/L`. This is also the lowest
    /// nonzero wavenumber magnitude.
    #[inline]
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    /// Physical cell volume `(L/n)^3`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        (self.box_length / self.n as f64).powi(3)
    }

    /// Weight turning `sum |u_hat|^2` into the physical `L^2` norm squared, `1/L^3`.
    #[inline]
    pub fn spectral_weight(&self) -> f64 {
        self.box_length.powi(-3)
    }

    /// Signed integer wavenumber stored at axis position `i`.
    #[inline]
    pub fn wavenumber_index(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Axis position holding the signed wavenumber `k` (taken modulo `n`).
    #[inline]
    pub fn axis_position(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    #[inline]
    pub fn flat_index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    /// Flat index of the signed integer mode `k`.
    pub fn index_of(&self, k: [i64; 3]) -> usize {
        self.flat_index(
            self.axis_position(k[0]),
            self.axis_position(k[1]),
            self.axis_position(k[2]),
        )
    }

    /// Axis positions of a flat index.
    #[inline]
    pub fn positions(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    /// Signed integer mode stored at a flat index.
    pub fn mode(&self, idx: usize) -> [i64; 3] {
        let [ix, iy, iz] = self.positions(idx);
        [
            self.wavenumber_index(ix),
            self.wavenumber_index(iy),
            self.wavenumber_index(iz),
        ]
    }

    /// Angular wavevector at a flat index.
    pub fn xi(&self, idx: usize) -> [f64; 3] {
        let k = self.mode(idx);
        let dk = self.dk();
        [k[0] as f64 * dk, k[1] as f64 * dk, k[2] as f64 * dk]
    }

    /// Flat index of the mode `-k`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let n = self.n;
        let [ix, iy, iz] = self.positions(idx);
        self.flat_index((n - ix) % n, (n - iy) % n, (n - iz) % n)
    }

    /// True when some axis index sits on the unpaired Nyquist wavenumber `-n/2`.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        self.positions(idx).contains(&(self.n / 2))
    }

    /// Angular wavenumber per axis position (identical on all three axes).
    pub fn axis_wavenumbers(&self) -> Vec<f64> {
        let dk = self.dk();
        (0..self.n)
            .map(|i| self.wavenumber_index(i) as f64 * dk)
            .collect()
    }

    /// `|xi|^2` for every lattice point, in storage order.
    pub fn xi_norm_sq(&self) -> Vec<f64> {
        let k = self.axis_wavenumbers();
        let mut out = Vec::with_capacity(self.len());
        for kx in &k {
            for ky in &k {
                for kz in &k {
                    out.push(kx * kx + ky * ky + kz * kz);
                }
            }
        }
        out
    }

    /// Integer `|k|^2` for every lattice point, in storage order.
    pub fn mode_norm_sq(&self) -> Vec<i64> {
        let k: Vec<i64> = (0..self.n).map(|i| self.wavenumber_index(i)).collect();
        let mut out = Vec::with_capacity(self.len());
        for kx in &k {
            for ky in &k {
                for kz in &k {
                    out.push(kx * kx + ky * ky + kz * kz);
                }
            }
        }
        out
    }

    /// Largest axis index kept by the 2/3 rule, `floor(n/3)`.
    #[inline]
    pub fn dealias_index(&self) -> usize {
        self.n / 3
    }

    /// Radius of the largest ball inside the dealiased cube, `floor(n/3) * dk`.
    #[inline]
    pub fn dealias_radius(&self) -> f64 {
        self.dealias_index() as f64 * self.dk()
    }

    /// Largest `|xi|` on the lattice (a cube corner).
    pub fn max_wavenumber(&self) -> f64 {
        let half = (self.n / 2) as f64;
        (3.0 * half * half).sqrt() * self.dk()
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected_n: self.n,
                expected_l: self.box_length,
                got_n: other.n,
                got_l: other.box_length,
            })
        }
    }
}
