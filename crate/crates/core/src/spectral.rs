//! Fourier multipliers, the Leray projector, and the scaled transform pair.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::field::{Multiplier, PhysicalField, SpectralField};
use crate::grid::Grid;

/// `|xi|^(2 alpha)` at every lattice point, `0` at `xi = 0`.
pub fn fractional_multiplier(grid: &Grid, alpha: f64) -> Result<Multiplier> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
    }
    Ok(power_multiplier(grid, 2.0 * alpha))
}

/// `|xi|^s` with the `xi = 0` entry pinned to zero. `s` must be positive.
pub(crate) fn power_multiplier(grid: &Grid, s: f64) -> Multiplier {
    let half = 0.5 * s;
    let values = grid
        .xi_norm_sq()
        .into_iter()
        .map(|k2| if k2 == 0.0 { 0.0 } else { k2.powf(half) })
        .collect();
    Multiplier::new(*grid, values).expect("lattice-sized")
}

/// Indicator of `|xi| <= radius`.
pub fn cutoff_mask(grid: &Grid, radius: f64) -> Result<Multiplier> {
    if !(radius >= 0.0) {
        return Err(Error::param("cutoff", format!("must be nonnegative, got {radius}")));
    }
    // A relative slack keeps shells sitting exactly on the radius inside.
    let r2 = radius * radius * (1.0 + 1e-12);
    let values = grid
        .xi_norm_sq()
        .into_iter()
        .map(|k2| if k2 <= r2 { 1.0 } else { 0.0 })
        .collect();
    Multiplier::new(*grid, values)
}

/// Galerkin cutoff `J_N`: zeroes every coefficient with `|xi| > radius`.
pub fn spectral_cutoff(u: &SpectralField, radius: f64) -> Result<SpectralField> {
    let mask = cutoff_mask(u.grid(), radius)?;
    let mut out = u.clone();
    out.apply_multiplier(&mask)?;
    Ok(out)
}

/// 2/3-rule mask: one where every axis index satisfies `|k| <= floor(n/3)`.
pub fn dealias_mask(grid: &Grid) -> Multiplier {
    let kmax = grid.dealias_index() as i64;
    Multiplier::from_fn(*grid, |idx| {
        if grid.mode(idx).iter().all(|k| k.abs() <= kmax) {
            1.0
        } else {
            0.0
        }
    })
}

/// Leray projection onto divergence-free fields; the mean mode is zeroed.
pub fn leray_project(u: &SpectralField) -> SpectralField {
    let mut out = u.clone();
    leray_project_in_place(&mut out);
    out
}

pub fn leray_project_in_place(u: &mut SpectralField) {
    let grid = *u.grid();
    let k = grid.axis_wavenumbers();
    let n = grid.n();
    let comps = u.components_mut();
    for idx in 0..grid.len() {
        let xi = [k[idx / (n * n)], k[(idx / n) % n], k[idx % n]];
        let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        if k2 == 0.0 {
            for c in comps.iter_mut() {
                c[idx] = Complex64::default();
            }
            continue;
        }
        let dot = comps[0][idx] * xi[0] + comps[1][idx] * xi[1] + comps[2][idx] * xi[2];
        let f = dot / k2;
        for (c, x) in comps.iter_mut().zip(xi) {
            c[idx] -= f * x;
        }
    }
}

/// Forward/inverse transform pair bound to one grid.
///
/// Forward: `u_hat(xi) = (L/n)^3 * sum_x u(x) exp(-i xi.x)`.
/// Inverse: `u(x) = L^-3 * sum_xi u_hat(xi) exp(i xi.x)`.
#[derive(Debug, Clone)]
pub struct SpectralTransform {
    grid: Grid,
    fft: Fft3,
}

impl SpectralTransform {
    pub fn new(grid: &Grid) -> Self {
        Self {
            grid: *grid,
            fft: Fft3::new(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn transform(&mut self, f: &PhysicalField) -> Result<SpectralField> {
        self.grid.ensure_same(f.grid())?;
        let mut out = SpectralField::zeros(self.grid);
        for d in 0..3 {
            let dst = out.component_mut(d);
            for (z, &v) in dst.iter_mut().zip(f.component(d)) {
                *z = Complex64::new(v, 0.0);
            }
            self.forward_in_place(dst);
        }
        Ok(out)
    }

    /// Inverse transform keeping the real part of each sample.
    pub fn inverse_transform(&mut self, u: &SpectralField) -> Result<PhysicalField> {
        self.grid.ensure_same(u.grid())?;
        let mut out = PhysicalField::zeros(self.grid);
        let mut buf = vec![Complex64::default(); self.grid.len()];
        for d in 0..3 {
            buf.copy_from_slice(u.component(d));
            self.inverse_in_place(&mut buf);
            for (v, z) in out.component_mut(d).iter_mut().zip(&buf) {
                *v = z.re;
            }
        }
        Ok(out)
    }

    /// Scaled forward transform of one complex lattice array.
    pub fn forward_in_place(&mut self, data: &mut [Complex64]) {
        self.fft.forward(data);
        let s = self.grid.cell_volume();
        data.iter_mut().for_each(|z| *z *= s);
    }

    /// Scaled inverse transform of one complex lattice array.
    pub fn inverse_in_place(&mut self, data: &mut [Complex64]) {
        self.fft.inverse(data);
        let s = self.grid.spectral_weight();
        data.iter_mut().for_each(|z| *z *= s);
    }
}

pub fn transform(f: &PhysicalField) -> Result<SpectralField> {
    SpectralTransform::new(f.grid()).transform(f)
}

pub fn inverse_transform(u: &SpectralField) -> Result<PhysicalField> {
    SpectralTransform::new(u.grid()).inverse_transform(u)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::*;

    use super::*;

    fn grid8() -> Grid {
        Grid::new(8, 2.0 * PI).unwrap()
    }

    /// Deterministic pseudo-random complex field (not Hermitian).
    fn noise_field(grid: Grid, seed: u64) -> SpectralField {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut u = SpectralField::zeros(grid);
        for d in 0..3 {
            for z in u.component_mut(d) {
                *z = Complex64::new(next(), next());
            }
        }
        u
    }

    #[test]
    fn multiplier_examples() {
        let g = grid8();
        let m = fractional_multiplier(&g, 0.7).unwrap();
        assert_eq!(m.at(0), 0.0);
        assert!((m.at(g.index_of([1, 0, 0])) - 1.0).abs() < 1e-15);
        let half = fractional_multiplier(&g, 0.5).unwrap();
        assert!((half.at(g.index_of([0, 2, 0])) - 2.0).abs() < 1e-15);
        assert!(fractional_multiplier(&g, 0.0).is_err());
    }

    #[test]
    fn multiplier_monotone_in_alpha() {
        let g = Grid::new(8, 8.0 * PI).unwrap(); // dk = 1/4, so |xi| straddles 1
        let lo = fractional_multiplier(&g, 0.6).unwrap();
        let hi = fractional_multiplier(&g, 1.1).unwrap();
        for (idx, k2) in g.xi_norm_sq().into_iter().enumerate() {
            if k2 > 1.0 {
                assert!(hi.at(idx) >= lo.at(idx));
            } else if k2 > 0.0 && k2 < 1.0 {
                assert!(hi.at(idx) <= lo.at(idx));
            }
        }
    }

    #[test]
    fn leray_kills_gradient_and_keeps_solenoidal() {
        let g = grid8();
        let idx = g.index_of([1, 2, -1]);
        let xi = g.xi(idx);
        let mut u = SpectralField::zeros(g);
        u.set_mode(idx, xi.map(|x| Complex64::new(x, 0.5 * x)));
        let p = leray_project(&u);
        assert!(p.max_mode_norm() < 1e-14);

        // a vector perpendicular to xi = (1, 2, -1)
        let mut v = SpectralField::zeros(g);
        v.set_mode(idx, [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let pv = leray_project(&v);
        assert!(pv.max_abs_diff(&v).unwrap() < 1e-15);
    }

    #[test]
    fn leray_zeroes_mean() {
        let g = grid8();
        let mut u = SpectralField::zeros(g);
        u.set_mode(0, [Complex64::new(1.0, 0.0); 3]);
        assert_eq!(leray_project(&u).mode_energy(0), 0.0);
    }

    #[test]
    fn cutoff_examples() {
        let g = grid8();
        let u = noise_field(g, 3);
        let all = spectral_cutoff(&u, g.max_wavenumber()).unwrap();
        assert_eq!(all, u);
        let none = spectral_cutoff(&u, 0.0).unwrap();
        for idx in 1..g.len() {
            assert_eq!(none.mode_energy(idx), 0.0);
        }
        assert_eq!(none.mode(0), u.mode(0));
        let once = spectral_cutoff(&u, 2.5).unwrap();
        assert_eq!(spectral_cutoff(&once, 2.5).unwrap(), once);
        assert!(spectral_cutoff(&u, -1.0).is_err());
    }

    #[test]
    fn dealias_examples() {
        for (n, kept) in [(12usize, 4i64), (8, 2)] {
            let g = Grid::new(n, 1.0).unwrap();
            let m = dealias_mask(&g);
            for idx in 0..g.len() {
                let inside = g.mode(idx).iter().all(|k| k.abs() <= kept);
                assert_eq!(m.at(idx) == 1.0, inside);
            }
            assert_eq!(m.product(&m).unwrap(), m);
        }
    }

    #[test]
    fn transform_examples() {
        let g = grid8();
        let constant = PhysicalField::from_fn(g, |_| [2.0, 0.0, -1.0]);
        let c = transform(&constant).unwrap();
        for idx in 1..g.len() {
            assert!(c.mode_energy(idx) < 1e-24);
        }
        // mean mode holds the integral of the field
        let vol = g.box_length().powi(3);
        assert!((c.component(0)[0].re - 2.0 * vol).abs() < 1e-9);

        let cosine = PhysicalField::from_fn(g, |x| [x[0].cos(), 0.0, 0.0]);
        let s = transform(&cosine).unwrap();
        let (p, m) = (g.index_of([1, 0, 0]), g.index_of([-1, 0, 0]));
        for idx in 0..g.len() {
            let e = s.component(0)[idx].norm();
            if idx == p || idx == m {
                assert!((e - 0.5 * vol).abs() < 1e-9);
            } else {
                assert!(e < 1e-9);
            }
        }
        assert!((s.component(0)[p] - s.component(0)[m].conj()).norm() < 1e-12);
    }

    #[test]
    fn transform_rejects_foreign_grid() {
        let mut t = SpectralTransform::new(&grid8());
        let other = PhysicalField::zeros(Grid::new(8, 1.0).unwrap());
        assert!(matches!(t.transform(&other), Err(Error::GridMismatch { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn round_trip_and_parseval(seed in any::<u64>(), n in prop::sample::select(vec![4usize, 6, 8]), l in 0.5f64..20.0) {
            let g = Grid::new(n, l).unwrap();
            let noise = noise_field(g, seed);
            let f = PhysicalField::from_fn(g, |x| {
                let i = ((x[0] * 7.0 + x[1] * 3.0 + x[2]) * 1000.0) as usize % g.len();
                [noise.component(0)[i].re, noise.component(1)[i].im, noise.component(2)[i].re]
            });
            let mut t = SpectralTransform::new(&g);
            let u = t.transform(&f).unwrap();
            let back = t.inverse_transform(&u).unwrap();
            let scale = f.norm_sq().sqrt().max(1e-300);
            let mut err = 0.0f64;
            for d in 0..3 {
                for (a, b) in f.component(d).iter().zip(back.component(d)) {
                    err += (a - b).powi(2);
                }
            }
            prop_assert!((err * g.cell_volume()).sqrt() / scale < 1e-12);
            prop_assert!((u.norm_sq() - f.norm_sq()).abs() <= 1e-10 * f.norm_sq());
        }

        #[test]
        fn leray_idempotent_and_commutes_with_cutoff(seed in any::<u64>(), radius in 0.0f64..6.0) {
            let g = grid8();
            let u = noise_field(g, seed);
            let p = leray_project(&u);
            let pp = leray_project(&p);
            prop_assert!(pp.max_abs_diff(&p).unwrap() <= 1e-14 * u.max_mode_norm());
            let coeff_norm = (u.norm_sq() / g.spectral_weight()).sqrt();
            prop_assert!(p.max_divergence() <= 1e-12 * coeff_norm);
            let a = spectral_cutoff(&leray_project(&u), radius).unwrap();
            let b = leray_project(&spectral_cutoff(&u, radius).unwrap());
            prop_assert_eq!(a, b);
        }
    }
}
