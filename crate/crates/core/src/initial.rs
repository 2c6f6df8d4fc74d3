//! Divergence-free initial data.
//!
//! [`random_divfree_field`] builds fields whose spectral density
//! `|u_hat(xi)|^2 ~ eps^2 |xi|^(2 sigma)` near the origin mimics the
//! low-frequency signature of `u0 in L^p`, with `sigma = 3/p - 3`. Membership
//! in `L^p` is emulated purely spectrally: the decay estimates only see `u0`
//! through the mass it carries in small balls around `xi = 0`.
//!
//! # Random generator
//!
//! Directions are drawn from ChaCha8 keyed by the 64-bit seed (little-endian
//! in the first 8 key bytes, remaining key bytes zero). Each mode `k` with a
//! positive leading nonzero component owns the stream
//! `((kx + 2^20) << 42) | ((ky + 2^20) << 21) | (kz + 2^20)`. From that stream,
//! six uniforms `(w >> 11) * 2^-53 * 2 - 1` form a complex 3-vector, accepted
//! when its squared norm lies in `(1e-4, 1]` and its projection normal to
//! `xi` is not degenerate. The projected vector is normalized; the partner
//! mode `-k` receives the complex conjugate. Because streams are keyed by the
//! integer mode, grids sharing a box length produce identical coefficients on
//! their common modes.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;

/// How the continuum density is distributed onto lattice modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShellWeighting {
    /// `|u_hat(xi)| = eps * |xi|^sigma * rolloff(|xi|)` at each mode.
    Pointwise,
    /// Each lattice shell receives the continuum mass of its radial bin
    /// (bin edges at midpoints between consecutive shell radii), split evenly
    /// over the shell's modes. The cumulative mass inside any shell then
    /// follows the continuum law, including the bin that covers `|xi| < dk`.
    #[default]
    ShellQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    /// Low-frequency exponent of `|u_hat|`.
    pub sigma: f64,
    /// Start of the high-frequency rolloff. `None` keeps the power law everywhere.
    #[serde(default)]
    pub xi_knee: Option<f64>,
    /// Beyond the knee `|u_hat|` gains an extra factor `(knee/|xi|)^high_decay`.
    #[serde(default)]
    pub high_decay: f64,
    pub amplitude: f64,
    pub seed: u64,
    #[serde(default)]
    pub weighting: ShellWeighting,
}

impl SpectrumSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > -1.5) || !self.sigma.is_finite() {
            return Err(Error::param(
                "sigma",
                format!("must exceed -3/2 for finite low-frequency mass, got {}", self.sigma),
            ));
        }
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::param("amplitude", format!("must be positive, got {}", self.amplitude)));
        }
        if let Some(knee) = self.xi_knee {
            if !(knee > 0.0) {
                return Err(Error::param("xi_knee", format!("must be positive, got {knee}")));
            }
        }
        if !(self.high_decay >= 0.0) || !self.high_decay.is_finite() {
            return Err(Error::param(
                "high_decay",
                format!("must be nonnegative, got {}", self.high_decay),
            ));
        }
        Ok(())
    }

    /// Continuum density `|u_hat(xi)|^2` at radius `r`.
    pub fn density(&self, r: f64) -> f64 {
        let base = self.amplitude * self.amplitude * r.powf(2.0 * self.sigma);
        match self.xi_knee {
            Some(knee) if r > knee => base * (knee / r).powf(2.0 * self.high_decay),
            _ => base,
        }
    }

    /// `int_a^b 4 pi r^2 density(r) dr`.
    pub fn radial_mass(&self, a: f64, b: f64) -> f64 {
        let eps2 = self.amplitude * self.amplitude;
        let q_low = 2.0 + 2.0 * self.sigma;
        let mass = match self.xi_knee {
            Some(knee) if b > knee => {
                let below = if a < knee { power_integral(a, knee, q_low) } else { 0.0 };
                let q_high = q_low - 2.0 * self.high_decay;
                let above = knee.powf(2.0 * self.high_decay) * power_integral(a.max(knee), b, q_high);
                below + above
            }
            _ => power_integral(a, b, q_low),
        };
        4.0 * PI * eps2 * mass
    }
}

/// `int_a^b r^q dr` for `0 <= a <= b`, `q > -1` whenever `a == 0`.
fn power_integral(a: f64, b: f64, q: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if (q + 1.0).abs() < 1e-14 {
        (b / a).ln()
    } else {
        (b.powf(q + 1.0) - a.powf(q + 1.0)) / (q + 1.0)
    }
}

/// `sigma = 3/p - 3`, the low-frequency exponent emulating `u0 in L^p`.
pub fn sigma_for_p(p: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::param("p", format!("must lie in [1, 2], got {p}")));
    }
    Ok(3.0 / p - 3.0)
}

/// Inverse of [`sigma_for_p`].
pub fn p_for_sigma(sigma: f64) -> f64 {
    3.0 / (sigma + 3.0)
}

const STREAM_OFFSET: i64 = 1 << 20;

fn mode_stream(k: [i64; 3]) -> u64 {
    let pack = |v: i64| (v + STREAM_OFFSET) as u64 & ((1 << 21) - 1);
    (pack(k[0]) << 42) | (pack(k[1]) << 21) | pack(k[2])
}

fn is_canonical(k: [i64; 3]) -> bool {
    match k.iter().find(|&&v| v != 0) {
        Some(&v) => v > 0,
        None => false,
    }
}

/// Unit complex vector normal to `xi`, drawn from the mode's stream.
fn random_transverse_direction(seed: u64, k: [i64; 3], xi: [f64; 3]) -> [Complex64; 3] {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(mode_stream(k));
    let mut uniform = || ((rng.next_u64() >> 11) as f64) * (1.0 / (1u64 << 53) as f64) * 2.0 - 1.0;
    let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    loop {
        let mut v = [Complex64::default(); 3];
        for c in &mut v {
            *c = Complex64::new(uniform(), uniform());
        }
        let norm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        if !(norm2 > 1e-4 && norm2 <= 1.0) {
            continue;
        }
        let dot = v[0] * xi[0] + v[1] * xi[1] + v[2] * xi[2];
        let f = dot / k2;
        for (c, x) in v.iter_mut().zip(xi) {
            *c -= f * x;
        }
        let proj2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        if proj2 > 1e-6 * norm2 {
            let inv = 1.0 / proj2.sqrt();
            return v.map(|c| c * inv);
        }
    }
}

/// Per-mode magnitude `|u_hat(xi)|` for every non-Nyquist, nonzero mode.
fn mode_magnitudes(grid: &Grid, spec: &SpectrumSpec) -> Vec<f64> {
    let k2 = grid.mode_norm_sq();
    let dk = grid.dk();
    let mut mags = vec![0.0; grid.len()];
    match spec.weighting {
        ShellWeighting::Pointwise => {
            for (idx, &s) in k2.iter().enumerate() {
                if s > 0 && !grid.is_nyquist(idx) {
                    mags[idx] = spec.density((s as f64).sqrt() * dk).sqrt();
                }
            }
        }
        ShellWeighting::ShellQuadrature => {
            let mut shells: Vec<i64> = k2
                .iter()
                .enumerate()
                .filter(|&(idx, &s)| s > 0 && !grid.is_nyquist(idx))
                .map(|(_, &s)| s)
                .collect();
            shells.sort_unstable();
            shells.dedup();
            let mut counts = vec![0usize; shells.len()];
            for (idx, &s) in k2.iter().enumerate() {
                if s > 0 && !grid.is_nyquist(idx) {
                    counts[shells.binary_search(&s).unwrap()] += 1;
                }
            }
            let radii: Vec<f64> = shells.iter().map(|&s| (s as f64).sqrt() * dk).collect();
            let mut per_mode = vec![0.0; shells.len()];
            for i in 0..radii.len() {
                let lo = if i == 0 { 0.0 } else { 0.5 * (radii[i - 1] + radii[i]) };
                let hi = if i + 1 < radii.len() {
                    0.5 * (radii[i] + radii[i + 1])
                } else if i > 0 {
                    radii[i] + 0.5 * (radii[i] - radii[i - 1])
                } else {
                    1.5 * radii[i]
                };
                let mass = spec.radial_mass(lo, hi);
                per_mode[i] = mass / (counts[i] as f64 * dk.powi(3));
            }
            for (idx, &s) in k2.iter().enumerate() {
                if s > 0 && !grid.is_nyquist(idx) {
                    mags[idx] = per_mode[shells.binary_search(&s).unwrap()].sqrt();
                }
            }
        }
    }
    mags
}

/// Random real divergence-free field with the spectral profile of `spec`.
///
/// The output is Hermitian-symmetric, has `u_hat(0) = 0`, and is zero on the
/// Nyquist planes. It is not cut off; callers apply `J_N` for a Galerkin run.
pub fn random_divfree_field(grid: &Grid, spec: &SpectrumSpec) -> Result<SpectralField> {
    spec.validate()?;
    let mags = mode_magnitudes(grid, spec);
    let mut u = SpectralField::zeros(*grid);
    for (idx, &mag) in mags.iter().enumerate() {
        let k = grid.mode(idx);
        if mag == 0.0 || !is_canonical(k) {
            continue;
        }
        let xi = grid.xi(idx);
        let dir = random_transverse_direction(spec.seed, k, xi);
        let v = dir.map(|c| c * mag);
        u.set_mode(idx, v);
        u.set_mode(grid.conjugate_index(idx), v.map(|c| c.conj()));
    }
    Ok(u)
}

/// `A (sin kx cos ky cos kz, -cos kx sin ky cos kz, 0)` with `k = 2 pi / L`,
/// built directly from its eight Fourier modes.
pub fn taylor_green_field(grid: &Grid, amplitude: f64) -> SpectralField {
    let mut u = SpectralField::zeros(*grid);
    let vol = grid.box_length().powi(3);
    // sin(a) = (e^{ia} - e^{-ia}) / 2i and cos(a) = (e^{ia} + e^{-ia}) / 2
    let c = Complex64::new(0.0, -amplitude * vol / 8.0);
    for sx in [-1i64, 1] {
        for sy in [-1i64, 1] {
            for sz in [-1i64, 1] {
                let idx = grid.index_of([sx, sy, sz]);
                u.set_mode(
                    idx,
                    [c * sx as f64, -c * sy as f64, Complex64::default()],
                );
            }
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{inverse_transform, leray_project};

    fn flat(seed: u64) -> SpectrumSpec {
        SpectrumSpec {
            sigma: 0.0,
            xi_knee: None,
            high_decay: 0.0,
            amplitude: 1.0,
            seed,
            weighting: ShellWeighting::ShellQuadrature,
        }
    }

    /// Least-squares slope of log(mass inside r) against log(r) over lattice
    /// shells in `[r_lo, r_hi]`.
    fn shell_mass_slope(u: &SpectralField, r_lo: f64, r_hi: f64) -> f64 {
        let g = u.grid();
        let k2 = g.xi_norm_sq();
        let e = u.mode_energies();
        let mut pairs: Vec<(f64, f64)> = k2.iter().copied().zip(e).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        let mut acc = 0.0;
        let mut i = 0;
        while i < pairs.len() {
            let s = pairs[i].0;
            while i < pairs.len() && pairs[i].0 == s {
                acc += pairs[i].1;
                i += 1;
            }
            let r = s.sqrt();
            if r >= r_lo && r <= r_hi {
                xs.push(r.ln());
                ys.push(acc.ln());
            }
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn sigma_for_p_examples() {
        assert_eq!(sigma_for_p(1.0).unwrap(), 0.0);
        assert_eq!(sigma_for_p(2.0).unwrap(), -1.5);
        assert_eq!(sigma_for_p(1.5).unwrap(), -1.0);
        assert!(sigma_for_p(0.5).is_err());
        assert!(sigma_for_p(2.5).is_err());
        assert!((p_for_sigma(-1.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonintegrable_sigma() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        let spec = SpectrumSpec { sigma: -1.5, ..flat(1) };
        assert!(random_divfree_field(&g, &spec).is_err());
        let spec = SpectrumSpec { amplitude: 0.0, ..flat(1) };
        assert!(random_divfree_field(&g, &spec).is_err());
    }

    #[test]
    fn designer_field_is_real_solenoidal_and_mean_free() {
        let g = Grid::new(16, 2.0 * PI).unwrap();
        let u = random_divfree_field(&g, &flat(42)).unwrap();
        assert_eq!(u.mode_energy(0), 0.0);
        assert!(u.max_divergence() <= 1e-12 * u.max_mode_norm());
        assert_eq!(u.hermitian_defect(), 0.0);
        assert!(leray_project(&u).max_abs_diff(&u).unwrap() <= 1e-15 * u.max_mode_norm());
        let phys = inverse_transform(&u).unwrap();
        assert!((phys.norm_sq() - u.norm_sq()).abs() < 1e-10 * u.norm_sq());
    }

    #[test]
    fn amplitude_is_linear_and_seed_reproducible() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        let a = random_divfree_field(&g, &flat(7)).unwrap();
        let b = random_divfree_field(&g, &SpectrumSpec { amplitude: 2.0, ..flat(7) }).unwrap();
        for d in 0..3 {
            for (x, y) in a.component(d).iter().zip(b.component(d)) {
                assert_eq!(*x * 2.0, *y);
            }
        }
        assert_eq!(a, random_divfree_field(&g, &flat(7)).unwrap());
        assert_ne!(a, random_divfree_field(&g, &flat(8)).unwrap());
    }

    #[test]
    fn coefficients_agree_across_grids() {
        let coarse = random_divfree_field(&Grid::new(8, 5.0).unwrap(), &flat(3)).unwrap();
        let fine = random_divfree_field(&Grid::new(16, 5.0).unwrap(), &flat(3)).unwrap();
        let (gc, gf) = (coarse.grid(), fine.grid());
        for idx in 0..gc.len() {
            let k = gc.mode(idx);
            if k.iter().all(|v| v.abs() <= 2) {
                let a = coarse.mode(idx);
                let b = fine.mode(gf.index_of(k));
                for d in 0..3 {
                    assert!((a[d] - b[d]).norm() <= 1e-14 * a[d].norm().max(1e-300));
                }
            }
        }
    }

    #[test]
    fn shell_mass_follows_power_law() {
        let g = Grid::new(32, 2.0 * PI).unwrap();
        for (sigma, weighting) in [
            (0.0, ShellWeighting::ShellQuadrature),
            (0.0, ShellWeighting::Pointwise),
            (-1.0, ShellWeighting::ShellQuadrature),
            (-0.5, ShellWeighting::ShellQuadrature),
        ] {
            let spec = SpectrumSpec { sigma, weighting, ..flat(11) };
            let u = random_divfree_field(&g, &spec).unwrap();
            let slope = shell_mass_slope(&u, 3.0, 14.0);
            let expect = 2.0 * sigma + 3.0;
            assert!(
                (slope - expect).abs() <= 0.05 * expect,
                "sigma={sigma} {weighting:?}: slope {slope} vs {expect}"
            );
        }
    }

    #[test]
    fn shell_quadrature_matches_continuum_mass() {
        // mass inside radius r against (2 pi)^-3 * int_{|xi|<r} density
        let g = Grid::new(32, 2.0 * PI).unwrap();
        let spec = SpectrumSpec { sigma: -1.0, ..flat(5) };
        let u = random_divfree_field(&g, &spec).unwrap();
        let k2 = g.mode_norm_sq();
        let e = u.mode_energies();
        for r in [3i64, 6, 10] {
            let inside: f64 = k2
                .iter()
                .zip(&e)
                .filter(|(&s, _)| s <= r * r)
                .map(|(_, v)| v)
                .sum::<f64>()
                * g.spectral_weight();
            // upper bin edge of the shell |k| = r
            let next = (1..).map(|j| r * r + j).find(|s| k2.contains(s)).unwrap();
            let edge = 0.5 * (r as f64 + (next as f64).sqrt());
            let expect = spec.radial_mass(0.0, edge) / (2.0 * PI).powi(3);
            assert!((inside - expect).abs() < 1e-10 * expect, "r={r}: {inside} vs {expect}");
        }
    }

    #[test]
    fn knee_rolloff_mass() {
        let spec = SpectrumSpec { xi_knee: Some(2.0), high_decay: 3.0, ..flat(1) };
        // closed form: 4 pi [8/3 + 2^6 * (2^-3 - 4^-3) / 3]
        let expect = 4.0 * PI * (8.0 / 3.0 + 64.0 * (1.0 / 8.0 - 1.0 / 64.0) / 3.0);
        assert!((spec.radial_mass(0.0, 4.0) - expect).abs() < 1e-12 * expect);
        // numerical quadrature of the density
        let steps = 200_000;
        let h = 4.0 / steps as f64;
        let quad: f64 = (0..steps)
            .map(|i| {
                let r = (i as f64 + 0.5) * h;
                4.0 * PI * r * r * spec.density(r) * h
            })
            .sum();
        assert!((quad - expect).abs() < 1e-6 * expect);
    }

    #[test]
    fn taylor_green_structure() {
        let l = 2.0 * PI;
        let g = Grid::new(8, l).unwrap();
        let a = 0.7;
        let u = taylor_green_field(&g, a);
        let support: Vec<usize> = (0..g.len()).filter(|&i| u.mode_energy(i) > 0.0).collect();
        assert_eq!(support.len(), 8);
        for idx in support {
            assert!(g.mode(idx).iter().all(|k| k.abs() == 1));
        }
        assert!(u.max_divergence() <= 1e-13);
        assert!((u.norm_sq() - a * a * l.powi(3) / 4.0).abs() < 1e-12 * l.powi(3));
        // against point samples of the closed form
        let phys = inverse_transform(&u).unwrap();
        let h = l / 8.0;
        for idx in [0usize, 9, 100, 333] {
            let [ix, iy, iz] = g.positions(idx);
            let (x, y, z) = (ix as f64 * h, iy as f64 * h, iz as f64 * h);
            assert!((phys.component(0)[idx] - a * x.sin() * y.cos() * z.cos()).abs() < 1e-13);
            assert!((phys.component(1)[idx] + a * x.cos() * y.sin() * z.cos()).abs() < 1e-13);
            assert!(phys.component(2)[idx].abs() < 1e-13);
        }
        // quadrature of |u|^2 on a fine grid of the closed form
        let m = 40;
        let hq = l / m as f64;
        let mut q = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let (x, y, z) = (i as f64 * hq, j as f64 * hq, k as f64 * hq);
                    let u1 = a * x.sin() * y.cos() * z.cos();
                    let u2 = -a * x.cos() * y.sin() * z.cos();
                    q += (u1 * u1 + u2 * u2) * hq.powi(3);
                }
            }
        }
        assert!((q - a * a * l.powi(3) / 4.0).abs() < 1e-9);
    }
}
