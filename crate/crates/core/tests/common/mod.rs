#![allow(dead_code)]

use std::collections::HashMap;

use fracns_core::initial::random_divfree_field;
use fracns_core::spectral::{leray_project, spectral_cutoff};
use fracns_core::{Grid, PhysicalField, ShellWeighting, SpectralField, SpectrumSpec};
use num_complex::Complex64;

pub fn spec(sigma: f64, amplitude: f64, seed: u64) -> SpectrumSpec {
    SpectrumSpec {
        sigma,
        xi_knee: None,
        high_decay: 0.0,
        amplitude,
        seed,
        weighting: ShellWeighting::ShellQuadrature,
    }
}

/// Random solenoidal field inside the Galerkin ball `|xi| <= cutoff`.
pub fn galerkin_field(grid: &Grid, sigma: f64, amplitude: f64, seed: u64, cutoff: f64) -> SpectralField {
    let u = random_divfree_field(grid, &spec(sigma, amplitude, seed)).unwrap();
    spectral_cutoff(&leray_project(&u), cutoff).unwrap()
}

fn xi_of(grid: &Grid, k: [i64; 3]) -> [f64; 3] {
    let dk = grid.dk();
    [k[0] as f64 * dk, k[1] as f64 * dk, k[2] as f64 * dk]
}

/// `-P J_N (u . grad u)` by summing every triad explicitly:
/// `(u . grad u_i)^(k) = L^-3 sum_q sum_j u_j(q) i xi(k - q)_j u_i(k - q)`.
/// Integer modes are combined without wrap-around, so the sum is the exact
/// continuum product of two trigonometric polynomials.
pub fn convolution_rhs(u: &SpectralField, cutoff: f64) -> SpectralField {
    let grid = *u.grid();
    let n = grid.n() as i64;
    let mut support: HashMap<[i64; 3], [Complex64; 3]> = HashMap::new();
    for ix in -n / 2..n / 2 {
        for iy in -n / 2..n / 2 {
            for iz in -n / 2..n / 2 {
                let k = [ix, iy, iz];
                let m = u.mode(grid.index_of(k));
                if m.iter().any(|z| z.norm() > 0.0) {
                    support.insert(k, m);
                }
            }
        }
    }
    let mut keys: Vec<[i64; 3]> = support.keys().copied().collect();
    keys.sort();
    let mut out = SpectralField::zeros(grid);
    let i = Complex64::new(0.0, 1.0);
    let inv_vol = 1.0 / grid.box_length().powi(3);
    for ix in -n / 2..n / 2 {
        for iy in -n / 2..n / 2 {
            for iz in -n / 2..n / 2 {
                let k = [ix, iy, iz];
                let xk = xi_of(&grid, k);
                let k2: f64 = xk.iter().map(|x| x * x).sum();
                if k2 == 0.0 || k2.sqrt() > cutoff * (1.0 + 1e-12) {
                    continue;
                }
                let mut conv = [Complex64::default(); 3];
                for q in &keys {
                    let r = [k[0] - q[0], k[1] - q[1], k[2] - q[2]];
                    let Some(ur) = support.get(&r) else { continue };
                    let uq = support[q];
                    let xr = xi_of(&grid, r);
                    let advect: Complex64 = (0..3).map(|j| uq[j] * i * xr[j]).sum();
                    for c in 0..3 {
                        conv[c] += advect * ur[c];
                    }
                }
                let dot: Complex64 = (0..3).map(|c| conv[c] * xk[c]).sum();
                let projected: Vec<Complex64> = (0..3).map(|c| -(conv[c] - dot * xk[c] / k2) * inv_vol).collect();
                out.set_mode(grid.index_of(k), [projected[0], projected[1], projected[2]]);
            }
        }
    }
    out
}

/// Classical Taylor-Green velocity `A (sin x cos y cos z, -cos x sin y cos z, 0)`
/// with wavenumber `2 pi / L`, sampled at the collocation points.
pub fn taylor_green_physical(grid: &Grid, amplitude: f64) -> PhysicalField {
    let k = grid.dk();
    PhysicalField::from_fn(*grid, |[x, y, z]| {
        [
            amplitude * (k * x).sin() * (k * y).cos() * (k * z).cos(),
            -amplitude * (k * x).cos() * (k * y).sin() * (k * z).cos(),
            0.0,
        ]
    })
}

/// Its pressure in closed form, `p = A^2/16 (cos 2x + cos 2y)(cos 2z + 2)`.
pub fn taylor_green_pressure(grid: &Grid, amplitude: f64) -> Vec<f64> {
    let k = grid.dk();
    let h = grid.box_length() / grid.n() as f64;
    (0..grid.len())
        .map(|idx| {
            let [x, y, z] = grid.positions(idx).map(|i| i as f64 * h);
            amplitude * amplitude / 16.0 * ((2.0 * k * x).cos() + (2.0 * k * y).cos()) * ((2.0 * k * z).cos() + 2.0)
        })
        .collect()
}
