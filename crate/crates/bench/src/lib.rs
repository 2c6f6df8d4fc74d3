//! Shared fixtures for the benchmarks.

use fracns_core::initial::random_divfree_field;
use fracns_core::spectral::{leray_project, spectral_cutoff};
use fracns_core::{Grid, ShellWeighting, SpectralField, SpectrumSpec};

/// Random Galerkin-space field on an `n^3` box of side 200.
pub fn fixture(n: usize) -> (Grid, SpectralField) {
    let grid = Grid::new(n, 200.0).expect("valid grid");
    let spec = SpectrumSpec {
        sigma: 0.0,
        xi_knee: None,
        high_decay: 0.0,
        amplitude: 0.05,
        seed: 1,
        weighting: ShellWeighting::ShellQuadrature,
    };
    let u = random_divfree_field(&grid, &spec).expect("valid spectrum");
    let u = spectral_cutoff(&leray_project(&u), grid.dealias_radius()).expect("valid cutoff");
    (grid, u)
}
