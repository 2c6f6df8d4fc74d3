//! Unnormalized 3D complex FFT on the grid's storage layout.
//!
//! Each axis is transformed as a batch of contiguous lines, followed by a
//! cyclic axis rotation `[a][b][c] -> [c][a][b]`; three rotations restore the
//! original layout. Lines are independent, so the result does not depend on
//! the number of worker threads.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::grid::Grid;

#[derive(Clone)]
pub struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    rotated: Vec<Complex64>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

impl Fft3 {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft(n, FftDirection::Forward),
            inverse: planner.plan_fft(n, FftDirection::Inverse),
            rotated: vec![Complex64::default(); n * n * n],
        }
    }

    /// In-place `sum_x f(x) exp(-i k.x)` over all three axes.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        let plan = Arc::clone(&self.forward);
        self.run(data, plan.as_ref());
    }

    /// In-place `sum_k f(k) exp(+i k.x)`, without the `1/n^3` factor.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        let plan = Arc::clone(&self.inverse);
        self.run(data, plan.as_ref());
    }

    fn run(&mut self, data: &mut [Complex64], plan: &dyn Fft<f64>) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "buffer does not match grid");
        for _ in 0..3 {
            data.par_chunks_mut(n * n).for_each(|plane| plan.process(plane));
            rotate(data, &mut self.rotated, n);
            data.copy_from_slice(&self.rotated);
        }
    }
}

/// `out[c][a][b] = src[a][b][c]`.
fn rotate(src: &[Complex64], out: &mut [Complex64], n: usize) {
    out.par_chunks_mut(n * n).enumerate().for_each(|(c, plane)| {
        for a in 0..n {
            let row = &mut plane[a * n..(a + 1) * n];
            let base = a * n * n + c;
            for (b, slot) in row.iter_mut().enumerate() {
                *slot = src[base + b * n];
            }
        }
    });
}
