//! Galerkin-truncated generalized Navier-Stokes system
//!
//! ```text
//! d/dt u_N + P J_N (u_N . grad u_N) + nu Lambda^{2 alpha} u_N = 0
//! ```
//!
//! advanced with an integrating-factor Heun scheme. The linear part is
//! integrated exactly through `E(s) = exp(-nu |xi|^{2 alpha} s)`, which is
//! the variation-of-constants form of the mode equation
//! `u_hat(t) = E(t) u_hat(0) + int_0^t E(t - s) H(s) ds`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarSpectral, SpectralField};
use crate::grid::Grid;
use crate::spectral::{cutoff_mask, dealias_mask, leray_project_in_place, SpectralTransform};

fn default_nu() -> f64 {
    1.0
}

fn default_gamma() -> f64 {
    3.0
}

fn default_amplitude() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Dissipation exponent, `0 < alpha <= 5/4`.
    pub alpha: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Galerkin radius `N`; `None` selects the grid's dealias radius.
    #[serde(default)]
    pub cutoff_n: Option<f64>,
    /// Fourier-splitting constant. Only shifts the diagnostic ball.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Initial-data scale emulating a smallness hypothesis.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

impl SimParams {
    pub fn new(alpha: f64, dt: f64, t_end: f64) -> Self {
        Self {
            alpha,
            nu: default_nu(),
            dt,
            t_end,
            cutoff_n: None,
            gamma: default_gamma(),
            amplitude: default_amplitude(),
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.25) {
            return Err(Error::param("alpha", format!("must lie in (0, 5/4], got {}", self.alpha)));
        }
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return Err(Error::param("nu", format!("must be nonnegative, got {}", self.nu)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::param("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return Err(Error::param(
                "t_end",
                format!("must be at least dt = {}, got {}", self.dt, self.t_end),
            ));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::param("gamma", format!("must be positive, got {}", self.gamma)));
        }
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::param("amplitude", format!("must be positive, got {}", self.amplitude)));
        }
        if let Some(n) = self.cutoff_n {
            if !(n >= 0.0) || n > grid.dealias_radius() * (1.0 + 1e-12) {
                return Err(Error::param(
                    "cutoff_n",
                    format!(
                        "must lie in [0, {}] (dealias radius), got {n}",
                        grid.dealias_radius()
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Galerkin radius in effect on `grid`.
    pub fn cutoff(&self, grid: &Grid) -> f64 {
        self.cutoff_n.unwrap_or_else(|| grid.dealias_radius())
    }

    /// Number of steps needed to reach `t_end`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil() as usize
    }
}

/// A point on a Galerkin trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub u: SpectralField,
}

impl SimState {
    /// `J_N P u0` at `t = 0`.
    pub fn initial(u0: &SpectralField, cutoff: f64) -> Result<Self> {
        let mut u = u0.clone();
        leray_project_in_place(&mut u);
        let mask = cutoff_mask(u0.grid(), cutoff)?;
        u.apply_multiplier(&mask)?;
        Ok(Self { t: 0.0, u })
    }
}

/// Precomputed multipliers and scratch space for one grid and parameter set.
#[derive(Debug, Clone)]
pub struct GalerkinSolver {
    grid: Grid,
    params: SimParams,
    cutoff: f64,
    nonlinear: bool,
    transform: SpectralTransform,
    axis_k: Vec<f64>,
    /// 2/3-rule mask times the `J_N` indicator.
    galerkin_mask: Vec<f64>,
    dealias: Vec<f64>,
    /// `|xi|^{2 alpha}`.
    symbol: Vec<f64>,
    /// `E(dt)`.
    decay: Vec<f64>,
    vel: [Vec<Complex64>; 3],
    acc: [Vec<Complex64>; 3],
    tmp: Vec<Complex64>,
}

impl GalerkinSolver {
    pub fn new(grid: &Grid, params: SimParams) -> Result<Self> {
        params.validate(grid)?;
        let cutoff = params.cutoff(grid);
        let dealias = dealias_mask(grid);
        let galerkin_mask = dealias.product(&cutoff_mask(grid, cutoff)?)?;
        let symbol: Vec<f64> = grid
            .xi_norm_sq()
            .into_iter()
            .map(|k2| if k2 == 0.0 { 0.0 } else { k2.powf(params.alpha) })
            .collect();
        let decay = symbol.iter().map(|s| (-params.nu * s * params.dt).exp()).collect();
        let zero = vec![Complex64::default(); grid.len()];
        Ok(Self {
            grid: *grid,
            params,
            cutoff,
            nonlinear: true,
            transform: SpectralTransform::new(grid),
            axis_k: grid.axis_wavenumbers(),
            galerkin_mask: galerkin_mask.values().to_vec(),
            dealias: dealias.values().to_vec(),
            symbol,
            decay,
            vel: [zero.clone(), zero.clone(), zero.clone()],
            acc: [zero.clone(), zero.clone(), zero.clone()],
            tmp: zero,
        })
    }

    /// Disables the convection term; stepping then reduces to the exact
    /// linear semigroup.
    pub fn with_nonlinearity(mut self, enabled: bool) -> Self {
        self.nonlinear = enabled;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    #[inline]
    fn xi(&self, idx: usize) -> [f64; 3] {
        let n = self.grid.n();
        [
            self.axis_k[idx / (n * n)],
            self.axis_k[(idx / n) % n],
            self.axis_k[idx % n],
        ]
    }

    /// Dealiased `F(u . grad u)`: derivatives taken spectrally, products
    /// formed at the collocation points.
    pub fn convection(&mut self, u: &SpectralField) -> Result<SpectralField> {
        self.grid.ensure_same(u.grid())?;
        for d in 0..3 {
            self.vel[d].copy_from_slice(u.component(d));
            self.transform.inverse_in_place(&mut self.vel[d]);
            self.acc[d].iter_mut().for_each(|z| *z = Complex64::default());
        }
        let n = self.grid.n();
        for j in 0..3 {
            for i in 0..3 {
                let src = u.component(i);
                for (idx, (t, &s)) in self.tmp.iter_mut().zip(src).enumerate() {
                    let kj = match j {
                        0 => self.axis_k[idx / (n * n)],
                        1 => self.axis_k[(idx / n) % n],
                        _ => self.axis_k[idx % n],
                    };
                    *t = Complex64::new(-s.im * kj, s.re * kj);
                }
                self.transform.inverse_in_place(&mut self.tmp);
                for ((a, v), g) in self.acc[i].iter_mut().zip(&self.vel[j]).zip(&self.tmp) {
                    *a += v * g;
                }
            }
        }
        let mut out = SpectralField::zeros(self.grid);
        for d in 0..3 {
            self.transform.forward_in_place(&mut self.acc[d]);
            let dst = out.component_mut(d);
            for ((o, a), m) in dst.iter_mut().zip(&self.acc[d]).zip(&self.dealias) {
                *o = a * m;
            }
        }
        Ok(out)
    }

    /// `-P J_N (u . grad u)`, divergence-free and supported in `|xi| <= N`.
    pub fn nonlinear_rhs(&mut self, u: &SpectralField) -> Result<SpectralField> {
        self.grid.ensure_same(u.grid())?;
        if !self.nonlinear {
            return Ok(SpectralField::zeros(self.grid));
        }
        let mut out = self.convection(u)?;
        for c in out.components_mut() {
            for (z, m) in c.iter_mut().zip(&self.galerkin_mask) {
                *z *= -m;
            }
        }
        leray_project_in_place(&mut out);
        Ok(out)
    }

    /// Pressure solving `-Laplace p = sum_ij d_i d_j (u_i u_j)`:
    /// `p_hat = -sum_ij xi_i xi_j F(u_i u_j) / |xi|^2`, with `p_hat(0) = 0`.
    pub fn pressure(&mut self, u: &SpectralField) -> Result<ScalarSpectral> {
        self.grid.ensure_same(u.grid())?;
        for d in 0..3 {
            self.vel[d].copy_from_slice(u.component(d));
            self.transform.inverse_in_place(&mut self.vel[d]);
        }
        let mut p = vec![Complex64::default(); self.grid.len()];
        for i in 0..3 {
            for j in i..3 {
                for ((t, a), b) in self.tmp.iter_mut().zip(&self.vel[i]).zip(&self.vel[j]) {
                    *t = a * b;
                }
                self.transform.forward_in_place(&mut self.tmp);
                let weight = if i == j { 1.0 } else { 2.0 };
                for (idx, (pz, t)) in p.iter_mut().zip(&self.tmp).enumerate() {
                    let xi = self.xi(idx);
                    *pz -= t * (weight * xi[i] * xi[j] * self.dealias[idx]);
                }
            }
        }
        for (idx, pz) in p.iter_mut().enumerate() {
            let xi = self.xi(idx);
            let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
            *pz = if k2 == 0.0 { Complex64::default() } else { *pz / k2 };
        }
        ScalarSpectral::new(self.grid, p)
    }

    /// `H = -F(u . grad u) - F(grad p)` with the pressure of [`Self::pressure`].
    pub fn nonlinear_fourier_term(&mut self, u: &SpectralField) -> Result<SpectralField> {
        let mut h = self.convection(u)?;
        let p = self.pressure(u)?;
        for idx in 0..self.grid.len() {
            let xi = self.xi(idx);
            let ip = Complex64::new(-p.coeffs()[idx].im, p.coeffs()[idx].re);
            for (d, c) in h.components_mut().iter_mut().enumerate() {
                c[idx] = -c[idx] - ip * xi[d];
            }
        }
        Ok(h)
    }

    /// One integrating-factor Heun step:
    /// `u~ = E (u + dt H(u))`, `u+ = E u + dt/2 (E H(u) + H(u~))`.
    pub fn step(&mut self, state: &SimState) -> Result<SimState> {
        let dt = self.params.dt;
        let h0 = self.nonlinear_rhs(&state.u)?;
        let mut predictor = state.u.clone();
        for d in 0..3 {
            let (p, h) = (predictor.component_mut(d), h0.component(d));
            for ((z, hz), e) in p.iter_mut().zip(h).zip(&self.decay) {
                *z = (*z + hz * dt) * e;
            }
        }
        let h1 = self.nonlinear_rhs(&predictor)?;
        let mut next = state.u.clone();
        for d in 0..3 {
            let (a, b) = (h0.component(d), h1.component(d));
            let z = next.component_mut(d);
            for (((z, a), b), e) in z.iter_mut().zip(a).zip(b).zip(&self.decay) {
                *z = *z * e + (a * e + b) * (0.5 * dt);
            }
        }
        let t = state.t + dt;
        if !next.is_finite() {
            return Err(Error::BlowUp {
                t,
                last_finite_t: state.t,
            });
        }
        Ok(SimState { t, u: next })
    }

    /// `2 nu ||Lambda^alpha u||^2`.
    pub fn dissipation_rate(&self, u: &SpectralField) -> f64 {
        dissipation_with_symbol(u, &self.symbol, self.params.nu)
    }

    /// Gross nonlinear transfer `sum_xi 2 |Re(conj(u_hat) . N_hat)|`, weighted
    /// to physical units. Its signed counterpart sums to zero.
    pub fn transfer_rate(&self, u: &SpectralField, rhs: &SpectralField) -> f64 {
        let mut total = 0.0;
        for idx in 0..self.grid.len() {
            let (a, b) = (u.mode(idx), rhs.mode(idx));
            let dot: f64 = a.iter().zip(&b).map(|(x, y)| (x.conj() * y).re).sum();
            total += 2.0 * dot.abs();
        }
        total * self.grid.spectral_weight()
    }
}

fn dissipation_with_symbol(u: &SpectralField, symbol: &[f64], nu: f64) -> f64 {
    let mut total = 0.0;
    for (idx, s) in symbol.iter().enumerate() {
        total += s * u.mode_energy(idx);
    }
    2.0 * nu * total * u.grid().spectral_weight()
}

/// `-P J_N (u . grad u)` for a single field.
pub fn nonlinear_rhs(u: &SpectralField, params: &SimParams) -> Result<SpectralField> {
    GalerkinSolver::new(u.grid(), *params)?.nonlinear_rhs(u)
}

pub fn pressure_from_velocity(u: &SpectralField) -> Result<ScalarSpectral> {
    analysis_solver(u.grid())?.pressure(u)
}

pub fn nonlinear_fourier_term(u: &SpectralField) -> Result<SpectralField> {
    analysis_solver(u.grid())?.nonlinear_fourier_term(u)
}

/// Solver whose parameters do not affect pressure or `H`.
fn analysis_solver(grid: &Grid) -> Result<GalerkinSolver> {
    GalerkinSolver::new(grid, SimParams::new(1.0, 1.0, 1.0))
}

/// Energy bookkeeping at one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetRecord {
    pub t: f64,
    /// `||u(t)||^2`.
    pub kinetic: f64,
    /// `2 nu int_0^t ||Lambda^alpha u||^2 ds` by the trapezoid rule.
    pub dissipated: f64,
    /// `kinetic + dissipated - kinetic(0)`.
    pub defect: f64,
}

/// Incremental trapezoid accumulation of the energy balance.
#[derive(Debug, Clone)]
pub struct EnergyBudget {
    symbol: Vec<f64>,
    nu: f64,
    kinetic0: Option<f64>,
    last: Option<(f64, f64)>,
    dissipated: f64,
}

impl EnergyBudget {
    pub fn new(grid: &Grid, alpha: f64, nu: f64) -> Result<Self> {
        let symbol = crate::spectral::fractional_multiplier(grid, alpha)?;
        Ok(Self {
            symbol: symbol.values().to_vec(),
            nu,
            kinetic0: None,
            last: None,
            dissipated: 0.0,
        })
    }

    pub fn push(&mut self, t: f64, u: &SpectralField) -> BudgetRecord {
        let kinetic = u.norm_sq();
        let rate = dissipation_with_symbol(u, &self.symbol, self.nu);
        if let Some((t0, r0)) = self.last {
            self.dissipated += 0.5 * (t - t0) * (r0 + rate);
        }
        self.last = Some((t, rate));
        let k0 = *self.kinetic0.get_or_insert(kinetic);
        BudgetRecord {
            t,
            kinetic,
            dissipated: self.dissipated,
            defect: kinetic + self.dissipated - k0,
        }
    }
}

/// Energy balance along states sampled from one trajectory.
pub fn energy_budget(states: &[SimState], alpha: f64, nu: f64) -> Result<Vec<BudgetRecord>> {
    if states.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "energy budget needs at least 2 states, got {}",
            states.len()
        )));
    }
    let mut budget = EnergyBudget::new(states[0].u.grid(), alpha, nu)?;
    Ok(states.iter().map(|s| budget.push(s.t, &s.u)).collect())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::initial::{random_divfree_field, ShellWeighting, SpectrumSpec};
    use crate::spectral::{leray_project, spectral_cutoff, SpectralTransform};
    use crate::PhysicalField;

    fn spec(amplitude: f64, seed: u64) -> SpectrumSpec {
        SpectrumSpec {
            sigma: 0.0,
            xi_knee: None,
            high_decay: 0.0,
            amplitude,
            seed,
            weighting: ShellWeighting::ShellQuadrature,
        }
    }

    fn initial(grid: &Grid, params: &SimParams, amplitude: f64, seed: u64) -> SimState {
        let u0 = random_divfree_field(grid, &spec(amplitude, seed)).unwrap();
        SimState::initial(&u0, params.cutoff(grid)).unwrap()
    }

    fn shear(grid: &Grid) -> SpectralField {
        let phys = PhysicalField::from_fn(*grid, |x| [x[1].sin() + 0.3 * (2.0 * x[1]).cos(), 0.0, 0.0]);
        SpectralTransform::new(grid).transform(&phys).unwrap()
    }

    #[test]
    fn params_validation() {
        let g = Grid::new(16, 2.0 * PI).unwrap();
        assert!(SimParams::new(1.0, 0.1, 1.0).validate(&g).is_ok());
        assert!(SimParams::new(1.0, 0.1, 0.05).validate(&g).is_err());
        assert!(SimParams::new(0.0, 0.1, 1.0).validate(&g).is_err());
        assert!(SimParams::new(1.3, 0.1, 1.0).validate(&g).is_err());
        let mut p = SimParams::new(1.0, 0.1, 1.0);
        p.cutoff_n = Some(6.0);
        assert!(p.validate(&g).is_err());
        p.cutoff_n = Some(5.0);
        assert!(p.validate(&g).is_ok());
        assert_eq!(SimParams::new(1.0, 0.1, 1.0).steps(), 10);
    }

    #[test]
    fn rhs_of_zero_and_shear_vanish() {
        let g = Grid::new(16, 2.0 * PI).unwrap();
        let params = SimParams::new(1.0, 0.01, 1.0);
        let zero = SpectralField::zeros(g);
        assert_eq!(nonlinear_rhs(&zero, &params).unwrap().max_mode_norm(), 0.0);
        let u = shear(&g);
        assert!(nonlinear_rhs(&u, &params).unwrap().max_mode_norm() < 1e-12 * u.max_mode_norm());
        let p = pressure_from_velocity(&u).unwrap();
        assert!(p.max_abs() < 1e-12 * u.max_mode_norm());
        assert_eq!(pressure_from_velocity(&zero).unwrap().max_abs(), 0.0);
        assert_eq!(nonlinear_fourier_term(&zero).unwrap().max_mode_norm(), 0.0);
    }

    #[test]
    fn shear_flow_is_steady_without_viscosity() {
        let g = Grid::new(16, 2.0 * PI).unwrap();
        let mut params = SimParams::new(1.0, 0.05, 1.0);
        params.nu = 0.0;
        let mut solver = GalerkinSolver::new(&g, params).unwrap();
        let mut s = SimState::initial(&shear(&g), solver.cutoff()).unwrap();
        let s0 = s.clone();
        for _ in 0..5 {
            s = solver.step(&s).unwrap();
        }
        assert!(s.u.max_abs_diff(&s0.u).unwrap() < 1e-12 * s0.u.max_mode_norm());
    }

    #[test]
    fn linear_step_is_exact_semigroup() {
        let g = Grid::new(16, 2.0 * PI).unwrap();
        let params = SimParams::new(0.8, 0.05, 1.0);
        let mut solver = GalerkinSolver::new(&g, params).unwrap().with_nonlinearity(false);
        let s0 = initial(&g, &params, 1.0, 9);
        let s1 = solver.step(&s0).unwrap();
        let exact = crate::heat::heat_evolve(&s0.u, 0.05, 0.8, 1.0).unwrap();
        assert!(s1.u.max_abs_diff(&exact).unwrap() <= 1e-14 * s0.u.max_mode_norm());
    }

    #[test]
    fn rhs_is_solenoidal_cut_off_and_energy_neutral() {
        let g = Grid::new(16, 2.0 * PI).unwrap();
        let mut params = SimParams::new(1.0, 0.01, 1.0);
        params.cutoff_n = Some(4.0);
        let mut solver = GalerkinSolver::new(&g, params).unwrap();
        for seed in 0..5 {
            let s = initial(&g, &params, 1.0, seed);
            let r = solver.nonlinear_rhs(&s.u).unwrap();
            let coeff = (r.norm_sq() / g.spectral_weight()).sqrt();
            assert!(r.max_divergence() <= 1e-12 * coeff);
            assert_eq!(spectral_cutoff(&r, 4.0).unwrap(), r);
            let work = s.u.inner(&r).unwrap();
            assert!(work.abs() <= 1e-12 * s.u.norm() * r.norm(), "work {work}");
        }
    }

    #[test]
    fn pressure_route_equals_projection() {
        let g = Grid::new(16, 2.0 * PI).unwrap();
        let params = SimParams::new(1.0, 0.01, 1.0);
        let mut solver = GalerkinSolver::new(&g, params).unwrap();
        for seed in 0..5 {
            let s = initial(&g, &params, 1.0, 100 + seed);
            let h = solver.nonlinear_fourier_term(&s.u).unwrap();
            let mut projected = leray_project(&solver.convection(&s.u).unwrap());
            projected.scale(-1.0);
            let diff = h.max_abs_diff(&projected).unwrap();
            assert!(diff <= 1e-12 * h.max_mode_norm(), "diff {diff}");
        }
    }

    #[test]
    fn state_invariants_hold_along_trajectory() {
        let g = Grid::new(16, 2.0 * PI).unwrap();
        let params = SimParams::new(1.0, 0.01, 0.2);
        let mut solver = GalerkinSolver::new(&g, params).unwrap();
        let mut s = initial(&g, &params, 2.0, 5);
        let mut last = s.u.norm_sq();
        for _ in 0..params.steps() {
            s = solver.step(&s).unwrap();
            let coeff = (s.u.norm_sq() / g.spectral_weight()).sqrt();
            assert!(s.u.max_divergence() <= 1e-12 * coeff);
            assert_eq!(s.u.mode_energy(0), 0.0);
            assert!(s.u.hermitian_defect() <= 1e-13 * s.u.max_mode_norm());
            let e = s.u.norm_sq();
            assert!(e <= last * (1.0 + 1e-12));
            last = e;
        }
        assert_eq!(spectral_cutoff(&s.u, solver.cutoff()).unwrap(), s.u);
    }

    #[test]
    fn blow_up_is_reported() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        let params = SimParams::new(1.0, 0.01, 1.0);
        let mut solver = GalerkinSolver::new(&g, params).unwrap();
        let mut s = initial(&g, &params, 1.0, 1);
        s.u.component_mut(0)[g.index_of([1, 0, 0])] = Complex64::new(f64::NAN, 0.0);
        s.t = 0.5;
        match solver.step(&s) {
            Err(Error::BlowUp { last_finite_t, .. }) => assert_eq!(last_finite_t, 0.5),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn energy_budget_examples() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        assert!(energy_budget(&[], 1.0, 1.0).is_err());

        let zero = SpectralField::zeros(g);
        let states: Vec<SimState> = (0..4)
            .map(|i| SimState { t: i as f64 * 0.1, u: zero.clone() })
            .collect();
        for r in energy_budget(&states, 1.0, 1.0).unwrap() {
            assert_eq!((r.kinetic, r.dissipated, r.defect), (0.0, 0.0, 0.0));
        }

        // single mode under the exact linear flow
        let mut u = SpectralField::zeros(g);
        let idx = g.index_of([1, 1, 0]);
        u.set_mode(idx, [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::default()]);
        u.set_mode(g.conjugate_index(idx), [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::default()]);
        let params = SimParams::new(1.0, 1e-3, 1.0);
        let mut solver = GalerkinSolver::new(&g, params).unwrap().with_nonlinearity(false);
        let mut s = SimState { t: 0.0, u };
        let mut states = vec![s.clone()];
        for _ in 0..params.steps() {
            s = solver.step(&s).unwrap();
            states.push(s.clone());
        }
        let budget = energy_budget(&states, 1.0, 1.0).unwrap();
        let k0 = budget[0].kinetic;
        // trapezoid error for exp(-lambda t), lambda = 2 |xi|^2 = 4
        let bound = (4.0f64 * 1e-3).powi(2) / 12.0 * k0;
        for r in &budget {
            assert!(r.defect.abs() < bound, "{} vs {bound}", r.defect);
        }
    }

    #[test]
    fn heun_is_second_order() {
        // Global error at T against a dt/16 reference run.
        let g = Grid::new(32, 2.0 * PI).unwrap();
        let t_end = 0.08;
        let run = |dt: f64| {
            let params = SimParams::new(1.0, dt, t_end);
            let mut solver = GalerkinSolver::new(&g, params).unwrap();
            let mut s = initial(&g, &params, 3.0, 77);
            for _ in 0..params.steps() {
                s = solver.step(&s).unwrap();
            }
            s.u
        };
        let dt = 0.01;
        let reference = run(dt / 16.0);
        let e1 = run(dt).max_abs_diff(&reference).unwrap();
        let e2 = run(dt / 2.0).max_abs_diff(&reference).unwrap();
        let ratio = e1 / e2;
        assert!((3.4..=4.8).contains(&ratio), "error ratio {ratio} ({e1} / {e2})");
    }

    #[test]
    fn galerkin_consistency_under_larger_cutoff() {
        let g = Grid::new(16, 2.0 * PI).unwrap();
        let mut coarse = SimParams::new(1.0, 0.01, 0.1);
        coarse.cutoff_n = Some(3.0);
        let mut fine = coarse;
        fine.cutoff_n = Some(5.0);
        let start = initial(&g, &coarse, 0.05, 21);
        let mut a = start.clone();
        let mut b = start;
        let mut sa = GalerkinSolver::new(&g, coarse).unwrap();
        let mut sb = GalerkinSolver::new(&g, fine).unwrap();
        let above = cutoff_mask(&g, 3.0).unwrap().map(|m| 1.0 - m);
        for _ in 0..coarse.steps() {
            a = sa.step(&a).unwrap();
            b = sb.step(&b).unwrap();
            let mut high = b.u.clone();
            high.apply_multiplier(&above).unwrap();
            if high.norm_sq() > 1e-8 * b.u.norm_sq() {
                break;
            }
            let mut diff = a.u.clone();
            diff.add_scaled(-1.0, &b.u).unwrap();
            assert!(diff.norm() <= 1e-4 * b.u.norm(), "diff {}", diff.norm() / b.u.norm());
        }
    }
}
