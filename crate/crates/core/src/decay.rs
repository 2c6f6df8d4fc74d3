//! Decay measurements: norm time series, Fourier-splitting shells,
//! spectral bound checks, power-law fits and verdicts against predicted rates.

use serde::{Deserialize, Serialize};

use crate::dynamics::{EnergyBudget, SimState};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::heat::{governing_claim, predicted_exponent, theorem_applicability, window_is_resolved, DecayClaim};

/// Radius of the shrinking splitting ball, `g(t) = (gamma / (t + 1))^(1 / (2 alpha))`.
pub fn splitting_radius(t: f64, gamma: f64, alpha: f64) -> f64 {
    (gamma / (t + 1.0)).powf(0.5 / alpha)
}

/// Energy carried by modes with `|xi| <= radius`, in physical units.
pub fn shell_energy(u: &SpectralField, radius: f64) -> f64 {
    split_energy(u, radius).0
}

/// `(inside, outside)` energies of the ball `|xi| <= radius`. They partition
/// the lattice, so their sum is the total energy.
pub fn split_energy(u: &SpectralField, radius: f64) -> (f64, f64) {
    let r2 = radius * radius * (1.0 + 1e-12);
    let (mut inside, mut outside) = (0.0, 0.0);
    for (idx, k2) in u.grid().xi_norm_sq().into_iter().enumerate() {
        let e = u.mode_energy(idx);
        if k2 <= r2 {
            inside += e;
        } else {
            outside += e;
        }
    }
    let w = u.grid().spectral_weight();
    (inside * w, outside * w)
}

/// Sampled `||Lambda^m u||^2` diagnostics along one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSeries {
    pub m_list: Vec<u32>,
    pub times: Vec<f64>,
    pub l2_sq: Vec<f64>,
    /// One series per entry of `m_list`.
    pub deriv_sq: Vec<Vec<f64>>,
    pub diss_integral: Vec<f64>,
    pub shell_energy: Vec<f64>,
    pub g_t: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormSample {
    pub t: f64,
    pub l2_sq: f64,
    pub deriv_sq: Vec<f64>,
    pub diss_integral: f64,
    pub shell_energy: f64,
    pub g_t: f64,
}

impl NormSeries {
    pub fn new(m_list: Vec<u32>) -> Self {
        let deriv_sq = vec![Vec::new(); m_list.len()];
        Self {
            m_list,
            times: Vec::new(),
            l2_sq: Vec::new(),
            deriv_sq,
            diss_integral: Vec::new(),
            shell_energy: Vec::new(),
            g_t: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, s: NormSample) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(s.t > last) {
                return Err(Error::InsufficientData(format!(
                    "sample times must increase strictly: {} after {last}",
                    s.t
                )));
            }
        }
        if s.deriv_sq.len() != self.m_list.len() {
            return Err(Error::InsufficientData(format!(
                "expected {} derivative norms, got {}",
                self.m_list.len(),
                s.deriv_sq.len()
            )));
        }
        let all = [s.l2_sq, s.diss_integral, s.shell_energy, s.g_t];
        if all.iter().chain(&s.deriv_sq).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InsufficientData(format!(
                "non-finite or negative norm at t={}",
                s.t
            )));
        }
        self.times.push(s.t);
        self.l2_sq.push(s.l2_sq);
        for (series, v) in self.deriv_sq.iter_mut().zip(s.deriv_sq) {
            series.push(v);
        }
        self.diss_integral.push(s.diss_integral);
        self.shell_energy.push(s.shell_energy);
        self.g_t.push(s.g_t);
        Ok(())
    }

    /// Values of the selected norm, if present.
    pub fn select(&self, which: NormSelector) -> Option<&[f64]> {
        match which {
            NormSelector::L2 => Some(&self.l2_sq),
            NormSelector::Derivative(m) => self
                .m_list
                .iter()
                .position(|&k| k == m)
                .map(|i| self.deriv_sq[i].as_slice()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "norm", content = "m")]
pub enum NormSelector {
    L2,
    Derivative(u32),
}

impl NormSelector {
    pub fn order(self) -> u32 {
        match self {
            NormSelector::L2 => 0,
            NormSelector::Derivative(m) => m,
        }
    }
}

/// Squared norms of `Lambda^m u` for each state, with the Fourier-splitting
/// shell energy and the trapezoid dissipation integral.
pub fn derivative_series(
    trajectory: &[SimState],
    m_list: &[u32],
    gamma: f64,
    alpha: f64,
    nu: f64,
) -> Result<NormSeries> {
    let mut series = NormSeries::new(m_list.to_vec());
    let Some(first) = trajectory.first() else {
        return Ok(series);
    };
    let mut budget = EnergyBudget::new(first.u.grid(), alpha, nu)?;
    for s in trajectory {
        series.push(sample_state(s, m_list, gamma, alpha, &mut budget))?;
    }
    Ok(series)
}

pub(crate) fn sample_state(
    s: &SimState,
    m_list: &[u32],
    gamma: f64,
    alpha: f64,
    budget: &mut EnergyBudget,
) -> NormSample {
    let record = budget.push(s.t, &s.u);
    let g_t = splitting_radius(s.t, gamma, alpha);
    NormSample {
        t: s.t,
        l2_sq: record.kinetic,
        deriv_sq: m_list.iter().map(|&m| lambda_norm_sq(&s.u, m)).collect(),
        diss_integral: record.dissipated,
        shell_energy: shell_energy(&s.u, g_t),
        g_t,
    }
}

/// `||Lambda^m u||^2` through the multiplier `|xi|^m`.
pub fn lambda_norm_sq(u: &SpectralField, m: u32) -> f64 {
    if m == 0 {
        return u.norm_sq();
    }
    let sum: f64 = u
        .grid()
        .xi_norm_sq()
        .into_iter()
        .enumerate()
        .map(|(idx, k2)| k2.powi(m as i32) * u.mode_energy(idx))
        .sum();
    sum * u.grid().spectral_weight()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub t_lo: f64,
    pub t_hi: f64,
}

/// Resolution rule that marks fits as trustworthy on a finite box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowRule {
    pub grid: Grid,
    pub gamma: f64,
    pub alpha: f64,
}

impl WindowRule {
    pub fn resolves(&self, t: f64) -> bool {
        window_is_resolved(&self.grid, t, self.gamma, self.alpha)
    }
}

/// Power law `value ~ c (t + 1)^(-exponent)` fitted by least squares in log-log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub norm: NormSelector,
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// First and last sample time actually used.
    pub window: FitWindow,
    pub samples: usize,
    pub valid: bool,
}

pub const MIN_FIT_SAMPLES: usize = 8;

/// Ordinary least squares of `log(value)` against `log(t + 1)` over samples
/// inside `window`. Without a rule the fit is always marked valid.
pub fn fit_decay_exponent(
    series: &NormSeries,
    which: NormSelector,
    window: FitWindow,
    rule: Option<&WindowRule>,
) -> Result<DecayFit> {
    let values = series.select(which).ok_or_else(|| {
        Error::InsufficientData(format!("series has no {which:?} column"))
    })?;
    let picked: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(values)
        .filter(|(&t, _)| t >= window.t_lo && t <= window.t_hi)
        .map(|(&t, &v)| (t, v))
        .collect();
    if picked.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{} samples in [{}, {}], need {MIN_FIT_SAMPLES}",
            picked.len(),
            window.t_lo,
            window.t_hi
        )));
    }
    if let Some((t, v)) = picked.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::InsufficientData(format!("nonpositive value {v} at t={t}")));
    }
    let xs: Vec<f64> = picked.iter().map(|(t, _)| (t + 1.0).ln()).collect();
    let ys: Vec<f64> = picked.iter().map(|(_, v)| v.ln()).collect();
    let (slope, offset, r_squared) = least_squares(&xs, &ys);
    let used = FitWindow {
        t_lo: picked[0].0,
        t_hi: picked[picked.len() - 1].0,
    };
    Ok(DecayFit {
        norm: which,
        exponent: -slope,
        intercept: offset.exp(),
        r_squared,
        window: used,
        samples: picked.len(),
        valid: rule.is_none_or(|r| r.resolves(used.t_hi)),
    })
}

/// `(slope, intercept, r^2)` of `y = slope * x + intercept`.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r2 = if syy <= f64::EPSILON * n * (my.abs() + 1.0).powi(2) {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    (slope, intercept, r2)
}

/// Relative tolerances for verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// On `L^2` exponents.
    #[serde(default = "Tolerances::default_l2")]
    pub l2: f64,
    /// On the derivative gap `rho_m - rho_0` against `m / alpha`.
    #[serde(default = "Tolerances::default_gap")]
    pub gap: f64,
}

impl Tolerances {
    fn default_l2() -> f64 {
        0.10
    }

    fn default_gap() -> f64 {
        0.15
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            l2: Self::default_l2(),
            gap: Self::default_gap(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Pass,
    Fail,
    /// Predicted exponent is zero (`p = 2`); nothing to verify.
    NoDecayClaim,
    /// No decay statement covers `(p, alpha, m)`; numbers are reported only.
    Inapplicable,
    /// Fit window extends past the resolved range.
    InvalidWindow,
}

impl VerdictStatus {
    pub fn is_failure(self) -> bool {
        matches!(self, VerdictStatus::Fail | VerdictStatus::InvalidWindow)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VerdictStatus::Pass => "pass",
            VerdictStatus::Fail => "fail",
            VerdictStatus::NoDecayClaim => "no_decay_claim",
            VerdictStatus::Inapplicable => "inapplicable",
            VerdictStatus::InvalidWindow => "invalid_window",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapCheck {
    pub predicted: f64,
    pub fitted: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub p: f64,
    pub alpha: f64,
    pub m: u32,
    pub predicted: f64,
    pub fitted: f64,
    /// `|fitted - predicted| / predicted` (absolute difference when predicted is 0).
    pub deviation: f64,
    pub tolerance: f64,
    pub window_valid: bool,
    pub claim: Option<DecayClaim>,
    pub applicable: Vec<DecayClaim>,
    pub gap: Option<GapCheck>,
    pub status: VerdictStatus,
}

impl Verdict {
    pub fn claim_label(&self) -> &'static str {
        match (self.status, self.claim) {
            (VerdictStatus::NoDecayClaim, _) => "none",
            (_, Some(c)) => c.label(),
            (_, None) => "none",
        }
    }
}

fn relative(fitted: f64, predicted: f64) -> f64 {
    if predicted == 0.0 {
        (fitted - predicted).abs()
    } else {
        ((fitted - predicted) / predicted).abs()
    }
}

/// Compares a fitted exponent with the predicted one. For `m >= 1` with an
/// `L^2` baseline fit the verdict is decided on the gap `rho_m - rho_0`.
pub fn compare_to_theory(
    fit: &DecayFit,
    p: f64,
    alpha: f64,
    m: u32,
    tol: &Tolerances,
    baseline: Option<&DecayFit>,
) -> Result<Verdict> {
    let predicted = predicted_exponent(p, alpha, m)?;
    let deviation = relative(fit.exponent, predicted);
    let claim = governing_claim(p, alpha, m);
    let gap = match (m, baseline) {
        (0, _) | (_, None) => None,
        (_, Some(base)) => {
            let predicted = m as f64 / alpha;
            let fitted = fit.exponent - base.exponent;
            Some(GapCheck {
                predicted,
                fitted,
                deviation: relative(fitted, predicted),
            })
        }
    };
    let (decisive, tolerance) = match gap {
        Some(g) => (g.deviation, tol.gap),
        None if m == 0 => (deviation, tol.l2),
        None => (deviation, tol.gap),
    };
    let status = if predicted == 0.0 {
        VerdictStatus::NoDecayClaim
    } else if !fit.valid {
        VerdictStatus::InvalidWindow
    } else if claim.is_none() {
        VerdictStatus::Inapplicable
    } else if decisive <= tolerance {
        VerdictStatus::Pass
    } else {
        VerdictStatus::Fail
    };
    Ok(Verdict {
        p,
        alpha,
        m,
        predicted,
        fitted: fit.exponent,
        deviation,
        tolerance,
        window_valid: fit.valid,
        claim,
        applicable: theorem_applicability(p, alpha),
        gap,
        status,
    })
}

/// Outcome of the pointwise check `|u_hat(xi,t)| <= C (|u0_hat(xi)| + |xi|^(1 - 2 alpha))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Smallest admissible `C`.
    pub c_star: f64,
    /// `|xi|` where `c_star` is attained.
    pub worst_xi: f64,
    /// Modes where the bound fails with `C = 1`.
    pub exceed_count: usize,
}

pub fn spectral_bound_check(u_t: &SpectralField, u0: &SpectralField, alpha: f64) -> Result<BoundReport> {
    u_t.grid().ensure_same(u0.grid())?;
    let mut report = BoundReport {
        c_star: 0.0,
        worst_xi: 0.0,
        exceed_count: 0,
    };
    for (idx, k2) in u_t.grid().xi_norm_sq().into_iter().enumerate() {
        if k2 == 0.0 {
            continue;
        }
        let k = k2.sqrt();
        let envelope = u0.mode_energy(idx).sqrt() + k.powf(1.0 - 2.0 * alpha);
        let ratio = u_t.mode_energy(idx).sqrt() / envelope;
        if ratio > 1.0 {
            report.exceed_count += 1;
        }
        if ratio > report.c_star {
            report.c_star = ratio;
            report.worst_xi = k;
        }
    }
    Ok(report)
}

/// `max_xi |h(xi)| / (|xi| ||u||^2)` for a nonlinear term `h` evaluated at `u`.
pub fn nonlinear_bound_ratio(h: &SpectralField, u: &SpectralField) -> Result<f64> {
    h.grid().ensure_same(u.grid())?;
    let energy = u.norm_sq();
    if energy == 0.0 {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    for (idx, k2) in h.grid().xi_norm_sq().into_iter().enumerate() {
        if k2 > 0.0 {
            worst = worst.max(h.mode_energy(idx).sqrt() / k2.sqrt());
        }
    }
    Ok(worst / energy)
}

/// Maxima of `values` over the first and last decade of `t + 1`.
/// Returns `None` when either decade holds no sample.
pub fn decade_maxima(times: &[f64], values: &[f64]) -> Option<(f64, f64)> {
    let end = times.last()? + 1.0;
    let first = times
        .iter()
        .zip(values)
        .filter(|(&t, _)| t + 1.0 <= 10.0)
        .map(|(_, &v)| v)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))?;
    let last = times
        .iter()
        .zip(values)
        .filter(|(&t, _)| t + 1.0 >= end / 10.0)
        .map(|(_, &v)| v)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))?;
    Some((first, last))
}
