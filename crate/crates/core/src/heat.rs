//! Exact evolution of the fractional heat equation `v_t + nu Lambda^{2 alpha} v = 0`
//! and the decay exponents it predicts.
//!
//! All exponents refer to squared norms: `||v(t)||^2 ~ (t + 1)^(-rho)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::decay::{splitting_radius, FitWindow};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::spectral::fractional_multiplier;

/// Number of lattice spacings the splitting radius must still span for
/// algebraic decay to be observable on the periodic box.
pub const RESOLVED_SHELLS: f64 = 4.0;

/// Multiplies every mode by `exp(-nu |xi|^{2 alpha} t)`.
pub fn heat_evolve(u0: &SpectralField, t: f64, alpha: f64, nu: f64) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(Error::param("t", format!("must be nonnegative, got {t}")));
    }
    let symbol = fractional_multiplier(u0.grid(), alpha)?;
    let factor = symbol.map(|s| (-nu * s * t).exp());
    let mut out = u0.clone();
    out.apply_multiplier(&factor)?;
    Ok(out)
}

/// `rho = (3 / (2 alpha)) (2/p - 1) + m / alpha`.
pub fn predicted_exponent(p: f64, alpha: f64, m: u32) -> Result<f64> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::param("p", format!("must lie in [1, 2], got {p}")));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
    }
    Ok(1.5 / alpha * (2.0 / p - 1.0) + m as f64 / alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Supercritical,
    Critical,
    Subcritical,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Supercritical => "supercritical",
            Regime::Critical => "critical",
            Regime::Subcritical => "subcritical",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Criticality {
    pub regime: Regime,
    /// Exponent `4 alpha - 5` of the energy under the natural scaling.
    pub scaling_exponent: f64,
}

/// Energy-scaling classification; the critical exponent is `alpha = 5/4`.
pub fn classify_criticality(alpha: f64) -> Criticality {
    let regime = if alpha < 1.25 {
        Regime::Supercritical
    } else if alpha == 1.25 {
        Regime::Critical
    } else {
        Regime::Subcritical
    };
    Criticality {
        regime,
        scaling_exponent: 4.0 * alpha - 5.0,
    }
}

/// Published decay statements, identified by the norm they control and
/// their hypotheses on `(alpha, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClaim {
    /// `||u||^2`, `0 < alpha <= 1`, `1 <= p < 2`.
    L2LowAlpha,
    /// `||u||^2`, `1 <= alpha < 5/4`, `1/(3 - 2 alpha) <= p < 2`.
    L2HighAlpha,
    /// `||D^m u||^2`, `0 < alpha <= 1`, `p = 1`, small data.
    DerivativeL1,
    /// `||D^m u||^2`, `0 < alpha <= 1/2`, `1 <= p <= 6/(4 alpha + 3)`.
    DerivativeHalfAlpha,
    /// `||D^m u||^2`, `1/2 < alpha <= 1`, `1 <= p <= 6/(4 alpha + 1)`.
    DerivativeUnitAlpha,
    /// `||D^m u||^2`, `1 <= alpha < 5/4`, `1/(3 - 2 alpha) <= p < 2`, small data.
    DerivativeHighAlpha,
    /// `||u||_{H^s}^2`, `0 < alpha <= 1`, `1 <= p < 2`, small data.
    SobolevLowAlpha,
    /// `||u||_{H^s}^2`, `1 <= alpha < 5/4`, `1/(3 - 2 alpha) <= p < 2`, small data.
    SobolevHighAlpha,
}

impl DecayClaim {
    pub const ALL: [DecayClaim; 8] = [
        DecayClaim::L2LowAlpha,
        DecayClaim::L2HighAlpha,
        DecayClaim::DerivativeL1,
        DecayClaim::DerivativeHalfAlpha,
        DecayClaim::DerivativeUnitAlpha,
        DecayClaim::DerivativeHighAlpha,
        DecayClaim::SobolevLowAlpha,
        DecayClaim::SobolevHighAlpha,
    ];

    /// Short label carrying the hypotheses, used in reports.
    pub fn label(self) -> &'static str {
        match self {
            DecayClaim::L2LowAlpha => "L2[0<a<=1;1<=p<2]",
            DecayClaim::L2HighAlpha => "L2[1<=a<5/4;1/(3-2a)<=p<2]",
            DecayClaim::DerivativeL1 => "Dm[0<a<=1;p=1]",
            DecayClaim::DerivativeHalfAlpha => "Dm[0<a<=1/2;1<=p<=6/(4a+3)]",
            DecayClaim::DerivativeUnitAlpha => "Dm[1/2<a<=1;1<=p<=6/(4a+1)]",
            DecayClaim::DerivativeHighAlpha => "Dm[1<=a<5/4;1/(3-2a)<=p<2]",
            DecayClaim::SobolevLowAlpha => "Hs[0<a<=1;1<=p<2]",
            DecayClaim::SobolevHighAlpha => "Hs[1<=a<5/4;1/(3-2a)<=p<2]",
        }
    }

    pub fn covers(self, p: f64, alpha: f64) -> bool {
        const EPS: f64 = 1e-12;
        let low_alpha = alpha > 0.0 && alpha <= 1.0;
        let high_alpha = (1.0..1.25).contains(&alpha);
        let p_range = (1.0..2.0).contains(&p);
        let high_p = high_alpha && p_range && p >= 1.0 / (3.0 - 2.0 * alpha) - EPS;
        match self {
            DecayClaim::L2LowAlpha | DecayClaim::SobolevLowAlpha => low_alpha && p_range,
            DecayClaim::L2HighAlpha | DecayClaim::DerivativeHighAlpha | DecayClaim::SobolevHighAlpha => high_p,
            DecayClaim::DerivativeL1 => low_alpha && p == 1.0,
            DecayClaim::DerivativeHalfAlpha => {
                alpha > 0.0 && alpha <= 0.5 && p >= 1.0 && p <= 6.0 / (4.0 * alpha + 3.0) + EPS
            }
            DecayClaim::DerivativeUnitAlpha => {
                alpha > 0.5 && alpha <= 1.0 && p >= 1.0 && p <= 6.0 / (4.0 * alpha + 1.0) + EPS
            }
        }
    }

    /// True for statements about derivative norms (`m >= 1`).
    pub fn is_derivative(self) -> bool {
        matches!(
            self,
            DecayClaim::DerivativeL1
                | DecayClaim::DerivativeHalfAlpha
                | DecayClaim::DerivativeUnitAlpha
                | DecayClaim::DerivativeHighAlpha
        )
    }
}

impl fmt::Display for DecayClaim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Every decay statement whose hypotheses `(p, alpha)` satisfies.
pub fn theorem_applicability(p: f64, alpha: f64) -> Vec<DecayClaim> {
    DecayClaim::ALL
        .into_iter()
        .filter(|c| c.covers(p, alpha))
        .collect()
}

/// The statement that governs the squared `||Lambda^m u||` decay for `(p, alpha)`.
pub fn governing_claim(p: f64, alpha: f64, m: u32) -> Option<DecayClaim> {
    let order: &[DecayClaim] = if m == 0 {
        &[DecayClaim::L2LowAlpha, DecayClaim::L2HighAlpha]
    } else {
        &[
            DecayClaim::DerivativeL1,
            DecayClaim::DerivativeHalfAlpha,
            DecayClaim::DerivativeUnitAlpha,
            DecayClaim::DerivativeHighAlpha,
        ]
    };
    order.iter().copied().find(|c| c.covers(p, alpha))
}

/// Latest time at which the splitting radius still spans
/// [`RESOLVED_SHELLS`] lattice spacings: `gamma (4 dk)^(-2 alpha) - 1`.
/// Negative when no such time exists.
pub fn valid_window_end(grid: &Grid, gamma: f64, alpha: f64) -> f64 {
    gamma * (RESOLVED_SHELLS * grid.dk()).powf(-2.0 * alpha) - 1.0
}

/// Whether `g(t)` still resolves [`RESOLVED_SHELLS`] lattice shells.
pub fn window_is_resolved(grid: &Grid, t: f64, gamma: f64, alpha: f64) -> bool {
    splitting_radius(t, gamma, alpha) >= RESOLVED_SHELLS * grid.dk() * (1.0 - 1e-12)
}

/// Fit window spanning `decades` in `t + 1` and ending at `end_fraction`
/// of the valid-window end (measured in `t + 1`).
pub fn decade_window(grid: &Grid, gamma: f64, alpha: f64, decades: f64, end_fraction: f64) -> Result<FitWindow> {
    let end = valid_window_end(grid, gamma, alpha);
    if !(end > 0.0) {
        return Err(Error::param(
            "box_length",
            format!("no resolved window: g(0) < {RESOLVED_SHELLS} dk"),
        ));
    }
    let t_hi = end_fraction * (end + 1.0) - 1.0;
    let t_lo = (t_hi + 1.0) / 10f64.powf(decades) - 1.0;
    if !(t_lo >= 0.0 && t_hi > t_lo) {
        return Err(Error::param(
            "window",
            format!("window [{t_lo}, {t_hi}] is empty or starts before t = 0"),
        ));
    }
    Ok(FitWindow { t_lo, t_hi })
}

/// Closed-form norms of the heat evolution of fixed initial data.
#[derive(Debug, Clone)]
pub struct HeatOracle {
    grid: Grid,
    alpha: f64,
    nu: f64,
    /// Nonzero modes only: `(|xi|^2, |xi|^{2 alpha}, |u0_hat|^2)`.
    modes: Vec<(f64, f64, f64)>,
}

impl HeatOracle {
    pub fn new(u0: &SpectralField, alpha: f64, nu: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
        }
        let grid = *u0.grid();
        let modes = grid
            .xi_norm_sq()
            .into_iter()
            .enumerate()
            .filter_map(|(idx, k2)| {
                let e = u0.mode_energy(idx);
                (e > 0.0).then(|| (k2, if k2 == 0.0 { 0.0 } else { k2.powf(alpha) }, e))
            })
            .collect();
        Ok(Self { grid, alpha, nu, modes })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `||Lambda^m v(t)||^2`.
    pub fn norm_sq(&self, t: f64, m: u32) -> f64 {
        let sum: f64 = self
            .modes
            .iter()
            .map(|&(k2, s, e)| {
                let w = if m == 0 { 1.0 } else { k2.powi(m as i32) };
                w * e * (-2.0 * self.nu * s * t).exp()
            })
            .sum();
        sum * self.grid.spectral_weight()
    }

    /// Energy of `v(t)` inside the ball `|xi| <= radius`.
    pub fn shell_energy(&self, t: f64, radius: f64) -> f64 {
        let r2 = radius * radius * (1.0 + 1e-12);
        let sum: f64 = self
            .modes
            .iter()
            .filter(|&&(k2, _, _)| k2 <= r2)
            .map(|&(_, s, e)| e * (-2.0 * self.nu * s * t).exp())
            .sum();
        sum * self.grid.spectral_weight()
    }

    /// `2 nu int_0^t ||Lambda^alpha v||^2 ds = ||v(0)||^2 - ||v(t)||^2`, per mode in closed form.
    pub fn dissipated(&self, t: f64) -> f64 {
        let sum: f64 = self
            .modes
            .iter()
            .map(|&(_, s, e)| -e * (-2.0 * self.nu * s * t).exp_m1())
            .sum();
        sum * self.grid.spectral_weight()
    }
}
