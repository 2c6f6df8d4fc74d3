//! JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decay::{FitWindow, Tolerances};
use crate::dynamics::SimParams;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::heat::decade_window;
use crate::initial::{p_for_sigma, random_divfree_field, sigma_for_p, taylor_green_field, ShellWeighting, SpectrumSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub box_length: f64,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.n, self.box_length)
    }
}

fn default_one() -> f64 {
    1.0
}

/// Initial velocity. The constructed field is multiplied by `params.amplitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// Random divergence-free field with a power-law low-frequency profile.
    /// Give exactly one of `sigma` and `p` (`sigma = 3/p - 3`).
    Spectrum {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        xi_knee: Option<f64>,
        #[serde(default)]
        high_decay: f64,
        #[serde(default = "default_one")]
        amplitude: f64,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        weighting: ShellWeighting,
    },
    TaylorGreen {
        #[serde(default = "default_one")]
        amplitude: f64,
    },
}

impl InitialData {
    /// Flat spectrum (`p = 1`) with the given seed.
    pub fn flat(seed: u64) -> Self {
        InitialData::Spectrum {
            sigma: Some(0.0),
            p: None,
            xi_knee: None,
            high_decay: 0.0,
            amplitude: 1.0,
            seed,
            weighting: ShellWeighting::default(),
        }
    }

    pub fn spectrum_spec(&self) -> Result<Option<SpectrumSpec>> {
        match *self {
            InitialData::Spectrum { sigma, p, xi_knee, high_decay, amplitude, seed, weighting } => {
                let sigma = match (sigma, p) {
                    (Some(s), None) => s,
                    (None, Some(p)) => sigma_for_p(p)?,
                    _ => {
                        return Err(Error::Config(
                            "spectrum initial data needs exactly one of `sigma` and `p`".into(),
                        ))
                    }
                };
                let spec = SpectrumSpec { sigma, xi_knee, high_decay, amplitude, seed, weighting };
                spec.validate()?;
                Ok(Some(spec))
            }
            InitialData::TaylorGreen { .. } => Ok(None),
        }
    }

    /// Lebesgue exponent the decay predictions refer to, when defined.
    pub fn theory_p(&self) -> Result<Option<f64>> {
        Ok(match *self {
            InitialData::Spectrum { p: Some(p), .. } => Some(p),
            _ => self.spectrum_spec()?.map(|s| p_for_sigma(s.sigma)).filter(|p| (1.0..=2.0).contains(p)),
        })
    }

    pub fn with_seed(self, new_seed: u64) -> Self {
        match self {
            InitialData::Spectrum { sigma, p, xi_knee, high_decay, amplitude, weighting, .. } => {
                InitialData::Spectrum { sigma, p, xi_knee, high_decay, amplitude, seed: new_seed, weighting }
            }
            other => other,
        }
    }

    pub fn with_p(self, new_p: f64) -> Self {
        match self {
            InitialData::Spectrum { xi_knee, high_decay, amplitude, seed, weighting, .. } => InitialData::Spectrum {
                sigma: None,
                p: Some(new_p),
                xi_knee,
                high_decay,
                amplitude,
                seed,
                weighting,
            },
            other => other,
        }
    }

    pub fn build(&self, grid: &Grid) -> Result<SpectralField> {
        match (self, self.spectrum_spec()?) {
            (_, Some(spec)) => random_divfree_field(grid, &spec),
            (InitialData::TaylorGreen { amplitude }, None) => {
                if !(*amplitude > 0.0) {
                    return Err(Error::param("amplitude", format!("must be positive, got {amplitude}")));
                }
                Ok(taylor_green_field(grid, *amplitude))
            }
            (InitialData::Spectrum { .. }, None) => unreachable!(),
        }
    }
}

/// Which steps are recorded. Step 0 and the final step are always included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sampling {
    /// Every `every` steps.
    Uniform { every: usize },
    /// About `count` steps spaced geometrically in `t + 1`.
    Log { count: usize },
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling::Uniform { every: 1 }
    }
}

impl Sampling {
    pub fn steps(&self, total: usize) -> Result<Vec<usize>> {
        let mut out = match *self {
            Sampling::Uniform { every } => {
                if every == 0 {
                    return Err(Error::Config("sampling.every must be positive".into()));
                }
                (0..=total).step_by(every).collect::<Vec<_>>()
            }
            Sampling::Log { count } => {
                if count < 2 {
                    return Err(Error::Config("sampling.count must be at least 2".into()));
                }
                let top = (total as f64 + 1.0).ln();
                let mut v: Vec<usize> = (0..count)
                    .map(|i| ((top * i as f64 / (count - 1) as f64).exp() - 1.0).round() as usize)
                    .collect();
                v.dedup();
                v
            }
        };
        if out.last() != Some(&total) {
            out.push(total);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FitConfig {
    /// `decades` in `t + 1` ending at `end_fraction` of the resolved window end.
    Auto {
        #[serde(default = "default_one")]
        decades: f64,
        #[serde(default = "default_one")]
        end_fraction: f64,
    },
    Explicit { t_lo: f64, t_hi: f64 },
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig::Auto { decades: 1.0, end_fraction: 1.0 }
    }
}

impl FitConfig {
    pub fn window(&self, grid: &Grid, gamma: f64, alpha: f64) -> Result<FitWindow> {
        match *self {
            FitConfig::Auto { decades, end_fraction } => {
                if !(decades > 0.0 && end_fraction > 0.0 && end_fraction <= 1.0) {
                    return Err(Error::Config(format!(
                        "fit window needs decades > 0 and end_fraction in (0, 1], got {decades}, {end_fraction}"
                    )));
                }
                decade_window(grid, gamma, alpha, decades, end_fraction)
            }
            FitConfig::Explicit { t_lo, t_hi } => {
                if !(t_lo >= 0.0 && t_hi > t_lo) {
                    return Err(Error::Config(format!("fit window [{t_lo}, {t_hi}] is empty")));
                }
                Ok(FitWindow { t_lo, t_hi })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Heat,
    Simulate,
    Predict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Alpha,
    P,
    M,
    Seed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub param: SweepParam,
    pub values: Vec<f64>,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_m_list() -> Vec<u32> {
    vec![1]
}

fn default_output() -> PathBuf {
    PathBuf::from("runs/out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub grid: GridConfig,
    pub params: SimParams,
    pub initial_data: InitialData,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub fit: FitConfig,
    /// Derivative orders recorded as `deriv{m}_sq` columns.
    #[serde(default = "default_m_list")]
    pub m_list: Vec<u32>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Write `FNS1` snapshots of the initial and final state.
    #[serde(default)]
    pub snapshots: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl RunConfig {
    pub fn new(grid: GridConfig, params: SimParams, initial_data: InitialData) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            grid,
            params,
            initial_data,
            sampling: Sampling::default(),
            fit: FitConfig::default(),
            m_list: default_m_list(),
            output_dir: default_output(),
            tolerances: Tolerances::default(),
            snapshots: false,
            sweep: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let grid = self.grid.build()?;
        self.params.validate(&grid)?;
        self.initial_data.spectrum_spec()?;
        if let InitialData::TaylorGreen { amplitude } = self.initial_data {
            if !(amplitude > 0.0) {
                return Err(Error::param("amplitude", format!("must be positive, got {amplitude}")));
            }
        }
        self.sampling.steps(self.params.steps())?;
        if let FitConfig::Explicit { t_lo, t_hi } = self.fit {
            if !(t_lo >= 0.0 && t_hi > t_lo) {
                return Err(Error::Config(format!("fit window [{t_lo}, {t_hi}] is empty")));
            }
        }
        let mut seen = self.m_list.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.m_list.len() || self.m_list.contains(&0) {
            return Err(Error::Config("m_list must hold distinct positive orders".into()));
        }
        if !(self.tolerances.l2 > 0.0 && self.tolerances.gap > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        self.grid.build()
    }

    /// Sampled step indices.
    pub fn sample_steps(&self) -> Result<Vec<usize>> {
        self.sampling.steps(self.params.steps())
    }

    /// Initial field before projection and truncation, scaled by `params.amplitude`.
    pub fn initial_field(&self, grid: &Grid) -> Result<SpectralField> {
        Ok(self.initial_data.build(grid)?.scaled(self.params.amplitude))
    }

    pub fn fit_window(&self, grid: &Grid) -> Result<FitWindow> {
        self.fit.window(grid, self.params.gamma, self.params.alpha)
    }
}
