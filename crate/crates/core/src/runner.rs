//! Run orchestration: simulate / heat runs, sweeps, artifacts and exit codes.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SweepConfig, SweepKind, SweepParam};
use crate::decay::{
    compare_to_theory, decade_maxima, fit_decay_exponent, lambda_norm_sq, sample_state, shell_energy,
    spectral_bound_check, splitting_radius, DecayFit, FitWindow, NormSample, NormSelector, NormSeries, Verdict,
    VerdictStatus, WindowRule,
};
use crate::dynamics::{EnergyBudget, GalerkinSolver, SimState};
use crate::error::{Error, Result};
use crate::heat::{
    classify_criticality, governing_claim, heat_evolve, predicted_exponent, theorem_applicability,
    valid_window_end, Criticality, DecayClaim, HeatOracle,
};
use crate::io::{fmt_f64, write_series_csv, write_snapshot, write_table, Snapshot};
use crate::spectral::{leray_project, SpectralTransform};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    Simulate,
    Heat,
}

/// Per-sample quantities that are not part of the norm series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub t: f64,
    /// `||v(t)||^2` for the heat evolution of the same initial state.
    pub heat_l2_sq: f64,
    /// `|l2_sq - heat_l2_sq| / heat_l2_sq`.
    pub tracking_deviation: f64,
    /// `2 nu ||Lambda^alpha u||^2`.
    pub dissipation_rate: f64,
    /// Summed per-mode magnitude of nonlinear energy exchange.
    pub transfer_rate: f64,
    /// `(||u||^2 + dissipated - ||u0||^2) / ||u0||^2`.
    pub energy_defect: f64,
    /// Smallest `C` in `|u_hat(t)| <= C (|u0_hat| + |xi|^(1 - 2 alpha))`.
    pub c_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureReport {
    pub t: f64,
    pub last_finite_t: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub kind: RunKind,
    pub n: usize,
    pub box_length: f64,
    pub alpha: f64,
    pub p: Option<f64>,
    pub gamma: f64,
    /// The splitting constant only places the diagnostic ball; its value is a free choice.
    pub gamma_is_free_choice: bool,
    pub criticality: Criticality,
    pub samples: usize,
    pub fit_window: Option<FitWindow>,
    pub valid_window_end: f64,
    pub passed: usize,
    pub failed: usize,
    pub other: usize,
    pub fit_errors: Vec<String>,
    pub max_tracking_deviation: f64,
    pub max_tracking_deviation_in_window: Option<f64>,
    /// Integrated transfer over integrated dissipation.
    pub transfer_ratio: f64,
    pub max_energy_defect: f64,
    pub c_star_initial: f64,
    pub c_star_max: f64,
    pub c_star_first_decade_max: Option<f64>,
    pub c_star_last_decade_max: Option<f64>,
    pub exit_code: i32,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub kind: RunKind,
    pub config: RunConfig,
    pub series: NormSeries,
    pub diagnostics: Vec<DiagnosticRow>,
    pub fits: Vec<DecayFit>,
    pub verdicts: Vec<Verdict>,
    pub failure: Option<FailureReport>,
    pub snapshots: Vec<(String, Snapshot)>,
    pub summary: Summary,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        self.summary.exit_code
    }

    pub fn verdict(&self, m: u32) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.m == m)
    }

    pub fn fit(&self, which: NormSelector) -> Option<&DecayFit> {
        self.fits.iter().find(|f| f.norm == which)
    }
}

/// Galerkin run of the configured problem. Blow-up is reported, not returned as an error.
pub fn run_simulate(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let grid = config.grid()?;
    let params = config.params;
    let mut solver = GalerkinSolver::new(&grid, params)?;
    let start = SimState::initial(&config.initial_field(&grid)?, solver.cutoff())?;
    let oracle = HeatOracle::new(&start.u, params.alpha, params.nu)?;
    let samples = config.sample_steps()?;
    let total = params.steps();

    let mut series = NormSeries::new(config.m_list.clone());
    let mut diagnostics = Vec::with_capacity(samples.len());
    let mut budget = EnergyBudget::new(&grid, params.alpha, params.nu)?;
    let k0 = start.u.norm_sq();
    let mut next_sample = samples.iter().peekable();
    let mut state = start.clone();
    let mut failure = None;

    for step in 0..=total {
        if step > 0 {
            match solver.step(&state) {
                Ok(s) => {
                    // label by step count so sample times match `run_heat` exactly
                    state = SimState { t: step as f64 * params.dt, u: s.u };
                }
                Err(Error::BlowUp { t, last_finite_t }) => {
                    failure = Some(FailureReport {
                        t,
                        last_finite_t,
                        message: format!("non-finite coefficients after step {step}"),
                    });
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if next_sample.peek() == Some(&&step) {
            next_sample.next();
            let sample = sample_state(&state, &config.m_list, params.gamma, params.alpha, &mut budget);
            let rhs = solver.nonlinear_rhs(&state.u)?;
            let heat = oracle.norm_sq(state.t, 0);
            diagnostics.push(DiagnosticRow {
                t: state.t,
                heat_l2_sq: heat,
                tracking_deviation: relative_gap(sample.l2_sq, heat),
                dissipation_rate: solver.dissipation_rate(&state.u),
                transfer_rate: solver.transfer_rate(&state.u, &rhs),
                energy_defect: relative_gap(sample.l2_sq + sample.diss_integral, k0),
                c_star: spectral_bound_check(&state.u, &start.u, params.alpha)?.c_star,
            });
            series.push(sample)?;
        } else {
            budget.push(state.t, &state.u);
        }
    }

    let mut snapshots = Vec::new();
    if config.snapshots {
        snapshots.push(("initial.fns".to_string(), Snapshot { alpha: params.alpha, t: 0.0, u: start.u.clone() }));
        if failure.is_none() {
            snapshots.push(("final.fns".to_string(), Snapshot { alpha: params.alpha, t: state.t, u: state.u }));
        }
    }
    finish(RunKind::Simulate, config, series, diagnostics, failure, snapshots)
}

/// Exact linear evolution of the configured initial state; no time-stepping error.
pub fn run_heat(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let grid = config.grid()?;
    let params = config.params;
    let solver = GalerkinSolver::new(&grid, params)?.with_nonlinearity(false);
    let start = SimState::initial(&config.initial_field(&grid)?, solver.cutoff())?;
    let oracle = HeatOracle::new(&start.u, params.alpha, params.nu)?;
    let k0 = oracle.norm_sq(0.0, 0);

    let mut series = NormSeries::new(config.m_list.clone());
    let mut diagnostics = Vec::new();
    let mut last = None;
    for step in config.sample_steps()? {
        let t = step as f64 * params.dt;
        let v = heat_evolve(&start.u, t, params.alpha, params.nu)?;
        let l2 = oracle.norm_sq(t, 0);
        let g_t = splitting_radius(t, params.gamma, params.alpha);
        let sample = NormSample {
            t,
            l2_sq: l2,
            deriv_sq: config.m_list.iter().map(|&m| oracle.norm_sq(t, m)).collect(),
            diss_integral: oracle.dissipated(t),
            shell_energy: oracle.shell_energy(t, g_t),
            g_t,
        };
        diagnostics.push(DiagnosticRow {
            t,
            heat_l2_sq: l2,
            tracking_deviation: 0.0,
            dissipation_rate: solver.dissipation_rate(&v),
            transfer_rate: 0.0,
            energy_defect: relative_gap(sample.l2_sq + sample.diss_integral, k0),
            c_star: spectral_bound_check(&v, &start.u, params.alpha)?.c_star,
        });
        series.push(sample)?;
        last = Some(Snapshot { alpha: params.alpha, t, u: v });
    }
    let mut snapshots = Vec::new();
    if config.snapshots {
        snapshots.push(("initial.fns".to_string(), Snapshot { alpha: params.alpha, t: 0.0, u: start.u }));
        snapshots.extend(last.map(|s| ("final.fns".to_string(), s)));
    }
    finish(RunKind::Heat, config, series, diagnostics, None, snapshots)
}

pub fn run(config: &RunConfig, kind: RunKind) -> Result<RunReport> {
    match kind {
        RunKind::Simulate => run_simulate(config),
        RunKind::Heat => run_heat(config),
    }
}

fn relative_gap(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        value.abs()
    } else {
        (value - reference).abs() / reference
    }
}

fn trapezoid(t: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    (1..t.len()).map(|i| 0.5 * (t[i] - t[i - 1]) * (f(i) + f(i - 1))).sum()
}

fn finish(
    kind: RunKind,
    config: &RunConfig,
    series: NormSeries,
    diagnostics: Vec<DiagnosticRow>,
    failure: Option<FailureReport>,
    snapshots: Vec<(String, Snapshot)>,
) -> Result<RunReport> {
    let grid = config.grid()?;
    let params = config.params;
    let p = config.initial_data.theory_p()?;
    let window = config.fit_window(&grid).ok();

    let mut fits = Vec::new();
    let mut verdicts = Vec::new();
    let mut fit_errors = Vec::new();
    if failure.is_none() {
        let rule = WindowRule { grid, gamma: params.gamma, alpha: params.alpha };
        match window {
            None => fit_errors.push(match config.fit_window(&grid) {
                Err(e) => e.to_string(),
                Ok(_) => unreachable!(),
            }),
            Some(w) => {
                let selectors =
                    std::iter::once(NormSelector::L2).chain(config.m_list.iter().map(|&m| NormSelector::Derivative(m)));
                for which in selectors {
                    match fit_decay_exponent(&series, which, w, Some(&rule)) {
                        Ok(f) => fits.push(f),
                        Err(e) => fit_errors.push(format!("{which:?}: {e}")),
                    }
                }
            }
        }
        if let Some(p) = p {
            let baseline = fits.iter().find(|f| f.norm == NormSelector::L2).copied();
            for f in &fits {
                let m = f.norm.order();
                verdicts.push(compare_to_theory(f, p, params.alpha, m, &config.tolerances, baseline.as_ref())?);
            }
        }
    }

    let in_window: Vec<f64> = window
        .map(|w| {
            diagnostics
                .iter()
                .filter(|d| d.t >= w.t_lo && d.t <= w.t_hi)
                .map(|d| d.tracking_deviation)
                .collect()
        })
        .unwrap_or_default();
    let times: Vec<f64> = diagnostics.iter().map(|d| d.t).collect();
    let c_series: Vec<f64> = diagnostics.iter().map(|d| d.c_star).collect();
    let dissipated = trapezoid(&times, |i| diagnostics[i].dissipation_rate);
    let transferred = trapezoid(&times, |i| diagnostics[i].transfer_rate);
    let decades = decade_maxima(&times, &c_series);
    let max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, f64::max);

    let passed = verdicts.iter().filter(|v| v.status == VerdictStatus::Pass).count();
    let failed = verdicts.iter().filter(|v| v.status.is_failure()).count();
    let exit_code = if failure.is_some() {
        EXIT_BLOWUP
    } else if failed > 0 || (p.is_some() && !fit_errors.is_empty()) {
        EXIT_FAIL
    } else {
        EXIT_PASS
    };
    let summary = Summary {
        kind,
        n: grid.n(),
        box_length: grid.box_length(),
        alpha: params.alpha,
        p,
        gamma: params.gamma,
        gamma_is_free_choice: true,
        criticality: classify_criticality(params.alpha),
        samples: series.len(),
        fit_window: window,
        valid_window_end: valid_window_end(&grid, params.gamma, params.alpha),
        passed,
        failed,
        other: verdicts.len() - passed - failed,
        fit_errors,
        max_tracking_deviation: max(&mut diagnostics.iter().map(|d| d.tracking_deviation)),
        max_tracking_deviation_in_window: (!in_window.is_empty()).then(|| max(&mut in_window.iter().copied())),
        transfer_ratio: if dissipated > 0.0 { transferred / dissipated } else { 0.0 },
        max_energy_defect: max(&mut diagnostics.iter().map(|d| d.energy_defect)),
        c_star_initial: c_series.first().copied().unwrap_or(0.0),
        c_star_max: max(&mut c_series.iter().copied()),
        c_star_first_decade_max: decades.map(|d| d.0),
        c_star_last_decade_max: decades.map(|d| d.1),
        exit_code,
    };
    Ok(RunReport {
        kind,
        config: config.clone(),
        series,
        diagnostics,
        fits,
        verdicts,
        failure,
        snapshots,
        summary,
    })
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub const VERDICT_HEADER: [&str; 14] = [
    "p",
    "alpha",
    "m",
    "predicted",
    "fitted",
    "deviation",
    "gap_predicted",
    "gap_fitted",
    "gap_deviation",
    "tolerance",
    "valid",
    "claim",
    "criticality",
    "status",
];

fn verdict_row(v: &Verdict) -> Vec<String> {
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    vec![
        fmt_f64(v.p),
        fmt_f64(v.alpha),
        v.m.to_string(),
        fmt_f64(v.predicted),
        fmt_f64(v.fitted),
        fmt_f64(v.deviation),
        opt(v.gap.map(|g| g.predicted)),
        opt(v.gap.map(|g| g.fitted)),
        opt(v.gap.map(|g| g.deviation)),
        fmt_f64(v.tolerance),
        v.window_valid.to_string(),
        v.claim_label().to_string(),
        classify_criticality(v.alpha).regime.to_string(),
        v.status.as_str().to_string(),
    ]
}

const DIAGNOSTIC_HEADER: [&str; 7] = [
    "t",
    "heat_l2_sq",
    "tracking_deviation",
    "dissipation_rate",
    "transfer_rate",
    "energy_defect",
    "c_star",
];

/// Writes every artifact of `report` into `dir`.
pub fn write_artifacts(report: &RunReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_json(&dir.join("config.json"), &report.config)?;
    write_series_csv(create(&dir.join("series.csv"))?, &report.series)?;
    let diag: Vec<Vec<String>> = report
        .diagnostics
        .iter()
        .map(|d| {
            [d.t, d.heat_l2_sq, d.tracking_deviation, d.dissipation_rate, d.transfer_rate, d.energy_defect, d.c_star]
                .into_iter()
                .map(fmt_f64)
                .collect()
        })
        .collect();
    write_table(create(&dir.join("diagnostics.csv"))?, &DIAGNOSTIC_HEADER, &diag)?;
    write_json(&dir.join("fits.json"), &report.fits)?;
    let rows: Vec<Vec<String>> = report.verdicts.iter().map(verdict_row).collect();
    write_table(create(&dir.join("verdicts.csv"))?, &VERDICT_HEADER, &rows)?;
    write_json(&dir.join("summary.json"), &report.summary)?;
    if let Some(f) = &report.failure {
        write_json(&dir.join("failure.json"), f)?;
    }
    for (name, snap) in &report.snapshots {
        write_snapshot(&dir.join(name), snap)?;
    }
    Ok(())
}

/// Runs and writes artifacts to `config.output_dir`.
pub fn execute(config: &RunConfig, kind: RunKind) -> Result<RunReport> {
    let report = run(config, kind)?;
    write_artifacts(&report, &config.output_dir)?;
    Ok(report)
}

/// Predicted exponent and the statements covering `(p, alpha)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub p: f64,
    pub alpha: f64,
    pub m: u32,
    pub predicted: f64,
    pub governing: Option<DecayClaim>,
    pub applicable: Vec<DecayClaim>,
    pub criticality: Criticality,
}

pub fn predict(p: f64, alpha: f64, m: u32) -> Result<Prediction> {
    Ok(Prediction {
        p,
        alpha,
        m,
        predicted: predicted_exponent(p, alpha, m)?,
        governing: governing_claim(p, alpha, m),
        applicable: theorem_applicability(p, alpha),
        criticality: classify_criticality(alpha),
    })
}

/// One row of a sweep table. Runs that fail keep their row with `error` set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub p: Option<f64>,
    pub alpha: f64,
    pub m: u32,
    pub predicted: Option<f64>,
    pub fitted: Option<f64>,
    pub deviation: Option<f64>,
    pub valid: Option<bool>,
    pub claim: String,
    pub criticality: String,
    pub status: String,
    pub error: Option<String>,
}

pub const SWEEP_HEADER: [&str; 12] = [
    "value",
    "p",
    "alpha",
    "m",
    "predicted",
    "fitted",
    "deviation",
    "valid",
    "claim",
    "criticality",
    "status",
    "error",
];

impl SweepRow {
    fn cells(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        vec![
            fmt_f64(self.value),
            opt(self.p),
            fmt_f64(self.alpha),
            self.m.to_string(),
            opt(self.predicted),
            opt(self.fitted),
            opt(self.deviation),
            self.valid.map(|v| v.to_string()).unwrap_or_default(),
            self.claim.clone(),
            self.criticality.clone(),
            self.status.clone(),
            self.error.clone().unwrap_or_default(),
        ]
    }

    fn failed(value: f64, alpha: f64, p: Option<f64>, error: String) -> Self {
        SweepRow {
            value,
            p,
            alpha,
            m: 0,
            predicted: None,
            fitted: None,
            deviation: None,
            valid: None,
            claim: "none".into(),
            criticality: if alpha > 0.0 { classify_criticality(alpha).regime.to_string() } else { String::new() },
            status: "error".into(),
            error: Some(error),
        }
    }
}

fn apply_axis(template: &RunConfig, param: SweepParam, value: f64) -> Result<RunConfig> {
    let mut cfg = template.clone();
    cfg.sweep = None;
    match param {
        SweepParam::Alpha => cfg.params.alpha = value,
        SweepParam::P => cfg.initial_data = cfg.initial_data.with_p(value),
        SweepParam::M => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(Error::param("m", format!("must be a positive integer, got {value}")));
            }
            cfg.m_list = vec![value as u32];
        }
        SweepParam::Seed => {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(Error::param("seed", format!("must be a nonnegative integer, got {value}")));
            }
            cfg.initial_data = cfg.initial_data.with_seed(value as u64);
        }
    }
    Ok(cfg)
}

fn sweep_one(template: &RunConfig, sweep: &SweepConfig, index: usize, value: f64) -> Vec<SweepRow> {
    let alpha_hint = if sweep.param == SweepParam::Alpha { value } else { template.params.alpha };
    let cfg = match apply_axis(template, sweep.param, value) {
        Ok(c) => c,
        Err(e) => return vec![SweepRow::failed(value, alpha_hint, None, e.to_string())],
    };
    let p = cfg.initial_data.theory_p().ok().flatten();
    let alpha = cfg.params.alpha;
    let mut orders = vec![0];
    if sweep.param == SweepParam::M {
        orders = cfg.m_list.clone();
    } else {
        orders.extend(&cfg.m_list);
    }
    match sweep.kind {
        SweepKind::Predict => {
            let Some(p) = p else {
                return vec![SweepRow::failed(value, alpha, None, "initial data has no Lebesgue exponent".into())];
            };
            orders
                .into_iter()
                .map(|m| match predict(p, alpha, m) {
                    Ok(pr) => SweepRow {
                        value,
                        p: Some(p),
                        alpha,
                        m,
                        predicted: Some(pr.predicted),
                        fitted: None,
                        deviation: None,
                        valid: None,
                        claim: pr.governing.map_or("none", DecayClaim::label).to_string(),
                        criticality: pr.criticality.regime.to_string(),
                        status: "predicted".into(),
                        error: None,
                    },
                    Err(e) => SweepRow { m, ..SweepRow::failed(value, alpha, Some(p), e.to_string()) },
                })
                .collect()
        }
        SweepKind::Heat | SweepKind::Simulate => {
            let kind = if sweep.kind == SweepKind::Heat { RunKind::Heat } else { RunKind::Simulate };
            let mut cfg = cfg;
            cfg.output_dir = template.output_dir.join(format!("run_{index:03}"));
            let report = match execute(&cfg, kind) {
                Ok(r) => r,
                Err(e) => return vec![SweepRow::failed(value, alpha, p, e.to_string())],
            };
            if let Some(f) = &report.failure {
                return vec![SweepRow::failed(value, alpha, p, format!("blow-up at t={} ", f.t).trim_end().to_string())];
            }
            if report.verdicts.is_empty() {
                let why = report.summary.fit_errors.join("; ");
                return vec![SweepRow::failed(value, alpha, p, if why.is_empty() { "no verdicts".into() } else { why })];
            }
            report
                .verdicts
                .iter()
                .filter(|v| orders.contains(&v.m))
                .map(|v| SweepRow {
                    value,
                    p: Some(v.p),
                    alpha,
                    m: v.m,
                    predicted: Some(v.predicted),
                    fitted: Some(v.fitted),
                    deviation: Some(v.deviation),
                    valid: Some(v.window_valid),
                    claim: v.claim_label().to_string(),
                    criticality: classify_criticality(alpha).regime.to_string(),
                    status: v.status.as_str().to_string(),
                    error: None,
                })
                .collect()
        }
    }
}

/// Runs the template once per axis value, in parallel, and collects one table.
/// Rows keep axis order. Heat and simulate runs write into `run_NNN` below
/// the template's output directory.
pub fn run_sweep(template: &RunConfig, sweep: &SweepConfig) -> Vec<SweepRow> {
    sweep
        .values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| sweep_one(template, sweep, i, v))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let cells: Vec<Vec<String>> = rows.iter().map(SweepRow::cells).collect();
    write_table(create(path)?, &SWEEP_HEADER, &cells)
}

pub fn sweep_exit_code(rows: &[SweepRow]) -> i32 {
    if rows.iter().any(|r| r.error.is_some() || r.status == "fail" || r.status == "invalid_window") {
        EXIT_FAIL
    } else {
        EXIT_PASS
    }
}

/// Invariants checked on a stored field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub path: Option<PathBuf>,
    pub n: usize,
    pub box_length: f64,
    pub alpha: f64,
    pub t: f64,
    pub finite: bool,
    pub l2_sq: f64,
    pub deriv1_sq: f64,
    pub shell_energy: f64,
    pub hermitian_defect: f64,
    pub max_divergence: f64,
    pub mean_mode: f64,
    pub projection_defect: f64,
    pub round_trip_error: f64,
    pub passed: bool,
}

pub const CHECK_TOLERANCE: f64 = 1e-10;

/// Hermitian symmetry, zero mean, solenoidality, projection idempotence and
/// transform round trip, each relative to the field's largest coefficient.
pub fn check_snapshot(snap: &Snapshot, gamma: f64) -> Result<CheckReport> {
    let u = &snap.u;
    let grid = *u.grid();
    let scale = u.max_mode_norm().max(f64::MIN_POSITIVE);
    let finite = u.is_finite();
    let mean_mode = u.mode(grid.index_of([0, 0, 0])).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
    let projection_defect = leray_project(u).max_abs_diff(u)? / scale;
    let mut tr = SpectralTransform::new(&grid);
    let physical = tr.inverse_transform(u)?;
    let back = tr.transform(&physical)?;
    let round_trip_error = back.max_abs_diff(u)? / scale;
    let hermitian_defect = u.hermitian_defect() / scale;
    let max_divergence = u.max_divergence() / (scale * grid.max_wavenumber());
    let passed = finite
        && [hermitian_defect, max_divergence, mean_mode, projection_defect, round_trip_error]
            .iter()
            .all(|&x| x <= CHECK_TOLERANCE);
    Ok(CheckReport {
        path: None,
        n: grid.n(),
        box_length: grid.box_length(),
        alpha: snap.alpha,
        t: snap.t,
        finite,
        l2_sq: u.norm_sq(),
        deriv1_sq: lambda_norm_sq(u, 1),
        shell_energy: if snap.alpha > 0.0 { shell_energy(u, splitting_radius(snap.t, gamma, snap.alpha)) } else { 0.0 },
        hermitian_defect,
        max_divergence,
        mean_mode,
        projection_defect,
        round_trip_error,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{FitConfig, GridConfig, InitialData, Sampling};
    use crate::dynamics::SimParams;

    fn small(alpha: f64) -> RunConfig {
        let mut params = SimParams::new(alpha, 0.05, 2.0);
        params.amplitude = 0.05;
        let mut cfg = RunConfig::new(GridConfig { n: 8, box_length: 12.0 }, params, InitialData::flat(5));
        cfg.fit = FitConfig::Explicit { t_lo: 0.5, t_hi: 2.0 };
        cfg
    }

    #[test]
    fn validation_error_for_short_horizon() {
        let mut cfg = small(1.0);
        cfg.params.t_end = 0.01;
        assert!(matches!(run_simulate(&cfg), Err(Error::InvalidParameter { name: "t_end", .. })));
    }

    #[test]
    fn heat_run_starts_at_initial_norms() {
        let cfg = small(0.8);
        let r = run_heat(&cfg).unwrap();
        let grid = cfg.grid().unwrap();
        let params = cfg.params;
        let start = SimState::initial(&cfg.initial_field(&grid).unwrap(), params.cutoff(&grid)).unwrap();
        assert_eq!(r.series.times[0], 0.0);
        assert_eq!(r.series.l2_sq[0], start.u.norm_sq());
        assert_eq!(r.series.deriv_sq[0][0], lambda_norm_sq(&start.u, 1));
        assert_eq!(r.series.diss_integral[0], 0.0);
        assert!(r.summary.c_star_max <= 1.0);
        assert!(r.summary.max_energy_defect < 1e-13);
    }

    #[test]
    fn heat_semigroup_matches_direct_evolution() {
        let cfg = small(0.9);
        let grid = cfg.grid().unwrap();
        let u0 = cfg.initial_field(&grid).unwrap();
        let a = heat_evolve(&heat_evolve(&u0, 0.7, 0.9, 1.0).unwrap(), 1.1, 0.9, 1.0).unwrap();
        let b = heat_evolve(&u0, 1.8, 0.9, 1.0).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() <= 1e-14 * u0.max_mode_norm());
    }

    #[test]
    fn simulate_tracks_heat_for_small_data() {
        let mut cfg = small(1.0);
        cfg.sampling = Sampling::Uniform { every: 4 };
        let r = run_simulate(&cfg).unwrap();
        assert!(r.failure.is_none());
        assert_eq!(r.series.len(), 11, "{:?}", r.series.times);
        assert!(r.summary.max_tracking_deviation < 1e-2);
        assert!(r.summary.transfer_ratio < 0.05);
        assert!(r.summary.c_star_initial <= 1.0 + 1e-12);
        let l2 = &r.series.l2_sq;
        assert!(l2.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(r.verdicts.len(), 2, "{:?}", r.summary.fit_errors);
    }

    #[test]
    fn blow_up_is_reported() {
        let mut cfg = small(1.0);
        cfg.params.amplitude = 1e150;
        cfg.params.dt = 0.5;
        cfg.params.t_end = 20.0;
        let r = run_simulate(&cfg).unwrap();
        let f = r.failure.as_ref().expect("blow-up");
        assert!(f.last_finite_t < f.t);
        assert_eq!(r.exit_code(), EXIT_BLOWUP);
        let dir = tempfile::tempdir().unwrap();
        write_artifacts(&r, dir.path()).unwrap();
        assert!(dir.path().join("failure.json").exists());
    }

    #[test]
    fn artifacts_are_written() {
        let mut cfg = small(1.0);
        cfg.snapshots = true;
        let dir = tempfile::tempdir().unwrap();
        cfg.output_dir = dir.path().join("out");
        let r = execute(&cfg, RunKind::Heat).unwrap();
        for name in ["config.json", "series.csv", "diagnostics.csv", "fits.json", "verdicts.csv", "summary.json", "initial.fns", "final.fns"] {
            assert!(cfg.output_dir.join(name).exists(), "{name}");
        }
        let back = crate::io::read_snapshot(&cfg.output_dir.join("final.fns")).unwrap();
        let check = check_snapshot(&back, cfg.params.gamma).unwrap();
        assert!(check.passed, "{check:?}");
        assert_eq!(back.t, *r.series.times.last().unwrap());
        let verdicts = fs::read_to_string(cfg.output_dir.join("verdicts.csv")).unwrap();
        assert!(verdicts.starts_with(&VERDICT_HEADER.join(",")));
    }

    #[test]
    fn sweep_examples() {
        let mut cfg = small(1.0);
        let dir = tempfile::tempdir().unwrap();
        cfg.output_dir = dir.path().to_path_buf();
        let empty = SweepConfig { kind: SweepKind::Predict, param: SweepParam::Alpha, values: vec![] };
        let rows = run_sweep(&cfg, &empty);
        assert!(rows.is_empty());
        assert_eq!(sweep_exit_code(&rows), EXIT_PASS);

        let crit = SweepConfig { kind: SweepKind::Predict, param: SweepParam::Alpha, values: vec![1.25] };
        let rows = run_sweep(&cfg, &crit);
        assert!(rows.iter().all(|r| r.criticality == "critical"));

        cfg.m_list = vec![1];
        let ps = SweepConfig { kind: SweepKind::Predict, param: SweepParam::P, values: vec![1.0, 1.5] };
        let rows = run_sweep(&cfg, &ps);
        let l2: Vec<f64> = rows.iter().filter(|r| r.m == 0).map(|r| r.predicted.unwrap()).collect();
        assert_eq!(l2.len(), 2);
        assert!((l2[0] - 1.5).abs() < 1e-15 && (l2[1] - 0.5).abs() < 1e-15);

        let bad = SweepConfig { kind: SweepKind::Heat, param: SweepParam::Alpha, values: vec![-1.0, 1.0] };
        let rows = run_sweep(&cfg, &bad);
        assert!(rows[0].error.is_some());
        assert!(rows.iter().any(|r| r.value == 1.0 && r.error.is_none()));
        assert!(dir.path().join("run_001").join("series.csv").exists());
        write_sweep_csv(&rows, &dir.path().join("sweep.csv")).unwrap();
    }

    #[test]
    fn prediction_lists_claims() {
        let pr = predict(1.0, 1.0, 0).unwrap();
        assert_eq!(pr.predicted, 1.5);
        assert_eq!(pr.governing, Some(DecayClaim::L2LowAlpha));
        assert!(pr.applicable.contains(&DecayClaim::DerivativeL1));
        assert!(predict(3.0, 1.0, 0).is_err());
    }
}
