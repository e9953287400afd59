//! Executable checks of eigenvalue monotonicity under a parameter `a` of
//! the potential.
//!
//! For a normalized state the derivative of its eigenvalue is the
//! expectation value of `V_a = ∂V/∂a`,
//!
//! ```text
//! E'(a) = (ψ1, V_a ψ1) + (ψ2, V_a ψ2)
//! ```
//!
//! so a potential whose `V_a` has one sign moves every eigenvalue the same
//! way. This module measures that identity against an independent
//! finite-difference estimate, checks the intermediate identities used to
//! derive it (orthogonality of `ψ_a` to `ψ`, and the vanishing cross term
//! `W`), and turns parameter sweeps into pass/fail verdicts.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

use crate::error::{Error, Result};
use crate::grid::GridMap;
use crate::potentials::{make_homotopy, PotentialFamily, SignClass, DEFAULT_SIGN_SAMPLES};
use crate::solver::{self, potential_at, BoundState, ChannelSpec, SolveConfig};

/// Tolerances and step control for the checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub solve: SolveConfig,
    /// Finite-difference step in `a`; `None` uses `max(1e-4, 1e-3 |a|)`.
    pub step: Option<f64>,
    pub hf_rel_tol: f64,
    pub hf_abs_tol: f64,
    pub orth_tol: f64,
    pub w_tol: f64,
    pub sign_tol: f64,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            solve: SolveConfig::default(),
            step: None,
            hf_rel_tol: 1e-5,
            hf_abs_tol: 1e-7,
            orth_tol: 1e-5,
            w_tol: 1e-4,
            sign_tol: 1e-8,
        }
    }
}

impl HarnessConfig {
    pub fn step_at(&self, a: f64) -> f64 {
        self.step.unwrap_or_else(|| 1e-4f64.max(1e-3 * a.abs()))
    }

    /// Solver settings for derivative stencils: eigenvalue and ODE
    /// tolerances 1000 times tighter than the base settings, so that
    /// differences over a step of `1e-4` are not swamped by solver noise.
    pub fn stencil_solve(&self) -> SolveConfig {
        SolveConfig {
            e_tol: self.solve.e_tol * 1e-3,
            ode_rel_tol: self.solve.ode_rel_tol * 1e-3,
            ode_abs_tol: self.solve.ode_abs_tol * 1e-3,
            ..self.solve
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.solve.validate()?;
        for (name, v) in [
            ("hf_rel_tol", self.hf_rel_tol),
            ("hf_abs_tol", self.hf_abs_tol),
            ("orth_tol", self.orth_tol),
            ("w_tol", self.w_tol),
            ("sign_tol", self.sign_tol),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be non-negative, got {v}")));
            }
        }
        if let Some(h) = self.step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::config(format!("step must be positive, got {h}")));
            }
        }
        Ok(())
    }
}

/// `V_a` sampled on the state's grid.
fn sampled_param_derivative(state: &BoundState, family: &PotentialFamily) -> Result<Vec<f64>> {
    let name = family.active_param();
    state
        .grid
        .points()
        .iter()
        .map(|&r| {
            family.derivative_unchecked(name, r).ok_or_else(|| {
                Error::config(format!(
                    "no analytic derivative for parameter '{name}' of family {}",
                    family.name()
                ))
            })
        })
        .collect()
}

/// `(ψ1, V_a ψ1) + (ψ2, V_a ψ2)` with the state's quadrature.
pub fn hf_derivative(state: &BoundState, family: &PotentialFamily) -> Result<f64> {
    let va = sampled_param_derivative(state, family)?;
    let w1: Vec<f64> = va.iter().zip(&state.psi1).map(|(v, p)| v * p).collect();
    let w2: Vec<f64> = va.iter().zip(&state.psi2).map(|(v, p)| v * p).collect();
    Ok(state.inner(&state.psi1, &w1)? + state.inner(&state.psi2, &w2)?)
}

/// Eigenstates at `a - h, a, a + h` (and `a ± h/2`) sharing one grid.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub a: f64,
    pub h: f64,
    pub center: BoundState,
    /// States at `a - h, a - h/2, a + h/2, a + h`.
    pub sides: [BoundState; 4],
}

impl Stencil {
    pub fn fd_derivative(&self) -> f64 {
        let [m1, m2, p2, p1] = &self.sides;
        let wide = (p1.energy - m1.energy) / (2.0 * self.h);
        let narrow = (p2.energy - m2.energy) / self.h;
        (4.0 * narrow - wide) / 3.0
    }

    /// Central differences `(ψ(a + h) - ψ(a - h)) / 2h` on the central grid.
    pub fn psi_a(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let [m1, _, _, p1] = &self.sides;
        let targets = self.center.grid.points();
        let diff = |plus: &[f64], minus: &[f64], plus_grid: &BoundState, minus_grid: &BoundState| -> Result<Vec<f64>> {
            let up = plus_grid.grid.resample(plus, targets)?;
            let down = minus_grid.grid.resample(minus, targets)?;
            Ok(up.iter().zip(&down).map(|(u, d)| (u - d) / (2.0 * self.h)).collect())
        };
        Ok((diff(&p1.psi1, &m1.psi1, p1, m1)?, diff(&p1.psi2, &m1.psi2, p1, m1)?))
    }
}

fn stencil_config(center: &BoundState, base: &SolveConfig) -> SolveConfig {
    let mut config = *base;
    config.r_max = Some(center.grid.last());
    match center.grid.map() {
        GridMap::Log => config.r0 = Some(center.grid.first()),
        GridMap::Shifted { b } => config.grid_shift = Some(b),
    }
    config
}

fn neighbour(
    family: &PotentialFamily,
    channel: &ChannelSpec,
    n_r: usize,
    center: &BoundState,
    slope: f64,
    offset: f64,
    config: &SolveConfig,
) -> Result<BoundState> {
    let a = family.active_value() + offset;
    let shifted = family.with_active_value(a)?;
    let guess = center.energy + slope * offset;
    let width = 0.1 * (slope * offset).abs() + 1e-9;
    match solver::solve_near(channel, &shifted, n_r, guess, width, config) {
        Ok(state) => Ok(state),
        Err(Error::NoSuchState { found, .. }) => Err(Error::LevelCrossing {
            at: a,
            detail: format!(
                "state with {n_r} node(s) not tracked from a = {}; found {found:?}",
                family.active_value()
            ),
        }),
        Err(e) => Err(e),
    }
}

/// Central state and its four neighbours, all solved with
/// [`HarnessConfig::stencil_solve`] on the central grid.
pub fn stencil(
    family: &PotentialFamily,
    channel: &ChannelSpec,
    n_r: usize,
    h: f64,
    config: &HarnessConfig,
) -> Result<Stencil> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::config(format!("step must be positive, got {h}")));
    }
    let tight = config.stencil_solve();
    let center = solver::solve(channel, family, n_r, &tight)?;
    let slope = hf_derivative(&center, family)?;
    let pinned = stencil_config(&center, &tight);
    let side = |offset: f64| neighbour(family, channel, n_r, &center, slope, offset, &pinned);
    let sides = [side(-h)?, side(-0.5 * h)?, side(0.5 * h)?, side(h)?];
    Ok(Stencil {
        a: family.active_value(),
        h,
        center,
        sides,
    })
}

/// Richardson-extrapolated central difference of `E` in the active
/// parameter, evaluated at `a`.
pub fn fd_derivative(
    family: &PotentialFamily,
    channel: &ChannelSpec,
    n_r: usize,
    a: f64,
    h: f64,
    config: &HarnessConfig,
) -> Result<f64> {
    let family = family.with_active_value(a)?;
    Ok(stencil(&family, channel, n_r, h, config)?.fd_derivative())
}

/// `ψ_a` at `a` by central differences, with the central state it
/// belongs to.
pub fn wavefunction_param_derivative(
    family: &PotentialFamily,
    channel: &ChannelSpec,
    n_r: usize,
    a: f64,
    h: f64,
    config: &HarnessConfig,
) -> Result<(BoundState, Vec<f64>, Vec<f64>)> {
    let family = family.with_active_value(a)?;
    let s = stencil(&family, channel, n_r, h, config)?;
    let (p1, p2) = s.psi_a()?;
    Ok((s.center, p1, p2))
}

/// `|(ψ1a, ψ1) + (ψ2a, ψ2)|`.
pub fn orthogonality_residual(state: &BoundState, psi1a: &[f64], psi2a: &[f64]) -> Result<f64> {
    Ok((state.inner(psi1a, &state.psi1)? + state.inner(psi2a, &state.psi2)?).abs())
}

/// `|W|` with
///
/// ```text
/// W = (ψ1a, (V + m) ψ1) + (ψ1, (-D + k/r) ψ2a) - E (ψ1a, ψ1)
///   + (ψ2a, (V - m) ψ2) + (ψ2, (D + k/r) ψ1a) - E (ψ2a, ψ2)
/// ```
///
/// using the grid derivative `D` and the state's quadrature.
pub fn w_residual(state: &BoundState, psi1a: &[f64], psi2a: &[f64], family: &PotentialFamily) -> Result<f64> {
    let n = state.grid.len();
    if psi1a.len() != n || psi2a.len() != n {
        return Err(Error::Contract(format!(
            "psi_a arrays have {} and {} points, grid has {n}",
            psi1a.len(),
            psi2a.len()
        )));
    }
    let m = state.channel.mass();
    let k = state.channel.kappa();
    let e = state.energy;
    let r = state.grid.points();
    let centrifugal = |i: usize| if k == 0.0 { 0.0 } else { k / r[i] };
    let v: Vec<f64> = r.iter().map(|&x| potential_at(family, x)).collect();
    let d_psi2a = state.grid.derivative(psi2a)?;
    let d_psi1a = state.grid.derivative(psi1a)?;
    let upper: Vec<f64> = (0..n).map(|i| (v[i] + m) * state.psi1[i]).collect();
    let lower: Vec<f64> = (0..n).map(|i| (v[i] - m) * state.psi2[i]).collect();
    let op2a: Vec<f64> = (0..n).map(|i| -d_psi2a[i] + centrifugal(i) * psi2a[i]).collect();
    let op1a: Vec<f64> = (0..n).map(|i| d_psi1a[i] + centrifugal(i) * psi1a[i]).collect();
    let w = state.inner(psi1a, &upper)? + state.inner(&state.psi1, &op2a)? - e * state.inner(psi1a, &state.psi1)?
        + state.inner(psi2a, &lower)?
        + state.inner(&state.psi2, &op1a)?
        - e * state.inner(psi2a, &state.psi2)?;
    Ok(w.abs())
}

/// One sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub a: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "dE_da_fd")]
    pub de_fd: f64,
    #[serde(rename = "dE_da_hf")]
    pub de_hf: f64,
    pub hf_residual: f64,
    pub orth_residual: f64,
    pub w_residual: f64,
    pub nodes: usize,
}

impl SweepRecord {
    pub const CSV_HEADER: &'static str = "a,E,dE_da_fd,dE_da_hf,hf_residual,orth_residual,w_residual,nodes";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.a,
            self.energy,
            self.de_fd,
            self.de_hf,
            self.hf_residual,
            self.orth_residual,
            self.w_residual,
            self.nodes
        )
    }
}

/// All checks at one parameter value.
pub fn sweep_point(
    family: &PotentialFamily,
    channel: &ChannelSpec,
    n_r: usize,
    a: f64,
    config: &HarnessConfig,
) -> Result<SweepRecord> {
    let family = family.with_active_value(a)?;
    let s = stencil(&family, channel, n_r, config.step_at(a), config)?;
    let de_hf = hf_derivative(&s.center, &family)?;
    let de_fd = s.fd_derivative();
    let (p1, p2) = s.psi_a()?;
    Ok(SweepRecord {
        a,
        energy: s.center.energy,
        de_fd,
        de_hf,
        hf_residual: (de_fd - de_hf).abs(),
        orth_residual: orthogonality_residual(&s.center, &p1, &p2)?,
        w_residual: w_residual(&s.center, &p1, &p2, &family)?,
        nodes: s.center.nodes,
    })
}

/// A sweep stopped early; `completed` holds the points before the failure.
#[derive(Debug, Clone, PartialEq, ThisError)]
#[error("sweep aborted at a = {at} after {} point(s): {error}", completed.len())]
pub struct SweepFailure {
    pub at: f64,
    pub completed: Vec<SweepRecord>,
    pub error: Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridScale {
    Linear,
    Log,
}

/// `steps` points from `from` to `to` inclusive.
pub fn parameter_grid(from: f64, to: f64, steps: usize, scale: GridScale) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::config(format!("a sweep needs at least 2 points, got {steps}")));
    }
    if !(from.is_finite() && to.is_finite() && from < to) {
        return Err(Error::config(format!(
            "sweep range needs from < to, got [{from}, {to}]"
        )));
    }
    let last = steps - 1;
    let grid = match scale {
        GridScale::Linear => (0..steps)
            .map(|i| {
                if i == last {
                    to
                } else {
                    from + (to - from) * i as f64 / last as f64
                }
            })
            .collect(),
        GridScale::Log => {
            if from <= 0.0 {
                return Err(Error::config("log-scaled sweep needs from > 0"));
            }
            let (l0, l1) = (from.ln(), to.ln());
            (0..steps)
                .map(|i| match i {
                    0 => from,
                    i if i == last => to,
                    i => (l0 + (l1 - l0) * i as f64 / last as f64).exp(),
                })
                .collect()
        }
    };
    Ok(grid)
}

#[cfg(feature = "parallel")]
fn map_points<F>(grid: &[f64], f: F) -> Vec<Result<SweepRecord>>
where
    F: Fn(f64) -> Result<SweepRecord> + Sync + Send,
{
    use rayon::prelude::*;
    grid.par_iter().map(|&a| f(a)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_points<F>(grid: &[f64], f: F) -> Vec<Result<SweepRecord>>
where
    F: Fn(f64) -> Result<SweepRecord>,
{
    grid.iter().map(|&a| f(a)).collect()
}

/// Runs [`sweep_point`] over `a_grid`, tracking the state by its node count.
///
/// Neighbouring energies must be consistent with the derivatives at both
/// ends: `|ΔE| <= 4 |Δa| max(|E'_i|, |E'_{i+1}|) + 1e-8`. A jump beyond that
/// means the label switched levels between points and is reported as a level
/// crossing.
pub fn sweep(
    family: &PotentialFamily,
    channel: &ChannelSpec,
    n_r: usize,
    a_grid: &[f64],
    config: &HarnessConfig,
) -> std::result::Result<Vec<SweepRecord>, SweepFailure> {
    let fail = |at: f64, completed: Vec<SweepRecord>, error: Error| SweepFailure { at, completed, error };
    if let Err(e) = config.validate() {
        return Err(fail(a_grid.first().copied().unwrap_or(f64::NAN), Vec::new(), e));
    }
    if a_grid.len() < 2 {
        return Err(fail(
            f64::NAN,
            Vec::new(),
            Error::config("a sweep needs at least 2 points"),
        ));
    }
    if let Some(w) = a_grid.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(fail(
            w[1],
            Vec::new(),
            Error::config("sweep grid must be strictly increasing"),
        ));
    }
    let results = map_points(a_grid, |a| sweep_point(family, channel, n_r, a, config));
    let mut records: Vec<SweepRecord> = Vec::with_capacity(a_grid.len());
    for (result, &a) in results.into_iter().zip(a_grid) {
        match result {
            Ok(record) => {
                if let Some(prev) = records.last() {
                    let slope = prev.de_hf.abs().max(record.de_hf.abs());
                    let jump = (record.energy - prev.energy).abs();
                    if jump > 4.0 * (record.a - prev.a) * slope + 1e-8 {
                        let error = Error::LevelCrossing {
                            at: a,
                            detail: format!(
                                "E jumped by {jump:e} between a = {} and a = {a}, derivatives {} and {}",
                                prev.a, prev.de_hf, record.de_hf
                            ),
                        };
                        return Err(fail(a, records, error));
                    }
                }
                records.push(record);
            }
            Err(error) => return Err(fail(a, records, error)),
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictStatus {
    Pass,
    Fail,
    NotApplicable,
}

impl fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictStatus::Pass => "pass",
            VerdictStatus::Fail => "fail",
            VerdictStatus::NotApplicable => "not-applicable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Hf,
    Orth,
    W,
    Monotone,
}

impl CheckKind {
    pub const ALL: [CheckKind; 4] = [CheckKind::Hf, CheckKind::Orth, CheckKind::W, CheckKind::Monotone];

    pub fn id(self) -> &'static str {
        match self {
            CheckKind::Hf => "hf",
            CheckKind::Orth => "orth",
            CheckKind::W => "w",
            CheckKind::Monotone => "monotone",
        }
    }
}

impl std::str::FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL
            .into_iter()
            .find(|c| c.id() == s.trim())
            .ok_or_else(|| Error::config(format!("unknown check '{s}' (expected hf, orth, w or monotone)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: CheckKind,
    pub status: VerdictStatus,
    /// Worst value over the sweep: the largest residual, or for `monotone`
    /// the extreme of `E'` on the wrong side.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub hypothesis: SignClass,
    pub status: VerdictStatus,
    pub min_de_hf: f64,
    pub max_de_hf: f64,
    /// `E` strictly increasing or decreasing at every step, reported
    /// separately from the non-strict verdict.
    pub strictly_monotone: bool,
    pub checks: Vec<CheckOutcome>,
}

impl Verdict {
    pub fn check(&self, kind: CheckKind) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.check == kind)
    }
}

/// Verdict over all checks.
pub fn verdict(records: &[SweepRecord], sign_class: SignClass, config: &HarnessConfig) -> Verdict {
    verdict_for(records, sign_class, config, &CheckKind::ALL)
}

/// Verdict over the selected checks. The overall status is `Fail` if any
/// selected check fails, otherwise `NotApplicable` when `V_a` has no
/// definite sign and monotonicity was requested, otherwise `Pass`.
pub fn verdict_for(
    records: &[SweepRecord],
    sign_class: SignClass,
    config: &HarnessConfig,
    checks: &[CheckKind],
) -> Verdict {
    let min_hf = records.iter().map(|r| r.de_hf).fold(f64::INFINITY, f64::min);
    let max_hf = records.iter().map(|r| r.de_hf).fold(f64::NEG_INFINITY, f64::max);
    let status_of = |ok: bool| if ok { VerdictStatus::Pass } else { VerdictStatus::Fail };
    let mut outcomes = Vec::new();
    for &check in checks {
        let outcome = match check {
            CheckKind::Hf => {
                let worst = records
                    .iter()
                    .map(|r| r.hf_residual / config.hf_abs_tol.max(config.hf_rel_tol * r.de_hf.abs()))
                    .fold(0.0f64, f64::max);
                let max_res = records.iter().map(|r| r.hf_residual).fold(0.0f64, f64::max);
                CheckOutcome {
                    check,
                    status: status_of(worst <= 1.0 && !records.is_empty()),
                    worst: max_res,
                    tolerance: config.hf_rel_tol,
                    detail: format!(
                        "|dE_fd - dE_hf| <= max({:e} |dE_hf|, {:e}); worst ratio {worst:.3e}",
                        config.hf_rel_tol, config.hf_abs_tol
                    ),
                }
            }
            CheckKind::Orth => {
                let worst = records.iter().map(|r| r.orth_residual).fold(0.0f64, f64::max);
                CheckOutcome {
                    check,
                    status: status_of(worst <= config.orth_tol && !records.is_empty()),
                    worst,
                    tolerance: config.orth_tol,
                    detail: "|(psi1_a, psi1) + (psi2_a, psi2)|".into(),
                }
            }
            CheckKind::W => {
                let worst = records.iter().map(|r| r.w_residual).fold(0.0f64, f64::max);
                CheckOutcome {
                    check,
                    status: status_of(worst <= config.w_tol && !records.is_empty()),
                    worst,
                    tolerance: config.w_tol,
                    detail: "|W|".into(),
                }
            }
            CheckKind::Monotone => match sign_class {
                SignClass::Indefinite => CheckOutcome {
                    check,
                    status: VerdictStatus::NotApplicable,
                    worst: f64::NAN,
                    tolerance: config.sign_tol,
                    detail: "dV/da changes sign; no claim about the direction of E".into(),
                },
                SignClass::NonNegative => CheckOutcome {
                    check,
                    status: status_of(min_hf >= -config.sign_tol && !records.is_empty()),
                    worst: min_hf,
                    tolerance: config.sign_tol,
                    detail: format!("dV/da >= 0, so dE/da >= 0 expected; min dE_hf = {min_hf:e}"),
                },
                SignClass::NonPositive => CheckOutcome {
                    check,
                    status: status_of(max_hf <= config.sign_tol && !records.is_empty()),
                    worst: max_hf,
                    tolerance: config.sign_tol,
                    detail: format!("dV/da <= 0, so dE/da <= 0 expected; max dE_hf = {max_hf:e}"),
                },
            },
        };
        outcomes.push(outcome);
    }
    let status = if outcomes.iter().any(|o| o.status == VerdictStatus::Fail) {
        VerdictStatus::Fail
    } else if outcomes.iter().any(|o| o.status == VerdictStatus::NotApplicable) {
        VerdictStatus::NotApplicable
    } else {
        VerdictStatus::Pass
    };
    let strictly_monotone =
        records.windows(2).all(|w| w[1].energy > w[0].energy) || records.windows(2).all(|w| w[1].energy < w[0].energy);
    Verdict {
        hypothesis: sign_class,
        status,
        min_de_hf: min_hf,
        max_de_hf: max_hf,
        strictly_monotone,
        checks: outcomes,
    }
}

/// Sign class of `V_a` over the radial range the solver uses for `family`.
pub fn family_sign(family: &PotentialFamily) -> Result<SignClass> {
    family.classify_sign(100.0 * family.length_scale(), DEFAULT_SIGN_SAMPLES)
}

/// Ordered pair of eigenvalues for `V1 <= V2` with the path between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub e1: f64,
    pub e2: f64,
    pub ordered: bool,
    /// Sweep of `(1 - t) V1 + t V2` over `t ∈ [0, 1]`.
    pub path: Vec<SweepRecord>,
    pub verdict: Verdict,
}

/// Number of points in the homotopy sweep of [`compare_potentials`].
pub const HOMOTOPY_POINTS: usize = 11;

/// Solves both potentials and sweeps the straight path between them.
///
/// Requires `V1 <= V2` pointwise, checked by sampling `V2 - V1`.
pub fn compare_potentials(
    v1: &PotentialFamily,
    v2: &PotentialFamily,
    channel: &ChannelSpec,
    n_r: usize,
    config: &HarnessConfig,
) -> Result<Comparison> {
    config.validate()?;
    let path_family = make_homotopy(v1, v2);
    let sign = family_sign(&path_family)?;
    if sign != SignClass::NonNegative {
        return Err(Error::Precondition(format!(
            "V1 <= V2 does not hold pointwise (V2 - V1 is {sign}); the comparison does not apply"
        )));
    }
    let e1 = solver::solve(channel, v1, n_r, &config.solve)?.energy;
    let e2 = solver::solve(channel, v2, n_r, &config.solve)?.energy;
    let ordered = e1 <= e2 + 2.0 * config.solve.e_tol;
    let grid = parameter_grid(0.0, 1.0, HOMOTOPY_POINTS, GridScale::Linear)?;
    let path = sweep(&path_family, channel, n_r, &grid, config).map_err(|f| f.error)?;
    let mut verdict = verdict(&path, sign, config);
    if !ordered {
        verdict.status = VerdictStatus::Fail;
    }
    Ok(Comparison {
        e1,
        e2,
        ordered,
        path,
        verdict,
    })
}

/// Orthogonality residual for each step in `steps`, with the observed
/// order `log2(r_i / r_{i+1})` between successive halvings.
pub fn orthogonality_convergence(
    family: &PotentialFamily,
    channel: &ChannelSpec,
    n_r: usize,
    steps: &[f64],
    config: &HarnessConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let residuals = steps
        .iter()
        .map(|&h| {
            let s = stencil(family, channel, n_r, h, config)?;
            let (p1, p2) = s.psi_a()?;
            orthogonality_residual(&s.center, &p1, &p2)
        })
        .collect::<Result<Vec<f64>>>()?;
    let orders = residuals
        .windows(2)
        .zip(steps.windows(2))
        .map(|(r, h)| (r[0] / r[1]).ln() / (h[0] / h[1]).ln())
        .collect();
    Ok((residuals, orders))
}
