//! Browser bindings. Each export takes a JSON request and returns a JSON
//! reply; the plain functions behind them are callable natively for tests.

use dirac_core::harness::{hf_derivative, parameter_grid, GridScale};
use dirac_core::oracle::{channel_of, coulomb_energy, coulomb_energy_derivative, CoulombLevel};
use dirac_core::{solve, ChannelSpec, Parity, PotentialFamily, SolveConfig};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Grid size used by the page; enough for plots and fast in the browser.
const DEMO_GRID: usize = 1500;
/// Points returned per wavefunction component.
const PLOT_POINTS: usize = 400;

#[derive(Debug, Deserialize)]
pub struct StateRequest {
    /// `"<family> key=value ..."`, e.g. `"cutoff-coulomb alpha=1 a=0.5"`.
    pub family: String,
    #[serde(default = "three")]
    pub d: u32,
    pub tau: Option<i8>,
    pub j: Option<f64>,
    pub parity: Option<Parity>,
    #[serde(default)]
    pub n_r: usize,
    pub n_grid: Option<usize>,
}

fn three() -> u32 {
    3
}

impl StateRequest {
    fn channel(&self) -> Result<ChannelSpec, String> {
        ChannelSpec::new(self.d, self.tau, self.j, self.parity, 1.0).map_err(|e| e.to_string())
    }

    fn family(&self) -> Result<PotentialFamily, String> {
        self.family.parse().map_err(|e: dirac_core::Error| e.to_string())
    }

    fn config(&self) -> SolveConfig {
        SolveConfig {
            n_grid: self.n_grid.unwrap_or(DEMO_GRID),
            ..SolveConfig::default()
        }
    }
}

#[derive(Debug, Serialize)]
pub struct StateReply {
    pub family: String,
    pub channel: String,
    pub energy: f64,
    pub de_da: f64,
    pub nodes: usize,
    pub r: Vec<f64>,
    pub psi1: Vec<f64>,
    pub psi2: Vec<f64>,
    pub potential: Vec<f64>,
}

#[derive(Debug, Deserialize)]
pub struct CurveRequest {
    #[serde(flatten)]
    pub state: StateRequest,
    pub from: f64,
    pub to: f64,
    #[serde(default = "curve_steps")]
    pub steps: usize,
}

fn curve_steps() -> usize {
    12
}

#[derive(Debug, Serialize)]
pub struct CurveReply {
    pub active: String,
    pub a: Vec<f64>,
    pub energy: Vec<f64>,
    pub de_da: Vec<f64>,
    /// Set when a point has no state with the requested node count; the
    /// arrays then stop there.
    pub stopped: Option<String>,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct LevelRow {
    pub n: u32,
    pub j: f64,
    pub tau: i8,
    pub n_r: usize,
    pub exact: f64,
    pub solved: f64,
    pub de_dalpha: f64,
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("reply types serialize")
}

fn parse<'a, T: Deserialize<'a>>(json: &'a str) -> Result<T, String> {
    serde_json::from_str(json).map_err(|e| format!("bad request: {e}"))
}

/// Keeps about `target` evenly spaced indices, first and last included.
fn thin<T: Copy>(values: &[T], target: usize) -> Vec<T> {
    let stride = values.len().div_ceil(target).max(1);
    let mut out: Vec<T> = values.iter().step_by(stride).copied().collect();
    if !(values.len() - 1).is_multiple_of(stride) {
        out.push(values[values.len() - 1]);
    }
    out
}

pub fn solve_state_json(request: &str) -> Result<String, String> {
    let req: StateRequest = parse(request)?;
    let family = req.family()?;
    let channel = req.channel()?;
    let state = solve(&channel, &family, req.n_r, &req.config()).map_err(|e| e.to_string())?;
    let de_da = hf_derivative(&state, &family).map_err(|e| e.to_string())?;

    // plot out to where the state has decayed
    let peak = state.psi1.iter().chain(&state.psi2).fold(0.0f64, |m, v| m.max(v.abs()));
    let points = state.grid.points();
    let last = (0..points.len())
        .rev()
        .find(|&i| state.psi1[i].abs().max(state.psi2[i].abs()) > 1e-4 * peak)
        .unwrap_or(points.len() - 1);
    let r = thin(&points[..=last], PLOT_POINTS);
    let psi1 = thin(&state.psi1[..=last], PLOT_POINTS);
    let psi2 = thin(&state.psi2[..=last], PLOT_POINTS);
    let potential = r
        .iter()
        .map(|&x| family.evaluate(x.max(1e-3 * family.length_scale())).unwrap_or(f64::NAN))
        .collect();
    Ok(to_json(&StateReply {
        family: family.to_string(),
        channel: channel.to_string(),
        energy: state.energy,
        de_da,
        nodes: state.nodes,
        r,
        psi1,
        psi2,
        potential,
    }))
}

pub fn energy_curve_json(request: &str) -> Result<String, String> {
    let req: CurveRequest = parse(request)?;
    let family = req.state.family()?;
    let channel = req.state.channel()?;
    let config = req.state.config();
    let grid = parameter_grid(req.from, req.to, req.steps, GridScale::Linear).map_err(|e| e.to_string())?;
    let mut reply = CurveReply {
        active: family.active_param().to_string(),
        a: Vec::new(),
        energy: Vec::new(),
        de_da: Vec::new(),
        stopped: None,
    };
    for a in grid {
        let at = family.with_active_value(a).map_err(|e| e.to_string())?;
        match solve(&channel, &at, req.state.n_r, &config) {
            Ok(state) => {
                reply.a.push(a);
                reply.energy.push(state.energy);
                reply.de_da.push(hf_derivative(&state, &at).map_err(|e| e.to_string())?);
            }
            Err(e) => {
                reply.stopped = Some(format!("stopped at {} = {a}: {e}", reply.active));
                break;
            }
        }
    }
    Ok(to_json(&reply))
}

/// Closed-form Coulomb levels with `n <= max_n`, `j <= 3/2` and both `τ`,
/// alongside the solver's value for the same state.
pub fn coulomb_level_rows(alpha: f64, max_n: u32) -> Result<Vec<LevelRow>, String> {
    if !(1..=4).contains(&max_n) {
        return Err(format!("max_n must be between 1 and 4, got {max_n}"));
    }
    let family = PotentialFamily::pure_coulomb(alpha).map_err(|e| e.to_string())?;
    let config = SolveConfig {
        n_grid: DEMO_GRID,
        ..SolveConfig::default()
    };
    let mut rows = Vec::new();
    for n in 1..=max_n {
        for j in [0.5, 1.5] {
            let Ok(level) = CoulombLevel::new(n, j, alpha) else {
                continue;
            };
            for tau in [-1, 1] {
                let Ok((channel, n_r)) = channel_of(&level, tau, 3) else {
                    continue;
                };
                let solved = solve(&channel, &family, n_r, &config).map_err(|e| e.to_string())?;
                rows.push(LevelRow {
                    n,
                    j,
                    tau,
                    n_r,
                    exact: coulomb_energy(&level),
                    solved: solved.energy,
                    de_dalpha: coulomb_energy_derivative(&level),
                });
            }
        }
    }
    Ok(rows)
}

#[wasm_bindgen]
pub fn solve_state(request: &str) -> Result<String, JsError> {
    solve_state_json(request).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn energy_curve(request: &str) -> Result<String, JsError> {
    energy_curve_json(request).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn coulomb_levels(alpha: f64, max_n: u32) -> Result<String, JsError> {
    coulomb_level_rows(alpha, max_n)
        .map(|rows| to_json(&rows))
        .map_err(|e| JsError::new(&e))
}
