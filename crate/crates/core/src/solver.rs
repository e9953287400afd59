//! Discrete eigenstates of the coupled radial Dirac system
//!
//! ```text
//! E ψ1 = (V + m) ψ1 + (-d/dr + k/r) ψ2
//! E ψ2 = (d/dr + k/r) ψ1 + (V - m) ψ2
//! ```
//!
//! by two-sided shooting. The outward solution starts from the regular
//! Frobenius seed near the origin (or a parity condition at `x = 0` in one
//! dimension), the inward one from the decaying asymptotic ratio, and the two
//! are matched at the outer classical turning point.
//!
//! Both solutions are carried in amplitude–phase form,
//! `ψ1 = R cos θ`, `ψ2 = R sin θ`:
//!
//! ```text
//! θ'     = (V + m - E) cos²θ - (E - V + m) sin²θ + (k/r) sin 2θ
//! (ln R)' = m sin 2θ - (k/r) cos 2θ
//! ```
//!
//! so nothing overflows however far the tail is integrated. `∂θ'/∂E = -1`,
//! which makes the phase mismatch `Δθ = θ_out - θ_in` at the matching radius
//! decrease through every eigenvalue, and eigenvalues are exactly the points
//! where `Δθ` is a multiple of π. Since `θ` can only decrease through zeros
//! of `ψ1`, the state with `Δθ = -n π` has exactly `n` nodes in `ψ1`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{inner_product, GridMap, InnerProductScheme, QuadratureRule, RadialGrid};
use crate::ode::{self, Tolerances};
use crate::potentials::{FamilySnapshot, OriginClass, PotentialFamily};

/// Parity sector of a one-dimensional state, defined by `ψ1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Even,
    Odd,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// Quantum numbers fixing the radial equations: dimension, `τ`, `j` (or the
/// parity sector when `d = 1`) and the particle mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    d: u32,
    tau: Option<i8>,
    j: Option<f64>,
    parity: Option<Parity>,
    mass: f64,
}

impl ChannelSpec {
    pub fn new(d: u32, tau: Option<i8>, j: Option<f64>, parity: Option<Parity>, mass: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::config("dimension d must be at least 1"));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::config(format!("mass must be positive, got {mass}")));
        }
        if d == 1 {
            if tau.is_some() || j.is_some() {
                return Err(Error::config(
                    "tau and j do not apply in d = 1; give the parity instead",
                ));
            }
            if parity.is_none() {
                return Err(Error::config("d = 1 requires a parity (even or odd)"));
            }
        } else {
            if parity.is_some() {
                return Err(Error::config("parity applies only in d = 1"));
            }
            match tau {
                Some(1) | Some(-1) => {}
                Some(t) => return Err(Error::config(format!("tau must be +1 or -1, got {t}"))),
                None => return Err(Error::config("tau is required for d > 1")),
            }
            let j = j.ok_or_else(|| Error::config("j is required for d > 1"))?;
            let twice = 2.0 * j;
            if !(j >= 0.5 && (twice - twice.round()).abs() < 1e-12 && twice.round() as i64 % 2 == 1) {
                return Err(Error::config(format!("j must be a half-integer >= 1/2, got {j}")));
            }
        }
        Ok(Self {
            d,
            tau,
            j,
            parity,
            mass,
        })
    }

    /// Channel in `d > 1` dimensions with unit mass.
    pub fn radial(d: u32, tau: i8, j: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::config("use ChannelSpec::one_dimensional for d = 1"));
        }
        Self::new(d, Some(tau), Some(j), None, 1.0)
    }

    /// One-dimensional parity sector with unit mass.
    pub fn one_dimensional(parity: Parity) -> Self {
        Self {
            d: 1,
            tau: None,
            j: None,
            parity: Some(parity),
            mass: 1.0,
        }
    }

    pub fn with_mass(self, mass: f64) -> Result<Self> {
        Self::new(self.d, self.tau, self.j, self.parity, mass)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn tau(&self) -> Option<i8> {
        self.tau
    }

    pub fn j(&self) -> Option<f64> {
        self.j
    }

    pub fn parity(&self) -> Option<Parity> {
        self.parity
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `k_d = τ (j + (d - 2)/2)` for `d > 1`, zero for `d = 1`.
    pub fn kappa(&self) -> f64 {
        match (self.tau, self.j) {
            (Some(tau), Some(j)) if self.d > 1 => tau as f64 * (j + (self.d as f64 - 2.0) / 2.0),
            _ => 0.0,
        }
    }

    /// Factor turning half-line integrals into full normalization integrals.
    pub fn measure(&self) -> f64 {
        if self.d == 1 {
            2.0
        } else {
            1.0
        }
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.parity {
            Some(p) => write!(f, "d=1 {p} m={}", self.mass),
            None => write!(
                f,
                "d={} tau={} j={} (k={}) m={}",
                self.d,
                self.tau.unwrap_or(0),
                self.j.unwrap_or(0.0),
                self.kappa(),
                self.mass
            ),
        }
    }
}

/// Numerical controls for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Outer radius. `None` picks `max(r_turn + 40/λ, 20 L)` per energy, with
    /// `λ = sqrt(m² - E²)` and `L` the potential's length scale.
    pub r_max: Option<f64>,
    pub n_grid: usize,
    /// Inner radius for `d > 1`. `None` uses `2e-9 L`.
    pub r0: Option<f64>,
    pub e_tol: f64,
    pub ode_rel_tol: f64,
    pub ode_abs_tol: f64,
    pub scan_points: usize,
    /// Explicit matching radius; `None` matches at the outer turning point.
    pub r_match: Option<f64>,
    /// Multiplier applied to the automatic matching radius.
    pub r_match_scale: f64,
    /// Scale `b` of the one-dimensional grid `x = b (e^s - 1)`. `None` uses
    /// `0.1 L`.
    pub grid_shift: Option<f64>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            r_max: None,
            n_grid: 4000,
            r0: None,
            e_tol: 1e-10,
            ode_rel_tol: 1e-10,
            ode_abs_tol: 1e-12,
            scan_points: 200,
            r_match: None,
            r_match_scale: 1.0,
            grid_shift: None,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("e_tol", self.e_tol)?;
        positive("ode_rel_tol", self.ode_rel_tol)?;
        positive("ode_abs_tol", self.ode_abs_tol)?;
        positive("r_match_scale", self.r_match_scale)?;
        if let Some(r) = self.r_max {
            positive("r_max", r)?;
        }
        if let Some(r) = self.r0 {
            positive("r0", r)?;
        }
        if let Some(r) = self.r_match {
            positive("r_match", r)?;
        }
        if let Some(b) = self.grid_shift {
            positive("grid_shift", b)?;
        }
        if let (Some(r0), Some(r_max)) = (self.r0, self.r_max) {
            if r0 >= r_max {
                return Err(Error::config(format!("r0 ({r0}) must be below r_max ({r_max})")));
            }
        }
        if self.n_grid < 5 {
            return Err(Error::config("n_grid must be at least 5"));
        }
        if self.scan_points < 2 {
            return Err(Error::config("scan_points must be at least 2"));
        }
        Ok(())
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances {
            rel: self.ode_rel_tol,
            abs: self.ode_abs_tol,
        }
    }
}

/// A normalized discrete eigenstate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    pub channel: ChannelSpec,
    pub family: FamilySnapshot,
    pub energy: f64,
    pub grid: RadialGrid,
    pub psi1: Vec<f64>,
    pub psi2: Vec<f64>,
    /// Interior sign changes of `ψ1`; the state label.
    pub nodes: usize,
    /// Interior sign changes of `ψ2`, diagnostic only.
    pub psi2_nodes: usize,
    pub norm_residual: f64,
    pub match_residual: f64,
    pub r_match: f64,
    pub scheme: InnerProductScheme,
}

impl BoundState {
    /// `(u, v)` on this state's grid and measure.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        inner_product(&self.grid, u, v, self.scheme)
    }

    /// `(ψ1, ψ1) + (ψ2, ψ2)`.
    pub fn norm(&self) -> f64 {
        self.inner(&self.psi1, &self.psi1).unwrap() + self.inner(&self.psi2, &self.psi2).unwrap()
    }

    /// `|(ψ1, Dψ2) + (Dψ1, ψ2)|` with `D` the grid derivative.
    pub fn antisymmetry_residual(&self) -> f64 {
        let d1 = self.grid.derivative(&self.psi1).unwrap();
        let d2 = self.grid.derivative(&self.psi2).unwrap();
        (self.inner(&self.psi1, &d2).unwrap() + self.inner(&d1, &self.psi2).unwrap()).abs()
    }

    /// Largest pointwise residual of the radial equations with the discrete
    /// derivative, relative to `max(|ψ1|, |ψ2|)`, skipping `skip` points at
    /// each end.
    pub fn eigen_residual(&self, family: &PotentialFamily, skip: usize) -> Result<f64> {
        let d1 = self.grid.derivative(&self.psi1)?;
        let d2 = self.grid.derivative(&self.psi2)?;
        let m = self.channel.mass();
        let k = self.channel.kappa();
        let e = self.energy;
        let scale = self
            .psi1
            .iter()
            .chain(&self.psi2)
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        let n = self.grid.len();
        let mut worst = 0.0f64;
        for i in skip..n.saturating_sub(skip) {
            let r = self.grid.points()[i];
            let v = potential_at(family, r);
            let centrifugal = if k == 0.0 { 0.0 } else { k / r };
            let res1 = d1[i] - ((e - v + m) * self.psi2[i] - centrifugal * self.psi1[i]);
            let res2 = d2[i] - ((v + m - e) * self.psi1[i] + centrifugal * self.psi2[i]);
            worst = worst.max(res1.abs()).max(res2.abs());
        }
        Ok(worst / scale)
    }

    /// Rows `r,psi1,psi2` at 17 significant digits.
    pub fn wavefunction_csv(&self) -> String {
        let mut out = String::from("r,psi1,psi2\n");
        for ((r, a), b) in self.grid.points().iter().zip(&self.psi1).zip(&self.psi2) {
            out.push_str(&format!("{r:.16e},{a:.16e},{b:.16e}\n"));
        }
        out
    }
}

/// `V` at radius `r >= 0`; at `r = 0` the regular limit is used.
pub(crate) fn potential_at(family: &PotentialFamily, r: f64) -> f64 {
    if r > 0.0 {
        family.value(r)
    } else {
        family.value_abs(0.0)
    }
}

/// `(ψ1', ψ2')` from the radial equations.
pub fn rhs(r: f64, psi: [f64; 2], e: f64, channel: &ChannelSpec, family: &PotentialFamily) -> [f64; 2] {
    let m = channel.mass();
    let k = channel.kappa();
    let v = potential_at(family, r);
    let centrifugal = if k == 0.0 { 0.0 } else { k / r };
    [
        (e - v + m) * psi[1] - centrifugal * psi[0],
        (v + m - e) * psi[0] + centrifugal * psi[1],
    ]
}

/// Seed in phase form: `(θ, ln R)`.
#[derive(Debug, Clone, Copy)]
struct PhaseSeed {
    theta: f64,
    ln_r: f64,
}

/// Regular solution near the origin for `d > 1`, as `(ψ1, ψ2)` at `r0`.
/// The overall scale is arbitrary.
pub fn origin_seed(channel: &ChannelSpec, family: &PotentialFamily, e: f64, r0: f64) -> Result<[f64; 2]> {
    let seed = origin_phase(channel, family, e, r0)?;
    let amp = seed.ln_r.exp();
    Ok([amp * seed.theta.cos(), amp * seed.theta.sin()])
}

/// Largest tolerated estimate of the first neglected Frobenius term,
/// relative to the leading one.
const SEED_CORRECTION_LIMIT: f64 = 1e-6;

fn origin_phase(channel: &ChannelSpec, family: &PotentialFamily, e: f64, r0: f64) -> Result<PhaseSeed> {
    if channel.d() == 1 {
        return Err(Error::config(
            "origin_seed applies to d > 1; d = 1 uses parity conditions",
        ));
    }
    if !(r0 > 0.0) {
        return Err(Error::domain(format!("r0 must be positive, got {r0}")));
    }
    let m = channel.mass();
    let k = channel.kappa();
    let strength = family.coulomb_strength();
    // size of the regular part of V near the origin
    let regular = |r: f64| family.value(r) + strength / r;
    let w0 = regular(r0);
    let slope = (regular(2.0 * r0) - w0).abs();
    let correction = r0 * (m + e.abs() + w0.abs()) + slope;
    if correction > SEED_CORRECTION_LIMIT {
        return Err(Error::domain(format!(
            "r0 = {r0:e} is too large for the leading Frobenius term (estimated correction {correction:e})"
        )));
    }
    match family.origin_class() {
        OriginClass::CoulombSingular(alpha) => {
            if alpha >= k.abs() {
                return Err(Error::UnsupportedRegime(format!(
                    "Coulomb strength {alpha} >= |k| = {}; origin exponent is not real",
                    k.abs()
                )));
            }
            let gamma = (k * k - alpha * alpha).sqrt();
            let ratio = (gamma + k) / alpha;
            Ok(PhaseSeed {
                theta: ratio.atan(),
                ln_r: gamma * r0.ln() + 0.5 * ratio.mul_add(ratio, 1.0).ln(),
            })
        }
        OriginClass::Regular => {
            let v0 = family
                .origin_value()
                .ok_or_else(|| Error::config("regular family without an origin value"))?;
            let kk = k.abs();
            if k < 0.0 {
                // ψ1 = r^|k|, ψ2 = c r^{|k|+1}
                let c = (v0 + m - e) / (2.0 * kk + 1.0);
                Ok(PhaseSeed {
                    theta: (c * r0).atan(),
                    ln_r: kk * r0.ln() + 0.5 * (c * r0).mul_add(c * r0, 1.0).ln(),
                })
            } else {
                // ψ2 = r^k, ψ1 = c r^{k+1}
                let c = (e - v0 + m) / (2.0 * kk + 1.0);
                Ok(PhaseSeed {
                    theta: 1.0f64.atan2(c * r0),
                    ln_r: kk * r0.ln() + 0.5 * (c * r0).mul_add(c * r0, 1.0).ln(),
                })
            }
        }
    }
}

/// Decaying asymptotic ratio far from the potential: `ψ1 = 1`,
/// `ψ2 = -sqrt((m - E)/(m + E))`.
pub fn tail_seed(channel: &ChannelSpec, e: f64) -> Result<[f64; 2]> {
    let m = channel.mass();
    if !(e.abs() < m) {
        return Err(Error::NoBoundState(format!(
            "energy {e} is outside the gap (-{m}, {m})"
        )));
    }
    Ok([1.0, -((m - e) / (m + e)).sqrt()])
}

/// Radii used for one shot at a given energy.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Geometry {
    r0: f64,
    r_match: f64,
    r_max: f64,
}

/// Result of integrating both sides to the matching radius.
#[derive(Debug, Clone, Copy)]
struct Shot {
    theta_out: f64,
    theta_in: f64,
}

impl Shot {
    fn delta(&self) -> f64 {
        self.theta_out - self.theta_in
    }
}

/// Solver context: one channel and one potential.
struct Problem<'a> {
    channel: ChannelSpec,
    family: &'a PotentialFamily,
    config: SolveConfig,
    mass: f64,
    kappa: f64,
    length: f64,
}

impl<'a> Problem<'a> {
    fn new(channel: &ChannelSpec, family: &'a PotentialFamily, config: &SolveConfig) -> Result<Self> {
        config.validate()?;
        let kappa = channel.kappa();
        if channel.d() == 1 {
            if let OriginClass::CoulombSingular(_) = family.origin_class() {
                return Err(Error::UnsupportedRegime(
                    "Coulomb-singular potentials are not supported in d = 1".into(),
                ));
            }
        } else if let OriginClass::CoulombSingular(alpha) = family.origin_class() {
            if alpha >= kappa.abs() {
                return Err(Error::UnsupportedRegime(format!(
                    "Coulomb strength {alpha} >= |k| = {}",
                    kappa.abs()
                )));
            }
        }
        Ok(Self {
            channel: *channel,
            family,
            config: *config,
            mass: channel.mass(),
            kappa,
            length: family.length_scale(),
        })
    }

    fn potential(&self, r: f64) -> f64 {
        potential_at(self.family, r)
    }

    fn theta_rhs(&self, r: f64, theta: f64, e: f64) -> f64 {
        let v = self.potential(r);
        let (s, c) = theta.sin_cos();
        let mut d = (v + self.mass - e) * c * c - (e - v + self.mass) * s * s;
        if self.kappa != 0.0 {
            d += self.kappa / r * 2.0 * s * c;
        }
        d
    }

    fn ln_r_rhs(&self, r: f64, theta: f64) -> f64 {
        let (s2, c2) = (2.0 * theta).sin_cos();
        let mut d = self.mass * s2;
        if self.kappa != 0.0 {
            d -= self.kappa / r * c2;
        }
        d
    }

    /// Outermost radius where `V(r) <= E - m`, if any.
    fn turning_point(&self, e: f64) -> Option<f64> {
        let target = e - self.mass;
        let below = |r: f64| self.potential(r) <= target;
        let r_floor = 1e-6 * self.length;
        let mut r_hi = self.length;
        while below(r_hi) {
            r_hi *= 2.0;
            if r_hi > 1e13 {
                return Some(r_hi);
            }
        }
        // walk inward on a geometric grid to the outermost point below target
        let ratio = 1.05f64;
        let mut r = r_hi;
        while r > r_floor {
            let next = r / ratio;
            if below(next) {
                let (mut lo, mut hi) = (next, r);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if below(mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-13 * hi {
                        break;
                    }
                }
                return Some(0.5 * (lo + hi));
            }
            r = next;
        }
        None
    }

    fn geometry(&self, e: f64) -> Geometry {
        let m = self.mass;
        let lambda = (m * m - e * e).max(0.0).sqrt().max(1e-300);
        let r_floor = 0.1 * self.length;
        let turning = self.turning_point(e).unwrap_or(0.0).max(r_floor);
        let r_max = self
            .config
            .r_max
            .unwrap_or_else(|| (turning + 40.0 / lambda).max(20.0 * self.length).min(1e12));
        let r0 = if self.channel.d() == 1 {
            0.0
        } else {
            self.config.r0.unwrap_or(2e-9 * self.length)
        };
        let r_match = self
            .config
            .r_match
            .unwrap_or(turning * self.config.r_match_scale)
            .clamp(r0.max(1e-300) * 10.0, 0.5 * r_max);
        Geometry { r0, r_match, r_max }
    }

    fn start_phase(&self, e: f64, r0: f64) -> Result<PhaseSeed> {
        match self.channel.parity() {
            Some(Parity::Even) => Ok(PhaseSeed { theta: 0.0, ln_r: 0.0 }),
            Some(Parity::Odd) => Ok(PhaseSeed {
                theta: FRAC_PI_2,
                ln_r: 0.0,
            }),
            None => origin_phase(&self.channel, self.family, e, r0),
        }
    }

    fn tail_phase(&self, e: f64) -> Result<PhaseSeed> {
        let [a, b] = tail_seed(&self.channel, e)?;
        Ok(PhaseSeed {
            theta: b.atan2(a),
            ln_r: 0.0,
        })
    }

    fn shoot(&self, e: f64) -> Result<Shot> {
        let geometry = self.geometry(e);
        let tol = self.config.tolerances();
        let start = self.start_phase(e, geometry.r0)?;
        let tail = self.tail_phase(e)?;
        let (out, _) = ode::integrate(
            |r, y: &[f64; 1]| [self.theta_rhs(r, y[0], e)],
            geometry.r0,
            [start.theta],
            geometry.r_match,
            tol,
            &[],
            |_, _| {},
        )?;
        let (inn, _) = ode::integrate(
            |r, y: &[f64; 1]| [self.theta_rhs(r, y[0], e)],
            geometry.r_max,
            [tail.theta],
            geometry.r_match,
            tol,
            &[],
            |_, _| {},
        )?;
        Ok(Shot {
            theta_out: out[0],
            theta_in: inn[0],
        })
    }

    fn gap(&self) -> (f64, f64) {
        let eps = 1e-6 * self.mass;
        (-self.mass + eps, self.mass - eps)
    }

    /// Phase mismatch on a uniform energy grid over `[lo, hi]`.
    fn scan(&self, lo: f64, hi: f64, points: usize) -> Result<Vec<(f64, f64)>> {
        (0..points)
            .map(|i| {
                let e = if i + 1 == points {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (points - 1) as f64
                };
                Ok((e, self.shoot(e)?.delta()))
            })
            .collect()
    }

    /// Bisection for `Δθ(E) = level π` on a bracket with
    /// `Δθ(lo) > level π >= Δθ(hi)`.
    fn refine(&self, level: i64, mut lo: f64, mut hi: f64) -> Result<f64> {
        let target = level as f64 * PI;
        for _ in 0..200 {
            if hi - lo <= self.config.e_tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.shoot(mid)?.delta() > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Levels `k` with `Δθ = k π` strictly inside the scanned range, highest
    /// first (lowest energy first).
    fn levels(scan: &[(f64, f64)]) -> Vec<i64> {
        let top = (scan[0].1 / PI).ceil() as i64 - 1;
        let bottom = (scan[scan.len() - 1].1 / PI).floor() as i64 + 1;
        (bottom..=top).rev().collect()
    }

    fn bracket(scan: &[(f64, f64)], level: i64) -> Option<(f64, f64)> {
        let target = level as f64 * PI;
        scan.windows(2)
            .find(|w| w[0].1 > target && w[1].1 <= target)
            .map(|w| (w[0].0, w[1].0))
    }

    fn solve_level(&self, level: i64, lo: f64, hi: f64) -> Result<BoundState> {
        let e = self.refine(level, lo, hi)?;
        self.build_state(e)
    }

    /// Integrates both sides at `e` with dense output on the final grid,
    /// glues, fixes the sign and normalizes.
    fn build_state(&self, e: f64) -> Result<BoundState> {
        let geometry = self.geometry(e);
        let n = self.config.n_grid;
        let grid = if self.channel.d() == 1 {
            RadialGrid::shifted(self.config.grid_shift.unwrap_or(0.1 * self.length), geometry.r_max, n)?
        } else {
            RadialGrid::log(geometry.r0, geometry.r_max, n)?
        };
        let r = grid.points();
        let split = r.partition_point(|&x| x <= geometry.r_match);
        let tol = self.config.tolerances();
        let mut phase = vec![[0.0f64; 2]; n];

        let start = self.start_phase(e, geometry.r0)?;
        let system = |x: f64, y: &[f64; 2]| [self.theta_rhs(x, y[0], e), self.ln_r_rhs(x, y[0])];
        let (out, _) = ode::integrate(
            system,
            geometry.r0,
            [start.theta, start.ln_r],
            geometry.r_match,
            tol,
            &r[..split],
            |i, y| phase[i] = *y,
        )?;

        let tail = self.tail_phase(e)?;
        let inward: Vec<f64> = r[split..].iter().rev().copied().collect();
        let mut inner_phase = vec![[0.0f64; 2]; inward.len()];
        let (inn, _) = ode::integrate(
            system,
            geometry.r_max,
            [tail.theta, tail.ln_r],
            geometry.r_match,
            tol,
            &inward,
            |i, y| inner_phase[i] = *y,
        )?;

        let half_turns = ((out[0] - inn[0]) / PI).round();
        let theta_shift = half_turns * PI;
        let ln_shift = out[1] - inn[1];
        for (slot, y) in phase[split..].iter_mut().zip(inner_phase.iter().rev()) {
            *slot = [y[0] + theta_shift, y[1] + ln_shift];
        }

        let ln_max = phase.iter().fold(f64::NEG_INFINITY, |acc, y| acc.max(y[1]));
        let mut psi1: Vec<f64> = phase.iter().map(|y| (y[1] - ln_max).exp() * y[0].cos()).collect();
        let mut psi2: Vec<f64> = phase.iter().map(|y| (y[1] - ln_max).exp() * y[0].sin()).collect();

        let dead_band = |v: &[f64]| 1e-12 * v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        let band = dead_band(&psi1);
        if let Some(first) = psi1.iter().find(|v| v.abs() > band) {
            if *first < 0.0 {
                psi1.iter_mut().for_each(|v| *v = -*v);
                psi2.iter_mut().for_each(|v| *v = -*v);
            }
        }

        let scheme = InnerProductScheme {
            rule: QuadratureRule::Simpson,
            measure: self.channel.measure(),
        };
        let norm = inner_product(&grid, &psi1, &psi1, scheme)? + inner_product(&grid, &psi2, &psi2, scheme)?;
        let scale = 1.0 / norm.sqrt();
        psi1.iter_mut().for_each(|v| *v *= scale);
        psi2.iter_mut().for_each(|v| *v *= scale);
        let norm_after = inner_product(&grid, &psi1, &psi1, scheme)? + inner_product(&grid, &psi2, &psi2, scheme)?;

        let nodes = count_sign_changes(&psi1, dead_band(&psi1));
        let psi2_nodes = count_sign_changes(&psi2, dead_band(&psi2));
        debug_assert!(matches!(grid.map(), GridMap::Log | GridMap::Shifted { .. }));

        Ok(BoundState {
            channel: self.channel,
            family: self.family.snapshot(),
            energy: e,
            grid,
            psi1,
            psi2,
            nodes,
            psi2_nodes,
            norm_residual: (norm_after - 1.0).abs(),
            match_residual: (inn[0] - out[0]).sin().abs(),
            r_match: geometry.r_match,
            scheme,
        })
    }
}

/// Sign changes ignoring values with `|v| <= dead_band`.
pub fn count_sign_changes(values: &[f64], dead_band: f64) -> usize {
    let mut last: Option<bool> = None;
    let mut count = 0;
    for v in values {
        if v.abs() <= dead_band {
            continue;
        }
        let positive = *v > 0.0;
        if let Some(prev) = last {
            if prev != positive {
                count += 1;
            }
        }
        last = Some(positive);
    }
    count
}

/// Scale-invariant mismatch `M(E) = [ψ1_out ψ2_in - ψ2_out ψ1_in] / (|out| |in|)`
/// at the matching radius. Zero exactly at eigenvalues.
pub fn match_function(e: f64, channel: &ChannelSpec, family: &PotentialFamily, config: &SolveConfig) -> Result<f64> {
    let problem = Problem::new(channel, family, config)?;
    tail_seed(channel, e)?;
    let shot = problem.shoot(e)?;
    Ok((shot.theta_in - shot.theta_out).sin())
}

/// Phase mismatch `θ_out - θ_in` at the matching radius; eigenvalues sit
/// where it is a multiple of π.
pub fn phase_mismatch(e: f64, channel: &ChannelSpec, family: &PotentialFamily, config: &SolveConfig) -> Result<f64> {
    let problem = Problem::new(channel, family, config)?;
    tail_seed(channel, e)?;
    Ok(problem.shoot(e)?.delta())
}

/// The state with `n_r` nodes in `ψ1`.
///
/// Scans the mismatch over the gap `(-m + ε, m - ε)` with `scan_points`
/// samples, brackets the requested level, bisects to `e_tol` and assembles
/// the normalized state.
pub fn solve(channel: &ChannelSpec, family: &PotentialFamily, n_r: usize, config: &SolveConfig) -> Result<BoundState> {
    let problem = Problem::new(channel, family, config)?;
    let (lo, hi) = problem.gap();
    let scan = problem.scan(lo, hi, config.scan_points)?;
    let level = -(n_r as i64);
    let state = match Problem::bracket(&scan, level) {
        Some((a, b)) => problem.solve_level(level, a, b)?,
        None => {
            return Err(Error::NoSuchState {
                requested: n_r,
                found: found_levels(&problem, &scan, 8),
            })
        }
    };
    if state.nodes != n_r {
        return Err(Error::NoSuchState {
            requested: n_r,
            found: vec![(state.energy, state.nodes)],
        });
    }
    Ok(state)
}

/// One-dimensional solve on `x >= 0` with the parity condition at the
/// origin; the state is normalized over the full line.
pub fn solve_1d(
    channel: &ChannelSpec,
    family: &PotentialFamily,
    n_r: usize,
    config: &SolveConfig,
) -> Result<BoundState> {
    if channel.d() != 1 {
        return Err(Error::config("solve_1d needs a d = 1 channel"));
    }
    solve(channel, family, n_r, config)
}

/// Like [`solve`], but searches only near `guess`, widening the window
/// until the level is bracketed. Used for neighbouring parameter values
/// where the eigenvalue is already known approximately.
pub fn solve_near(
    channel: &ChannelSpec,
    family: &PotentialFamily,
    n_r: usize,
    guess: f64,
    half_width: f64,
    config: &SolveConfig,
) -> Result<BoundState> {
    let problem = Problem::new(channel, family, config)?;
    let (gap_lo, gap_hi) = problem.gap();
    let level = -(n_r as i64);
    let target = level as f64 * PI;
    let mut width = half_width.max(1e-12);
    loop {
        let lo = (guess - width).max(gap_lo);
        let hi = (guess + width).min(gap_hi);
        let d_lo = problem.shoot(lo)?.delta();
        let d_hi = problem.shoot(hi)?.delta();
        if d_lo > target && d_hi <= target {
            let state = problem.solve_level(level, lo, hi)?;
            if state.nodes != n_r {
                return Err(Error::NoSuchState {
                    requested: n_r,
                    found: vec![(state.energy, state.nodes)],
                });
            }
            return Ok(state);
        }
        if lo <= gap_lo && hi >= gap_hi {
            return solve(channel, family, n_r, config);
        }
        width *= 4.0;
    }
}

/// Every level in the gap as `(E, nodes)`, lowest first, refining at most
/// `limit` of them.
pub fn spectrum(
    channel: &ChannelSpec,
    family: &PotentialFamily,
    limit: usize,
    config: &SolveConfig,
) -> Result<Vec<(f64, usize)>> {
    let problem = Problem::new(channel, family, config)?;
    let (lo, hi) = problem.gap();
    let scan = problem.scan(lo, hi, config.scan_points)?;
    Ok(found_levels(&problem, &scan, limit))
}

fn found_levels(problem: &Problem<'_>, scan: &[(f64, f64)], limit: usize) -> Vec<(f64, usize)> {
    Problem::levels(scan)
        .into_iter()
        .filter(|k| *k <= 0)
        .take(limit)
        .filter_map(|k| {
            let (a, b) = Problem::bracket(scan, k)?;
            let e = problem.refine(k, a, b).ok()?;
            Some((e, (-k) as usize))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::Shape;
    use approx::assert_relative_eq;

    fn s_half() -> ChannelSpec {
        ChannelSpec::radial(3, -1, 0.5).unwrap()
    }

    #[test]
    fn channel_validation() {
        assert_eq!(s_half().kappa(), -1.0);
        assert_eq!(ChannelSpec::radial(3, 1, 1.5).unwrap().kappa(), 2.0);
        assert_eq!(ChannelSpec::radial(2, -1, 0.5).unwrap().kappa(), -0.5);
        assert_eq!(ChannelSpec::one_dimensional(Parity::Even).kappa(), 0.0);
        assert!(ChannelSpec::new(1, Some(-1), None, Some(Parity::Even), 1.0).is_err());
        assert!(ChannelSpec::new(1, None, Some(0.5), Some(Parity::Even), 1.0).is_err());
        assert!(ChannelSpec::new(1, None, None, None, 1.0).is_err());
        assert!(ChannelSpec::new(3, Some(-1), Some(1.0), None, 1.0).is_err());
        assert!(ChannelSpec::new(3, Some(2), Some(0.5), None, 1.0).is_err());
        assert!(ChannelSpec::new(3, Some(-1), Some(0.5), Some(Parity::Odd), 1.0).is_err());
        assert!(ChannelSpec::new(3, Some(-1), Some(0.5), None, 0.0).is_err());
        for d in 2..6 {
            for j in [0.5, 1.5, 2.5] {
                assert!(ChannelSpec::radial(d, -1, j).unwrap().kappa().abs() >= 0.5);
            }
        }
    }

    #[test]
    fn rhs_examples() {
        let free = PotentialFamily::coupling(Shape::Exponential, 0.0, 1.0).unwrap();
        let one_d = ChannelSpec::one_dimensional(Parity::Even);
        let [d1, d2] = rhs(0.7, [0.3, -0.2], 0.4, &one_d, &free);
        assert_relative_eq!(d1, (0.4 + 1.0) * -0.2);
        assert_relative_eq!(d2, (1.0 - 0.4) * 0.3);
        // V = 0, E = m: ψ1' = 2m ψ2, ψ2' = 0 (k = 0)
        let [d1, d2] = rhs(2.0, [1.5, 0.25], 1.0, &one_d, &free);
        assert_eq!(d1, 0.5);
        assert_eq!(d2, 0.0);
    }

    #[test]
    fn coulomb_ground_state_satisfies_rhs() {
        // ψ1 = r^γ e^{-λr}, ψ2 = ((γ-1)/α) ψ1 with E = sqrt(1-α²), k = -1
        let alpha = 0.5;
        let gamma = (1.0f64 - alpha * alpha).sqrt();
        let e = gamma;
        let b = (gamma - 1.0) / alpha;
        let lambda = alpha;
        let family = PotentialFamily::pure_coulomb(alpha).unwrap();
        for r in [0.01f64, 0.3, 1.0, 4.0, 11.0] {
            let p1 = r.powf(gamma) * (-lambda * r).exp();
            let p2 = b * p1;
            let dp1 = (gamma / r - lambda) * p1;
            let [d1, d2] = rhs(r, [p1, p2], e, &s_half(), &family);
            assert_relative_eq!(d1, dp1, max_relative = 1e-12);
            assert_relative_eq!(d2, b * dp1, max_relative = 1e-12);
        }
    }

    #[test]
    fn origin_seed_examples() {
        let alpha = 0.5;
        let coulomb = PotentialFamily::pure_coulomb(alpha).unwrap();
        let [p1, p2] = origin_seed(&s_half(), &coulomb, 0.8, 1e-9).unwrap();
        let gamma = 0.75f64.sqrt();
        assert_relative_eq!(gamma, 0.866025, epsilon = 1e-6);
        assert_relative_eq!(p2 / p1, (gamma - 1.0) / alpha, max_relative = 1e-12);
        assert_relative_eq!(p2 / p1, -0.267949, epsilon = 1e-6);

        // regular, k = -1: ψ1 ∝ r0, ψ2 ∝ r0²
        let cutoff = PotentialFamily::cutoff_coulomb(1.0, 1.0).unwrap();
        let [a1, a2] = origin_seed(&s_half(), &cutoff, 0.5, 1e-8).unwrap();
        let [b1, b2] = origin_seed(&s_half(), &cutoff, 0.5, 2e-8).unwrap();
        assert_relative_eq!(b1 / a1, 2.0, max_relative = 1e-12);
        assert_relative_eq!(b2 / a2, 4.0, max_relative = 1e-12);

        // the seed satisfies the equations to leading order: compare ψ'
        // from rhs with the derivative of the power law
        let r0 = 1e-8;
        let [s1, s2] = origin_seed(&s_half(), &cutoff, 0.5, r0).unwrap();
        let [d1, d2] = rhs(r0, [s1, s2], 0.5, &s_half(), &cutoff);
        assert_relative_eq!(d1, s1 / r0, max_relative = 1e-6);
        assert_relative_eq!(d2, 2.0 * s2 / r0, max_relative = 1e-6);

        // α -> 0 recovers the regular exponent |k|
        let weak = PotentialFamily::pure_coulomb(1e-9).unwrap();
        let [w1, _] = origin_seed(&s_half(), &weak, 0.5, 1e-8).unwrap();
        assert_relative_eq!(w1.ln() / 1e-8f64.ln(), 1.0, max_relative = 1e-9);

        let strong = PotentialFamily::pure_coulomb(1.2).unwrap();
        assert!(matches!(
            origin_seed(&s_half(), &strong, 0.5, 1e-9),
            Err(Error::UnsupportedRegime(_))
        ));
        assert!(matches!(
            origin_seed(&s_half(), &cutoff, 0.5, 0.1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn tail_seed_examples() {
        let c = s_half();
        assert_eq!(tail_seed(&c, 0.0).unwrap(), [1.0, -1.0]);
        assert!(tail_seed(&c, 1.0 - 1e-12).unwrap()[1].abs() < 1e-5);
        let [_, r] = tail_seed(&c, 0.8660254).unwrap();
        assert_relative_eq!(r, -0.267949, epsilon = 1e-6);
        assert!(matches!(tail_seed(&c, 1.0), Err(Error::NoBoundState(_))));
        assert!(matches!(tail_seed(&c, -1.5), Err(Error::NoBoundState(_))));
    }

    #[test]
    fn match_function_zero_at_coulomb_eigenvalue() {
        let family = PotentialFamily::pure_coulomb(0.5).unwrap();
        let config = SolveConfig::default();
        let e = 0.75f64.sqrt();
        let m = match_function(e, &s_half(), &family, &config).unwrap();
        assert!(m.abs() <= 1e-8, "M(E) = {m:e}");
        let below = match_function(e - 1e-3, &s_half(), &family, &config).unwrap();
        let above = match_function(e + 1e-3, &s_half(), &family, &config).unwrap();
        assert!(below * above < 0.0);
    }

    #[test]
    fn free_particle_has_no_levels() {
        let free = PotentialFamily::coupling(Shape::Exponential, 0.0, 1.0).unwrap();
        let config = SolveConfig::default();
        let levels = spectrum(&s_half(), &free, 10, &config).unwrap();
        assert!(levels.is_empty(), "{levels:?}");
        match solve(&s_half(), &free, 0, &config) {
            Err(Error::NoSuchState { requested: 0, found }) => assert!(found.is_empty()),
            other => panic!("expected NoSuchState, got {other:?}"),
        }
    }

    #[test]
    fn coulomb_ground_and_excited() {
        let family = PotentialFamily::pure_coulomb(0.5).unwrap();
        let config = SolveConfig::default();
        let ground = solve(&s_half(), &family, 0, &config).unwrap();
        assert!((ground.energy - 0.8660254037844386).abs() < 1e-6, "{}", ground.energy);
        assert_eq!(ground.nodes, 0);
        assert!(ground.norm_residual < 1e-8);
        assert!(ground.psi1[1] > 0.0);
        let excited = solve(&s_half(), &family, 1, &config).unwrap();
        assert!((excited.energy - 0.9659258262890683).abs() < 1e-6, "{}", excited.energy);
        assert_eq!(excited.nodes, 1);
    }

    #[test]
    fn sign_fix_is_deterministic() {
        let family = PotentialFamily::cutoff_coulomb(1.0, 0.5).unwrap();
        let config = SolveConfig::default();
        let a = solve(&s_half(), &family, 1, &config).unwrap();
        let b = solve(&s_half(), &family, 1, &config).unwrap();
        assert_eq!(a.psi1, b.psi1);
        assert_eq!(a.psi2, b.psi2);
        assert_eq!(a.energy, b.energy);
    }

    #[test]
    fn count_sign_changes_dead_band() {
        assert_eq!(count_sign_changes(&[1.0, 0.5, -0.5, -1.0, 2.0], 0.0), 2);
        assert_eq!(count_sign_changes(&[1.0, 1e-15, -1e-15, 1.0], 1e-12), 0);
        assert_eq!(count_sign_changes(&[], 0.0), 0);
    }

    #[test]
    fn invalid_config_rejected() {
        let family = PotentialFamily::pure_coulomb(0.5).unwrap();
        let bad = SolveConfig {
            e_tol: 0.0,
            ..SolveConfig::default()
        };
        assert!(matches!(solve(&s_half(), &family, 0, &bad), Err(Error::Config(_))));
        let bad = SolveConfig {
            r0: Some(10.0),
            r_max: Some(5.0),
            ..SolveConfig::default()
        };
        assert!(matches!(solve(&s_half(), &family, 0, &bad), Err(Error::Config(_))));
    }

    #[test]
    fn supercritical_coulomb_rejected() {
        let family = PotentialFamily::pure_coulomb(1.0).unwrap();
        assert!(matches!(
            solve(&s_half(), &family, 0, &SolveConfig::default()),
            Err(Error::UnsupportedRegime(_))
        ));
    }
}
