//! Radial grids, quadrature inner products and the matching discrete
//! derivative.
//!
//! Every grid is the image of a uniform grid `s_i = s_0 + i ds` under a
//! smooth map `r(s)`. Integrals are computed as `∫ f(r(s)) r'(s) ds` with
//! composite Simpson weights, and derivatives as `(df/ds) / r'(s)` with
//! fourth-order finite differences. Both are therefore exact in the uniform
//! coordinate and inherit its convergence order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GridMap {
    /// `r = exp(s)`, used for `d > 1` where the origin is excluded.
    Log,
    /// `r = b (exp(s) - 1)`, starts at the origin; used for `d = 1`.
    Shifted { b: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    map: GridMap,
    s0: f64,
    ds: f64,
    points: Vec<f64>,
    jacobian: Vec<f64>,
}

impl RadialGrid {
    /// Log-spaced grid with `n` points from `r0` to `r_max`.
    pub fn log(r0: f64, r_max: f64, n: usize) -> Result<Self> {
        if !(r0 > 0.0 && r_max > r0 && r_max.is_finite()) {
            return Err(Error::config(format!(
                "log grid needs 0 < r0 < r_max, got r0={r0}, r_max={r_max}"
            )));
        }
        Self::build(GridMap::Log, r0.ln(), r_max.ln(), n, (r0, r_max))
    }

    /// Grid `r = b (e^s - 1)` with `n` points from `0` to `r_max`: uniform
    /// spacing `~ b ds` near the origin and logarithmic far out.
    pub fn shifted(b: f64, r_max: f64, n: usize) -> Result<Self> {
        if !(b > 0.0 && r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::config(format!(
                "shifted grid needs b > 0 and r_max > 0, got b={b}, r_max={r_max}"
            )));
        }
        Self::build(GridMap::Shifted { b }, 0.0, (1.0 + r_max / b).ln(), n, (0.0, r_max))
    }

    fn build(map: GridMap, s0: f64, s1: f64, n: usize, ends: (f64, f64)) -> Result<Self> {
        if n < 5 {
            return Err(Error::config(format!("grid needs at least 5 points, got {n}")));
        }
        let ds = (s1 - s0) / (n - 1) as f64;
        let (mut points, jacobian): (Vec<f64>, Vec<f64>) = (0..n)
            .map(|i| {
                let s = if i + 1 == n { s1 } else { s0 + ds * i as f64 };
                match map {
                    GridMap::Log => {
                        let r = s.exp();
                        (r, r)
                    }
                    GridMap::Shifted { b } => {
                        let e = s.exp();
                        (b * (e - 1.0), b * e)
                    }
                }
            })
            .unzip();
        points[0] = ends.0;
        points[n - 1] = ends.1;
        Ok(Self {
            map,
            s0,
            ds,
            points,
            jacobian,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn map(&self) -> GridMap {
        self.map
    }

    /// Uniform step in the grid coordinate `s`.
    pub fn step(&self) -> f64 {
        self.ds
    }

    /// `dr/ds` at each point.
    pub fn jacobian(&self) -> &[f64] {
        &self.jacobian
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Quadrature weights `w_i` with `∫ f dr ≈ Σ w_i f(r_i)`.
    ///
    /// Composite Simpson in `s`; an odd number of segments closes with the
    /// three-eighths rule on the last three segments.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.len();
        let segments = n - 1;
        let mut w = vec![0.0; n];
        let simpson_end = if segments.is_multiple_of(2) {
            segments
        } else {
            segments - 3
        };
        for i in (0..simpson_end).step_by(2) {
            w[i] += 1.0 / 3.0;
            w[i + 1] += 4.0 / 3.0;
            w[i + 2] += 1.0 / 3.0;
        }
        if simpson_end < segments {
            let i = simpson_end;
            w[i] += 3.0 / 8.0;
            w[i + 1] += 9.0 / 8.0;
            w[i + 2] += 9.0 / 8.0;
            w[i + 3] += 3.0 / 8.0;
        }
        w.iter_mut().zip(&self.jacobian).for_each(|(wi, j)| *wi *= self.ds * j);
        w
    }

    /// Discrete `d/dr`: fourth-order centred differences in `s`, one-sided
    /// fourth-order stencils on the two points nearest each end.
    pub fn derivative(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        let n = u.len();
        let inv = 1.0 / (12.0 * self.ds);
        let mut du = vec![0.0; n];
        for i in 2..n - 2 {
            du[i] = (u[i - 2] - 8.0 * u[i - 1] + 8.0 * u[i + 1] - u[i + 2]) * inv;
        }
        du[0] = (-25.0 * u[0] + 48.0 * u[1] - 36.0 * u[2] + 16.0 * u[3] - 3.0 * u[4]) * inv;
        du[1] = (-3.0 * u[0] - 10.0 * u[1] + 18.0 * u[2] - 6.0 * u[3] + u[4]) * inv;
        let m = n - 1;
        du[m] = (25.0 * u[m] - 48.0 * u[m - 1] + 36.0 * u[m - 2] - 16.0 * u[m - 3] + 3.0 * u[m - 4]) * inv;
        du[m - 1] = (3.0 * u[m] + 10.0 * u[m - 1] - 18.0 * u[m - 2] + 6.0 * u[m - 3] - u[m - 4]) * inv;
        du.iter_mut().zip(&self.jacobian).for_each(|(d, j)| *d /= j);
        Ok(du)
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.len() {
            return Err(Error::Contract(format!(
                "array of length {} on a grid of {} points",
                u.len(),
                self.len()
            )));
        }
        Ok(())
    }

    fn coordinate(&self, r: f64) -> f64 {
        match self.map {
            GridMap::Log => r.ln(),
            GridMap::Shifted { b } => (r / b).ln_1p(),
        }
    }

    /// Values of `u` (given on this grid) at the radii `targets`, by local
    /// cubic interpolation in `s`. Targets below the first point take the
    /// first value; beyond the last point the result is zero, since stored
    /// states have decayed there.
    pub fn resample(&self, u: &[f64], targets: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        let n = self.len();
        Ok(targets
            .iter()
            .map(|&r| {
                if r > self.last() {
                    return 0.0;
                }
                let x = (self.coordinate(r.max(self.first())) - self.s0) / self.ds;
                let i = (x.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
                let t = x - i as f64;
                if (t - t.round()).abs() < 1e-9 && t.round() >= 0.0 && t.round() <= 3.0 {
                    return u[i + t.round() as usize];
                }
                // Lagrange basis on nodes 0, 1, 2, 3
                let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
                let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
                let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
                let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
                l0 * u[i] + l1 * u[i + 1] + l2 * u[i + 2] + l3 * u[i + 3]
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadratureRule {
    /// Composite Simpson in the grid coordinate, closed with the
    /// three-eighths rule when the segment count is odd.
    Simpson,
}

/// How `(u, v) = ∫ u v dr` is evaluated. `measure` multiplies the half-line
/// integral; it is 2 for one-dimensional states stored on `x >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerProductScheme {
    pub rule: QuadratureRule,
    pub measure: f64,
}

impl Default for InnerProductScheme {
    fn default() -> Self {
        Self {
            rule: QuadratureRule::Simpson,
            measure: 1.0,
        }
    }
}

/// `(u, v)` without any radial measure.
pub fn inner_product(grid: &RadialGrid, u: &[f64], v: &[f64], scheme: InnerProductScheme) -> Result<f64> {
    grid.check_len(u)?;
    grid.check_len(v)?;
    let QuadratureRule::Simpson = scheme.rule;
    let w = grid.weights();
    let sum: f64 = w.iter().zip(u.iter().zip(v)).map(|(w, (a, b))| w * a * b).sum();
    Ok(scheme.measure * sum)
}
