//! Closed-form Dirac–Coulomb levels in three dimensions, energies in units
//! of the mass:
//!
//! ```text
//! E = [1 + α² / (n - j - 1/2 + sqrt((j + 1/2)² - α²))²]^(-1/2)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::ChannelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoulombLevel {
    n: u32,
    j: f64,
    alpha: f64,
}

impl CoulombLevel {
    pub fn new(n: u32, j: f64, alpha: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::domain("principal quantum number n must be >= 1"));
        }
        let twice = 2.0 * j;
        if !(j >= 0.5 && (twice - twice.round()).abs() < 1e-12 && twice.round() as i64 % 2 == 1) {
            return Err(Error::domain(format!("j must be a half-integer >= 1/2, got {j}")));
        }
        let radial = n as f64 - j - 0.5;
        if radial < -1e-12 {
            return Err(Error::domain(format!("n - j - 1/2 < 0 for n = {n}, j = {j}")));
        }
        if !(alpha > 0.0 && alpha < j + 0.5) {
            return Err(Error::domain(format!(
                "alpha must lie in (0, j + 1/2) = (0, {}), got {alpha}",
                j + 0.5
            )));
        }
        Ok(Self { n, j, alpha })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn radial(&self) -> f64 {
        (self.n as f64 - self.j - 0.5).round()
    }

    fn s(&self) -> f64 {
        let jj = self.j + 0.5;
        (jj * jj - self.alpha * self.alpha).sqrt()
    }
}

/// `E / m` for the level.
pub fn coulomb_energy(level: &CoulombLevel) -> f64 {
    let d = level.radial() + level.s();
    let x = level.alpha * level.alpha / (d * d);
    1.0 / (1.0 + x).sqrt()
}

/// `dE/dα` of [`coulomb_energy`]; negative for every level.
pub fn coulomb_energy_derivative(level: &CoulombLevel) -> f64 {
    let a = level.alpha;
    let s = level.s();
    let d = level.radial() + s;
    let x = a * a / (d * d);
    // dD/dα = -α/s
    let dx = 2.0 * a / (d * d) + 2.0 * a * a * a / (s * d * d * d);
    -0.5 * (1.0 + x).powf(-1.5) * dx
}

/// Solver channel and `ψ1` node count reproducing the level.
///
/// For `τ = -1` the count is `n - j - 1/2`; for `τ = +1` it is one less and
/// the level needs `n - j - 1/2 >= 1`.
pub fn channel_of(level: &CoulombLevel, tau: i8, d: u32) -> Result<(ChannelSpec, usize)> {
    if d != 3 {
        return Err(Error::domain(format!(
            "the closed form is three-dimensional, got d = {d}"
        )));
    }
    let radial = level.radial() as i64;
    let n_r = match tau {
        -1 => radial,
        1 => {
            if radial < 1 {
                return Err(Error::domain(format!(
                    "tau = +1 needs n - j - 1/2 >= 1 (n = {}, j = {})",
                    level.n, level.j
                )));
            }
            radial - 1
        }
        t => return Err(Error::domain(format!("tau must be +1 or -1, got {t}"))),
    };
    let channel = ChannelSpec::radial(3, tau, level.j)?;
    Ok((channel, n_r as usize))
}
