//! Dormand–Prince 5(4) integrator with step-size control and the
//! fourth-order continuous extension, for small fixed-size systems.
//!
//! Integration may run in either direction; requested sample points must be
//! ordered along the direction of integration.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rel: 1e-10, abs: 1e-12 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const MAX_STEPS: usize = 2_000_000;

/// Integration statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` to `t1`.
///
/// `samples` must be ordered from `t0` towards `t1` and lie within the
/// interval; `on_sample(index, y)` is called for each with the dense-output
/// value. Returns the state at `t1`.
pub fn integrate<const N: usize, F, S>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    tol: Tolerances,
    samples: &[f64],
    mut on_sample: S,
) -> Result<([f64; N], Stats)>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    S: FnMut(usize, &[f64; N]),
{
    let span = t1 - t0;
    if span == 0.0 {
        for (i, _) in samples.iter().enumerate() {
            on_sample(i, &y0);
        }
        return Ok((y0, Stats::default()));
    }
    let dir = span.signum();
    let mut stats = Stats::default();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(&mut f, t, &y, &k1, dir, span.abs(), tol);
    let mut next_sample = 0;
    // smallest step that still moves t
    let h_min = |t: f64| 16.0 * f64::EPSILON * t.abs().max(f64::MIN_POSITIVE);
    let mut last_rejected = false;

    while next_sample < samples.len() && (samples[next_sample] - t0) * dir <= 0.0 {
        on_sample(next_sample, &y0);
        next_sample += 1;
    }

    loop {
        if stats.accepted + stats.rejected > MAX_STEPS {
            return Err(Error::Integrator {
                r: t,
                reason: "maximum number of steps exceeded".into(),
            });
        }
        let remaining = (t1 - t) * dir;
        let mut last = false;
        if h.abs() >= remaining {
            h = remaining * dir;
            last = true;
        }

        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let t_new = if last { t1 } else { t + h };
        let k7 = f(t_new, &y_new);

        let mut err = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            h *= FAC_MIN;
            stats.rejected += 1;
            last_rejected = true;
            if h.abs() < h_min(t) {
                return Err(Error::Integrator {
                    r: t,
                    reason: "non-finite derivative".into(),
                });
            }
            continue;
        }

        if err <= 1.0 {
            stats.accepted += 1;
            // dense output between t and t_new
            while next_sample < samples.len() && (samples[next_sample] - t_new) * dir <= 0.0 {
                let s = samples[next_sample];
                let theta = (s - t) / h;
                let theta1 = 1.0 - theta;
                let mut ys = [0.0; N];
                for i in 0..N {
                    let ydiff = y_new[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    let c4 = ydiff - h * k7[i] - bspl;
                    let c5 = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                    ys[i] = y[i] + theta * (ydiff + theta1 * (bspl + theta * (c4 + theta1 * c5)));
                }
                on_sample(next_sample, &ys);
                next_sample += 1;
            }
            t = t_new;
            y = y_new;
            k1 = k7;
            if last {
                break;
            }
            let mut fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
            };
            if last_rejected {
                fac = fac.min(1.0);
            }
            h *= fac;
            last_rejected = false;
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h *= (SAFETY * err.powf(-0.2)).max(FAC_MIN);
            if h.abs() < h_min(t) {
                return Err(Error::Integrator {
                    r: t,
                    reason: "step size underflow".into(),
                });
            }
        }
    }

    while next_sample < samples.len() {
        on_sample(next_sample, &y);
        next_sample += 1;
    }
    Ok((y, stats))
}

fn initial_step<const N: usize, F>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    span: f64,
    tol: Tolerances,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    // Hairer–Wanner starting step heuristic.
    let norm = |v: &[f64; N]| {
        let mut s = 0.0;
        for i in 0..N {
            let sc = tol.abs + tol.rel * y[i].abs();
            s += (v[i] / sc) * (v[i] / sc);
        }
        (s / N as f64).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span);
    if t != 0.0 {
        h0 = h0.min(0.1 * t.abs().max(span * 1e-12));
    }
    let y1 = axpy(y, h0 * dir, &[(1.0, f0)]);
    let f1 = f(t + h0 * dir, &y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span) * dir
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_growth_forward_and_back() {
        let tol = Tolerances { rel: 1e-11, abs: 1e-13 };
        let (y, stats) = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 2.0, tol, &[], |_, _| {}).unwrap();
        assert_relative_eq!(y[0], 2f64.exp(), max_relative = 1e-9);
        assert!(stats.accepted > 0);
        let (back, _) = integrate(|_, y: &[f64; 1]| [y[0]], 2.0, y, 0.0, tol, &[], |_, _| {}).unwrap();
        assert_relative_eq!(back[0], 1.0, max_relative = 1e-9);
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let tol = Tolerances { rel: 1e-10, abs: 1e-12 };
        let samples: Vec<f64> = (0..=50).map(|i| i as f64 * 0.2).collect();
        let mut got = vec![[0.0; 2]; samples.len()];
        integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            10.0,
            tol,
            &samples,
            |i, y| got[i] = *y,
        )
        .unwrap();
        for (s, y) in samples.iter().zip(&got) {
            assert!((y[0] - s.sin()).abs() < 1e-8, "t={s}: {} vs {}", y[0], s.sin());
            assert!((y[1] - s.cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn backward_samples() {
        let tol = Tolerances::default();
        let samples = [3.0, 2.5, 1.0, 0.5];
        let mut got = [0.0; 4];
        integrate(
            |t, _: &[f64; 1]| [2.0 * t],
            3.0,
            [9.0],
            0.5,
            tol,
            &samples,
            |i, y| got[i] = y[0],
        )
        .unwrap();
        for (s, g) in samples.iter().zip(got) {
            assert_relative_eq!(g, s * s, max_relative = 1e-9);
        }
    }

    #[test]
    fn deterministic() {
        let run = || {
            integrate(
                |t, y: &[f64; 2]| [y[1], -(1.0 + t) * y[0]],
                0.0,
                [1.0, 0.0],
                7.0,
                Tolerances::default(),
                &[],
                |_, _| {},
            )
            .unwrap()
            .0
        };
        assert_eq!(run(), run());
    }
}
