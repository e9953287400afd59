//! Parametrized central vector potentials `V(r, a)`.
//!
//! Every family carries analytic derivatives with respect to each of its
//! numeric parameters, and one parameter is marked *active*: that is the
//! parameter a sweep varies and whose derivative `V_a` enters the
//! expectation-value formula for `dE/da`.
//!
//! Families are immutable. Changing a parameter returns a new value, so a
//! family can be shared freely between threads evaluating different sweep
//! points.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack used when deciding whether sampled values of `V_a` share a sign.
pub const SIGN_SLACK: f64 = 1e-14;

/// Default sample count for [`PotentialFamily::classify_sign`].
pub const DEFAULT_SIGN_SAMPLES: usize = 256;

/// Behaviour of `V` as `r -> 0+`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OriginClass {
    /// `V(r)` tends to a finite limit.
    Regular,
    /// `r V(r) -> -strength`.
    CoulombSingular(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignClass {
    NonNegative,
    NonPositive,
    Indefinite,
}

impl fmt::Display for SignClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignClass::NonNegative => "non-negative",
            SignClass::NonPositive => "non-positive",
            SignClass::Indefinite => "indefinite",
        })
    }
}

/// Shape functions `f(r)` for the coupling family `V = a f(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    /// `f = -exp(-r/b)`
    Exponential,
    /// `f = -1/(r + b)`
    Inverse,
    /// `f = -exp(-b r)/r`
    Yukawa,
}

impl Shape {
    pub fn id(self) -> &'static str {
        match self {
            Shape::Exponential => "exp",
            Shape::Inverse => "inverse",
            Shape::Yukawa => "yukawa",
        }
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" | "exponential" => Ok(Shape::Exponential),
            "inverse" | "cutoff" => Ok(Shape::Inverse),
            "yukawa" => Ok(Shape::Yukawa),
            other => Err(Error::config(format!(
                "unknown shape '{other}' (expected exp, inverse or yukawa)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    PureCoulomb {
        alpha: f64,
    },
    CutoffCoulomb {
        alpha: f64,
        a: f64,
    },
    Coupling {
        shape: Shape,
        a: f64,
        b: f64,
    },
    /// `V = (a (r - 1) - c) exp(-r)`; `V_a` changes sign at `r = 1`.
    TiltedExp {
        c: f64,
        a: f64,
    },
    Homotopy {
        v1: Arc<PotentialFamily>,
        v2: Arc<PotentialFamily>,
        t: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialFamily {
    kind: Kind,
    active: &'static str,
}

/// Serializable record of a family and its parameter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySnapshot {
    pub name: String,
    pub params: Vec<(String, f64)>,
    pub active: String,
    pub description: String,
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("parameter {name} must be positive, got {value}")))
    }
}

fn check_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("parameter {name} must be finite, got {value}")))
    }
}

impl PotentialFamily {
    /// `V = -alpha / r`, active parameter `alpha`.
    pub fn pure_coulomb(alpha: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        Ok(Self {
            kind: Kind::PureCoulomb { alpha },
            active: "alpha",
        })
    }

    /// `V = -alpha / (r + a)`, active parameter `a`.
    pub fn cutoff_coulomb(alpha: f64, a: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("a", a)?;
        Ok(Self {
            kind: Kind::CutoffCoulomb { alpha, a },
            active: "a",
        })
    }

    /// `V = a f(r)` with `f` one of the registered shapes, active parameter `a`.
    pub fn coupling(shape: Shape, a: f64, b: f64) -> Result<Self> {
        check_finite("a", a)?;
        if a < 0.0 {
            return Err(Error::config(format!("coupling a must be >= 0, got {a}")));
        }
        check_positive("b", b)?;
        Ok(Self {
            kind: Kind::Coupling { shape, a, b },
            active: "a",
        })
    }

    /// `V = (a (r - 1) - c) exp(-r)`, active parameter `a`.
    ///
    /// `dV/da = (r - 1) exp(-r)` changes sign, so this family never satisfies
    /// the monotonicity hypothesis in `a`.
    pub fn tilted_exp(c: f64, a: f64) -> Result<Self> {
        check_finite("c", c)?;
        check_finite("a", a)?;
        Ok(Self {
            kind: Kind::TiltedExp { c, a },
            active: "a",
        })
    }

    pub fn name(&self) -> &'static str {
        match &self.kind {
            Kind::PureCoulomb { .. } => "pure-coulomb",
            Kind::CutoffCoulomb { .. } => "cutoff-coulomb",
            Kind::Coupling { .. } => "coupling",
            Kind::TiltedExp { .. } => "tilted-exp",
            Kind::Homotopy { .. } => "homotopy",
        }
    }

    /// Numeric parameters in declaration order.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match &self.kind {
            Kind::PureCoulomb { alpha } => vec![("alpha", *alpha)],
            Kind::CutoffCoulomb { alpha, a } => vec![("alpha", *alpha), ("a", *a)],
            Kind::Coupling { a, b, .. } => vec![("a", *a), ("b", *b)],
            Kind::TiltedExp { c, a } => vec![("c", *c), ("a", *a)],
            Kind::Homotopy { t, .. } => vec![("t", *t)],
        }
    }

    pub fn shape(&self) -> Option<Shape> {
        match &self.kind {
            Kind::Coupling { shape, .. } => Some(*shape),
            _ => None,
        }
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params().into_iter().find(|(n, _)| *n == name).map(|(_, v)| v)
    }

    pub fn active_param(&self) -> &'static str {
        self.active
    }

    pub fn active_value(&self) -> f64 {
        self.param(self.active)
            .expect("active parameter is always one of the family's parameters")
    }

    /// Selects which parameter plays the role of `a`.
    pub fn with_active(&self, name: &str) -> Result<Self> {
        let active = self
            .params()
            .into_iter()
            .map(|(n, _)| n)
            .find(|n| *n == name)
            .ok_or_else(|| {
                Error::config(format!(
                    "family {} has no parameter '{name}' (has: {})",
                    self.name(),
                    self.param_names().join(", ")
                ))
            })?;
        Ok(Self {
            kind: self.kind.clone(),
            active,
        })
    }

    fn param_names(&self) -> Vec<&'static str> {
        self.params().into_iter().map(|(n, _)| n).collect()
    }

    /// Returns a copy with one parameter replaced; validity is re-checked.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let unknown = || {
            Error::config(format!(
                "family {} has no parameter '{name}' (has: {})",
                self.name(),
                self.param_names().join(", ")
            ))
        };
        let next = match (&self.kind, name) {
            (Kind::PureCoulomb { .. }, "alpha") => Self::pure_coulomb(value)?,
            (Kind::CutoffCoulomb { a, .. }, "alpha") => Self::cutoff_coulomb(value, *a)?,
            (Kind::CutoffCoulomb { alpha, .. }, "a") => Self::cutoff_coulomb(*alpha, value)?,
            (Kind::Coupling { shape, b, .. }, "a") => Self::coupling(*shape, value, *b)?,
            (Kind::Coupling { shape, a, .. }, "b") => Self::coupling(*shape, *a, value)?,
            (Kind::TiltedExp { a, .. }, "c") => Self::tilted_exp(value, *a)?,
            (Kind::TiltedExp { c, .. }, "a") => Self::tilted_exp(*c, value)?,
            (Kind::Homotopy { v1, v2, .. }, "t") => {
                check_finite("t", value)?;
                Self {
                    kind: Kind::Homotopy {
                        v1: v1.clone(),
                        v2: v2.clone(),
                        t: value,
                    },
                    active: "t",
                }
            }
            _ => return Err(unknown()),
        };
        Ok(Self {
            active: self.active,
            ..next
        })
    }

    /// Returns a copy with the active parameter set to `value`.
    pub fn with_active_value(&self, value: f64) -> Result<Self> {
        self.with_param(self.active, value)
    }

    pub fn origin_class(&self) -> OriginClass {
        match &self.kind {
            Kind::PureCoulomb { alpha } => OriginClass::CoulombSingular(*alpha),
            Kind::Coupling {
                shape: Shape::Yukawa,
                a,
                ..
            } if *a > 0.0 => OriginClass::CoulombSingular(*a),
            Kind::Homotopy { v1, v2, t } => {
                let s = (1.0 - t) * v1.coulomb_strength() + t * v2.coulomb_strength();
                if s == 0.0 {
                    OriginClass::Regular
                } else {
                    OriginClass::CoulombSingular(s)
                }
            }
            _ => OriginClass::Regular,
        }
    }

    pub(crate) fn coulomb_strength(&self) -> f64 {
        match self.origin_class() {
            OriginClass::Regular => 0.0,
            OriginClass::CoulombSingular(s) => s,
        }
    }

    /// `lim V(r)` as `r -> 0+` for regular families.
    pub fn origin_value(&self) -> Option<f64> {
        match &self.kind {
            Kind::PureCoulomb { .. } => None,
            Kind::CutoffCoulomb { alpha, a } => Some(-alpha / a),
            Kind::Coupling { shape, a, b } => match shape {
                Shape::Exponential => Some(-a),
                Shape::Inverse => Some(-a / b),
                Shape::Yukawa if *a == 0.0 => Some(0.0),
                Shape::Yukawa => None,
            },
            Kind::TiltedExp { c, a } => Some(-a - c),
            Kind::Homotopy { v1, v2, t } => {
                if *t == 0.0 {
                    v1.origin_value()
                } else if *t == 1.0 {
                    v2.origin_value()
                } else {
                    Some((1.0 - t) * v1.origin_value()? + t * v2.origin_value()?)
                }
            }
        }
    }

    /// Characteristic length of the potential, used to size radial domains.
    pub fn length_scale(&self) -> f64 {
        match &self.kind {
            Kind::PureCoulomb { alpha } => 1.0 / alpha,
            Kind::CutoffCoulomb { alpha, a } => a.max(1.0 / alpha),
            Kind::Coupling { shape, a, b } => match shape {
                Shape::Exponential => *b,
                Shape::Inverse if *a > 0.0 => b.max(1.0 / a),
                Shape::Inverse => *b,
                Shape::Yukawa => 1.0 / b,
            },
            Kind::TiltedExp { .. } => 1.0,
            Kind::Homotopy { v1, v2, .. } => v1.length_scale().max(v2.length_scale()),
        }
    }

    /// `V(r)`; fails for `r <= 0`.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain(format!("radius must be positive and finite, got {r}")));
        }
        Ok(self.value(r))
    }

    /// `V(r)` without the domain check. `r` must be positive.
    pub(crate) fn value(&self, r: f64) -> f64 {
        match &self.kind {
            Kind::PureCoulomb { alpha } => -alpha / r,
            Kind::CutoffCoulomb { alpha, a } => -alpha / (r + a),
            Kind::Coupling { shape, a, b } => a * shape_value(*shape, *b, r),
            Kind::TiltedExp { c, a } => (a * (r - 1.0) - c) * (-r).exp(),
            Kind::Homotopy { v1, v2, t } => (1.0 - t) * v1.value(r) + t * v2.value(r),
        }
    }

    /// `V` evaluated at `|x|`, for one-dimensional problems on the full line.
    pub fn value_abs(&self, x: f64) -> f64 {
        let r = x.abs();
        if r == 0.0 {
            self.origin_value().unwrap_or(f64::NEG_INFINITY)
        } else {
            self.value(r)
        }
    }

    /// `dV/d(active)` at `r`.
    pub fn param_derivative(&self, r: f64) -> Result<f64> {
        self.derivative_wrt(self.active, r)
    }

    /// `dV/d(name)` at `r`.
    pub fn derivative_wrt(&self, name: &str, r: f64) -> Result<f64> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain(format!("radius must be positive and finite, got {r}")));
        }
        self.derivative_unchecked(name, r).ok_or_else(|| {
            Error::config(format!(
                "no analytic derivative registered for parameter '{name}' of family {}",
                self.name()
            ))
        })
    }

    pub(crate) fn derivative_unchecked(&self, name: &str, r: f64) -> Option<f64> {
        let value = match (&self.kind, name) {
            (Kind::PureCoulomb { .. }, "alpha") => -1.0 / r,
            (Kind::CutoffCoulomb { a, .. }, "alpha") => -1.0 / (r + a),
            (Kind::CutoffCoulomb { alpha, a }, "a") => alpha / ((r + a) * (r + a)),
            (Kind::Coupling { shape, b, .. }, "a") => shape_value(*shape, *b, r),
            (Kind::Coupling { shape, a, b }, "b") => a * shape_b_derivative(*shape, *b, r),
            (Kind::TiltedExp { .. }, "a") => (r - 1.0) * (-r).exp(),
            (Kind::TiltedExp { .. }, "c") => -(-r).exp(),
            (Kind::Homotopy { v1, v2, .. }, "t") => v2.value(r) - v1.value(r),
            _ => return None,
        };
        Some(value)
    }

    /// Exact sign of `V_a` where it is known in closed form.
    pub fn analytic_sign(&self) -> Option<SignClass> {
        let class = match (&self.kind, self.active) {
            (Kind::PureCoulomb { .. }, _) => SignClass::NonPositive,
            (Kind::CutoffCoulomb { .. }, "alpha") => SignClass::NonPositive,
            (Kind::CutoffCoulomb { .. }, "a") => SignClass::NonNegative,
            (Kind::Coupling { .. }, "a") => SignClass::NonPositive,
            (Kind::Coupling { shape, .. }, "b") => match shape {
                Shape::Exponential => SignClass::NonPositive,
                Shape::Inverse | Shape::Yukawa => SignClass::NonNegative,
            },
            (Kind::TiltedExp { .. }, "a") => SignClass::Indefinite,
            (Kind::TiltedExp { .. }, "c") => SignClass::NonPositive,
            _ => return None,
        };
        Some(class)
    }

    /// Sign classification of `V_a` over `(0, r_max]`.
    ///
    /// Uses the closed-form classification when the family has one, and
    /// otherwise [`sampled_sign`](Self::sampled_sign).
    pub fn classify_sign(&self, r_max: f64, n_samples: usize) -> Result<SignClass> {
        if n_samples < 64 {
            return Err(Error::domain(format!(
                "classify_sign needs at least 64 samples, got {n_samples}"
            )));
        }
        match self.analytic_sign() {
            Some(class) => Ok(class),
            None => self.sampled_sign(r_max, n_samples),
        }
    }

    /// Samples `V_a` on a log-spaced grid from `1e-6 r_max` to `r_max`.
    pub fn sampled_sign(&self, r_max: f64, n_samples: usize) -> Result<SignClass> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::domain(format!("r_max must be positive, got {r_max}")));
        }
        if n_samples < 2 {
            return Err(Error::domain("need at least two samples"));
        }
        let r_min = 1e-6 * r_max;
        let ratio = (r_max / r_min).ln() / (n_samples - 1) as f64;
        let (mut any_pos, mut any_neg) = (false, false);
        for i in 0..n_samples {
            let r = if i + 1 == n_samples {
                r_max
            } else {
                r_min * (ratio * i as f64).exp()
            };
            let v = self.param_derivative(r)?;
            if !v.is_finite() {
                return Err(Error::domain(format!("V_a is not finite at r = {r}")));
            }
            any_pos |= v > SIGN_SLACK;
            any_neg |= v < -SIGN_SLACK;
        }
        Ok(match (any_pos, any_neg) {
            (true, true) => SignClass::Indefinite,
            (_, false) => SignClass::NonNegative,
            (false, true) => SignClass::NonPositive,
        })
    }

    pub fn snapshot(&self) -> FamilySnapshot {
        FamilySnapshot {
            name: self.name().to_string(),
            params: self.params().into_iter().map(|(n, v)| (n.to_string(), v)).collect(),
            active: self.active.to_string(),
            description: self.to_string(),
        }
    }

    /// Builds a family from a name and `key=value` pairs. `shape` and
    /// `active` are accepted as keys. Missing numeric parameters default to 1
    /// (and `c` to 4 for `tilted-exp`).
    pub fn from_pairs<'a, I>(name: &str, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut shape = Shape::Exponential;
        let mut active: Option<&str> = None;
        let mut numeric: Vec<(&str, f64)> = Vec::new();
        for (key, value) in pairs {
            match key {
                "shape" => shape = value.parse()?,
                "active" => active = Some(value),
                _ => {
                    let v: f64 = value
                        .trim()
                        .parse()
                        .map_err(|_| Error::config(format!("parameter {key}: '{value}' is not a number")))?;
                    numeric.push((key, v));
                }
            }
        }
        let get = |key: &str, default: f64| {
            numeric
                .iter()
                .rev()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .unwrap_or(default)
        };
        let family = match name {
            "pure-coulomb" => Self::pure_coulomb(get("alpha", 1.0))?,
            "cutoff-coulomb" => Self::cutoff_coulomb(get("alpha", 1.0), get("a", 1.0))?,
            "coupling" => Self::coupling(shape, get("a", 1.0), get("b", 1.0))?,
            "tilted-exp" => Self::tilted_exp(get("c", 4.0), get("a", 0.0))?,
            other => {
                return Err(Error::config(format!(
                    "unknown potential family '{other}' \
                     (expected pure-coulomb, cutoff-coulomb, coupling or tilted-exp)"
                )))
            }
        };
        let names = family.param_names();
        if let Some((bad, _)) = numeric.iter().find(|(k, _)| !names.contains(k)) {
            return Err(Error::config(format!(
                "family {name} has no parameter '{bad}' (has: {})",
                names.join(", ")
            )));
        }
        match active {
            Some(a) => family.with_active(a),
            None => Ok(family),
        }
    }
}

impl FromStr for PotentialFamily {
    type Err = Error;

    /// Parses `"<name> key=value ..."`, e.g. `cutoff-coulomb alpha=1 a=0.1 active=a`.
    fn from_str(s: &str) -> Result<Self> {
        let mut words = s.split_whitespace();
        let name = words
            .next()
            .ok_or_else(|| Error::config("empty potential family specification"))?;
        let mut pairs = Vec::new();
        for word in words {
            let (k, v) = word
                .split_once('=')
                .ok_or_else(|| Error::config(format!("expected key=value, got '{word}'")))?;
            pairs.push((k, v));
        }
        Self::from_pairs(name, pairs)
    }
}

impl fmt::Display for PotentialFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Kind::Homotopy { v1, v2, t } = &self.kind {
            return write!(f, "homotopy t={t} [{v1}] -> [{v2}]");
        }
        f.write_str(self.name())?;
        if let Some(shape) = self.shape() {
            write!(f, " shape={}", shape.id())?;
        }
        for (name, value) in self.params() {
            write!(f, " {name}={value}")?;
        }
        write!(f, " active={}", self.active)
    }
}

fn shape_value(shape: Shape, b: f64, r: f64) -> f64 {
    match shape {
        Shape::Exponential => -(-r / b).exp(),
        Shape::Inverse => -1.0 / (r + b),
        Shape::Yukawa => -(-b * r).exp() / r,
    }
}

fn shape_b_derivative(shape: Shape, b: f64, r: f64) -> f64 {
    match shape {
        Shape::Exponential => -(-r / b).exp() * r / (b * b),
        Shape::Inverse => 1.0 / ((r + b) * (r + b)),
        Shape::Yukawa => (-b * r).exp(),
    }
}

/// Linear interpolation `(1 - t) V1 + t V2` with active parameter `t`,
/// starting at `t = 0`. Its `V_t` is `V2 - V1`.
pub fn make_homotopy(v1: &PotentialFamily, v2: &PotentialFamily) -> PotentialFamily {
    PotentialFamily {
        kind: Kind::Homotopy {
            v1: Arc::new(v1.clone()),
            v2: Arc::new(v2.clone()),
            t: 0.0,
        },
        active: "t",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Five-point central difference of `V` in parameter `name`.
    fn fd_param(family: &PotentialFamily, name: &str, r: f64) -> f64 {
        let p = family.param(name).unwrap();
        let h = (f64::EPSILON.cbrt()) * p.abs().max(1.0) * 0.1;
        let at = |d: f64| family.with_param(name, p + d).unwrap().value(r);
        (at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h)
    }

    fn all_families() -> Vec<PotentialFamily> {
        let mut v = vec![
            PotentialFamily::pure_coulomb(0.5).unwrap(),
            PotentialFamily::cutoff_coulomb(1.0, 0.7).unwrap(),
            PotentialFamily::coupling(Shape::Exponential, 2.0, 1.3).unwrap(),
            PotentialFamily::coupling(Shape::Inverse, 1.5, 0.4).unwrap(),
            PotentialFamily::coupling(Shape::Yukawa, 0.6, 0.8).unwrap(),
            PotentialFamily::tilted_exp(4.0, 0.5).unwrap(),
        ];
        let h = make_homotopy(&v[1], &v[3]).with_param("t", 0.3).unwrap();
        v.push(h);
        v
    }

    #[test]
    fn evaluate_examples() {
        let cc = PotentialFamily::cutoff_coulomb(1.0, 1.0).unwrap();
        assert_eq!(cc.evaluate(1.0).unwrap(), -0.5);
        let pc = PotentialFamily::pure_coulomb(0.5).unwrap();
        assert_eq!(pc.evaluate(2.0).unwrap(), -0.25);
        let zero = PotentialFamily::coupling(Shape::Exponential, 0.0, 1.0).unwrap();
        for r in [1e-6, 0.3, 1.0, 17.0] {
            assert_eq!(zero.evaluate(r).unwrap(), 0.0);
        }
    }

    #[test]
    fn evaluate_rejects_non_positive_radius() {
        let cc = PotentialFamily::cutoff_coulomb(1.0, 1.0).unwrap();
        assert!(matches!(cc.evaluate(0.0), Err(Error::Domain(_))));
        assert!(matches!(cc.evaluate(-1.0), Err(Error::Domain(_))));
        assert!(matches!(cc.param_derivative(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn unknown_family_is_config_error() {
        assert!(matches!(
            "square-well depth=1".parse::<PotentialFamily>(),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            "cutoff-coulomb alpha=1 depth=3".parse::<PotentialFamily>(),
            Err(Error::Config(_))
        ));
        let cc = PotentialFamily::cutoff_coulomb(1.0, 1.0).unwrap();
        assert!(matches!(cc.with_active("b"), Err(Error::Config(_))));
        assert!(matches!(cc.derivative_wrt("b", 1.0), Err(Error::Config(_))));
    }

    #[test]
    fn param_derivative_examples() {
        let cc = PotentialFamily::cutoff_coulomb(1.0, 1.0).unwrap();
        assert_eq!(cc.param_derivative(1.0).unwrap(), 0.25);
        let cc_alpha = cc.with_active("alpha").unwrap();
        assert_eq!(cc_alpha.param_derivative(1.0).unwrap(), -0.5);
        let cp = PotentialFamily::coupling(Shape::Exponential, 2.0, 1.0).unwrap();
        assert_relative_eq!(cp.param_derivative(0.7).unwrap(), -(-0.7f64).exp());
        assert_relative_eq!(cp.param_derivative(0.7).unwrap(), -0.496585, epsilon = 1e-6);
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        for family in all_families() {
            for (name, _) in family.params() {
                for r in [0.05, 0.3, 1.0, 2.5, 7.0] {
                    let exact = family.derivative_wrt(name, r).unwrap();
                    let fd = fd_param(&family, name, r);
                    let scale = exact.abs().max(1e-3 * family.value(r).abs()).max(1e-12);
                    assert!(
                        (exact - fd).abs() <= 1e-8 * scale,
                        "{family} d/d{name} at r={r}: exact {exact} fd {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn classify_sign_examples() {
        let cc = PotentialFamily::cutoff_coulomb(1.0, 1.0).unwrap();
        assert_eq!(cc.classify_sign(50.0, 256).unwrap(), SignClass::NonNegative);
        assert_eq!(
            cc.with_active("alpha").unwrap().classify_sign(50.0, 256).unwrap(),
            SignClass::NonPositive
        );
        let tilted = PotentialFamily::tilted_exp(4.0, 0.0).unwrap();
        assert_eq!(tilted.classify_sign(50.0, 256).unwrap(), SignClass::Indefinite);
        assert!(cc.classify_sign(50.0, 10).is_err());
    }

    #[test]
    fn analytic_sign_agrees_with_sampling() {
        for family in all_families() {
            for (name, _) in family.params() {
                let f = family.with_active(name).unwrap();
                if let Some(exact) = f.analytic_sign() {
                    assert_eq!(f.sampled_sign(200.0, 512).unwrap(), exact, "{f} active={name}");
                }
            }
        }
    }

    #[test]
    fn homotopy_endpoints_and_sign() {
        let v1 = PotentialFamily::coupling(Shape::Inverse, 1.0, 0.5).unwrap();
        let v2 = PotentialFamily::coupling(Shape::Inverse, 1.0, 1.0).unwrap();
        let h = make_homotopy(&v1, &v2);
        assert_eq!(h.active_param(), "t");
        let h1 = h.with_active_value(1.0).unwrap();
        for r in [1e-4, 0.1, 1.0, 3.0, 40.0] {
            assert_eq!(h.value(r), v1.value(r));
            assert_eq!(h1.value(r), v2.value(r));
            assert_eq!(h.param_derivative(r).unwrap(), v2.value(r) - v1.value(r));
        }
        assert_eq!(h.classify_sign(50.0, 256).unwrap(), SignClass::NonNegative);
        let reverse = make_homotopy(&v2, &v1);
        assert_eq!(reverse.classify_sign(50.0, 256).unwrap(), SignClass::NonPositive);
        // Crossing potentials: -2 e^{-r} against (r - 3) e^{-r}.
        let a = PotentialFamily::tilted_exp(2.0, 0.0).unwrap();
        let b = PotentialFamily::tilted_exp(2.0, 1.0).unwrap();
        assert_eq!(
            make_homotopy(&a, &b).classify_sign(50.0, 256).unwrap(),
            SignClass::Indefinite
        );
    }

    #[test]
    fn origin_classes() {
        let pc = PotentialFamily::pure_coulomb(0.5).unwrap();
        assert_eq!(pc.origin_class(), OriginClass::CoulombSingular(0.5));
        let cc = PotentialFamily::cutoff_coulomb(1.0, 0.5).unwrap();
        assert_eq!(cc.origin_class(), OriginClass::Regular);
        assert_eq!(cc.origin_value(), Some(-2.0));
        let h = make_homotopy(&cc, &pc).with_param("t", 0.25).unwrap();
        assert_eq!(h.origin_class(), OriginClass::CoulombSingular(0.125));
        assert_eq!(make_homotopy(&cc, &pc).origin_class(), OriginClass::Regular);
        // r V(r) -> -alpha for singular families
        let y = PotentialFamily::coupling(Shape::Yukawa, 0.6, 0.8).unwrap();
        let r = 1e-9;
        assert_relative_eq!(r * y.value(r), -0.6, epsilon = 1e-8);
    }

    #[test]
    fn families_vanish_at_infinity() {
        for family in all_families() {
            let far = family.value(1e6).abs();
            assert!(far < 1e-5, "{family}: V(1e6) = {far}");
        }
    }

    #[test]
    fn parse_round_trip() {
        let f: PotentialFamily = "cutoff-coulomb alpha=1.0 a=0.1 active=alpha".parse().unwrap();
        assert_eq!(f.param("a"), Some(0.1));
        assert_eq!(f.active_param(), "alpha");
        let again: PotentialFamily = f.to_string().parse().unwrap();
        assert_eq!(again, f);
        let c: PotentialFamily = "coupling shape=yukawa a=0.3 b=2".parse().unwrap();
        assert_eq!(c.shape(), Some(Shape::Yukawa));
        assert_eq!(c.to_string().parse::<PotentialFamily>().unwrap(), c);
    }

    #[test]
    fn with_param_validates() {
        let cc = PotentialFamily::cutoff_coulomb(1.0, 1.0).unwrap();
        assert!(cc.with_param("a", -0.1).is_err());
        let moved = cc.with_active_value(2.0).unwrap();
        assert_eq!(moved.param("a"), Some(2.0));
        assert_eq!(cc.param("a"), Some(1.0));
        assert_eq!(moved.active_param(), "a");
    }
}
