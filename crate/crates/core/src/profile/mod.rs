//! Decreasing weights σ on [0, ∞), the turning points of f_E = μ − E·σ and
//! the Langer–Cherry change of variables built from them.

mod expr;
mod langer;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

pub use expr::{Expr, Jet};
pub use langer::{langer_cherry, transform, LangerCherryMap, Transformed};

/// Largest truncation radius ever used.
pub const MAX_TRUNCATION: f64 = 200.0;
/// σ(X)/σ(0) at the truncation radius.
pub const TRUNCATION_LEVEL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("unknown profile `{0}` (expected exp2, exp, rational or an expression)")]
    UnknownProfile(String),
    #[error("weight is not positive at x = {x}: sigma = {value}")]
    NonPositive { x: f64, value: f64 },
    #[error("weight is not strictly decreasing at x = {x}: sigma' = {slope}")]
    NotDecreasing { x: f64, slope: f64 },
    #[error("weight or its derivatives are not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("energy {energy} is below threshold mu/sigma(0) = {threshold}")]
    BelowThreshold { energy: f64, threshold: f64 },
    #[error("level {s} unreachable: f_E < mu = {mu} everywhere")]
    LevelUnreachable { s: f64, mu: f64 },
    #[error("level {s} must be non-negative")]
    NegativeLevel { s: f64 },
    #[error("transverse eigenvalue must be positive, got {mu}")]
    InvalidMu { mu: f64 },
    #[error("no root of sigma(x) = {target} found before x = {limit}")]
    RootNotFound { target: f64, limit: f64 },
    #[error("quadrature failed on [{lo}, {hi}]: {message}")]
    Quadrature { lo: f64, hi: f64, message: String },
    #[error("input grid undersampled (interpolation indicator {indicator:e})")]
    Undersampled { indicator: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// A weight evaluator returning σ, σ′ and σ″ together.
pub trait Weight: Send + Sync + fmt::Debug {
    fn jet(&self, x: f64) -> [f64; 3];
}

#[derive(Debug, Clone, Copy)]
struct Exponential {
    rate: f64,
}

impl Weight for Exponential {
    fn jet(&self, x: f64) -> [f64; 3] {
        let v = (-self.rate * x).exp();
        [v, -self.rate * v, self.rate * self.rate * v]
    }
}

#[derive(Debug, Clone, Copy)]
struct InverseSquare;

impl Weight for InverseSquare {
    fn jet(&self, x: f64) -> [f64; 3] {
        let r = 1.0 / (1.0 + x);
        let r2 = r * r;
        [r2, -2.0 * r2 * r, 6.0 * r2 * r2]
    }
}

#[derive(Debug, Clone)]
struct ExprWeight(Expr);

impl Weight for ExprWeight {
    fn jet(&self, x: f64) -> [f64; 3] {
        let j = self.0.jet(x);
        [j.v, j.d1, j.d2]
    }
}

/// Where a profile is cut off for computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncation {
    pub radius: f64,
    /// True when σ(radius) is still above the truncation level because the
    /// radius hit [`MAX_TRUNCATION`].
    pub capped: bool,
}

/// A smooth, positive, strictly decreasing weight σ with analytic
/// derivatives.
#[derive(Clone)]
pub struct WeightProfile {
    name: String,
    weight: Arc<dyn Weight>,
    sigma0: f64,
    tail_rate: Option<f64>,
}

impl fmt::Debug for WeightProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightProfile")
            .field("name", &self.name)
            .field("sigma0", &self.sigma0)
            .field("tail_rate", &self.tail_rate)
            .finish()
    }
}

impl WeightProfile {
    pub fn new(
        name: impl Into<String>,
        weight: Arc<dyn Weight>,
        tail_rate: Option<f64>,
    ) -> Result<Self, ProfileError> {
        let [s0, d0, _] = weight.jet(0.0);
        if !s0.is_finite() || !d0.is_finite() {
            return Err(ProfileError::NonFinite { x: 0.0 });
        }
        if s0 <= 0.0 {
            return Err(ProfileError::NonPositive { x: 0.0, value: s0 });
        }
        Ok(Self {
            name: name.into(),
            weight,
            sigma0: s0,
            tail_rate,
        })
    }

    /// σ = e^{−2x}.
    pub fn exp2() -> Self {
        Self::new("exp2", Arc::new(Exponential { rate: 2.0 }), Some(2.0)).expect("valid built-in")
    }

    /// σ = e^{−x}.
    pub fn exp() -> Self {
        Self::new("exp", Arc::new(Exponential { rate: 1.0 }), Some(1.0)).expect("valid built-in")
    }

    /// σ = (1 + x)^{−2}.
    pub fn rational() -> Self {
        Self::new("rational", Arc::new(InverseSquare), None).expect("valid built-in")
    }

    /// σ given by an expression in `x`.
    pub fn from_expression(source: &str) -> Result<Self, ProfileError> {
        let e = Expr::parse(source)?;
        let p = Self::new(source.trim(), Arc::new(ExprWeight(e)), None)?;
        p.validate()?;
        Ok(p)
    }

    /// A built-in name or, failing that, an expression.
    pub fn named(name: &str) -> Result<Self, ProfileError> {
        match name.trim() {
            "exp2" => Ok(Self::exp2()),
            "exp" => Ok(Self::exp()),
            "rational" => Ok(Self::rational()),
            other => match Self::from_expression(other) {
                Ok(p) => Ok(p),
                Err(ProfileError::Parse { .. })
                    if !other.contains(['(', '*', '/', '+', '-', '^']) =>
                {
                    Err(ProfileError::UnknownProfile(other.to_string()))
                }
                Err(e) => Err(e),
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn tail_rate(&self) -> Option<f64> {
        self.tail_rate
    }

    pub fn jet(&self, x: f64) -> [f64; 3] {
        self.weight.jet(x)
    }

    pub fn sigma(&self, x: f64) -> f64 {
        self.weight.jet(x)[0]
    }

    pub fn dsigma(&self, x: f64) -> f64 {
        self.weight.jet(x)[1]
    }

    pub fn d2sigma(&self, x: f64) -> f64 {
        self.weight.jet(x)[2]
    }

    /// Smallest X with σ(X) < 1e−8·σ(0), capped at [`MAX_TRUNCATION`].
    pub fn truncation(&self) -> Truncation {
        let level = TRUNCATION_LEVEL * self.sigma0;
        if self.sigma(MAX_TRUNCATION) >= level {
            return Truncation {
                radius: MAX_TRUNCATION,
                capped: true,
            };
        }
        let (mut lo, mut hi) = (0.0, 1.0f64.min(MAX_TRUNCATION));
        while self.sigma(hi) >= level {
            lo = hi;
            hi = (2.0 * hi).min(MAX_TRUNCATION);
        }
        while hi - lo > 1e-12 * hi {
            let mid = 0.5 * (lo + hi);
            if self.sigma(mid) >= level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Truncation {
            radius: hi,
            capped: false,
        }
    }

    /// Checks positivity, strict decrease and finiteness on a log-spaced grid
    /// up to the truncation radius.
    pub fn validate(&self) -> Result<(), ProfileError> {
        let radius = self.truncation().radius;
        let n = 400;
        let lo = 1e-6f64;
        let ratio = (radius / lo).powf(1.0 / n as f64);
        let xs = std::iter::once(0.0).chain((0..=n).map(|i| lo * ratio.powi(i)));
        for x in xs {
            let [s, d, d2] = self.jet(x);
            if !(s.is_finite() && d.is_finite() && d2.is_finite()) {
                return Err(ProfileError::NonFinite { x });
            }
            if s <= 0.0 {
                return Err(ProfileError::NonPositive { x, value: s });
            }
            if d >= 0.0 {
                return Err(ProfileError::NotDecreasing { x, slope: d });
            }
        }
        Ok(())
    }

    /// μ/σ(0), the bottom of every spectrum with transverse eigenvalue μ.
    pub fn threshold(&self, mu: f64) -> f64 {
        mu / self.sigma0
    }

    /// f_E(x) = μ − E·σ(x).
    pub fn f(&self, mu: f64, energy: f64, x: f64) -> f64 {
        mu - energy * self.sigma(x)
    }

    /// Root of σ(x) = target by safeguarded Newton, for 0 < target ≤ σ(0).
    fn solve_sigma(&self, target: f64, tol: f64) -> Result<f64, ProfileError> {
        if target >= self.sigma0 {
            return Ok(0.0);
        }
        const LIMIT: f64 = 1e12;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while self.sigma(hi) > target {
            lo = hi;
            hi *= 2.0;
            if hi > LIMIT {
                return Err(ProfileError::RootNotFound {
                    target,
                    limit: LIMIT,
                });
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..400 {
            let [s, ds, _] = self.jet(x);
            let r = s - target;
            if r.abs() <= tol {
                return Ok(x);
            }
            if r > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let newton = x - r / ds;
            x = if ds < 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 4.0 * f64::EPSILON * hi.max(1.0) {
                break;
            }
        }
        Ok(x)
    }
}

fn check_energy(profile: &WeightProfile, mu: f64, energy: f64) -> Result<(), ProfileError> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(ProfileError::InvalidMu { mu });
    }
    let threshold = profile.threshold(mu);
    if !(energy >= threshold) {
        return Err(ProfileError::BelowThreshold { energy, threshold });
    }
    Ok(())
}

/// The unique x ≥ 0 with f_E(x) = 0.
pub fn turning_point(profile: &WeightProfile, mu: f64, energy: f64) -> Result<f64, ProfileError> {
    check_energy(profile, mu, energy)?;
    profile.solve_sigma(mu / energy, 1e-12 * mu / energy)
}

/// The unique x ≥ 0 with f_E(x) = s, for 0 ≤ s < μ.
pub fn level_point(
    profile: &WeightProfile,
    mu: f64,
    energy: f64,
    s: f64,
) -> Result<f64, ProfileError> {
    check_energy(profile, mu, energy)?;
    if s < 0.0 {
        return Err(ProfileError::NegativeLevel { s });
    }
    if !(s < mu) {
        return Err(ProfileError::LevelUnreachable { s, mu });
    }
    profile.solve_sigma((mu - s) / energy, 1e-12 * mu / energy)
}

/// Turning-point data for one (μ, E).
#[derive(Debug, Clone)]
pub struct TurningData {
    pub energy: f64,
    pub mu: f64,
    pub x_e: f64,
    profile: WeightProfile,
}

impl TurningData {
    pub fn new(profile: &WeightProfile, mu: f64, energy: f64) -> Result<Self, ProfileError> {
        let x_e = turning_point(profile, mu, energy)?;
        Ok(Self {
            energy,
            mu,
            x_e,
            profile: profile.clone(),
        })
    }

    /// x_E^s.
    pub fn level(&self, s: f64) -> Result<f64, ProfileError> {
        level_point(&self.profile, self.mu, self.energy, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn builtins_are_valid() {
        for p in [
            WeightProfile::exp2(),
            WeightProfile::exp(),
            WeightProfile::rational(),
        ] {
            p.validate().unwrap();
            assert_eq!(p.sigma0(), 1.0);
        }
    }

    #[test]
    fn truncation_radii() {
        let t = WeightProfile::exp2().truncation();
        assert!(!t.capped);
        assert!((t.radius - 1e8f64.ln() / 2.0).abs() < 1e-9);
        let r = WeightProfile::rational().truncation();
        assert!(r.capped && r.radius == MAX_TRUNCATION);
    }

    #[test]
    fn turning_point_closed_forms() {
        let p = WeightProfile::exp2();
        let mu = PI * PI;
        let x = turning_point(&p, mu, 2.0 * mu).unwrap();
        assert!((x - 2f64.ln() / 2.0).abs() < 1e-12);
        assert!((p.f(mu, 2.0 * mu, x)).abs() <= 1e-12 * mu);
        assert_eq!(turning_point(&p, mu, mu).unwrap(), 0.0);
        let e = std::f64::consts::E.powi(2);
        assert!((turning_point(&p, 1.0, e).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            turning_point(&p, mu, 0.9 * mu),
            Err(ProfileError::BelowThreshold { .. })
        ));
    }

    #[test]
    fn level_points() {
        let p = WeightProfile::exp2();
        let mu = PI * PI;
        let x = level_point(&p, mu, 2.0 * mu, mu / 2.0).unwrap();
        assert!((x - 4f64.ln() / 2.0).abs() < 1e-12);
        assert_eq!(
            level_point(&p, mu, 2.0 * mu, 0.0).unwrap(),
            turning_point(&p, mu, 2.0 * mu).unwrap()
        );
        assert!(matches!(
            level_point(&p, mu, 2.0 * mu, mu),
            Err(ProfileError::LevelUnreachable { .. })
        ));
        let mut prev = 0.0;
        for k in 2..=6 {
            let s = mu * (1.0 - 10f64.powi(-k));
            let x = level_point(&p, mu, 2.0 * mu, s).unwrap();
            assert!(x > prev + 1.0);
            prev = x;
        }
    }

    #[test]
    fn expression_profiles() {
        let p = WeightProfile::named("exp(-2*x)").unwrap();
        let q = WeightProfile::exp2();
        for x in [0.0, 0.3, 2.0, 7.5] {
            let (a, b) = (p.jet(x), q.jet(x));
            for i in 0..3 {
                assert!((a[i] - b[i]).abs() <= 1e-15 * b[i].abs().max(1e-300));
            }
        }
        assert!(matches!(
            WeightProfile::named("gauss"),
            Err(ProfileError::UnknownProfile(_))
        ));
        assert!(matches!(
            WeightProfile::named("1 + x"),
            Err(ProfileError::NotDecreasing { .. })
        ));
        assert!(matches!(
            WeightProfile::named("-exp(-x)"),
            Err(ProfileError::NonPositive { .. })
        ));
    }
}
