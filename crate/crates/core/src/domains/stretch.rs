//! σ = ρ²∘ψ⁻¹ with ψ(x) = ∫ₓᶜ dr/ρ(r).
//!
//! ψ⁻¹ is tabulated through y = ln x, which solves y′(s) = −g(x) with
//! g = ρ/x and is nearly linear in s. The table holds the deviation
//! z = y − ln c + g(0)s (identically zero for ρ = x) together with z′ and z″;
//! between nodes z is a quintic Hermite interpolant.

use std::fmt;
use std::sync::Arc;

use super::DomainError;
use crate::numerics::ode::Dopri5;
use crate::profile::{Expr, Weight, WeightProfile};

/// Table spacing in s.
const STEP: f64 = 1.0 / 64.0;
/// Table length in s; beyond it y is continued with its end slope.
const S_MAX: f64 = 220.0;

type Jet3 = Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

/// A fibre radius ρ on [0, c] with ρ(0) = 0 and ρ′ > 0.
#[derive(Clone)]
pub struct StretchSpec {
    rho: Jet3,
    c: f64,
    label: String,
}

impl fmt::Debug for StretchSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StretchSpec")
            .field("rho", &self.label)
            .field("c", &self.c)
            .finish()
    }
}

impl StretchSpec {
    /// `rho` returns (ρ, ρ′, ρ″).
    pub fn new(
        rho: impl Fn(f64) -> [f64; 3] + Send + Sync + 'static,
        c: f64,
        label: impl Into<String>,
    ) -> Result<Self, DomainError> {
        let spec = Self {
            rho: Arc::new(rho),
            c,
            label: label.into(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// ρ given by an expression in `x`.
    pub fn from_expression(source: &str, c: f64) -> Result<Self, DomainError> {
        let e = Expr::parse(source).map_err(|e| DomainError::Stretch(e.to_string()))?;
        Self::new(
            move |x| {
                let j = e.jet(x);
                [j.v, j.d1, j.d2]
            },
            c,
            source.trim(),
        )
    }

    fn validate(&self) -> Result<(), DomainError> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(DomainError::Stretch(format!(
                "right endpoint must be positive, got {}",
                self.c
            )));
        }
        let [r0, d0, _] = self.rho_jet(0.0);
        if r0.abs() > 1e-14 * self.c {
            return Err(DomainError::Stretch(format!("rho(0) = {r0}, must vanish")));
        }
        if !(d0 > 0.0 && d0.is_finite()) {
            return Err(DomainError::Stretch(format!(
                "rho'(0) = {d0}; need a finite positive slope so that the integral of 1/rho diverges"
            )));
        }
        for i in 0..=256 {
            let x = self.c * i as f64 / 256.0;
            let [r, d, d2] = self.rho_jet(x);
            if !(r.is_finite() && d.is_finite() && d2.is_finite()) {
                return Err(DomainError::Stretch(format!("rho not finite at x = {x}")));
            }
            if d <= 0.0 {
                return Err(DomainError::Stretch(format!("rho'({x}) = {d} <= 0")));
            }
        }
        Ok(())
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rho_jet(&self, x: f64) -> [f64; 3] {
        (self.rho)(x)
    }

    /// ψ(x) = ∫ₓᶜ dr/ρ(r) by adaptive quadrature in ln r.
    pub fn psi(&self, x: f64) -> f64 {
        if x >= self.c {
            return 0.0;
        }
        if x <= 0.0 {
            return f64::INFINITY;
        }
        let g = |y: f64| {
            let r = y.exp();
            r / (self.rho)(r)[0]
        };
        crate::numerics::quad::integrate(g, x.ln(), self.c.ln(), 1e-13, 1e-15).unwrap_or(f64::NAN)
    }

    /// g(x) = ρ(x)/x and g′(x), continuous at 0.
    fn g(&self, x: f64) -> (f64, f64) {
        if x < 1e-6 * self.c {
            let [_, d0, d20] = self.rho_jet(0.0);
            return (d0 + 0.5 * d20 * x, 0.5 * d20);
        }
        let [r, d, _] = self.rho_jet(x);
        (r / x, (d * x - r) / (x * x))
    }
}

/// ψ⁻¹ as a table of (z, z′, z″).
#[derive(Debug)]
struct StretchedWeight {
    spec: StretchSpec,
    ln_c: f64,
    g0: f64,
    z: Vec<[f64; 3]>,
}

impl StretchedWeight {
    fn build(spec: StretchSpec) -> Result<Self, DomainError> {
        let n = (S_MAX / STEP).round() as usize;
        let ode = Dopri5::new(1e-14, 1e-15);
        let ln_c = spec.c.ln();
        let g0 = spec.g(0.0).0;
        let x_of = |s: f64, z: f64| (ln_c - g0 * s + z).exp();
        let mut z = 0.0;
        let mut rows = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let s0 = i as f64 * STEP;
            let x = x_of(s0, z);
            let (g, dg) = spec.g(x);
            // y′ = −g(x), y″ = −g′(x)·x′ = g′(x)·x·g
            rows.push([z, g0 - g, dg * x * g]);
            if i == n {
                break;
            }
            z = ode
                .integrate(
                    |s, v: &[f64; 1]| [g0 - spec.g(x_of(s, v[0])).0],
                    s0,
                    s0 + STEP,
                    [z],
                    |_, _| {},
                )
                .map_err(|e| DomainError::Stretch(e.to_string()))?[0];
        }
        Ok(Self {
            spec,
            ln_c,
            g0,
            z: rows,
        })
    }

    /// (y, y′) at s ≥ 0.
    fn log_x(&self, s: f64) -> (f64, f64) {
        let (z, dz) = self.deviation(s);
        (self.ln_c - self.g0 * s + z, dz - self.g0)
    }

    fn deviation(&self, s: f64) -> (f64, f64) {
        let n = self.z.len() - 1;
        let pos = s / STEP;
        if pos >= n as f64 {
            let [z, d, _] = self.z[n];
            return (z + d * (s - n as f64 * STEP), d);
        }
        let i = (pos.floor() as usize).min(n - 1);
        let u = pos - i as f64;
        let [y0, d0, e0] = self.z[i];
        let [y1, d1, e1] = self.z[i + 1];
        let (d0, d1, e0, e1) = (d0 * STEP, d1 * STEP, e0 * STEP * STEP, e1 * STEP * STEP);
        let (u2, u3) = (u * u, u * u * u);
        let (u4, u5) = (u3 * u, u3 * u2);
        let h00 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
        let h01 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
        let h10 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
        let h11 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
        let h20 = 0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5);
        let h21 = 0.5 * (u3 - 2.0 * u4 + u5);
        let g00 = -30.0 * u2 + 60.0 * u3 - 30.0 * u4;
        let g10 = 1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u4;
        let g11 = -12.0 * u2 + 28.0 * u3 - 15.0 * u4;
        let g20 = 0.5 * (2.0 * u - 9.0 * u2 + 12.0 * u3 - 5.0 * u4);
        let g21 = 0.5 * (3.0 * u2 - 8.0 * u3 + 5.0 * u4);
        let y = h00 * y0 + h01 * y1 + h10 * d0 + h11 * d1 + h20 * e0 + h21 * e1;
        let dy = (g00 * y0 - g00 * y1 + g10 * d0 + g11 * d1 + g20 * e0 + g21 * e1) / STEP;
        (y, dy)
    }
}

impl Weight for StretchedWeight {
    fn jet(&self, s: f64) -> [f64; 3] {
        let s = s.max(0.0);
        let x = self.log_x(s).0.exp();
        let [r, d, d2] = self.spec.rho_jet(x);
        // dx/ds = −ρ
        [
            r * r,
            -2.0 * r * r * d,
            2.0 * r * r * (2.0 * d * d + r * d2),
        ]
    }
}

/// σ(s) = ρ(ψ⁻¹(s))², with σ′ = −2ρ²ρ′ and σ″ = 2ρ²(2ρ′² + ρρ″) at x = ψ⁻¹(s).
pub fn stretch_sigma(spec: &StretchSpec) -> Result<WeightProfile, DomainError> {
    let tail = 2.0 * spec.rho_jet(0.0)[1];
    let name = format!("stretch[rho={}, c={}]", spec.label, spec.c);
    let w = StretchedWeight::build(spec.clone())?;
    WeightProfile::new(name, Arc::new(w), Some(tail))
        .map_err(|e| DomainError::Stretch(e.to_string()))
}

/// x = ψ⁻¹(s).
pub fn psi_inverse(spec: &StretchSpec, s: &[f64]) -> Result<Vec<f64>, DomainError> {
    let w = StretchedWeight::build(spec.clone())?;
    Ok(s.iter().map(|&v| w.log_x(v.max(0.0)).0.exp()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_rho_gives_exponential() {
        let spec = StretchSpec::from_expression("x", 1.0).unwrap();
        let p = stretch_sigma(&spec).unwrap();
        for i in 0..=400 {
            let s = i as f64 * 0.05;
            let [v, d, d2] = p.jet(s);
            let e = (-2.0 * s).exp();
            assert!(
                (v - e).abs() <= 1e-12 * e,
                "s = {s}: {v:e} vs {e:e}, {}",
                (v - e) / e
            );
            assert!((d + 2.0 * e).abs() <= 1e-11 * e);
            assert!((d2 - 4.0 * e).abs() <= 1e-11 * e);
        }
    }

    #[test]
    fn psi_and_its_inverse() {
        let spec = StretchSpec::from_expression("x + x^2", 1.5).unwrap();
        let xs = psi_inverse(&spec, &[0.0, 0.3, 2.0, 7.5]).unwrap();
        assert!((xs[0] - 1.5).abs() < 1e-14);
        for (x, s) in xs.iter().zip([0.0, 0.3, 2.0, 7.5]) {
            assert!((spec.psi(*x) - s).abs() < 1e-10, "{} vs {s}", spec.psi(*x));
        }
    }

    #[test]
    fn rejects_bad_rho() {
        assert!(StretchSpec::from_expression("1 + x", 1.0).is_err());
        assert!(StretchSpec::from_expression("x^2", 1.0).is_err());
        assert!(StretchSpec::from_expression("x - x^2", 1.0).is_err());
        assert!(StretchSpec::from_expression("x", -1.0).is_err());
    }
}
