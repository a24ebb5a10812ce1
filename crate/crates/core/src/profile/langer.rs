//! The Langer–Cherry phase φ_E, the amplitude ρ_E = (φ_E′)^{−1/2} and the
//! transform w ↦ W_E = ((φ_E′)^{1/2}·w)∘φ_E^{−1}.

use super::{turning_point, ProfileError, WeightProfile};
use crate::numerics::interp::{Interpolant, UniformSamples};
use crate::numerics::quad::{gauss_legendre_unit, integrate, kronrod15};

/// Interpolation indicator above which a sampled input is rejected.
pub const UNDERSAMPLING_LIMIT: f64 = 1e-2;

/// φ_E and friends for one (μ, E).  Immutable once built.
#[derive(Debug, Clone)]
pub struct LangerCherryMap {
    pub energy: f64,
    pub mu: f64,
    pub x_e: f64,
    /// Half-width of the window around x_E where the smooth double-integral
    /// form is used.
    pub h_switch: f64,
    profile: WeightProfile,
    gauss: Vec<(f64, f64)>,
    /// ∫|f|^{1/2} from x_E to x_E ± h_switch (left entry absent when that
    /// point is below 0).
    q_left: Option<f64>,
    q_right: f64,
}

/// Builds φ_E for the weight `profile`, transverse eigenvalue μ and energy E.
pub fn langer_cherry(
    profile: &WeightProfile,
    mu: f64,
    energy: f64,
) -> Result<LangerCherryMap, ProfileError> {
    LangerCherryMap::new(profile, mu, energy)
}

impl LangerCherryMap {
    pub fn new(profile: &WeightProfile, mu: f64, energy: f64) -> Result<Self, ProfileError> {
        let x_e = turning_point(profile, mu, energy)?;
        let h_switch = 0.05 * (1.0 + x_e);
        let mut map = Self {
            energy,
            mu,
            x_e,
            h_switch,
            profile: profile.clone(),
            gauss: gauss_legendre_unit(32),
            q_left: None,
            q_right: 0.0,
        };
        map.q_right = map.q_near(x_e + h_switch);
        if x_e - h_switch > 0.0 {
            map.q_left = Some(map.q_near(x_e - h_switch));
        }
        Ok(map)
    }

    pub fn profile(&self) -> &WeightProfile {
        &self.profile
    }

    /// f_E(x).
    pub fn f(&self, x: f64) -> f64 {
        self.mu - self.energy * self.profile.sigma(x)
    }

    /// I(u) = f_E(u)/(u − x_E), the mean of −E·σ′ between x_E and u.
    fn slope_mean(&self, u: f64) -> f64 {
        let d = u - self.x_e;
        if d.abs() > 1e-3 * self.h_switch {
            return self.f(u) / d;
        }
        self.gauss
            .iter()
            .map(|&(s, w)| w * -self.energy * self.profile.dsigma(s * u + (1.0 - s) * self.x_e))
            .sum()
    }

    /// π(E, x) = ∫₀¹ s^{1/2} I^{1/2}(s x + (1 − s) x_E) ds, with s = r².
    fn pi_fn(&self, x: f64) -> f64 {
        self.gauss
            .iter()
            .map(|&(r, w)| {
                let s = r * r;
                w * 2.0 * s * self.slope_mean(s * x + (1.0 - s) * self.x_e).sqrt()
            })
            .sum()
    }

    fn q_near(&self, x: f64) -> f64 {
        (x - self.x_e).abs().powf(1.5) * self.pi_fn(x)
    }

    fn in_switch(&self, x: f64) -> bool {
        (x - self.x_e).abs() <= self.h_switch
    }

    fn root_f(&self, u: f64) -> f64 {
        self.f(u).abs().sqrt()
    }

    /// |∫_{x_E}^x |f_E|^{1/2}|.
    fn q(&self, x: f64) -> Result<f64, ProfileError> {
        if self.in_switch(x) {
            return Ok(self.q_near(x));
        }
        let (anchor, base) = if x > self.x_e {
            (self.x_e + self.h_switch, self.q_right)
        } else {
            (self.x_e - self.h_switch, self.q_left.unwrap_or(0.0))
        };
        let extra = integrate(|u| self.root_f(u), anchor, x, 1e-15, 1e-13).map_err(|e| {
            ProfileError::Quadrature {
                lo: anchor.min(x),
                hi: anchor.max(x),
                message: e.to_string(),
            }
        })?;
        Ok(base + extra.abs())
    }

    fn phi_from_q(&self, x: f64, q: f64) -> f64 {
        (x - self.x_e).signum() * (1.5 * q).powf(2.0 / 3.0)
    }

    /// φ_E(x) for x ≥ 0.
    pub fn phi(&self, x: f64) -> Result<f64, ProfileError> {
        if self.in_switch(x) {
            return Ok((x - self.x_e) * (1.5 * self.pi_fn(x)).powf(2.0 / 3.0));
        }
        Ok(self.phi_from_q(x, self.q(x)?))
    }

    /// φ_E at sorted points, accumulating the phase integral between
    /// neighbours.
    pub fn phi_sorted(&self, xs: &[f64]) -> Result<Vec<f64>, ProfileError> {
        let mut out = Vec::with_capacity(xs.len());
        let mut prev: Option<(f64, f64)> = None;
        for &x in xs {
            let v = match prev {
                Some((xp, qp))
                    if !self.in_switch(x)
                        && !self.in_switch(xp)
                        && (xp - self.x_e) * (x - self.x_e) > 0.0 =>
                {
                    let step = integrate(|u| self.root_f(u), xp, x, 1e-15, 1e-13).map_err(|e| {
                        ProfileError::Quadrature {
                            lo: xp,
                            hi: x,
                            message: e.to_string(),
                        }
                    })?;
                    let q = if x > self.x_e { qp + step } else { qp - step };
                    prev = Some((x, q));
                    self.phi_from_q(x, q)
                }
                _ => {
                    let q = self.q(x)?;
                    prev = Some((x, q));
                    if self.in_switch(x) {
                        self.phi(x)?
                    } else {
                        self.phi_from_q(x, q)
                    }
                }
            };
            out.push(v);
        }
        Ok(out)
    }

    /// φ_E′(x) > 0.
    pub fn phi_prime(&self, x: f64) -> Result<f64, ProfileError> {
        if self.in_switch(x) {
            return Ok(self.slope_mean(x).sqrt() / (1.5 * self.pi_fn(x)).powf(1.0 / 3.0));
        }
        let phi = self.phi(x)?;
        Ok(self.phi_prime_with(x, phi))
    }

    fn phi_prime_with(&self, x: f64, phi: f64) -> f64 {
        if self.in_switch(x) {
            return self.slope_mean(x).sqrt() / (1.5 * self.pi_fn(x)).powf(1.0 / 3.0);
        }
        (self.f(x) / phi).sqrt()
    }

    /// ρ_E = (φ_E′)^{−1/2}.
    pub fn rho(&self, x: f64) -> Result<f64, ProfileError> {
        Ok(self.phi_prime(x)?.powf(-0.5))
    }

    /// φ_E^{−1}(y) by bracketed Newton; `y` must be ≥ φ_E(0).
    pub fn phi_inv(&self, y: f64) -> Result<f64, ProfileError> {
        let y0 = self.phi(0.0)?;
        if y <= y0 {
            if y < y0 - 1e-14 * y0.abs().max(1.0) {
                return Err(ProfileError::InvalidGrid(format!(
                    "{y} is below phi(0) = {y0}"
                )));
            }
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (0.0f64, (2.0 * self.x_e).max(1.0));
        while self.phi(hi)? < y {
            lo = hi;
            hi *= 2.0;
            if hi > 1e7 {
                return Err(ProfileError::RootNotFound {
                    target: y,
                    limit: hi,
                });
            }
        }
        let mut x = if self.in_switch(self.x_e) && y.abs() < 1.0 {
            (self.x_e + y).clamp(lo, hi)
        } else {
            0.5 * (lo + hi)
        };
        for _ in 0..200 {
            let p = self.phi(x)?;
            let r = p - y;
            if r == 0.0 {
                return Ok(x);
            }
            if r < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let step = r / self.phi_prime_with(x, p);
            let next = x - step;
            if step.abs() <= 1e-15 * (1.0 + x.abs()) {
                return Ok(next.clamp(lo, hi));
            }
            x = if next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 4.0 * f64::EPSILON * (1.0 + hi) {
                break;
            }
        }
        Ok(x)
    }
}

/// Output of [`transform`].
#[derive(Debug, Clone)]
pub struct Transformed {
    /// W_E on a uniform y-grid spanning [φ_E(x₀), φ_E(x_end)].
    pub w: UniformSamples,
    /// Interpolation indicator of the input grid.
    pub indicator: f64,
}

/// W_E = ((φ_E′)^{1/2}·w)∘φ_E^{−1} on `n_out` uniform y-points.
pub fn transform(
    map: &LangerCherryMap,
    w: &UniformSamples,
    n_out: usize,
) -> Result<Transformed, ProfileError> {
    if w.len() < 4 || !(w.h > 0.0) || w.x0 < 0.0 {
        return Err(ProfileError::InvalidGrid(format!(
            "need >= 4 samples on x >= 0 (got {} from {})",
            w.len(),
            w.x0
        )));
    }
    if n_out < 2 {
        return Err(ProfileError::InvalidGrid(
            "need at least 2 output points".into(),
        ));
    }
    let interp = Interpolant::new(w.clone());
    let indicator = interp.undersampling_indicator();
    if indicator > UNDERSAMPLING_LIMIT {
        return Err(ProfileError::Undersampled { indicator });
    }
    let xs = w.grid();
    let phis = map.phi_sorted(&xs)?;
    let y0 = phis[0];
    let y1 = *phis.last().unwrap_or(&y0);
    let hy = (y1 - y0) / (n_out - 1) as f64;
    let mut values = Vec::with_capacity(n_out);
    let mut i = 0usize;
    for j in 0..n_out {
        let y = if j + 1 == n_out {
            y1
        } else {
            y0 + j as f64 * hy
        };
        while i + 2 < phis.len() && phis[i + 1] < y {
            i += 1;
        }
        let (pa, pb) = (phis[i], phis[i + 1]);
        let (xa, xb) = (xs[i], xs[i + 1]);
        // Linear guess in the cell, then Newton on φ relative to the cell's
        // left end.
        let mut x = if pb > pa {
            xa + (y - pa) / (pb - pa) * (xb - xa)
        } else {
            xa
        };
        for _ in 0..4 {
            let p =
                if map.in_switch(x) || map.in_switch(xa) || (x - map.x_e) * (xa - map.x_e) <= 0.0 {
                    map.phi(x)?
                } else {
                    let qa = (pa.abs()).powf(1.5) / 1.5;
                    let step = kronrod15(|u| map.root_f(u), xa, x);
                    let q = if x > map.x_e { qa + step } else { qa - step };
                    map.phi_from_q(x, q)
                };
            let dx = (p - y) / map.phi_prime_with(x, p);
            x = (x - dx).clamp(xa.min(xb), xa.max(xb));
            if dx.abs() <= 1e-15 * (1.0 + x) {
                break;
            }
        }
        let amp = map.phi_prime(x)?.sqrt();
        values.push(amp * interp.eval(x));
    }
    Ok(Transformed {
        w: UniformSamples::new(y0, hy, values),
        indicator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn phi_vanishes_at_turning_point() {
        let p = WeightProfile::exp2();
        let m = langer_cherry(&p, PI * PI, 2.0 * PI * PI).unwrap();
        assert_eq!(m.phi(m.x_e).unwrap(), 0.0);
    }

    #[test]
    fn formulas_agree_at_switch_edges() {
        let p = WeightProfile::exp();
        let m = langer_cherry(&p, 2.0, 5.0).unwrap();
        for x in [m.x_e + m.h_switch, m.x_e - m.h_switch] {
            let near = (x - m.x_e) * (1.5 * m.pi_fn(x)).powf(2.0 / 3.0);
            let anchor = if x > m.x_e { x + 0.3 } else { x - 0.3 };
            let q = m.q(anchor).unwrap();
            let back = integrate(|u| m.root_f(u), x, anchor, 0.0, 1e-14)
                .unwrap()
                .abs();
            let far = m.phi_from_q(x, q - back);
            assert!((near - far).abs() < 1e-12, "{near} {far}");
        }
    }

    #[test]
    fn sorted_evaluation_matches_pointwise() {
        let p = WeightProfile::exp2();
        let m = langer_cherry(&p, PI * PI, 1.5 * PI * PI).unwrap();
        let xs: Vec<f64> = (0..300).map(|i| i as f64 * 0.01).collect();
        let a = m.phi_sorted(&xs).unwrap();
        for (x, v) in xs.iter().zip(&a) {
            assert!((m.phi(*x).unwrap() - v).abs() < 1e-11 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn threshold_energy_puts_turning_point_at_origin() {
        let p = WeightProfile::rational();
        let m = langer_cherry(&p, 1.0, 1.0).unwrap();
        assert_eq!(m.x_e, 0.0);
        assert!(m.phi(0.5).unwrap() > 0.0);
    }
}
