//! Dirichlet spectrum of the sector S_t = {0 < r < 1, 0 < θ < arctan t}.
//!
//! Angular modes sin(ℓπθ/arctan t) leave the radial equation of Bessel order
//! ν_ℓ = ℓπ/arctan t. In s = ln r it reads u″ = (ν² − λe^{2s})u, regular at
//! s = −∞, and λ is an eigenvalue when u(0) = 0. The Prüfer angle of
//! (u, u′/a) counts the zeros and is monotone in λ, so the k-th eigenvalue is
//! found by bracketing the angle at s = 0 around kπ.

use std::f64::consts::PI;

use serde::Serialize;

use super::DomainError;
use crate::numerics::ode::Dopri5;
use crate::numerics::roots::brent;
use crate::separation::{LabeledEntry, LabeledSpectrum};

/// Largest Bessel order accepted.
pub const MAX_ORDER: f64 = 1e5;

/// Prüfer angle at s = 0 for order ν and eigenvalue parameter λ.
fn prufer_angle(nu: f64, lambda: f64) -> Result<f64, DomainError> {
    let a = lambda.sqrt();
    let scale = nu.max(1.0);
    // start well inside the region λe^{2s} ≪ ν², where the regular solution
    // has u′/u = x J′_ν(x)/J_ν(x) ≈ ν − x²/(2ν + 2), x² = λe^{2s}
    let s0 = (scale / a).ln().min(0.0) - 30.0 / scale - 2.0;
    let x2 = lambda * (2.0 * s0).exp();
    let theta0 = a.atan2(nu - x2 / (2.0 * nu + 2.0));
    let rhs = |s: f64, th: &[f64; 1]| {
        let q = lambda * (2.0 * s).exp() - nu * nu;
        let (sn, cs) = th[0].sin_cos();
        [a * cs * cs + q / a * sn * sn]
    };
    Dopri5::new(1e-12, 1e-12)
        .integrate(rhs, s0, 0.0, [theta0], |_, _| {})
        .map(|v| v[0])
        .map_err(|e| DomainError::Shooting(format!("nu = {nu}, lambda = {lambda}: {e}")))
}

/// The first `k_max` positive zeros of J_ν, by radial shooting; returns
/// j²_{ν,k}, the eigenvalues λ with J_ν(√λ) = 0.
pub fn bessel_dirichlet_zeros(nu: f64, k_max: usize) -> Result<Vec<f64>, DomainError> {
    bessel_zeros_below(nu, k_max, f64::INFINITY)
}

fn bessel_zeros_below(nu: f64, k_max: usize, cap: f64) -> Result<Vec<f64>, DomainError> {
    if !(nu >= 0.0 && nu <= MAX_ORDER) {
        return Err(DomainError::Argument(format!(
            "Bessel order {nu} outside [0, {MAX_ORDER}]"
        )));
    }
    let mut out = Vec::with_capacity(k_max);
    let mut lo = (nu * nu).max(1e-6);
    for k in 1..=k_max {
        if lo >= cap {
            break;
        }
        let target = k as f64 * PI;
        let f = |lambda: f64| prufer_angle(nu, lambda).map(|th| th - target);
        // successive zeros of J_ν are at least π apart
        let mut step = (nu + PI).powi(2) - nu * nu;
        let mut hi = (lo.sqrt() + PI + 2.0 * nu.max(1.0).cbrt()).powi(2);
        while f(hi)? <= 0.0 {
            lo = hi;
            if lo >= cap {
                return Ok(out);
            }
            step *= 1.5;
            hi = lo + step;
        }
        let mut err = None;
        let root = brent(
            |l| {
                f(l).unwrap_or_else(|e| {
                    err = Some(e);
                    0.0
                })
            },
            lo,
            hi,
            1e-14 * hi,
        )
        .map_err(|e| DomainError::Shooting(e.to_string()))?;
        if let Some(e) = err {
            return Err(e);
        }
        if root > cap {
            break;
        }
        out.push(root);
        lo = root * (1.0 + 1e-12);
    }
    Ok(out)
}

/// One sector eigenvalue with its labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorEntry {
    pub ell: usize,
    pub k: usize,
    pub nu: f64,
    pub lambda: f64,
    /// t²·λ.
    pub renormalized: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorSpectrum {
    pub t: f64,
    pub entries: Vec<SectorEntry>,
    pub warnings: Vec<String>,
}

impl SectorSpectrum {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    pub fn renormalized(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.renormalized).collect()
    }

    pub fn to_labeled(&self) -> LabeledSpectrum {
        LabeledSpectrum::from_entries(
            self.entries
                .iter()
                .map(|e| LabeledEntry {
                    lambda: e.lambda,
                    ell: e.ell,
                    k: e.k,
                })
                .collect(),
            self.warnings.clone(),
        )
    }
}

/// The first `n` Dirichlet eigenvalues of S_t.
pub fn sector_spectrum(t: f64, n: usize) -> Result<SectorSpectrum, DomainError> {
    sector_spectrum_below(t, n, f64::INFINITY)
}

/// As [`sector_spectrum`], keeping only eigenvalues ≤ `lambda_cap`.
pub fn sector_spectrum_below(
    t: f64,
    n: usize,
    lambda_cap: f64,
) -> Result<SectorSpectrum, DomainError> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(DomainError::Argument(format!(
            "t must lie in (0, 1], got {t}"
        )));
    }
    let alpha = t.atan();
    let mut warnings = Vec::new();
    let mut entries: Vec<SectorEntry> = Vec::new();
    let mut cap = lambda_cap;
    for ell in 1.. {
        let nu = ell as f64 * PI / alpha;
        if nu * nu >= cap {
            break;
        }
        if nu > MAX_ORDER {
            warnings.push(format!(
                "order nu = {nu:.6e} for ell = {ell} exceeds {MAX_ORDER}; spectrum truncated"
            ));
            break;
        }
        let zeros = bessel_zeros_below(nu, n, cap)?;
        entries.extend(zeros.iter().enumerate().map(|(i, &lambda)| SectorEntry {
            ell,
            k: i + 1,
            nu,
            lambda,
            renormalized: t * t * lambda,
        }));
        entries.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        entries.truncate(n);
        if entries.len() == n {
            cap = cap.min(entries[n - 1].lambda);
        }
    }
    if entries.len() < n {
        warnings.push(format!(
            "only {} of {n} eigenvalues lie below the cap {lambda_cap}",
            entries.len()
        ));
    }
    Ok(SectorSpectrum {
        t,
        entries,
        warnings,
    })
}

/// How the ℓ-th radial problem of S_t maps to the half-line problem
/// −τ²w″ + μw = λσw with σ = e^{−2s} (the stretch of ρ(x) = x, c = 1):
/// τ = arctan t, μ = (ℓπ)², λ_sector = λ_half/τ², hence
/// t²λ_sector = (t/τ)²·λ_half.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorCorrespondence {
    pub t: f64,
    pub ell: usize,
    pub nu: f64,
    pub t_half: f64,
    pub mu: f64,
    /// (t/arctan t)², multiplying half-line eigenvalues into renormalized
    /// sector eigenvalues.
    pub calibration: f64,
}

pub fn sector_correspondence(t: f64, ell: usize) -> SectorCorrespondence {
    let alpha = t.atan();
    SectorCorrespondence {
        t,
        ell,
        nu: ell as f64 * PI / alpha,
        t_half: alpha,
        mu: (ell as f64 * PI).powi(2),
        calibration: (t / alpha).powi(2),
    }
}
