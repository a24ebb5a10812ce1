//! Decay, mass, non-concentration, Langer–Cherry residual and Airy-law
//! measurements on computed eigenpairs.

use rayon::prelude::*;
use serde::Serialize;

use super::{solve, Eigenpair, HalfLineError, HalfLineProblem};
use crate::airy::airy_zeros;
use crate::numerics::fit::{fit_line, power_law_exponent};
use crate::numerics::interp::Interpolant;
use crate::numerics::quad::{integrate, simpson};
use crate::profile::{langer_cherry, level_point, transform, WeightProfile};

/// Result of [`decay_rate`].
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    /// Least-squares slope of ln w² over the window.
    pub slope: f64,
    /// −0.9·√(2s)/t: the slope must not exceed this.
    pub required: f64,
    pub window: (f64, f64),
    /// True when the window was cut back to fit inside the grid.
    pub shrunk: bool,
    pub satisfied: bool,
}

/// Slope of ln w² on [x_E^s, x_E^s + 5t/√(2s)] at energy `energy` ≥ λ.
pub fn decay_rate(
    pair: &Eigenpair,
    p: &HalfLineProblem,
    energy: f64,
    s: f64,
) -> Result<DecayReport, HalfLineError> {
    if pair.lambda > energy * (1.0 + 1e-12) {
        return Err(HalfLineError::OutsideWindow {
            lambda: pair.lambda,
            energy,
        });
    }
    let start = level_point(&p.profile, p.mu, energy, s)?;
    let length = 5.0 * p.t / (2.0 * s).sqrt();
    let end_limit = pair.x_max() - 4.0 * pair.w.h;
    if start >= end_limit {
        return Err(HalfLineError::InvalidProblem(format!(
            "decay window starts at {start}, beyond the grid"
        )));
    }
    let mut end = start + length;
    let shrunk = end > end_limit;
    if shrunk {
        end = end_limit;
    }
    let w = &pair.w;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let i0 = (start / w.h).ceil() as usize;
    let i1 = ((end / w.h).floor() as usize).min(w.len() - 1);
    for i in i0..=i1 {
        let v = w.values[i];
        if v != 0.0 {
            xs.push(w.x(i));
            ys.push((v * v).ln());
        }
    }
    let fit = fit_line(&xs, &ys).ok_or_else(|| {
        HalfLineError::InvalidProblem("decay window holds fewer than two samples".into())
    })?;
    let required = -0.9 * (2.0 * s).sqrt() / p.t;
    Ok(DecayReport {
        slope: fit.slope,
        required,
        window: (start, end),
        shrunk,
        satisfied: fit.slope <= required,
    })
}

/// ∫_{a}^{X} g·w² for a weight g, Simpson on nodes plus a Gauss–Kronrod
/// piece for the partial first cell.
fn tail_integral(pair: &Eigenpair, a: f64, g: &dyn Fn(f64) -> f64) -> f64 {
    let w = &pair.w;
    let x_end = w.x_end();
    if a >= x_end {
        return 0.0;
    }
    let a = a.max(0.0);
    let i0 = ((a / w.h).ceil() as usize).min(w.len() - 1);
    let vals: Vec<f64> = (i0..w.len())
        .map(|i| g(w.x(i)) * w.values[i] * w.values[i])
        .collect();
    let nodes = if vals.len() >= 2 {
        simpson(&vals, w.h)
    } else {
        0.0
    };
    let xa = w.x(i0);
    let head = if xa > a {
        let interp = Interpolant::new(w.clone());
        integrate(|x| g(x) * interp.eval(x).powi(2), a, xa, 0.0, 1e-12).unwrap_or(0.0)
    } else {
        0.0
    };
    nodes + head
}

/// ∫_{x0}^∞ w² / ∫_0^∞ w².
pub fn mass_beyond(pair: &Eigenpair, x0: f64) -> f64 {
    let total = tail_integral(pair, 0.0, &|_| 1.0);
    if total == 0.0 {
        return 0.0;
    }
    tail_integral(pair, x0, &|_| 1.0) / total
}

/// ∫_{3 x_s}^∞ w²·(1 + x^ν) / ∫_{x_s}^∞ w², the weighted tail ratio.
pub fn mass_beyond_weighted(pair: &Eigenpair, x_s: f64, nu: f64) -> f64 {
    let denom = tail_integral(pair, x_s, &|_| 1.0);
    if denom == 0.0 {
        return 0.0;
    }
    tail_integral(pair, 3.0 * x_s, &|x| 1.0 + x.powf(nu)) / denom
}

/// κ̂ = ∫(E·σ − μ)·w² / ‖w‖²_σ.
pub fn nonconcentration_kappa(
    pair: &Eigenpair,
    profile: &WeightProfile,
    mu: f64,
    energy: f64,
) -> f64 {
    let w = &pair.w;
    let mut num = Vec::with_capacity(w.len());
    let mut den = Vec::with_capacity(w.len());
    for (i, v) in w.values.iter().enumerate() {
        let s = profile.sigma(w.x(i));
        num.push((energy * s - mu) * v * v);
        den.push(s * v * v);
    }
    simpson(&num, w.h) / simpson(&den, w.h)
}

/// Result of [`lc_residual`].
#[derive(Debug, Clone, Serialize)]
pub struct LcResidual {
    /// ∫|t²W″ − yW|² dy / ∫w² dx.
    pub ratio: f64,
    pub y_range: (f64, f64),
    pub points: usize,
    pub indicator: f64,
}

/// Langer–Cherry residual of an eigenfunction transformed at energy `energy`.
pub fn lc_residual(
    pair: &Eigenpair,
    p: &HalfLineProblem,
    energy: f64,
) -> Result<LcResidual, HalfLineError> {
    let w = &pair.w;
    let mass = simpson(&w.values.iter().map(|v| v * v).collect::<Vec<_>>(), w.h);
    if !(mass > 0.0) {
        return Err(HalfLineError::EmptyEigenfunction);
    }
    let map = langer_cherry(&p.profile, p.mu, energy)?;
    let y0 = map.phi(0.0)?;
    let y1 = map.phi(w.x_end())?;
    // Five-point stencil with ~0.05 rad per step at the fastest relevant
    // oscillation √|y|/t.
    let hy = 0.05 * p.t / y0.abs().max(1.0).sqrt();
    let n_out = (((y1 - y0) / hy).ceil() as usize).max(16) + 1;
    let out = transform(&map, w, n_out)?;
    let big_w = &out.w;
    let t2 = p.t * p.t;
    let h = big_w.h;
    let n = big_w.len();
    let g: Vec<f64> = (0..n)
        .map(|i| {
            if i < 2 || i + 2 >= n {
                return 0.0;
            }
            let v = &big_w.values;
            let d2 = (-v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] + 16.0 * v[i + 1] - v[i + 2])
                / (12.0 * h * h);
            let r = t2 * d2 - big_w.x(i) * v[i];
            r * r
        })
        .collect();
    let ratio = simpson(&g, h) / mass;
    Ok(LcResidual {
        ratio,
        y_range: (y0, y1),
        points: n,
        indicator: out.indicator,
    })
}

/// Result of [`airy_eigenvalue_check`].
#[derive(Debug, Clone, Serialize)]
pub struct AiryCheck {
    pub k: usize,
    pub lambda: f64,
    pub phi_at_zero: f64,
    /// t^{2/3}·a_k (or a′_k for Neumann).
    pub airy_pred: f64,
    pub defect: f64,
    /// Index of the zero nearest to φ_λ(0)/t^{2/3}.
    pub nearest: usize,
}

/// Compares φ_{λ_k}(0) with t^{2/3} times the k-th Airy zero.
pub fn airy_eigenvalue_check(p: &HalfLineProblem, k: usize) -> Result<AiryCheck, HalfLineError> {
    let spec = solve(p, k)?;
    let pair = spec
        .pairs
        .get(k - 1)
        .ok_or(HalfLineError::NothingResolved {
            requested: k,
            reason: format!("only {} resolved", spec.resolved_count),
        })?;
    let lambda = pair.lambda;
    let map = langer_cherry(&p.profile, p.mu, lambda)?;
    let phi0 = map.phi(0.0)?;
    let scale = p.t.powf(2.0 / 3.0);
    let zeros = airy_zeros((k + 8).max(16), p.bc)?;
    let (nearest, distance) = zeros
        .iter()
        .enumerate()
        .map(|(i, z)| (i + 1, (phi0 - scale * z).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((1, f64::INFINITY));
    if distance > scale {
        return Err(HalfLineError::NoNearbyZero {
            phi_at_zero: phi0,
            nearest,
            distance,
        });
    }
    let airy_pred = scale * zeros[k - 1];
    Ok(AiryCheck {
        k,
        lambda,
        phi_at_zero: phi0,
        airy_pred,
        defect: (phi0 - airy_pred).abs(),
        nearest,
    })
}

/// One t of a super-separation run.
#[derive(Debug, Clone, Serialize)]
pub struct GapRecord {
    pub t: f64,
    pub lambda_k: f64,
    pub lambda_next: f64,
    pub gap: f64,
    pub gap_over_t: f64,
    /// Leading-order Airy prediction t^{2/3}(a_k − a_{k+1})·c^{2/3}/σ(0),
    /// c = μ|σ′(0)|/σ(0).
    pub airy_prediction: f64,
}

/// Result of [`superseparation`].
#[derive(Debug, Clone, Serialize)]
pub struct SuperseparationReport {
    pub records: Vec<GapRecord>,
    /// Log-log slope of gap against t.
    pub exponent: Option<f64>,
    pub warnings: Vec<String>,
}

/// Gaps λ_{k+1} − λ_k along a decreasing t-grid.
pub fn superseparation(
    p: &HalfLineProblem,
    t_grid: &[f64],
    k: usize,
) -> Result<SuperseparationReport, HalfLineError> {
    if t_grid.is_empty()
        || t_grid.iter().any(|t| !(*t > 0.0))
        || t_grid.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(HalfLineError::BadGrid);
    }
    let zeros = airy_zeros(k + 1, p.bc)?;
    let sigma0 = p.profile.sigma0();
    let c = p.mu * p.profile.dsigma(0.0).abs() / sigma0;
    let factor = c.powf(2.0 / 3.0) / sigma0 * (zeros[k - 1] - zeros[k]);
    let solved: Vec<(f64, Result<_, HalfLineError>)> = t_grid
        .par_iter()
        .map(|&t| (t, p.at_t(t).and_then(|q| solve(&q, k + 1))))
        .collect();
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (t, r) in solved {
        match r {
            Ok(s) if s.resolved_count >= k + 1 => {
                let (a, b) = (s.eigenvalues[k - 1], s.eigenvalues[k]);
                records.push(GapRecord {
                    t,
                    lambda_k: a,
                    lambda_next: b,
                    gap: b - a,
                    gap_over_t: (b - a) / t,
                    airy_prediction: factor * t.powf(2.0 / 3.0),
                });
            }
            Ok(s) => {
                warnings.push(format!(
                    "t = {t}: only {} eigenvalues resolved; grid truncated",
                    s.resolved_count
                ));
                break;
            }
            Err(e) => {
                warnings.push(format!("t = {t}: {e}; grid truncated"));
                break;
            }
        }
    }
    let ts: Vec<f64> = records.iter().map(|r| r.t).collect();
    let gaps: Vec<f64> = records.iter().map(|r| r.gap).collect();
    let exponent = if records.len() >= 2 {
        power_law_exponent(&ts, &gaps)
    } else {
        None
    };
    Ok(SuperseparationReport {
        records,
        exponent,
        warnings,
    })
}
