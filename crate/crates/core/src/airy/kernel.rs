//! The inhomogeneous Airy kernel K, its rescaling K̃_t, and quadrature
//! diagnostics built on the pair A±.

use serde::Serialize;

use super::eval::{airy_eval, decaying, AiryPair};
use super::AiryError;
use crate::numerics::interp::UniformSamples;
use crate::numerics::quad::{integrate, simpson};

/// K̃_t(y, z) = t^{−4/3}·K(t^{−2/3}y, t^{−2/3}z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AiryKernel {
    pub t: f64,
}

fn wronskian() -> f64 {
    airy_eval(0.0).map(|p| p.wronskian()).unwrap_or(-1.0)
}

/// Branch value of K from precomputed pairs at u and v.
fn branch(pu: &AiryPair, pv: &AiryPair, w: f64) -> f64 {
    let (u, v) = (pu.u, pv.u);
    let raw = if (v >= u && u >= 0.0) || (v >= 0.0 && 0.0 >= u) {
        pu.a_plus * pv.a_minus
    } else if u >= v && v >= 0.0 {
        pu.a_minus * pv.a_plus
    } else if u <= v && v <= 0.0 {
        pu.a_plus * pv.a_minus - pu.a_minus * pv.a_plus
    } else {
        0.0
    };
    raw / w
}

/// The unscaled kernel K(u, v).
pub fn kernel(u: f64, v: f64) -> Result<f64, AiryError> {
    let pu = airy_eval(u)?;
    let pv = airy_eval(v)?;
    Ok(branch(&pu, &pv, wronskian()))
}

impl AiryKernel {
    pub fn new(t: f64) -> Result<Self, AiryError> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(AiryError::InvalidScale { t });
        }
        Ok(Self { t })
    }

    pub fn eval(&self, y: f64, z: f64) -> Result<f64, AiryError> {
        let tau = self.t.powf(2.0 / 3.0);
        Ok(self.t.powf(-4.0 / 3.0) * kernel(y / tau, z / tau)?)
    }
}

/// Smooth formula of W·K(u, ·) on the nonzero pieces of the v-axis cut at 0
/// and u.
fn piece_formula(pu: &AiryPair, pv: &AiryPair, piece: Piece) -> f64 {
    match piece {
        Piece::LowerOrigin => pu.a_plus * pv.a_minus - pu.a_minus * pv.a_plus,
        Piece::BelowDiagonal => pu.a_minus * pv.a_plus,
        Piece::AboveBoth => pu.a_plus * pv.a_minus,
    }
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    LowerOrigin,
    BelowDiagonal,
    AboveBoth,
}

/// Integrates v ↦ K(u_i, v)·g(v) (or its square) over a grid containing 0.
/// `origin` is the grid index of v = 0.
fn row_integral(
    pairs: &[AiryPair],
    i: usize,
    origin: usize,
    h: f64,
    w: f64,
    weight: &dyn Fn(usize, f64) -> f64,
) -> f64 {
    let n = pairs.len();
    let pu = &pairs[i];
    let mut pieces: Vec<(usize, usize, Piece)> = Vec::with_capacity(2);
    if i >= origin {
        pieces.push((origin, i, Piece::BelowDiagonal));
        pieces.push((i, n - 1, Piece::AboveBoth));
    } else {
        pieces.push((i, origin, Piece::LowerOrigin));
        pieces.push((origin, n - 1, Piece::AboveBoth));
    }
    let mut total = 0.0;
    let mut buf = Vec::new();
    for (lo, hi, piece) in pieces {
        if hi <= lo {
            continue;
        }
        buf.clear();
        for j in lo..=hi {
            let k = piece_formula(pu, &pairs[j], piece) / w;
            buf.push(weight(j, k));
        }
        total += simpson(&buf, h);
    }
    total
}

fn origin_index(a: f64, h: f64, n: usize) -> Result<usize, AiryError> {
    let s = -a / h;
    let idx = s.round();
    if !(a < 0.0) || (s - idx).abs() > 1e-6 || idx as usize >= n - 1 {
        return Err(AiryError::GridMissesOrigin { a, h });
    }
    Ok(idx as usize)
}

/// Result of [`kernel_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSolution {
    pub w: UniformSamples,
    /// sup-norm of t²W″ − yW − g over interior nodes.
    pub residual: f64,
}

/// W(y) = ∫ K̃_t(y, z)·g(z) dz on the grid of `g`, by composite Simpson split
/// at z = 0 and z = y.  Fails when the finite-difference residual of
/// t²W″ − yW = g exceeds `residual_tol`.
pub fn kernel_solve(
    g: &UniformSamples,
    t: f64,
    residual_tol: f64,
) -> Result<KernelSolution, AiryError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(AiryError::InvalidScale { t });
    }
    let n = g.len();
    if n < 5 {
        return Err(AiryError::GridTooSmall { points: n });
    }
    let (a, h) = (g.x0, g.h);
    let b = g.x_end();
    if !(a < 0.0 && b > 0.0) {
        return Err(AiryError::GridMissesOrigin { a, h });
    }
    let origin = origin_index(a, h, n)?;
    let tau = t.powf(2.0 / 3.0);
    let pairs: Vec<AiryPair> = (0..n)
        .map(|j| airy_eval(g.x(j) / tau))
        .collect::<Result<_, _>>()?;
    let w = wronskian();
    let hu = h / tau;
    let scale = t.powf(-4.0 / 3.0) * tau;
    let values: Vec<f64> = (0..n)
        .map(|i| scale * row_integral(&pairs, i, origin, hu, w, &|j, k| k * g.values[j]))
        .collect();
    let mut residual = 0.0f64;
    for i in 1..n - 1 {
        let d2 = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h);
        let r = t * t * d2 - g.x(i) * values[i] - g.values[i];
        residual = residual.max(r.abs());
    }
    if !(residual <= residual_tol) {
        return Err(AiryError::ResidualTooLarge {
            residual,
            tolerance: residual_tol,
        });
    }
    Ok(KernelSolution {
        w: UniformSamples::new(a, h, values),
        residual,
    })
}

/// ∫∫ over [−α, α]² of K(u, v)² with `per_unit` grid points per unit length.
pub fn hilbert_schmidt(alpha: f64, per_unit: usize) -> Result<f64, AiryError> {
    if !(alpha > 0.0) {
        return Err(AiryError::InvalidInterval {
            lo: -alpha,
            hi: alpha,
        });
    }
    let half = (alpha * per_unit as f64).ceil() as usize;
    let h = alpha / half as f64;
    let n = 2 * half + 1;
    let pairs: Vec<AiryPair> = (0..n)
        .map(|j| airy_eval(-alpha + j as f64 * h))
        .collect::<Result<_, _>>()?;
    let w = wronskian();
    let rows: Vec<f64> = (0..n)
        .map(|i| row_integral(&pairs, i, half, h, w, &|_, k| k * k))
        .collect();
    Ok(simpson(&rows, h))
}

/// ∫∫ over [−α, α]² of K̃_t².  Equals t^{−4/3}·[`hilbert_schmidt`](α t^{−2/3}).
pub fn scaled_hilbert_schmidt(alpha: f64, t: f64, per_unit: usize) -> Result<f64, AiryError> {
    let tau = t.powf(2.0 / 3.0);
    Ok(t.powf(-4.0 / 3.0) * hilbert_schmidt(alpha / tau, per_unit)?)
}

/// ∫_α^β (c₊A₊ + c₋A₋)² du by adaptive quadrature.
pub fn airy_mass(c_plus: f64, c_minus: f64, alpha: f64, beta: f64) -> Result<f64, AiryError> {
    if !(alpha.is_finite() && beta.is_finite()) {
        return Err(AiryError::InvalidInterval {
            lo: alpha,
            hi: beta,
        });
    }
    if alpha == beta {
        return Ok(0.0);
    }
    if c_plus != 0.0 {
        airy_eval(alpha.max(beta))?;
    }
    let f = |u: f64| {
        if c_plus == 0.0 {
            let a = c_minus * decaying(u).0;
            a * a
        } else {
            match airy_eval(u) {
                Ok(p) => {
                    let a = c_plus * p.a_plus + c_minus * p.a_minus;
                    a * a
                }
                Err(_) => f64::INFINITY,
            }
        }
    };
    // Split into pieces of at most a few oscillations.
    let (lo, hi) = (alpha.min(beta), alpha.max(beta));
    let pieces = ((hi - lo) / 0.5).ceil().max(1.0) as usize;
    let dx = (hi - lo) / pieces as f64;
    let mut total = 0.0;
    for p in 0..pieces {
        let (x0, x1) = (lo + p as f64 * dx, lo + (p + 1) as f64 * dx);
        total +=
            integrate(f, x0, x1, 0.0, 1e-12).map_err(|e| AiryError::Quadrature(e.to_string()))?;
    }
    Ok(if beta < alpha { -total } else { total })
}

/// Ratio ∫_{s·a⁻}^0 A² / ∫_{s·b⁻}^{s·a⁻} A² for A = c₊A₊ + c₋A₋ and
/// b⁻ < a⁻ < 0.
pub fn transition_ratio(
    c_plus: f64,
    c_minus: f64,
    s: f64,
    a_minus: f64,
    b_minus: f64,
) -> Result<f64, AiryError> {
    if !(b_minus < a_minus && a_minus < 0.0 && s > 0.0) {
        return Err(AiryError::InvalidInterval {
            lo: b_minus,
            hi: a_minus,
        });
    }
    let near = airy_mass(c_plus, c_minus, s * a_minus, 0.0)?;
    let far = airy_mass(c_plus, c_minus, s * b_minus, s * a_minus)?;
    Ok(near / far)
}
