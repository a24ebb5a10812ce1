//! Zeros of A₋ and A₋′ and the eigenvalues of the model operator −∂² + y on
//! a half-line [z, ∞).

use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

use serde::Serialize;

use super::eval::decaying;
use super::AiryError;
use crate::numerics::roots::bisect;
use crate::Boundary;

/// Largest table size served.
pub const MAX_ZEROS: usize = 10_000;

/// Ordered zero tables: `dirichlet_zeros` are zeros of A₋, `neumann_zeros`
/// zeros of A₋′.  Both are negative and decreasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AiryZeros {
    pub dirichlet_zeros: Vec<f64>,
    pub neumann_zeros: Vec<f64>,
}

impl AiryZeros {
    pub fn compute(n: usize) -> Result<Self, AiryError> {
        Ok(Self {
            dirichlet_zeros: airy_zeros(n, Boundary::Dirichlet)?,
            neumann_zeros: airy_zeros(n, Boundary::Neumann)?,
        })
    }

    /// True when a′_k ∈ (a_k, a_{k−1}) for every k (with a₀ = 0).
    pub fn interlace(&self) -> bool {
        let n = self.dirichlet_zeros.len().min(self.neumann_zeros.len());
        (0..n).all(|k| {
            let upper = if k == 0 {
                0.0
            } else {
                self.dirichlet_zeros[k - 1]
            };
            let z = self.neumann_zeros[k];
            z > self.dirichlet_zeros[k] && z < upper
        })
    }
}

fn cache(kind: Boundary) -> &'static RwLock<Vec<f64>> {
    static DIRICHLET: OnceLock<RwLock<Vec<f64>>> = OnceLock::new();
    static NEUMANN: OnceLock<RwLock<Vec<f64>>> = OnceLock::new();
    match kind {
        Boundary::Dirichlet => DIRICHLET.get_or_init(|| RwLock::new(Vec::new())),
        Boundary::Neumann => NEUMANN.get_or_init(|| RwLock::new(Vec::new())),
    }
}

/// Asymptotic seed for the k-th zero (1-based).
pub fn zero_seed(k: usize, kind: Boundary) -> f64 {
    let kf = k as f64;
    match kind {
        Boundary::Dirichlet => {
            let x = 3.0 * PI * (4.0 * kf - 1.0) / 8.0;
            let x2 = x.powi(-2);
            -x.powf(2.0 / 3.0) * (1.0 + 5.0 / 48.0 * x2 - 5.0 / 36.0 * x2 * x2)
        }
        Boundary::Neumann => {
            let x = 3.0 * PI * (4.0 * kf - 3.0) / 8.0;
            let x2 = x.powi(-2);
            -x.powf(2.0 / 3.0) * (1.0 - 7.0 / 48.0 * x2 + 35.0 / 288.0 * x2 * x2)
        }
    }
}

fn target(kind: Boundary) -> impl Fn(f64) -> f64 {
    move |u| {
        let (a, da) = decaying(u);
        match kind {
            Boundary::Dirichlet => a,
            Boundary::Neumann => da,
        }
    }
}

fn refine_zero(k: usize, kind: Boundary) -> Result<f64, AiryError> {
    let seed = zero_seed(k, kind);
    let f = target(kind);
    let spacing = PI / seed.abs().max(1.0).sqrt();
    let mut half = 0.3 * spacing;
    for _ in 0..6 {
        let (lo, hi) = (seed - half, (seed + half).min(0.0));
        if f(lo).signum() != f(hi).signum() {
            return bisect(&f, lo, hi, 1e-13).map_err(|_| AiryError::ZeroNotBracketed { index: k });
        }
        half *= 1.25;
    }
    Err(AiryError::ZeroNotBracketed { index: k })
}

/// First `n` zeros of A₋ (Dirichlet) or A₋′ (Neumann), most positive first.
pub fn airy_zeros(n: usize, kind: Boundary) -> Result<Vec<f64>, AiryError> {
    if n == 0 {
        return Err(AiryError::EmptyRequest);
    }
    if n > MAX_ZEROS {
        return Err(AiryError::TooManyZeros {
            requested: n,
            limit: MAX_ZEROS,
        });
    }
    let lock = cache(kind);
    {
        let read = lock.read().unwrap_or_else(|e| e.into_inner());
        if read.len() >= n {
            return Ok(read[..n].to_vec());
        }
    }
    let have = lock.read().unwrap_or_else(|e| e.into_inner()).len();
    let mut fresh = Vec::with_capacity(n - have);
    for k in have + 1..=n {
        fresh.push(refine_zero(k, kind)?);
    }
    let mut write = lock.write().unwrap_or_else(|e| e.into_inner());
    if write.len() == have {
        write.extend(fresh);
    }
    Ok(write[..n].to_vec())
}

/// Eigenvalues ν_k = z − a_k (or z − a′_k) of −∂² + y on [z, ∞).
pub fn model_operator_eigs(z: f64, kind: Boundary, n: usize) -> Result<Vec<f64>, AiryError> {
    Ok(airy_zeros(n, kind)?.into_iter().map(|a| z - a).collect())
}
