//! The weighted half-line eigenproblem
//!
//! ```text
//! −t²·w″ + μ·w = λ·σ·w  on [0, ∞),   w(0) = 0 or w′(0) = 0,
//! ```
//!
//! solved by a finite-difference pencil for global brackets and Numerov
//! shooting from the far end for accuracy, plus the diagnostics built on its
//! eigenfunctions.

mod diagnostics;
mod solver;

use serde::Serialize;
use thiserror::Error;

use crate::airy::AiryError;
use crate::numerics::interp::UniformSamples;
use crate::profile::{level_point, ProfileError, WeightProfile};
use crate::Boundary;

pub use diagnostics::{
    airy_eigenvalue_check, decay_rate, lc_residual, mass_beyond, mass_beyond_weighted,
    nonconcentration_kappa, superseparation, AiryCheck, DecayReport, GapRecord, LcResidual,
    SuperseparationReport,
};
pub use solver::{fd_eigenvalues, solve, solve_below, sweep, SweepRecord};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HalfLineError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Airy(#[from] AiryError),
    #[error("no eigenvalue could be resolved (requested {requested}): {reason}")]
    NothingResolved { requested: usize, reason: String },
    #[error("could not bracket eigenvalue {k} in [{lo}, {hi}]")]
    NoBracket { k: usize, lo: f64, hi: f64 },
    #[error("empty eigenfunction")]
    EmptyEigenfunction,
    #[error("eigenvalue {lambda} is not within the window of energy {energy}")]
    OutsideWindow { lambda: f64, energy: f64 },
    #[error("no Airy zero near phi(0) = {phi_at_zero}: nearest is index {nearest} at distance {distance}")]
    NoNearbyZero {
        phi_at_zero: f64,
        nearest: usize,
        distance: f64,
    },
    #[error("t-grid must be strictly decreasing positive values")]
    BadGrid,
}

/// (t, μ, σ, boundary condition) with the discretization used to solve it.
#[derive(Debug, Clone)]
pub struct HalfLineProblem {
    pub t: f64,
    pub mu: f64,
    pub profile: WeightProfile,
    pub bc: Boundary,
    /// Truncation radius; a decaying condition is imposed there.
    pub x_max: f64,
    /// Finite-difference step for the bracketing stage.
    pub h: f64,
}

impl HalfLineProblem {
    /// Default grid: h = min(t/25, 0.01) and X_max the larger of the profile
    /// truncation radius and 3·x_E^{μ/2} + 10t at E = 2μ/σ(0).
    pub fn new(
        t: f64,
        mu: f64,
        profile: WeightProfile,
        bc: Boundary,
    ) -> Result<Self, HalfLineError> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(HalfLineError::InvalidProblem(format!(
                "t must be positive, got {t}"
            )));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(HalfLineError::InvalidProblem(format!(
                "mu must be positive, got {mu}"
            )));
        }
        let h = (t / 25.0).min(0.01);
        let energy = 2.0 * profile.threshold(mu);
        let reach = 3.0 * level_point(&profile, mu, energy, 0.5 * mu)? + 10.0 * t;
        let x_max = profile.truncation().radius.max(reach);
        Self::with_grid(t, mu, profile, bc, x_max, h)
    }

    pub fn with_grid(
        t: f64,
        mu: f64,
        profile: WeightProfile,
        bc: Boundary,
        x_max: f64,
        h: f64,
    ) -> Result<Self, HalfLineError> {
        if !(t > 0.0 && mu > 0.0 && t.is_finite() && mu.is_finite()) {
            return Err(HalfLineError::InvalidProblem(format!(
                "need t > 0 and mu > 0 (t = {t}, mu = {mu})"
            )));
        }
        if !(h > 0.0 && x_max > 0.0 && x_max.is_finite()) {
            return Err(HalfLineError::InvalidProblem(format!(
                "bad grid: h = {h}, x_max = {x_max}"
            )));
        }
        if t / h < 20.0 {
            return Err(HalfLineError::InvalidProblem(format!(
                "t/h = {} is below 20",
                t / h
            )));
        }
        if x_max / h < 16.0 {
            return Err(HalfLineError::InvalidProblem(format!(
                "x_max/h = {} is too small",
                x_max / h
            )));
        }
        Ok(Self {
            t,
            mu,
            profile,
            bc,
            x_max,
            h,
        })
    }

    /// μ/σ(0).
    pub fn threshold(&self) -> f64 {
        self.profile.threshold(self.mu)
    }

    /// Same problem at another t, with the default grid for that t.
    pub fn at_t(&self, t: f64) -> Result<Self, HalfLineError> {
        Self::new(t, self.mu, self.profile.clone(), self.bc)
    }
}

/// One eigenpair with its sampled, σ-normalized eigenfunction.
#[derive(Debug, Clone, Serialize)]
pub struct Eigenpair {
    /// 1-based index.
    pub k: usize,
    /// Extrapolated eigenvalue.
    pub lambda: f64,
    /// Eigenvalue of the discrete problem on the eigenfunction's grid.
    pub lambda_grid: f64,
    /// Estimated error of `lambda`.
    pub error_estimate: f64,
    /// sup|t²w″ − f_λ·w| / sup|w| on interior nodes.
    pub residual: f64,
    #[serde(skip)]
    pub w: UniformSamples,
}

impl Eigenpair {
    pub fn x_max(&self) -> f64 {
        self.w.x_end()
    }
}

/// Ordered eigenvalues of one half-line problem.
#[derive(Debug, Clone, Serialize)]
pub struct HalfLineSpectrum {
    pub t: f64,
    pub mu: f64,
    pub bc: Boundary,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub pairs: Vec<Eigenpair>,
    pub requested: usize,
    pub resolved_count: usize,
    pub warnings: Vec<String>,
}

impl HalfLineSpectrum {
    pub fn is_partial(&self) -> bool {
        self.resolved_count < self.requested
    }
}
