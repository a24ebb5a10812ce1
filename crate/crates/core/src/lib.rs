//! Numerical laboratory for spectra of degenerating quadratic-form families.
//!
//! The crate is organised bottom-up:
//!
//! * [`airy`]: the Airy solution pair, its zeros, the inhomogeneous kernel and
//!   the model operator on a half-line.
//! * [`profile`]: decreasing weights σ, turning points and the Langer–Cherry
//!   change of variables.
//! * [`halfline`]: eigenvalues and eigenfunctions of the weighted half-line
//!   problem, plus decay, mass and Airy-law diagnostics.
//! * [`forms`]: finite-dimensional pencils, ε-closeness, quasimode
//!   inequalities and analytic branch tracking.
//! * [`separation`]: product spectra from a transverse spectrum, thresholds,
//!   multiplicity scans and the cylinder spectrum.
//! * [`domains`]: stretched profiles, the thin right triangle by finite
//!   elements and the circular sector by radial shooting.

pub mod airy;
pub mod domains;
pub mod forms;
pub mod halfline;
pub mod numerics;
pub mod profile;
pub mod separation;

/// Boundary condition at the left end of a half-line problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Dirichlet,
    Neumann,
}

impl std::str::FromStr for Boundary {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" | "d" => Ok(Self::Dirichlet),
            "neumann" | "n" => Ok(Self::Neumann),
            other => Err(format!("unknown boundary condition `{other}`")),
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Dirichlet => "dirichlet",
            Self::Neumann => "neumann",
        })
    }
}
