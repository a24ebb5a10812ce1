//! Concrete degenerating domains: stretched profiles σ = ρ²∘ψ⁻¹, the thin right
//! triangle T_t by linear finite elements, the sector S_t by radial shooting,
//! and set distances between their renormalized spectra.

mod lanczos;
mod sector;
mod stretch;
mod triangle;

use serde::Serialize;
use thiserror::Error;

pub use lanczos::{shift_invert_lanczos, BandCholesky, LanczosOptions, LanczosResult};
pub use sector::{
    bessel_dirichlet_zeros, sector_correspondence, sector_spectrum, sector_spectrum_below,
    SectorCorrespondence, SectorEntry, SectorSpectrum, MAX_ORDER,
};
pub use stretch::{psi_inverse, stretch_sigma, StretchSpec};
pub use triangle::{
    assemble, fem_eigenvalues, triangle_spectrum, triangle_spectrum_grid, FemEigenvalues,
    TriangleMesh, TriangleSpectrum, MIN_ACROSS,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("invalid stretch: {0}")]
    Stretch(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(
        "mesh has {across} elements across the height; need {required}, i.e. h <= {h_required}"
    )]
    Underresolved {
        across: usize,
        required: usize,
        h_required: f64,
    },
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),
    #[error("radial shooting failed: {0}")]
    Shooting(String),
    #[error("need {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
}

/// Distance between two truncated spectra.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralComparison {
    pub n: usize,
    /// Symmetric Hausdorff distance between the first `n` of each.
    pub hausdorff: f64,
    /// |s1_k − s2_k| for k < n.
    pub matched_diffs: Vec<f64>,
}

/// Compares the first `n` entries of two ascending sequences.
pub fn compare_spectra(
    s1: &[f64],
    s2: &[f64],
    n: usize,
) -> Result<SpectralComparison, DomainError> {
    for s in [s1, s2] {
        if s.len() < n {
            return Err(DomainError::TooShort {
                needed: n,
                got: s.len(),
            });
        }
        if s[..n].windows(2).any(|w| w[1] < w[0]) {
            return Err(DomainError::Argument("sequences must be sorted".into()));
        }
    }
    let (a, b) = (&s1[..n], &s2[..n]);
    let matched_diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect();
    let one_sided = |a: &[f64], b: &[f64]| {
        a.iter()
            .map(|x| {
                b.iter()
                    .map(|y| (x - y).abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(SpectralComparison {
        n,
        hausdorff: one_sided(a, b).max(one_sided(b, a)),
        matched_diffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_and_shifted() {
        let s = [1.0, 2.0, 4.0, 8.0];
        let c = compare_spectra(&s, &s, 4).unwrap();
        assert_eq!(c.hausdorff, 0.0);
        let shifted: Vec<f64> = s.iter().map(|x| x + 0.25).collect();
        let c = compare_spectra(&s, &shifted, 4).unwrap();
        assert!((c.hausdorff - 0.25).abs() < 1e-15);
        assert!(c.matched_diffs.iter().all(|d| (d - 0.25).abs() < 1e-15));
    }

    #[test]
    fn hausdorff_ignores_labels() {
        let c = compare_spectra(&[1.0, 1.0, 3.0], &[1.0, 3.0, 3.0], 3).unwrap();
        assert_eq!(c.hausdorff, 0.0);
        assert_eq!(c.matched_diffs, vec![0.0, 2.0, 0.0]);
    }

    #[test]
    fn too_short_or_unsorted() {
        assert!(matches!(
            compare_spectra(&[1.0], &[1.0, 2.0], 2),
            Err(DomainError::TooShort { needed: 2, got: 1 })
        ));
        assert!(compare_spectra(&[2.0, 1.0], &[1.0, 2.0], 2).is_err());
    }
}
