//! Product spectra λ_{ℓ,k} from a transverse spectrum {μ_ℓ} and the half-line
//! family, thresholds μ_ℓ/σ(0), multiplicity and crossing scans, and the
//! explicit cylinder spectrum π²(k² + ℓ²/t²).

mod cylinder;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::halfline::{solve_below, HalfLineError, HalfLineProblem};
use crate::profile::WeightProfile;
use crate::Boundary;

pub use cylinder::{
    cylinder_spectrum, first_n_simple, simplicity_threshold, threshold_table, CylinderLevel,
    CylinderSpectrum, ThresholdRow,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeparationError {
    #[error("invalid transverse spectrum: {0}")]
    Transverse(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("ℓ = {ell}: {source}")]
    HalfLine {
        ell: usize,
        #[source]
        source: HalfLineError,
    },
}

/// Simple, positive transverse eigenvalues μ₁ < μ₂ < ….
#[derive(Debug, Clone, Serialize)]
pub struct TransverseSpectrum {
    eigenvalues: Vec<f64>,
    label: String,
}

impl TransverseSpectrum {
    pub fn new(eigenvalues: Vec<f64>, label: impl Into<String>) -> Result<Self, SeparationError> {
        if eigenvalues.is_empty() {
            return Err(SeparationError::Transverse("no eigenvalues".into()));
        }
        if eigenvalues.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(SeparationError::Transverse(
                "eigenvalues must be positive and finite".into(),
            ));
        }
        if eigenvalues.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SeparationError::Transverse(
                "eigenvalues must be strictly increasing (simple)".into(),
            ));
        }
        Ok(Self {
            eigenvalues,
            label: label.into(),
        })
    }

    /// Dirichlet Laplacian on an interval of length L: μ_ℓ = (ℓπ/L)² for all
    /// ℓ with μ_ℓ ≤ `mu_max`, plus one more.
    pub fn dirichlet_interval(length: f64, mu_max: f64) -> Result<Self, SeparationError> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(SeparationError::Transverse(format!(
                "interval length must be positive, got {length}"
            )));
        }
        let count = ((mu_max.max(0.0)).sqrt() * length / PI).floor() as usize + 1;
        let eigenvalues = (1..=count)
            .map(|l| (l as f64 * PI / length).powi(2))
            .collect();
        Self::new(eigenvalues, format!("Dirichlet interval length {length}"))
    }

    /// `dirichlet-interval:L=<length>` or `list:<μ₁>,<μ₂>,…`.
    pub fn parse(spec: &str, mu_max: f64) -> Result<Self, SeparationError> {
        let bad = |m: String| SeparationError::Transverse(m);
        match spec.split_once(':') {
            Some(("dirichlet-interval", rest)) => {
                let length = match rest.split_once('=') {
                    Some(("L", v)) => v
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| bad(format!("L: {e}")))?,
                    _ => return Err(bad(format!("expected L=<length>, got `{rest}`"))),
                };
                Self::dirichlet_interval(length, mu_max)
            }
            Some(("list", rest)) => {
                let values: Result<Vec<f64>, _> =
                    rest.split(',').map(|v| v.trim().parse::<f64>()).collect();
                Self::new(
                    values.map_err(|e| bad(e.to_string()))?,
                    format!("list {rest}"),
                )
            }
            _ => Err(bad(format!("unknown transverse spectrum `{spec}`"))),
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// μ_ℓ/σ(0), ascending.
pub fn thresholds(b: &TransverseSpectrum, profile: &WeightProfile) -> Vec<f64> {
    b.eigenvalues
        .iter()
        .map(|m| profile.threshold(*m))
        .collect()
}

/// One eigenvalue with its transverse (ℓ) and radial (k) labels, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabeledEntry {
    pub lambda: f64,
    pub ell: usize,
    pub k: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct LabeledSpectrum {
    pub entries: Vec<LabeledEntry>,
    pub warnings: Vec<String>,
}

impl LabeledSpectrum {
    /// Sorts by (λ, ℓ, k).
    pub fn from_entries(mut entries: Vec<LabeledEntry>, warnings: Vec<String>) -> Self {
        entries.sort_by(|a, b| {
            a.lambda
                .total_cmp(&b.lambda)
                .then(a.ell.cmp(&b.ell))
                .then(a.k.cmp(&b.k))
        });
        Self { entries, warnings }
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    /// Entries with transverse label ℓ, in order.
    pub fn branch(&self, ell: usize) -> Vec<LabeledEntry> {
        self.entries
            .iter()
            .filter(|e| e.ell == ell)
            .copied()
            .collect()
    }

    pub fn get(&self, ell: usize, k: usize) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.ell == ell && e.k == k)
            .map(|e| e.lambda)
    }
}

/// All λ ≤ `lambda_max` of the separated problem at t. Transverse modes with
/// μ_ℓ/σ(0) > `lambda_max` are skipped, since every λ on them is at least
/// that threshold.
pub fn product_spectrum(
    t: f64,
    profile: &WeightProfile,
    b: &TransverseSpectrum,
    lambda_max: f64,
    bc: Boundary,
) -> Result<LabeledSpectrum, SeparationError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(SeparationError::Argument(format!(
            "t must be positive, got {t}"
        )));
    }
    if !lambda_max.is_finite() {
        return Err(SeparationError::Argument(
            "lambda_max must be finite".into(),
        ));
    }
    let active: Vec<(usize, f64)> = b
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, m)| profile.threshold(**m) <= lambda_max)
        .map(|(i, m)| (i + 1, *m))
        .collect();
    let mut warnings = Vec::new();
    if active.len() == b.eigenvalues.len() {
        warnings.push(format!(
            "every listed transverse mode lies below lambda_max = {lambda_max}; the transverse list may be too short"
        ));
    }
    let per_mode: Vec<_> = active
        .par_iter()
        .map(|&(ell, mu)| {
            let run = || -> Result<_, HalfLineError> {
                let p = HalfLineProblem::new(t, mu, profile.clone(), bc)?;
                solve_below(&p, lambda_max)
            };
            run()
                .map(|s| (ell, s))
                .map_err(|source| SeparationError::HalfLine { ell, source })
        })
        .collect::<Result<_, _>>()?;
    let mut entries = Vec::new();
    for (ell, s) in per_mode {
        if s.is_partial() {
            warnings.push(format!(
                "ℓ = {ell}: resolved {} of {} eigenvalues",
                s.resolved_count, s.requested
            ));
        }
        warnings.extend(s.warnings.iter().map(|w| format!("ℓ = {ell}: {w}")));
        entries.extend(
            s.eigenvalues
                .iter()
                .enumerate()
                .map(|(i, &lambda)| LabeledEntry {
                    lambda,
                    ell,
                    k: i + 1,
                }),
        );
    }
    Ok(LabeledSpectrum::from_entries(entries, warnings))
}

/// Per-t result of [`simplicity_scan`].
#[derive(Debug, Clone, Serialize)]
pub struct SimplicityRow {
    pub t: f64,
    /// Smallest gap between consecutive eigenvalues (∞ with fewer than two).
    pub min_gap: f64,
    /// Label pairs ((ℓ, k), (ℓ′, k′)) whose values agree to the tolerance.
    pub suspects: Vec<((usize, usize), (usize, usize))>,
}

/// Two labelled branches that change order between neighbouring t.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingInterval {
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub t_lo: f64,
    pub t_hi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimplicityReport {
    pub rows: Vec<SimplicityRow>,
    pub crossings: Vec<CrossingInterval>,
}

/// Scans labelled spectra over t for near-multiplicities (relative gap ≤
/// `tol`) and for order swaps between labelled branches.
pub fn simplicity_scan(spectra: &[(f64, LabeledSpectrum)], tol: f64) -> SimplicityReport {
    let mut sorted: Vec<&(f64, LabeledSpectrum)> = spectra.iter().collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let rows = sorted
        .iter()
        .map(|(t, s)| {
            let e = &s.entries;
            let mut min_gap = f64::INFINITY;
            let mut suspects = Vec::new();
            for i in 0..e.len() {
                if i + 1 < e.len() {
                    min_gap = min_gap.min(e[i + 1].lambda - e[i].lambda);
                }
                for j in i + 1..e.len() {
                    let gap = e[j].lambda - e[i].lambda;
                    if gap > tol * e[j].lambda.abs() {
                        break;
                    }
                    suspects.push(((e[i].ell, e[i].k), (e[j].ell, e[j].k)));
                }
            }
            SimplicityRow {
                t: *t,
                min_gap,
                suspects,
            }
        })
        .collect();
    let mut crossings = Vec::new();
    for w in sorted.windows(2) {
        let (t0, a) = (w[0].0, &w[0].1);
        let (t1, b) = (w[1].0, &w[1].1);
        let common: Vec<(LabeledEntry, f64)> = a
            .entries
            .iter()
            .filter_map(|e| b.get(e.ell, e.k).map(|v| (*e, v)))
            .collect();
        for i in 0..common.len() {
            for j in i + 1..common.len() {
                let before = common[i].0.lambda - common[j].0.lambda;
                let after = common[i].1 - common[j].1;
                if before * after < 0.0 {
                    crossings.push(CrossingInterval {
                        first: (common[i].0.ell, common[i].0.k),
                        second: (common[j].0.ell, common[j].0.k),
                        t_lo: t0,
                        t_hi: t1,
                    });
                }
            }
        }
    }
    SimplicityReport { rows, crossings }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transverse_validation() {
        assert!(TransverseSpectrum::new(vec![1.0, 1.0], "x").is_err());
        assert!(TransverseSpectrum::new(vec![0.0, 1.0], "x").is_err());
        let b = TransverseSpectrum::parse("dirichlet-interval:L=1", 50.0).unwrap();
        assert_eq!(b.eigenvalues().len(), 3);
        assert!((b.eigenvalues()[1] - 4.0 * PI * PI).abs() < 1e-12);
        let l = TransverseSpectrum::parse("list:1, 2.5,7", 0.0).unwrap();
        assert_eq!(l.eigenvalues(), &[1.0, 2.5, 7.0]);
        assert!(TransverseSpectrum::parse("neumann:L=1", 1.0).is_err());
    }

    #[test]
    fn thresholds_scale_with_sigma0() {
        let b = TransverseSpectrum::new(vec![PI * PI, 4.0 * PI * PI], "d").unwrap();
        let th = thresholds(&b, &WeightProfile::exp2());
        assert!((th[0] - PI * PI).abs() < 1e-12);
        let four = WeightProfile::from_expression("4*exp(-2*x)").unwrap();
        let th4 = thresholds(&b, &four);
        assert!((th4[1] - PI * PI).abs() < 1e-12);
    }

    #[test]
    fn scan_with_zero_tolerance_flags_exact_ties_only() {
        let s = LabeledSpectrum::from_entries(
            vec![
                LabeledEntry {
                    lambda: 1.0,
                    ell: 1,
                    k: 1,
                },
                LabeledEntry {
                    lambda: 2.0,
                    ell: 1,
                    k: 2,
                },
                LabeledEntry {
                    lambda: 2.0,
                    ell: 2,
                    k: 1,
                },
                LabeledEntry {
                    lambda: 2.0 + 1e-15,
                    ell: 3,
                    k: 1,
                },
            ],
            vec![],
        );
        let r = simplicity_scan(&[(0.5, s)], 0.0);
        assert_eq!(r.rows[0].suspects, vec![((1, 2), (2, 1))]);
        assert_eq!(r.rows[0].min_gap, 0.0);
    }

    #[test]
    fn scan_reports_order_swaps() {
        let a = LabeledSpectrum::from_entries(
            vec![
                LabeledEntry {
                    lambda: 1.0,
                    ell: 1,
                    k: 1,
                },
                LabeledEntry {
                    lambda: 2.0,
                    ell: 2,
                    k: 1,
                },
            ],
            vec![],
        );
        let b = LabeledSpectrum::from_entries(
            vec![
                LabeledEntry {
                    lambda: 3.0,
                    ell: 1,
                    k: 1,
                },
                LabeledEntry {
                    lambda: 2.5,
                    ell: 2,
                    k: 1,
                },
            ],
            vec![],
        );
        let r = simplicity_scan(&[(0.2, b), (0.1, a)], 1e-8);
        assert_eq!(
            r.crossings,
            vec![CrossingInterval {
                first: (1, 1),
                second: (2, 1),
                t_lo: 0.1,
                t_hi: 0.2
            }]
        );
    }
}
