//! The cylinder spectrum π²(k² + ℓ²/t²), k ≥ 1, ℓ ≥ 0, each ℓ ≥ 1 level
//! counted twice.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::Serialize;

use super::{LabeledEntry, LabeledSpectrum, SeparationError};

/// Values within this relative distance are one level.
const LEVEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct CylinderLevel {
    pub value: f64,
    pub multiplicity: usize,
    /// Contributing (k, ℓ) pairs.
    pub modes: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CylinderSpectrum {
    pub t: f64,
    pub levels: Vec<CylinderLevel>,
}

impl CylinderSpectrum {
    /// One labelled entry per (k, ℓ); the ±ℓ doubling is not repeated.
    pub fn to_labeled(&self) -> LabeledSpectrum {
        let entries = self
            .levels
            .iter()
            .flat_map(|l| {
                l.modes.iter().map(move |&(k, ell)| LabeledEntry {
                    lambda: l.value,
                    ell: ell + 1,
                    k,
                })
            })
            .collect();
        LabeledSpectrum::from_entries(entries, Vec::new())
    }

    /// Eigenvalues repeated by multiplicity.
    pub fn with_multiplicity(&self) -> Vec<f64> {
        self.levels
            .iter()
            .flat_map(|l| std::iter::repeat(l.value).take(l.multiplicity))
            .collect()
    }
}

struct Candidate {
    value: f64,
    k: usize,
    ell: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Reversed for a min-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .value
            .total_cmp(&self.value)
            .then(other.k.cmp(&self.k))
            .then(other.ell.cmp(&self.ell))
    }
}

fn value(t: f64, k: usize, ell: usize) -> f64 {
    PI * PI * ((k * k) as f64 + (ell * ell) as f64 / (t * t))
}

/// Walks the spectrum in increasing order, one level at a time.
struct LevelIter {
    t: f64,
    heap: BinaryHeap<Candidate>,
    next_row: usize,
}

impl LevelIter {
    fn new(t: f64) -> Self {
        let mut heap = BinaryHeap::new();
        heap.push(Candidate {
            value: value(t, 1, 0),
            k: 1,
            ell: 0,
        });
        Self {
            t,
            heap,
            next_row: 2,
        }
    }

    fn pop(&mut self) -> Option<Candidate> {
        let c = self.heap.pop()?;
        // Rows k enter lazily: row k starts at π²k², after (k−1, 0) pops.
        if c.ell == 0 && c.k + 1 == self.next_row {
            self.heap.push(Candidate {
                value: value(self.t, self.next_row, 0),
                k: self.next_row,
                ell: 0,
            });
            self.next_row += 1;
        }
        self.heap.push(Candidate {
            value: value(self.t, c.k, c.ell + 1),
            k: c.k,
            ell: c.ell + 1,
        });
        Some(c)
    }
}

impl Iterator for LevelIter {
    type Item = CylinderLevel;

    fn next(&mut self) -> Option<CylinderLevel> {
        let first = self.pop()?;
        let mut level = CylinderLevel {
            value: first.value,
            multiplicity: if first.ell == 0 { 1 } else { 2 },
            modes: vec![(first.k, first.ell)],
        };
        while let Some(c) = self.heap.peek() {
            if c.value - level.value > LEVEL_TOL * level.value {
                break;
            }
            let c = self.pop().expect("peeked");
            level.multiplicity += if c.ell == 0 { 1 } else { 2 };
            level.modes.push((c.k, c.ell));
        }
        level.modes.sort_unstable();
        Some(level)
    }
}

/// The `n` smallest distinct levels with their multiplicities.
pub fn cylinder_spectrum(t: f64, n: usize) -> Result<CylinderSpectrum, SeparationError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(SeparationError::Argument(format!(
            "t must be positive, got {t}"
        )));
    }
    Ok(CylinderSpectrum {
        t,
        levels: LevelIter::new(t).take(n).collect(),
    })
}

/// True when the first `n` eigenvalues, counted with multiplicity, are all
/// simple.
pub fn first_n_simple(t: f64, n: usize) -> bool {
    let mut counted = 0;
    for level in LevelIter::new(t) {
        if level.multiplicity > 1 {
            return false;
        }
        counted += 1;
        if counted >= n {
            return true;
        }
    }
    true
}

/// Supremum of the t for which the first `n` eigenvalues are simple, found by
/// bisection on the enumeration. `None` when they are simple for every t
/// tried (n = 1).
pub fn simplicity_threshold(n: usize) -> Option<f64> {
    if n <= 1 || first_n_simple(1e8, n) {
        return None;
    }
    let mut hi = 1.0f64;
    while first_n_simple(hi, n) {
        hi *= 2.0;
    }
    // Small t always works: the ℓ ≥ 1 levels move off to infinity.
    let mut lo = hi;
    while !first_n_simple(lo, n) {
        lo *= 0.5;
    }
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if first_n_simple(mid, n) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Enumerated threshold next to the two closed forms (n² − 1)^{−1/2} and
/// (n² − 1)^{−1}.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdRow {
    pub n: usize,
    pub enumerated: Option<f64>,
    pub inverse_sqrt: Option<f64>,
    pub stated: Option<f64>,
}

pub fn threshold_table(n_max: usize) -> Vec<ThresholdRow> {
    (1..=n_max)
        .map(|n| {
            let d = (n * n) as f64 - 1.0;
            let (inverse_sqrt, stated) = if d > 0.0 {
                (Some(d.powf(-0.5)), Some(1.0 / d))
            } else {
                (None, None)
            };
            ThresholdRow {
                n,
                enumerated: simplicity_threshold(n),
                inverse_sqrt,
                stated,
            }
        })
        .collect()
}
