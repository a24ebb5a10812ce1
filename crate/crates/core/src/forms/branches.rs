//! One-parameter pencil families, eigenbranch continuation by overlap
//! matching, the variational formula and the integrability diagnostic.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::quasimode::projector_from;
use super::{generalized_eigh, Eigen, FormPencil, FormsError};
use crate::numerics::assign::max_score_assignment;

/// t ↦ (A(t), M(t)).
pub trait PencilFamily: Sync {
    fn dim(&self) -> usize;

    fn pencil(&self, t: f64) -> Result<FormPencil, FormsError>;

    /// dA/dt; central difference unless the family knows better.
    fn a_dot(&self, t: f64) -> Result<DMatrix<f64>, FormsError> {
        let h = 1e-5 * t.abs().max(1.0);
        Ok((self.pencil(t + h)?.a() - self.pencil(t - h)?.a()) / (2.0 * h))
    }
}

/// A(t) = A₀ + t·A₁ with a fixed M.
#[derive(Debug, Clone)]
pub struct AffineFamily {
    pub a0: DMatrix<f64>,
    pub a1: DMatrix<f64>,
    pub m: DMatrix<f64>,
}

impl AffineFamily {
    pub fn new(a0: DMatrix<f64>, a1: DMatrix<f64>, m: DMatrix<f64>) -> Result<Self, FormsError> {
        if a0.shape() != a1.shape() || a0.shape() != m.shape() {
            return Err(FormsError::Dimension(
                "A₀, A₁ and M must have equal shapes".into(),
            ));
        }
        Ok(Self { a0, a1, m })
    }
}

impl PencilFamily for AffineFamily {
    fn dim(&self) -> usize {
        self.a0.nrows()
    }

    fn pencil(&self, t: f64) -> Result<FormPencil, FormsError> {
        FormPencil::new(&self.a0 + &self.a1 * t, self.m.clone())
    }

    fn a_dot(&self, _t: f64) -> Result<DMatrix<f64>, FormsError> {
        Ok(self.a1.clone())
    }
}

/// A family given by a closure.
pub struct FnFamily<F> {
    dim: usize,
    f: F,
}

impl<F> FnFamily<F>
where
    F: Fn(f64) -> Result<FormPencil, FormsError> + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> PencilFamily for FnFamily<F>
where
    F: Fn(f64) -> Result<FormPencil, FormsError> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn pencil(&self, t: f64) -> Result<FormPencil, FormsError> {
        (self.f)(t)
    }
}

/// Pencils sampled at a few t values, linearly interpolated in between and
/// linearly extrapolated from the end segments.
///
/// Text format: for each sample a header line `dim=<n> t=<value>`, then n
/// comma-separated rows of A and n rows of M. Blank lines and lines starting
/// with `#` are skipped.
#[derive(Debug, Clone)]
pub struct TabulatedFamily {
    ts: Vec<f64>,
    a: Vec<DMatrix<f64>>,
    m: Vec<DMatrix<f64>>,
}

impl TabulatedFamily {
    pub fn new(
        ts: Vec<f64>,
        a: Vec<DMatrix<f64>>,
        m: Vec<DMatrix<f64>>,
    ) -> Result<Self, FormsError> {
        if ts.is_empty() || ts.len() != a.len() || ts.len() != m.len() {
            return Err(FormsError::Dimension(
                "need matching, non-empty t, A and M lists".into(),
            ));
        }
        if ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FormsError::BadGrid);
        }
        let n = a[0].nrows();
        if a.iter().chain(&m).any(|x| x.shape() != (n, n)) {
            return Err(FormsError::Dimension("all blocks must be n×n".into()));
        }
        Ok(Self { ts, a, m })
    }

    pub fn parse(text: &str) -> Result<Self, FormsError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (mut ts, mut a, mut m) = (Vec::new(), Vec::new(), Vec::new());
        while let Some((line, header)) = lines.next() {
            let (mut dim, mut t) = (None, None);
            for part in header.split_whitespace() {
                let bad = |message: String| FormsError::Parse { line, message };
                match part.split_once('=') {
                    Some(("dim", v)) => {
                        dim = Some(v.parse::<usize>().map_err(|e| bad(format!("dim: {e}")))?)
                    }
                    Some(("t", v)) => {
                        t = Some(v.parse::<f64>().map_err(|e| bad(format!("t: {e}")))?)
                    }
                    _ => return Err(bad(format!("unexpected header field `{part}`"))),
                }
            }
            let (Some(n), Some(t)) = (dim, t) else {
                return Err(FormsError::Parse {
                    line,
                    message: "header needs dim=<n> t=<value>".into(),
                });
            };
            let mut block = |name: &str| -> Result<DMatrix<f64>, FormsError> {
                let mut data = Vec::with_capacity(n * n);
                for r in 0..n {
                    let (line, row) = lines.next().ok_or(FormsError::Parse {
                        line,
                        message: format!("missing row {} of {name}", r + 1),
                    })?;
                    let values: Result<Vec<f64>, _> =
                        row.split(',').map(|v| v.trim().parse::<f64>()).collect();
                    let values = values.map_err(|e| FormsError::Parse {
                        line,
                        message: e.to_string(),
                    })?;
                    if values.len() != n {
                        return Err(FormsError::Parse {
                            line,
                            message: format!("expected {n} entries, got {}", values.len()),
                        });
                    }
                    data.extend(values);
                }
                Ok(DMatrix::from_row_slice(n, n, &data))
            };
            a.push(block("A")?);
            m.push(block("M")?);
            ts.push(t);
        }
        Self::new(ts, a, m)
    }

    fn segment(&self, t: f64) -> (usize, f64) {
        if self.ts.len() == 1 {
            return (0, 0.0);
        }
        let i = match self.ts.partition_point(|&s| s <= t) {
            0 => 0,
            k => (k - 1).min(self.ts.len() - 2),
        };
        (i, (t - self.ts[i]) / (self.ts[i + 1] - self.ts[i]))
    }

    fn lerp(blocks: &[DMatrix<f64>], i: usize, s: f64) -> DMatrix<f64> {
        if blocks.len() == 1 {
            return blocks[0].clone();
        }
        &blocks[i] * (1.0 - s) + &blocks[i + 1] * s
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.ts[0], *self.ts.last().expect("non-empty"))
    }
}

impl PencilFamily for TabulatedFamily {
    fn dim(&self) -> usize {
        self.a[0].nrows()
    }

    fn pencil(&self, t: f64) -> Result<FormPencil, FormsError> {
        let (i, s) = self.segment(t);
        FormPencil::new(Self::lerp(&self.a, i, s), Self::lerp(&self.m, i, s))
    }

    fn a_dot(&self, t: f64) -> Result<DMatrix<f64>, FormsError> {
        if self.ts.len() == 1 {
            return Ok(DMatrix::zeros(self.dim(), self.dim()));
        }
        let (i, _) = self.segment(t);
        Ok((&self.a[i + 1] - &self.a[i]) / (self.ts[i + 1] - self.ts[i]))
    }
}

/// Tuning for [`track_branches`].
#[derive(Debug, Clone, Copy)]
pub struct TrackOptions {
    /// Matched overlaps below this trigger bisection of the interval.
    pub min_overlap: f64,
    /// Maximum bisection depth per input interval.
    pub max_refinements: usize,
    /// Relative gap below which eigenvalues are matched as a block.
    pub cluster_gap: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            min_overlap: 0.9,
            max_refinements: 12,
            cluster_gap: 1e-10,
        }
    }
}

/// One eigenvalue branch continued along t.
#[derive(Debug, Clone, Serialize)]
pub struct EigenBranch {
    /// Position of the branch in the sorted spectrum at the first t.
    pub index: usize,
    /// Grid including any points inserted by refinement.
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Unit M-norm, sign-aligned with the previous point.
    #[serde(skip)]
    pub vectors: Vec<DVector<f64>>,
    /// Matched M-overlap on each interval.
    pub overlaps: Vec<f64>,
    /// Intervals (indices into `t_grid`) where this branch changes place in
    /// the sorted order.
    pub crossings: Vec<usize>,
    /// Intervals where matching stayed ambiguous after refinement.
    pub uncertain: Vec<usize>,
}

impl EigenBranch {
    pub fn crossing_intervals(&self) -> Vec<(f64, f64)> {
        self.crossings
            .iter()
            .map(|&i| (self.t_grid[i], self.t_grid[i + 1]))
            .collect()
    }

    pub fn position(&self, t: f64) -> Option<usize> {
        self.t_grid.iter().position(|&s| s == t)
    }
}

struct State {
    t: f64,
    values: Vec<f64>,
    vectors: Vec<DVector<f64>>,
}

struct Sample {
    state: State,
    /// Overlap and certainty of the interval ending here.
    overlap: Vec<f64>,
    uncertain: bool,
}

fn clusters(values: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len()
            || (values[i] - values[i - 1]).abs()
                > gap * values[i].abs().max(values[i - 1].abs()).max(1.0);
        if split {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Matches `prev` against the eigenpairs at the next point.
fn match_step(
    prev: &State,
    eig: &Eigen,
    m: &DMatrix<f64>,
    opts: &TrackOptions,
    t: f64,
) -> (State, Vec<f64>) {
    let n = prev.vectors.len();
    let mut x = eig.vectors.clone();
    let mp: Vec<DVector<f64>> = prev.vectors.iter().map(|u| m * u).collect();
    for c in clusters(&eig.values, opts.cluster_gap) {
        let size = c.len();
        if size < 2 {
            continue;
        }
        // Previous branches living mostly in this cluster, then the rotation
        // of the cluster basis closest to them.
        let mut weight: Vec<(usize, f64)> = (0..n)
            .map(|b| {
                (
                    b,
                    c.clone()
                        .map(|j| x.column(j).dot(&mp[b]).powi(2))
                        .sum::<f64>(),
                )
            })
            .collect();
        weight.sort_by(|a, b| b.1.total_cmp(&a.1));
        let chosen: Vec<usize> = weight[..size].iter().map(|w| w.0).collect();
        let xc = x.columns(c.start, size).into_owned();
        let b = DMatrix::from_fn(size, size, |r, k| xc.column(r).dot(&mp[chosen[k]]));
        let svd = b.svd(true, true);
        let (Some(u), Some(vt)) = (svd.u, svd.v_t) else {
            continue;
        };
        let rotated = &xc * (u * vt);
        x.columns_mut(c.start, size).copy_from(&rotated);
    }
    let score: Vec<Vec<f64>> = (0..n)
        .map(|b| (0..n).map(|j| x.column(j).dot(&mp[b]).abs()).collect())
        .collect();
    let assignment = max_score_assignment(&score);
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut overlaps = Vec::with_capacity(n);
    for b in 0..n {
        let j = assignment[b];
        let mut v = x.column(j).into_owned();
        if v.dot(&mp[b]) < 0.0 {
            v = -v;
        }
        values.push(eig.values[j]);
        vectors.push(v);
        overlaps.push(score[b][j]);
    }
    (State { t, values, vectors }, overlaps)
}

fn solve_at<F: PencilFamily + ?Sized>(
    family: &F,
    t: f64,
) -> Result<(Eigen, DMatrix<f64>), FormsError> {
    let p = family.pencil(t)?;
    let eig = p.eigh()?;
    Ok((eig, p.m().clone()))
}

#[allow(clippy::too_many_arguments)]
fn advance<F: PencilFamily + ?Sized>(
    family: &F,
    prev: &State,
    target: f64,
    known: Option<&(Eigen, DMatrix<f64>)>,
    depth: usize,
    opts: &TrackOptions,
    out: &mut Vec<Sample>,
) -> Result<(), FormsError> {
    let owned;
    let (eig, m) = match known {
        Some(k) => (&k.0, &k.1),
        None => {
            owned = solve_at(family, target)?;
            (&owned.0, &owned.1)
        }
    };
    let (next, overlap) = match_step(prev, eig, m, opts, target);
    let worst = overlap.iter().cloned().fold(f64::INFINITY, f64::min);
    if worst < opts.min_overlap && depth < opts.max_refinements {
        let mid = 0.5 * (prev.t + target);
        advance(family, prev, mid, None, depth + 1, opts, out)?;
        let mid_state = State {
            t: mid,
            values: out.last().expect("just pushed").state.values.clone(),
            vectors: out.last().expect("just pushed").state.vectors.clone(),
        };
        return advance(
            family,
            &mid_state,
            target,
            Some(&(eig.clone(), m.clone())),
            depth + 1,
            opts,
            out,
        );
    }
    out.push(Sample {
        state: next,
        overlap,
        uncertain: worst < opts.min_overlap,
    });
    Ok(())
}

/// Continues every eigenpair of the family along `t_grid` by maximal
/// M-overlap matching, bisecting intervals where the best overlap drops
/// below `opts.min_overlap`.
pub fn track_branches<F: PencilFamily + ?Sized>(
    family: &F,
    t_grid: &[f64],
    opts: &TrackOptions,
) -> Result<Vec<EigenBranch>, FormsError> {
    if t_grid.len() < 2 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FormsError::BadGrid);
    }
    let solved: Vec<_> = t_grid
        .par_iter()
        .map(|&t| solve_at(family, t))
        .collect::<Result<_, _>>()?;
    let n = family.dim();
    let first = State {
        t: t_grid[0],
        values: solved[0].0.values.clone(),
        vectors: (0..n).map(|i| solved[0].0.vector(i)).collect(),
    };
    let mut samples = vec![Sample {
        state: first,
        overlap: vec![1.0; n],
        uncertain: false,
    }];
    for (i, &t) in t_grid.iter().enumerate().skip(1) {
        let prev = {
            let s = &samples.last().expect("non-empty").state;
            State {
                t: s.t,
                values: s.values.clone(),
                vectors: s.vectors.clone(),
            }
        };
        advance(family, &prev, t, Some(&solved[i]), 0, opts, &mut samples)?;
    }

    let grid: Vec<f64> = samples.iter().map(|s| s.state.t).collect();
    let ranks: Vec<Vec<usize>> = samples
        .iter()
        .map(|s| {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                s.state.values[a]
                    .total_cmp(&s.state.values[b])
                    .then(a.cmp(&b))
            });
            let mut rank = vec![0; n];
            for (r, &b) in order.iter().enumerate() {
                rank[b] = r;
            }
            rank
        })
        .collect();
    Ok((0..n)
        .map(|b| EigenBranch {
            index: b,
            t_grid: grid.clone(),
            values: samples.iter().map(|s| s.state.values[b]).collect(),
            vectors: samples.iter().map(|s| s.state.vectors[b].clone()).collect(),
            overlaps: samples[1..].iter().map(|s| s.overlap[b]).collect(),
            crossings: (0..samples.len() - 1)
                .filter(|&i| ranks[i][b] != ranks[i + 1][b])
                .collect(),
            uncertain: (0..samples.len() - 1)
                .filter(|&i| samples[i + 1].uncertain)
                .collect(),
        })
        .collect())
}

/// Central-difference λ̇ of one branch against ȧ(u)/‖u‖².
#[derive(Debug, Clone, Serialize)]
pub struct VariationalCheck {
    pub t: f64,
    pub dt: f64,
    pub finite_difference: f64,
    pub formula: f64,
    pub error: f64,
}

pub fn variational_check<F: PencilFamily + ?Sized>(
    family: &F,
    t: f64,
    dt: f64,
    branch: usize,
) -> Result<VariationalCheck, FormsError> {
    if branch >= family.dim() {
        return Err(FormsError::BranchIndex {
            index: branch,
            dim: family.dim(),
        });
    }
    if !(dt > 0.0) {
        return Err(FormsError::BadGrid);
    }
    let branches = track_branches(family, &[t - dt, t, t + dt], &TrackOptions::default())?;
    let b = &branches[branch];
    let (i0, i1, i2) = (
        b.position(t - dt).ok_or(FormsError::BadGrid)?,
        b.position(t).ok_or(FormsError::BadGrid)?,
        b.position(t + dt).ok_or(FormsError::BadGrid)?,
    );
    let finite_difference = (b.values[i2] - b.values[i0]) / (2.0 * dt);
    let p = family.pencil(t)?;
    let u = &b.vectors[i1];
    let formula = u.dot(&(family.a_dot(t)? * u)) / p.inner(u, u);
    Ok(VariationalCheck {
        t,
        dt,
        finite_difference,
        formula,
        error: (finite_difference - formula).abs(),
    })
}

/// One point of the integrability diagnostic.
#[derive(Debug, Clone, Serialize)]
pub struct IntegrabilitySample {
    pub t: f64,
    /// Eigenvalue of the tracked q-branch.
    pub energy: f64,
    /// ε(t) for q against a.
    pub epsilon: f64,
    /// ȧ(χ)/‖χ‖² with χ = P^I_a u.
    pub integrand: f64,
    /// ‖u‖/‖χ‖.
    pub norm_ratio: f64,
    /// Trapezoid integral of the integrand from t to the largest grid point.
    pub partial_integral: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegrabilityReport {
    pub interval: (f64, f64),
    pub branch: usize,
    pub samples: Vec<IntegrabilitySample>,
    /// sup ε(t)/t over the grid.
    pub max_epsilon_over_t: f64,
    /// Largest ‖u‖/‖P^I u‖, the measured constant of the lower bound.
    pub norm_constant: f64,
}

/// Samples t ↦ ȧ(P^I u_t)/‖P^I u_t‖² along q-branch `branch` and reports its
/// partial integrals. This is a finite-grid diagnostic: it can show the
/// partial integrals settling, not prove integrability.
pub fn integrability_diagnostic<A: PencilFamily + ?Sized, Q: PencilFamily + ?Sized>(
    a_family: &A,
    q_family: &Q,
    lo: f64,
    hi: f64,
    t_grid: &[f64],
    branch: usize,
) -> Result<IntegrabilityReport, FormsError> {
    if a_family.dim() != q_family.dim() {
        return Err(FormsError::Dimension(
            "a and q families differ in dimension".into(),
        ));
    }
    if branch >= q_family.dim() {
        return Err(FormsError::BranchIndex {
            index: branch,
            dim: q_family.dim(),
        });
    }
    if t_grid.len() < 2 || t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] <= 0.0 {
        return Err(FormsError::BadGrid);
    }
    let branches = track_branches(q_family, t_grid, &TrackOptions::default())?;
    let b = &branches[branch];

    struct Point {
        epsilon: f64,
        integrand: f64,
        ratio: f64,
        failures: Vec<String>,
    }
    let points: Vec<Point> = b
        .t_grid
        .par_iter()
        .zip(b.vectors.par_iter())
        .map(|(&t, u)| -> Result<Point, FormsError> {
            let pa = a_family.pencil(t)?;
            let pq = q_family.pencil(t)?;
            let mut failures = Vec::new();
            if (pa.m() - pq.m()).amax() > 1e-12 * pa.m().amax() {
                failures.push(format!("t = {t}: a and q use different inner products"));
            }
            let closeness = pa.clone().with_q(pq.a().clone())?;
            let epsilon = super::epsilon_closeness(&closeness)?;
            let a_dot = a_family.a_dot(t)?;
            // 0 ≤ ȧ ≤ a/t as generalized eigenvalues of (ȧ, A).
            let rel = generalized_eigh(&a_dot, pa.a())
                .map_err(|_| FormsError::NotPositiveDefinite { which: "A" })?;
            let tol = 1e-10 * (1.0 + 1.0 / t);
            let (rmin, rmax) = (rel.values[0], *rel.values.last().expect("non-empty"));
            if rmin < -tol {
                failures.push(format!(
                    "t = {t}: ȧ is not nonnegative (min ratio {rmin:e})"
                ));
            }
            if rmax > 1.0 / t + tol {
                failures.push(format!(
                    "t = {t}: ȧ exceeds a/t (max ratio {rmax}, 1/t = {})",
                    1.0 / t
                ));
            }
            let eig = pa.eigh()?;
            let chi = projector_from(&eig, pa.m(), lo, hi) * u;
            let chi_sq = pa.inner(&chi, &chi);
            let integrand = if chi_sq > 0.0 {
                chi.dot(&(&a_dot * &chi)) / chi_sq
            } else {
                f64::NAN
            };
            let ratio = pa.norm(u) / chi_sq.max(0.0).sqrt();
            Ok(Point {
                epsilon,
                integrand,
                ratio,
                failures,
            })
        })
        .collect::<Result<_, _>>()?;

    let mut failures: Vec<String> = points
        .iter()
        .flat_map(|p| p.failures.iter().cloned())
        .collect();
    let ratios: Vec<f64> = b
        .t_grid
        .iter()
        .zip(&points)
        .map(|(t, p)| p.epsilon / t)
        .collect();
    let max_epsilon_over_t = ratios.iter().cloned().fold(0.0, f64::max);
    let reference = *ratios.last().expect("non-empty");
    if points.iter().any(|p| p.epsilon >= 1.0) {
        failures.push("q is not ε-close to a with ε < 1 on the whole grid".into());
    }
    if max_epsilon_over_t > 10.0 * reference + 1e-12 {
        failures.push(format!(
            "ε(t)/t is not bounded: grows from {reference:e} to {max_epsilon_over_t:e}"
        ));
    }
    if !failures.is_empty() {
        return Err(FormsError::Hypotheses(failures));
    }

    let n = b.t_grid.len();
    let mut partial = vec![0.0; n];
    for i in (0..n - 1).rev() {
        let h = b.t_grid[i + 1] - b.t_grid[i];
        partial[i] = partial[i + 1] + 0.5 * h * (points[i].integrand + points[i + 1].integrand);
    }
    let samples = (0..n)
        .map(|i| IntegrabilitySample {
            t: b.t_grid[i],
            energy: b.values[i],
            epsilon: points[i].epsilon,
            integrand: points[i].integrand,
            norm_ratio: points[i].ratio,
            partial_integral: partial[i],
        })
        .collect();
    let norm_constant = points.iter().map(|p| p.ratio).fold(0.0, f64::max);
    Ok(IntegrabilityReport {
        interval: (lo, hi),
        branch,
        samples,
        max_epsilon_over_t,
        norm_constant,
    })
}
