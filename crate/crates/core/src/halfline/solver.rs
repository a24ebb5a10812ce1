//! Finite-difference brackets, Numerov shooting and Richardson
//! extrapolation.

use rayon::prelude::*;
use serde::Serialize;

use super::{Eigenpair, HalfLineError, HalfLineProblem, HalfLineSpectrum};
use crate::numerics::interp::UniformSamples;
use crate::numerics::quad::simpson;
use crate::numerics::roots::brent;
use crate::Boundary;

/// Finite-difference pencil: stiffness t²/h²·(−1, 2, −1) + μ, lumped mass σ.
/// Dirichlet keeps nodes 1..n−1; Neumann adds node 0 with a half cell.
struct FdPencil {
    diag_k: Vec<f64>,
    mass: Vec<f64>,
    off: f64,
}

impl FdPencil {
    fn new(p: &HalfLineProblem) -> Self {
        let n = (p.x_max / p.h).round() as usize;
        let h = p.x_max / n as f64;
        let s = p.t * p.t / (h * h);
        let mut diag_k = Vec::with_capacity(n);
        let mut mass = Vec::with_capacity(n);
        if p.bc == Boundary::Neumann {
            diag_k.push(s + 0.5 * p.mu);
            mass.push(0.5 * p.profile.sigma(0.0));
        }
        for i in 1..n {
            diag_k.push(2.0 * s + p.mu);
            mass.push(p.profile.sigma(i as f64 * h));
        }
        Self {
            diag_k,
            mass,
            off: -s,
        }
    }

    /// Number of eigenvalues below `lambda` (negative pivots of K − λM).
    fn count_below(&self, lambda: f64) -> usize {
        let e2 = self.off * self.off;
        let mut count = 0;
        let mut pivot = 1.0;
        for (i, (k, m)) in self.diag_k.iter().zip(&self.mass).enumerate() {
            let d = k - lambda * m;
            pivot = if i == 0 { d } else { d - e2 / pivot };
            if pivot == 0.0 {
                pivot = -f64::EPSILON * d.abs().max(1e-300);
            }
            if pivot < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn eigenvalue(&self, k: usize, floor: f64) -> f64 {
        let mut lo = floor;
        let mut hi = floor.max(1.0) * 2.0;
        while self.count_below(hi) < k {
            lo = hi;
            hi *= 2.0;
        }
        while hi - lo > 1e-12 * hi {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// First `n` eigenvalues of the finite-difference pencil.
pub fn fd_eigenvalues(p: &HalfLineProblem, n: usize) -> Vec<f64> {
    let pencil = FdPencil::new(p);
    (1..=n)
        .map(|k| pencil.eigenvalue(k, p.threshold()))
        .collect()
}

fn fd_count_below(p: &HalfLineProblem, lambda: f64) -> usize {
    FdPencil::new(p).count_below(lambda)
}

/// Uniform shooting grid on [0, X_max] with σ tabulated.
struct ShootGrid {
    h: f64,
    sigma: Vec<f64>,
}

impl ShootGrid {
    fn new(p: &HalfLineProblem, steps: usize) -> Self {
        let h = p.x_max / steps as f64;
        let sigma = (0..=steps).map(|i| p.profile.sigma(i as f64 * h)).collect();
        Self { h, sigma }
    }

    fn coarsen(&self) -> Self {
        Self {
            h: 2.0 * self.h,
            sigma: self.sigma.iter().step_by(2).copied().collect(),
        }
    }

    fn q(&self, p: &HalfLineProblem, lambda: f64, i: usize) -> f64 {
        (p.mu - lambda * self.sigma[i]) / (p.t * p.t)
    }

    /// Numerov integration of w″ = q·w inward from X_max, seeded with the
    /// decaying WKB ratio and rescaled to stay finite.
    fn shoot(&self, p: &HalfLineProblem, lambda: f64) -> Vec<f64> {
        let n = self.sigma.len() - 1;
        let h = self.h;
        let c = h * h / 12.0;
        let mut w = vec![0.0; n + 1];
        w[n] = 1.0;
        let q_mid = 0.5 * (self.q(p, lambda, n) + self.q(p, lambda, n - 1));
        w[n - 1] = (h * q_mid.max(0.0).sqrt()).exp();
        let mut q_next = self.q(p, lambda, n);
        let mut q_here = self.q(p, lambda, n - 1);
        for i in (1..n).rev() {
            let q_prev = self.q(p, lambda, i - 1);
            w[i - 1] = (2.0 * (1.0 + 5.0 * c * q_here) * w[i] - (1.0 - c * q_next) * w[i + 1])
                / (1.0 - c * q_prev);
            if w[i - 1].abs() > 1e150 {
                for v in &mut w[i - 1..] {
                    *v *= 1e-150;
                }
            }
            q_next = q_here;
            q_here = q_prev;
        }
        w
    }

    /// Fourth-order one-sided derivative at x = 0.
    fn left_derivative(&self, w: &[f64]) -> f64 {
        (-25.0 * w[0] + 48.0 * w[1] - 36.0 * w[2] + 16.0 * w[3] - 3.0 * w[4]) / (12.0 * self.h)
    }

    /// Boundary mismatch normalized by the discrete L² norm; continuous in λ
    /// with zeros at the discrete eigenvalues.
    fn mismatch(&self, p: &HalfLineProblem, lambda: f64) -> f64 {
        let w = self.shoot(p, lambda);
        let norm = (w.iter().map(|v| v * v).sum::<f64>() * self.h).sqrt();
        match p.bc {
            Boundary::Dirichlet => w[0] / norm,
            Boundary::Neumann => p.t * self.left_derivative(&w) / norm,
        }
    }

    /// Discrete eigenvalue inside [lo, hi], nearest to `guess` if the bracket
    /// holds several.
    fn eigenvalue(
        &self,
        p: &HalfLineProblem,
        k: usize,
        lo: f64,
        hi: f64,
        guess: f64,
    ) -> Result<f64, HalfLineError> {
        let f = |l: f64| self.mismatch(p, l);
        let (f_lo, f_hi) = (f(lo), f(hi));
        let tol = 1e-14 * hi.abs();
        if f_lo.signum() != f_hi.signum() {
            return brent(f, lo, hi, tol).map_err(|_| HalfLineError::NoBracket { k, lo, hi });
        }
        // Scan for sign changes and keep the one nearest the guess.
        let m = 256;
        let mut best: Option<(f64, f64)> = None;
        let mut prev = (lo, f_lo);
        for j in 1..=m {
            let l = lo + (hi - lo) * j as f64 / m as f64;
            let v = f(l);
            if v.signum() != prev.1.signum() {
                let d = (0.5 * (prev.0 + l) - guess).abs();
                if best.is_none_or(|b| d < (0.5 * (b.0 + b.1) - guess).abs()) {
                    best = Some((prev.0, l));
                }
            }
            prev = (l, v);
        }
        let (a, b) = best.ok_or(HalfLineError::NoBracket { k, lo, hi })?;
        brent(f, a, b, tol).map_err(|_| HalfLineError::NoBracket { k, lo: a, hi: b })
    }
}

/// Local wavenumber scale √max(λσ(0) − μ, μ)/t.
fn wavenumber(p: &HalfLineProblem, lambda: f64) -> f64 {
    (lambda * p.profile.sigma0() - p.mu).max(p.mu).sqrt() / p.t
}

/// Decay exponent ∫_{x_λ}^{X_max} √f_λ/t on the FD grid.
fn decay_exponent(p: &HalfLineProblem, lambda: f64) -> f64 {
    let n = (p.x_max / p.h).round() as usize;
    let h = p.x_max / n as f64;
    (0..n)
        .map(|i| {
            let x = (i as f64 + 0.5) * h;
            (p.mu - lambda * p.profile.sigma(x)).max(0.0).sqrt()
        })
        .sum::<f64>()
        * h
        / p.t
}

/// Why eigenvalue λ is not trustworthy on this discretization, if it is not.
fn resolution_problem(p: &HalfLineProblem, lambda: f64) -> Option<String> {
    let kh = p.h * (lambda * p.profile.sigma0() - p.mu).max(0.0).sqrt() / p.t;
    if kh > 0.3 {
        return Some(format!(
            "bracketing grid too coarse at lambda = {lambda:.6} (k·h = {kh:.3})"
        ));
    }
    let decay = decay_exponent(p, lambda);
    if decay < 30.0 {
        return Some(format!("eigenfunction at lambda = {lambda:.6} does not decay before x_max (exponent {decay:.1})"));
    }
    None
}

fn refine(p: &HalfLineProblem, k: usize, fd: &[f64]) -> Result<Eigenpair, HalfLineError> {
    let lam = fd[k - 1];
    let gap_below = if k >= 2 { lam - fd[k - 2] } else { fd[k] - lam };
    let lo = if k >= 2 {
        0.5 * (fd[k - 2] + lam)
    } else {
        (lam - 0.5 * gap_below).max(p.threshold())
    };
    let hi = 0.5 * (lam + fd[k]);
    let h_out = p.h.min(0.02 / wavenumber(p, fd[k]));
    let mut steps = (p.x_max / h_out).ceil() as usize;
    steps += steps % 2;
    steps = steps.max(32);
    let fine = ShootGrid::new(p, steps);
    let coarse = fine.coarsen();
    let lam_coarse = coarse.eigenvalue(p, k, lo, hi, lam)?;
    let lam_fine = fine.eigenvalue(p, k, lo, hi, lam_coarse)?;
    let lambda = (16.0 * lam_fine - lam_coarse) / 15.0;
    let error_estimate = (lam_fine - lam_coarse).abs() / 15.0;
    let w = fine.shoot(p, lam_fine);
    let (samples, residual) = normalize(p, &fine, w, lam_fine);
    Ok(Eigenpair {
        k,
        lambda,
        lambda_grid: lam_fine,
        error_estimate,
        residual,
        w: samples,
    })
}

/// σ-normalizes the shot, fixes the sign, attaches w′ and w″ = q·w and
/// measures the ODE residual with the five-point stencil.
fn normalize(
    p: &HalfLineProblem,
    g: &ShootGrid,
    mut w: Vec<f64>,
    lambda: f64,
) -> (UniformSamples, f64) {
    let n = w.len();
    let h = g.h;
    let weighted: Vec<f64> = w.iter().zip(&g.sigma).map(|(v, s)| v * v * s).collect();
    let norm = simpson(&weighted, h).sqrt();
    let lead = match p.bc {
        Boundary::Dirichlet => g.left_derivative(&w),
        Boundary::Neumann => w[0],
    };
    let scale = lead.signum() / norm;
    for v in &mut w {
        *v *= scale;
    }
    let q: Vec<f64> = (0..n).map(|i| g.q(p, lambda, i)).collect();
    let second: Vec<f64> = w.iter().zip(&q).map(|(v, q)| v * q).collect();
    let mut first = vec![0.0; n];
    for i in 1..n - 1 {
        let a = w[i + 1] - h * h * second[i + 1] / 6.0;
        let b = w[i - 1] - h * h * second[i - 1] / 6.0;
        first[i] = (a - b) / (2.0 * h);
    }
    first[0] = g.left_derivative(&w);
    first[n - 1] = (25.0 * w[n - 1] - 48.0 * w[n - 2] + 36.0 * w[n - 3] - 16.0 * w[n - 4]
        + 3.0 * w[n - 5])
        / (12.0 * h);
    let sup = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let t2 = p.t * p.t;
    let mut worst = 0.0f64;
    for i in 2..n - 2 {
        let d2 = (-w[i - 2] + 16.0 * w[i - 1] - 30.0 * w[i] + 16.0 * w[i + 1] - w[i + 2])
            / (12.0 * h * h);
        worst = worst.max((t2 * d2 - t2 * q[i] * w[i]).abs());
    }
    let samples = UniformSamples::new(0.0, h, w).with_derivatives(first, second);
    (samples, worst / sup)
}

fn solve_indices(
    p: &HalfLineProblem,
    requested: usize,
    fd: &[f64],
) -> Result<HalfLineSpectrum, HalfLineError> {
    let mut warnings = Vec::new();
    let mut resolved = 0;
    for k in 1..=requested {
        match resolution_problem(p, fd[k - 1]) {
            None => resolved = k,
            Some(reason) => {
                warnings.push(format!("eigenvalue {k} unresolved: {reason}"));
                break;
            }
        }
    }
    if resolved == 0 && requested > 0 {
        return Err(HalfLineError::NothingResolved {
            requested,
            reason: warnings.pop().unwrap_or_default(),
        });
    }
    let pairs: Vec<Eigenpair> = (1..=resolved)
        .map(|k| refine(p, k, fd))
        .collect::<Result<_, _>>()?;
    Ok(HalfLineSpectrum {
        t: p.t,
        mu: p.mu,
        bc: p.bc,
        eigenvalues: pairs.iter().map(|e| e.lambda).collect(),
        residuals: pairs.iter().map(|e| e.residual).collect(),
        pairs,
        requested,
        resolved_count: resolved,
        warnings,
    })
}

/// First `k_max` eigenpairs.  Eigenvalues the discretization cannot
/// resolve are dropped and reported through `resolved_count`.
pub fn solve(p: &HalfLineProblem, k_max: usize) -> Result<HalfLineSpectrum, HalfLineError> {
    if k_max == 0 {
        return Err(HalfLineError::InvalidProblem(
            "k_max must be at least 1".into(),
        ));
    }
    let fd = fd_eigenvalues(p, k_max + 1);
    solve_indices(p, k_max, &fd)
}

/// All eigenpairs with λ ≤ `lambda_max`.
pub fn solve_below(
    p: &HalfLineProblem,
    lambda_max: f64,
) -> Result<HalfLineSpectrum, HalfLineError> {
    // FD eigenvalues sit above the exact ones by O(h²); pad the count so an
    // eigenvalue just under the cap is not lost, then filter.
    let count = fd_count_below(p, lambda_max * (1.0 + 1e-3));
    if count == 0 {
        return Ok(HalfLineSpectrum {
            t: p.t,
            mu: p.mu,
            bc: p.bc,
            eigenvalues: Vec::new(),
            residuals: Vec::new(),
            pairs: Vec::new(),
            requested: 0,
            resolved_count: 0,
            warnings: Vec::new(),
        });
    }
    let fd = fd_eigenvalues(p, count + 1);
    let mut s = solve_indices(p, count, &fd)?;
    let keep = s
        .eigenvalues
        .iter()
        .take_while(|l| **l <= lambda_max)
        .count();
    let all_resolved = s.resolved_count == count;
    s.pairs.truncate(keep);
    s.eigenvalues.truncate(keep);
    s.residuals.truncate(keep);
    s.requested = if all_resolved {
        keep
    } else {
        count.min(
            fd.iter()
                .take_while(|l| **l <= lambda_max * (1.0 + 1e-3))
                .count(),
        )
    };
    s.resolved_count = keep;
    Ok(s)
}

/// One row of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub t: f64,
    pub mu: f64,
    pub k: usize,
    pub lambda: f64,
    pub residual: f64,
}

/// Solves every (t, μ) combination in parallel; rows sorted by (t, μ, k).
pub fn sweep(
    template: &HalfLineProblem,
    t_grid: &[f64],
    mus: &[f64],
    k_max: usize,
) -> Result<Vec<SweepRecord>, HalfLineError> {
    let jobs: Vec<(f64, f64)> = t_grid
        .iter()
        .flat_map(|&t| mus.iter().map(move |&mu| (t, mu)))
        .collect();
    let results: Vec<Result<Vec<SweepRecord>, HalfLineError>> = jobs
        .par_iter()
        .map(|&(t, mu)| {
            let p = HalfLineProblem::new(t, mu, template.profile.clone(), template.bc)?;
            let s = solve(&p, k_max)?;
            Ok(s.pairs
                .iter()
                .map(|e| SweepRecord {
                    t,
                    mu,
                    k: e.k,
                    lambda: e.lambda,
                    residual: e.residual,
                })
                .collect())
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    rows.sort_by(|a, b| {
        a.t.total_cmp(&b.t)
            .then(a.mu.total_cmp(&b.mu))
            .then(a.k.cmp(&b.k))
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::WeightProfile;
    use std::f64::consts::PI;

    fn problem(t: f64, bc: Boundary) -> HalfLineProblem {
        HalfLineProblem::new(t, PI * PI, WeightProfile::exp2(), bc).unwrap()
    }

    #[test]
    fn fd_counts_are_monotone() {
        let p = problem(0.3, Boundary::Dirichlet);
        let ev = fd_eigenvalues(&p, 4);
        assert!(ev.windows(2).all(|w| w[1] > w[0]));
        assert!(ev[0] > PI * PI);
        assert_eq!(fd_count_below(&p, 0.5 * (ev[1] + ev[2])), 2);
    }

    #[test]
    fn shooting_agrees_with_fd_to_grid_error() {
        for bc in [Boundary::Dirichlet, Boundary::Neumann] {
            let p = problem(0.3, bc);
            let fd = fd_eigenvalues(&p, 3);
            let s = solve(&p, 2).unwrap();
            for (a, b) in s.eigenvalues.iter().zip(&fd) {
                assert!(((a - b) / a).abs() < 1e-3, "{bc}: {a} {b}");
            }
        }
    }

    #[test]
    fn neumann_below_dirichlet() {
        let d = solve(&problem(0.2, Boundary::Dirichlet), 2).unwrap();
        let n = solve(&problem(0.2, Boundary::Neumann), 2).unwrap();
        assert!(n.eigenvalues[0] < d.eigenvalues[0]);
        assert!(n.eigenvalues[0] > PI * PI);
    }

    #[test]
    fn boundary_conditions_hold() {
        let d = solve(&problem(0.25, Boundary::Dirichlet), 3).unwrap();
        for e in &d.pairs {
            assert!(e.w.values[0].abs() <= 1e-10, "{}", e.w.values[0]);
        }
        let n = solve(&problem(0.25, Boundary::Neumann), 3).unwrap();
        for e in &n.pairs {
            let d0 = e.w.first.as_ref().unwrap()[0];
            assert!(d0.abs() <= 1e-8, "{d0}");
        }
    }

    #[test]
    fn unresolvable_request_is_partial() {
        let p = HalfLineProblem::with_grid(
            0.5,
            PI * PI,
            WeightProfile::exp2(),
            Boundary::Dirichlet,
            8.0,
            0.02,
        )
        .unwrap();
        let s = solve(&p, 40).unwrap();
        assert!(s.is_partial());
        assert!(s.resolved_count >= 1);
        assert!(!s.warnings.is_empty());
    }

    #[test]
    fn coarse_grid_rejected() {
        let r = HalfLineProblem::with_grid(
            0.1,
            1.0,
            WeightProfile::exp2(),
            Boundary::Dirichlet,
            5.0,
            0.01,
        );
        assert!(matches!(r, Err(HalfLineError::InvalidProblem(_))));
    }
}
