//! Shift-invert Lanczos for the lowest eigenvalues of a sparse pencil K x = λ M x.
//!
//! The operator (K − σM)⁻¹M is self-adjoint in the M inner product, and its
//! largest eigenvalues 1/(λ − σ) belong to the λ nearest σ. Lanczos runs with
//! full M-reorthogonalization; converged Ritz vectors are locked, and a
//! deflated restart from a fresh random vector looks for eigenvalues that a
//! single Krylov space cannot see (second copies of multiple eigenvalues).
//!
//! K − σM is factored as a dense band: finite-element matrices numbered
//! column by column have a narrow profile, and the band storage needs no
//! index arrays.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use nalgebra_sparse::CscMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::DomainError;

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// σ, which must lie below the spectrum so that K − σM is positive
    /// definite.
    pub shift: f64,
    /// Relative Ritz residual accepted as converged.
    pub tol: f64,
    pub max_steps: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl LanczosOptions {
    pub fn with_shift(shift: f64) -> Self {
        Self {
            shift,
            tol: 1e-10,
            max_steps: 400,
            max_restarts: 4,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LanczosResult {
    pub values: Vec<f64>,
    #[serde(skip)]
    pub vectors: Vec<DVector<f64>>,
    /// ‖Kx − λMx‖ / (λ‖Mx‖) per pair.
    pub residuals: Vec<f64>,
    pub steps: usize,
    pub restarts: usize,
}

/// Cholesky factor of a symmetric positive definite band matrix, stored by
/// rows: `l[i·(b+1) + (j + b − i)]` holds L_ij for i − b ≤ j ≤ i.
pub struct BandCholesky {
    n: usize,
    b: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn factor(a: &CscMatrix<f64>) -> Result<Self, DomainError> {
        let n = a.nrows();
        let mut b = 0;
        for (col, lane) in a.col_iter().enumerate() {
            for &row in lane.row_indices() {
                b = b.max(row.abs_diff(col));
            }
        }
        let w = b + 1;
        let mut l = vec![0.0; n * w];
        for (col, lane) in a.col_iter().enumerate() {
            for (&row, &v) in lane.row_indices().iter().zip(lane.values()) {
                if row >= col {
                    l[row * w + col + b - row] += v;
                }
            }
        }
        for i in 0..n {
            let first = i.saturating_sub(b);
            for j in first..=i {
                let lo = first.max(j.saturating_sub(b));
                let (ri, rj) = (i * w + b - i, j * w + b - j);
                let dot: f64 = l[ri + lo..ri + j]
                    .iter()
                    .zip(&l[rj + lo..rj + j])
                    .map(|(x, y)| x * y)
                    .sum();
                let s = l[ri + j] - dot;
                if j == i {
                    if !(s > 0.0) {
                        return Err(DomainError::Factorization(format!(
                            "pivot {i} is {s:e}; the shifted matrix is not positive definite"
                        )));
                    }
                    l[ri + i] = s.sqrt();
                } else {
                    l[ri + j] = s / l[rj + j];
                }
            }
        }
        Ok(Self { n, b, l })
    }

    pub fn bandwidth(&self) -> usize {
        self.b
    }

    /// Overwrites `x` with A⁻¹x.
    pub fn solve_mut(&self, x: &mut DVector<f64>) {
        let (b, w) = (self.b, self.b + 1);
        for i in 0..self.n {
            let first = i.saturating_sub(b);
            let ri = i * w + b - i;
            let dot: f64 = self.l[ri + first..ri + i]
                .iter()
                .zip(x.as_slice()[first..i].iter())
                .map(|(p, q)| p * q)
                .sum();
            x[i] = (x[i] - dot) / self.l[ri + i];
        }
        for i in (0..self.n).rev() {
            let first = i.saturating_sub(b);
            let ri = i * w + b - i;
            x[i] /= self.l[ri + i];
            let xi = x[i];
            for (p, q) in self.l[ri + first..ri + i]
                .iter()
                .zip(x.as_mut_slice()[first..i].iter_mut())
            {
                *q -= p * xi;
            }
        }
    }
}

struct Locked {
    lambda: f64,
    x: DVector<f64>,
    mx: DVector<f64>,
}

/// The `n` smallest eigenpairs of (K, M), M-normalized.
pub fn shift_invert_lanczos(
    k: &CscMatrix<f64>,
    m: &CscMatrix<f64>,
    n: usize,
    opts: &LanczosOptions,
) -> Result<LanczosResult, DomainError> {
    let dim = k.nrows();
    if n == 0 || n > dim {
        return Err(DomainError::Argument(format!(
            "requested {n} eigenpairs of a pencil of dimension {dim}"
        )));
    }
    let shifted = k - &(m * opts.shift);
    let chol = BandCholesky::factor(&shifted)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked: Vec<Locked> = Vec::new();
    let mut steps = 0;
    let mut restarts = 0;
    loop {
        let verifying = locked.len() >= n;
        let want = if verifying { 1 } else { n - locked.len() };
        let run = lanczos_run(k, m, &chol, &locked, want, opts, &mut rng)?;
        steps += run.steps;
        let bound = if verifying {
            locked[n - 1].lambda
        } else {
            f64::INFINITY
        };
        let found_new = run.pairs.iter().any(|p| p.lambda < bound * (1.0 - 1e-12));
        locked.extend(run.pairs);
        locked.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        if verifying && !found_new {
            break;
        }
        restarts += 1;
        if restarts > opts.max_restarts {
            if locked.len() >= n {
                break;
            }
            return Err(DomainError::NoConvergence(format!(
                "{} of {n} eigenpairs after {restarts} restarts",
                locked.len()
            )));
        }
    }
    locked.truncate(n);
    let residuals = locked
        .iter()
        .map(|p| {
            let r = k * &p.x - &p.mx * p.lambda;
            r.norm() / (p.lambda.abs() * p.mx.norm())
        })
        .collect();
    Ok(LanczosResult {
        values: locked.iter().map(|p| p.lambda).collect(),
        vectors: locked.into_iter().map(|p| p.x).collect(),
        residuals,
        steps,
        restarts,
    })
}

struct Run {
    pairs: Vec<Locked>,
    steps: usize,
}

fn lanczos_run(
    k: &CscMatrix<f64>,
    m: &CscMatrix<f64>,
    chol: &BandCholesky,
    locked: &[Locked],
    want: usize,
    opts: &LanczosOptions,
    rng: &mut ChaCha8Rng,
) -> Result<Run, DomainError> {
    let dim = k.nrows();
    let max_steps = opts.max_steps.min(dim.saturating_sub(locked.len())).max(1);
    // classical Gram–Schmidt in the M inner product, twice; returns ‖w‖_M
    let orthogonalize = |w: &mut DVector<f64>, q: &[DVector<f64>]| {
        for _ in 0..2 {
            let mw = m * &*w;
            let cl: Vec<f64> = locked.iter().map(|p| p.x.dot(&mw)).collect();
            let cq: Vec<f64> = q.iter().map(|qi| qi.dot(&mw)).collect();
            for (p, c) in locked.iter().zip(cl) {
                w.axpy(-c, &p.x, 1.0);
            }
            for (qi, c) in q.iter().zip(cq) {
                w.axpy(-c, qi, 1.0);
            }
        }
        (m * &*w).dot(w).max(0.0).sqrt()
    };
    let mut w = DVector::from_fn(dim, |_, _| rng.gen::<f64>() - 0.5);
    let mut norm = orthogonalize(&mut w, &[]);
    let mut q: Vec<DVector<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut converged = None;
    for _ in 0..max_steps {
        if norm <= 1e-300 {
            break;
        }
        w /= norm;
        let mut next = m * &w;
        let a_vec = next.clone();
        q.push(w);
        chol.solve_mut(&mut next);
        let a = a_vec.dot(&next);
        norm = orthogonalize(&mut next, &q);
        alpha.push(a);
        beta.push(norm);
        w = next;
        let size = q.len();
        let exhausted = norm <= 1e-12 * a.abs() || size == max_steps;
        if size >= want && (size % 4 == 0 || exhausted) {
            let (theta, s) = tridiagonal_eigen(&alpha, &beta[..size - 1]);
            let ok = (0..want).all(|i| {
                let last = s[(size - 1, i)];
                (norm * last).abs() <= opts.tol * theta[i].abs()
            });
            if ok || exhausted {
                converged = Some((theta, s, ok));
                break;
            }
        }
    }
    let steps = q.len();
    let Some((theta, s, ok)) = converged else {
        return Err(DomainError::NoConvergence("Krylov space collapsed".into()));
    };
    let size = alpha.len();
    let mut pairs = Vec::new();
    for i in 0..size {
        let last = s[(size - 1, i)];
        if i >= want && (norm * last).abs() > opts.tol * theta[i].abs() {
            continue;
        }
        if theta[i] <= 0.0 {
            continue;
        }
        if !ok && i < want && (norm * last).abs() > 1e3 * opts.tol * theta[i].abs() {
            continue;
        }
        let mut x = DVector::zeros(dim);
        for (r, qr) in q.iter().enumerate() {
            x.axpy(s[(r, i)], qr, 1.0);
        }
        let mx = m * &x;
        let nrm = mx.dot(&x).sqrt();
        x /= nrm;
        let mx = mx / nrm;
        let lambda = (k * &x).dot(&x);
        pairs.push(Locked { lambda, x, mx });
    }
    if pairs.is_empty() {
        return Err(DomainError::NoConvergence(format!(
            "no Ritz pair converged in {steps} steps"
        )));
    }
    Ok(Run { pairs, steps })
}

/// Eigenvalues in descending order with matching eigenvectors as columns.
fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let n = alpha.len();
    let mut t = DMatrix::zeros(n, n);
    for i in 0..n {
        t[(i, i)] = alpha[i];
        if i + 1 < n {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}
