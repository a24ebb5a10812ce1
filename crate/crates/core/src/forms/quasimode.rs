//! ε-closeness, spectral projectors and the quasimode inequalities.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{generalized_eigh, Eigen, FormPencil, FormsError};

/// Smallest ε with |q(v,w) − a(v,w)| ≤ ε·√(a(v)a(w)): the spectral radius of
/// A^{−1/2}(Q − A)A^{−1/2}, computed as the largest |eigenvalue| of the pencil
/// (Q − A, A).
pub fn epsilon_closeness(pencil: &FormPencil) -> Result<f64, FormsError> {
    let q = pencil.q().ok_or(FormsError::MissingQ)?;
    let diff = q - pencil.a();
    let eig = generalized_eigh(&diff, pencil.a())
        .map_err(|_| FormsError::NotPositiveDefinite { which: "A" })?;
    Ok(eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

pub(crate) fn projector_from(eig: &Eigen, m: &DMatrix<f64>, lo: f64, hi: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let mut p = DMatrix::zeros(n, n);
    for (i, &l) in eig.values.iter().enumerate() {
        if l >= lo && l <= hi {
            let x = eig.vectors.column(i);
            p += &x * (x.transpose() * m);
        }
    }
    p
}

/// M-orthogonal projector onto the eigenvectors of (A, M) with eigenvalue in
/// [lo, hi]: P = Σ x xᵀ M.
pub fn spectral_projector(
    pencil: &FormPencil,
    lo: f64,
    hi: f64,
) -> Result<DMatrix<f64>, FormsError> {
    let eig = pencil.eigh()?;
    Ok(projector_from(&eig, pencil.m(), lo, hi))
}

/// One inequality `lhs ≤ rhs` with its verdict.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// False when the hypotheses of the statement do not hold; such checks
    /// count as satisfied.
    pub applicable: bool,
    pub satisfied: bool,
}

impl InequalityCheck {
    fn new(name: &str, lhs: f64, rhs: f64, scale: f64, applicable: bool) -> Self {
        let slack = 1e-9 * rhs.abs() + 1e-11 * scale.abs();
        let satisfied = !applicable || lhs <= rhs + slack;
        Self {
            name: name.to_owned(),
            lhs,
            rhs,
            applicable,
            satisfied,
        }
    }
}

/// Resolvent estimate: if δ = dist(E, spec a) > 0 then
/// ‖w‖ ≤ ‖(A − E M)w‖_{M⁻¹} / δ.
pub fn resolvent_check(
    pencil: &FormPencil,
    energy: f64,
    w: &DVector<f64>,
) -> Result<InequalityCheck, FormsError> {
    let eig = pencil.eigh()?;
    Ok(resolvent_with(pencil, &eig, energy, w))
}

fn resolvent_with(
    pencil: &FormPencil,
    eig: &Eigen,
    energy: f64,
    w: &DVector<f64>,
) -> InequalityCheck {
    let delta = eig
        .values
        .iter()
        .fold(f64::INFINITY, |m, l| m.min((l - energy).abs()));
    let r = pencil.a() * w - pencil.m() * w * energy;
    let eps_hat = pencil.dual_norm(&r);
    let norm = pencil.norm(w);
    InequalityCheck::new("resolvent", norm, eps_hat / delta, norm, delta > 0.0)
}

/// Both sides of each quasimode inequality for an eigenvector u of (Q, M)
/// with eigenvalue E, and the interval I = [lo, hi].
#[derive(Debug, Clone, Serialize)]
pub struct QuasimodeReport {
    pub energy: f64,
    pub interval: (f64, f64),
    pub epsilon: f64,
    /// Distance from E to the complement of I.
    pub delta: f64,
    /// ε·(1 + E/δ); the closeness statement needs this below 1.
    pub kappa: f64,
    pub checks: Vec<InequalityCheck>,
}

impl QuasimodeReport {
    pub fn all_satisfied(&self) -> bool {
        self.checks.iter().all(|c| c.satisfied)
    }
}

pub fn quasimode_suite(
    pencil: &FormPencil,
    energy: f64,
    lo: f64,
    hi: f64,
) -> Result<QuasimodeReport, FormsError> {
    let delta = (energy - lo).min(hi - energy);
    if !(delta > 0.0) {
        return Err(FormsError::OnBoundary { energy, lo, hi });
    }
    let eig_q = pencil.eigh_q()?;
    let (idx, nearest) = eig_q
        .values
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - energy).abs().total_cmp(&(b.1 - energy).abs()))
        .map(|(i, v)| (i, *v))
        .ok_or_else(|| FormsError::Dimension("empty pencil".into()))?;
    if (nearest - energy).abs() > 1e-9 * (1.0 + energy.abs()) {
        return Err(FormsError::NotAnEigenvalue { energy, nearest });
    }
    let u = eig_q.vector(idx);
    let epsilon = epsilon_closeness(pencil)?;
    let eig_a = pencil.eigh()?;
    Ok(suite_with(
        pencil, &eig_a, &u, energy, lo, hi, epsilon, delta,
    ))
}

#[allow(clippy::too_many_arguments)]
fn suite_with(
    pencil: &FormPencil,
    eig_a: &Eigen,
    u: &DVector<f64>,
    energy: f64,
    lo: f64,
    hi: f64,
    epsilon: f64,
    delta: f64,
) -> QuasimodeReport {
    let p = projector_from(eig_a, pencil.m(), lo, hi);
    let chi = &p * u;
    let rest = u - &chi;
    let a_u = pencil.a_form(u, u);
    let kappa = epsilon * (1.0 + energy / delta);
    let mut checks = Vec::with_capacity(5);

    checks.push(InequalityCheck::new(
        "quasi_estimate",
        pencil.a_form(&rest, &rest),
        epsilon * epsilon * a_u * (1.0 + energy / delta).powi(2),
        a_u,
        true,
    ));
    checks.push(InequalityCheck::new(
        "projection_orthogonality",
        pencil.a_form(&rest, &chi).abs(),
        0.0,
        a_u,
        true,
    ));
    let norm_chi = pencil.norm(&chi);
    checks.push(InequalityCheck::new(
        "norm_of_projection",
        (1.0 - kappa * kappa) * a_u / hi,
        norm_chi * norm_chi,
        pencil.norm(u).powi(2),
        true,
    ));
    // sup_v |a(χ, v) − E⟨χ, v⟩| / ‖v‖ is the dual norm of (A − E M)χ.
    let applicable = kappa < 1.0;
    let residual = pencil.dual_norm(&(pencil.a() * &chi - pencil.m() * &chi * energy));
    let bound = if applicable {
        epsilon * hi / (1.0 - kappa * kappa).sqrt() * norm_chi
    } else {
        f64::INFINITY
    };
    checks.push(InequalityCheck::new(
        "closeness",
        residual,
        bound,
        hi * pencil.norm(u),
        applicable,
    ));
    checks.push(resolvent_with(pencil, eig_a, energy, u));

    QuasimodeReport {
        energy,
        interval: (lo, hi),
        epsilon,
        delta,
        kappa,
        checks,
    }
}

/// Aggregate of a seeded random campaign.
#[derive(Debug, Clone, Serialize)]
pub struct CampaignReport {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Draws rejected because ε·(1 + E/δ) ≥ 1 or the interval left [0, ∞).
    pub resampled: usize,
    pub violations: BTreeMap<String, usize>,
    /// Largest lhs/rhs over the campaign, per inequality.
    pub worst_ratio: BTreeMap<String, f64>,
    pub total_violations: usize,
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&b + b.transpose()) * 0.5
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    &b * b.transpose() / n as f64 + DMatrix::identity(n, n) * floor
}

/// Random n×n trials (A, Q, M, I, E) with ε·(1 + E/δ) < 1, each checked with
/// the full quasimode suite plus a resolvent check on a random vector.
pub fn quasimode_campaign(
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<CampaignReport, FormsError> {
    if n == 0 {
        return Err(FormsError::Dimension("n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = BTreeMap::new();
    let mut worst_ratio: BTreeMap<String, f64> = BTreeMap::new();
    let mut resampled = 0;
    let mut done = 0;
    while done < trials {
        let m = random_spd(&mut rng, n, 0.5);
        let a = random_spd(&mut rng, n, 0.05);
        // Perturbation H = L S Lᵀ with ‖S‖₂ = s makes Q exactly s-close to A.
        let s_target = rng.gen_range(0.0..0.25);
        let s = random_symmetric(&mut rng, n);
        let s_norm = s.clone().symmetric_eigenvalues().amax();
        let l = nalgebra::Cholesky::new(a.clone())
            .ok_or(FormsError::NotPositiveDefinite { which: "A" })?
            .l();
        let h = &l * (s * (s_target / s_norm)) * l.transpose();
        let q = (&a + &h + (&a + &h).transpose()) * 0.5;
        let pencil = FormPencil::new(a, m)?.with_q(q)?;
        let eig_q = pencil.eigh_q()?;
        let j = rng.gen_range(0..n);
        let energy = eig_q.values[j];
        let epsilon = epsilon_closeness(&pencil)?;
        let min_delta = epsilon * energy / (1.0 - epsilon).max(1e-300);
        let delta = min_delta * rng.gen_range(1.05..4.0);
        let (fl, fh) = if rng.gen_bool(0.5) {
            (1.0, rng.gen_range(1.0..3.0))
        } else {
            (rng.gen_range(1.0..3.0), 1.0)
        };
        let (lo, hi) = (energy - fl * delta, energy + fh * delta);
        if lo < 0.0 || epsilon >= 1.0 || epsilon * (1.0 + energy / delta) >= 1.0 || delta <= 0.0 {
            resampled += 1;
            continue;
        }
        let eig_a = pencil.eigh()?;
        let u = eig_q.vector(j);
        let mut report = suite_with(&pencil, &eig_a, &u, energy, lo, hi, epsilon, delta);
        let w = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let mut random = resolvent_with(&pencil, &eig_a, energy, &w);
        random.name = "resolvent_random".into();
        report.checks.push(random);
        for c in &report.checks {
            let entry = violations.entry(c.name.clone()).or_insert(0);
            if !c.satisfied {
                *entry += 1;
            }
            if c.applicable && c.rhs > 0.0 && c.rhs.is_finite() {
                let r = worst_ratio.entry(c.name.clone()).or_insert(0.0);
                *r = r.max(c.lhs / c.rhs);
            }
        }
        done += 1;
    }
    let total_violations = violations.values().sum();
    Ok(CampaignReport {
        n,
        trials,
        seed,
        resampled,
        violations,
        worst_ratio,
        total_violations,
    })
}
