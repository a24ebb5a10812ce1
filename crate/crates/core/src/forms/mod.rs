//! Finite-dimensional quadratic forms: symmetric pencils (A, M), ε-closeness,
//! spectral projectors, the quasimode inequalities, and eigenbranch tracking
//! for one-parameter families.

mod branches;
mod quasimode;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use thiserror::Error;

pub use branches::{
    integrability_diagnostic, track_branches, variational_check, AffineFamily, EigenBranch,
    FnFamily, IntegrabilityReport, IntegrabilitySample, PencilFamily, TabulatedFamily,
    TrackOptions, VariationalCheck,
};
pub use quasimode::{
    epsilon_closeness, quasimode_campaign, quasimode_suite, resolvent_check, spectral_projector,
    CampaignReport, InequalityCheck, QuasimodeReport,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormsError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix `{which}` is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { which: &'static str, asymmetry: f64 },
    #[error("matrix `{which}` is not positive definite")]
    NotPositiveDefinite { which: &'static str },
    #[error("pencil has no compared form q")]
    MissingQ,
    #[error("E = {energy} is not an eigenvalue of (Q, M); nearest is {nearest}")]
    NotAnEigenvalue { energy: f64, nearest: f64 },
    #[error("E = {energy} is not inside the open interval ({lo}, {hi})")]
    OnBoundary { energy: f64, lo: f64, hi: f64 },
    #[error("t-grid must be increasing with at least two points")]
    BadGrid,
    #[error("family file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("hypotheses not met: {}", .0.join("; "))]
    Hypotheses(Vec<String>),
    #[error("branch index {index} out of range for dimension {dim}")]
    BranchIndex { index: usize, dim: usize },
}

/// Relative asymmetry tolerance for A, Q and M.
pub const SYMMETRY_TOL: f64 = 1e-12;

fn check_symmetric(which: &'static str, m: &DMatrix<f64>) -> Result<(), FormsError> {
    if !m.is_square() {
        return Err(FormsError::Dimension(format!(
            "`{which}` is {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.amax().max(1.0);
    let asymmetry = (m - m.transpose()).amax();
    if asymmetry > SYMMETRY_TOL * scale {
        return Err(FormsError::NotSymmetric { which, asymmetry });
    }
    Ok(())
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Eigenvalues in ascending order with M-orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Eigen {
    pub fn vector(&self, i: usize) -> DVector<f64> {
        self.vectors.column(i).into_owned()
    }
}

/// Solves A x = λ M x through M = L Lᵀ and the symmetric problem for
/// L⁻¹ A L⁻ᵀ.
pub fn generalized_eigh(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Eigen, FormsError> {
    let chol = Cholesky::new(m.clone()).ok_or(FormsError::NotPositiveDefinite { which: "M" })?;
    generalized_eigh_with(a, &chol)
}

fn generalized_eigh_with(a: &DMatrix<f64>, chol: &Cholesky<f64, Dyn>) -> Result<Eigen, FormsError> {
    let l = chol.l();
    let n = a.nrows();
    // C = L⁻¹ A L⁻ᵀ
    let y = l
        .solve_lower_triangular(a)
        .ok_or(FormsError::NotPositiveDefinite { which: "M" })?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or(FormsError::NotPositiveDefinite { which: "M" })?;
    let eig = SymmetricEigen::new(symmetrize(c));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let z = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let lt = l.transpose();
    let vectors = lt
        .solve_upper_triangular(&z)
        .ok_or(FormsError::NotPositiveDefinite { which: "M" })?;
    Ok(Eigen { values, vectors })
}

/// The forms a (matrix A), optionally q (matrix Q), and the inner product M.
#[derive(Debug, Clone)]
pub struct FormPencil {
    a: DMatrix<f64>,
    m: DMatrix<f64>,
    q: Option<DMatrix<f64>>,
    chol: Cholesky<f64, Dyn>,
}

impl FormPencil {
    pub fn new(a: DMatrix<f64>, m: DMatrix<f64>) -> Result<Self, FormsError> {
        check_symmetric("A", &a)?;
        check_symmetric("M", &m)?;
        if a.nrows() != m.nrows() {
            return Err(FormsError::Dimension(format!(
                "A is {0}×{0}, M is {1}×{1}",
                a.nrows(),
                m.nrows()
            )));
        }
        let m = symmetrize(m);
        let chol =
            Cholesky::new(m.clone()).ok_or(FormsError::NotPositiveDefinite { which: "M" })?;
        Ok(Self {
            a: symmetrize(a),
            m,
            q: None,
            chol,
        })
    }

    /// Pencil with the identity inner product.
    pub fn standard(a: DMatrix<f64>) -> Result<Self, FormsError> {
        let n = a.nrows();
        Self::new(a, DMatrix::identity(n, n))
    }

    pub fn with_q(mut self, q: DMatrix<f64>) -> Result<Self, FormsError> {
        check_symmetric("Q", &q)?;
        if q.nrows() != self.dim() {
            return Err(FormsError::Dimension(format!(
                "Q is {0}×{0}, pencil is {1}",
                q.nrows(),
                self.dim()
            )));
        }
        self.q = Some(symmetrize(q));
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn m(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn q(&self) -> Option<&DMatrix<f64>> {
        self.q.as_ref()
    }

    /// Eigenpairs of (A, M).
    pub fn eigh(&self) -> Result<Eigen, FormsError> {
        generalized_eigh_with(&self.a, &self.chol)
    }

    /// Eigenpairs of (Q, M).
    pub fn eigh_q(&self) -> Result<Eigen, FormsError> {
        let q = self.q.as_ref().ok_or(FormsError::MissingQ)?;
        generalized_eigh_with(q, &self.chol)
    }

    /// a(u, v).
    pub fn a_form(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(&(&self.a * v))
    }

    /// ⟨u, v⟩ = uᵀ M v.
    pub fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(&(&self.m * v))
    }

    pub fn norm(&self, u: &DVector<f64>) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }

    /// Dual norm of the functional v ↦ rᵀv with respect to ‖·‖_M, i.e.
    /// √(rᵀ M⁻¹ r).
    pub fn dual_norm(&self, r: &DVector<f64>) -> f64 {
        let s = self
            .chol
            .l()
            .solve_lower_triangular(r)
            .expect("Cholesky factor is nonsingular");
        s.norm()
    }
}
