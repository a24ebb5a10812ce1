//! Dirichlet eigenvalues of T_t = conv{(0,0), (1,0), (1,t)} by continuous
//! piecewise-linear elements.
//!
//! The mesh is the image of a structured grid under (ξ, η) ↦ (ξ, tξη): column
//! i sits at x = i/nₓ and carries n_y cells along rays from the apex, so every
//! column resolves the local height with the same number of cells. Free nodes
//! are numbered column by column, which keeps the bandwidth near n_y.

use std::f64::consts::PI;

use nalgebra_sparse::{CooMatrix, CscMatrix};
use serde::Serialize;

use super::lanczos::{shift_invert_lanczos, LanczosOptions};
use super::DomainError;

/// Fewest cells accepted across the height of the triangle.
pub const MIN_ACROSS: usize = 8;

#[derive(Debug, Clone, Serialize)]
pub struct TriangleMesh {
    pub t: f64,
    /// Target size; the cells are 1/nₓ long and t·x/n_y high.
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub vertices: Vec<[f64; 2]>,
    pub elements: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
}

impl TriangleMesh {
    /// nₓ = ⌈1/h⌉ columns and n_y = ⌈t/h⌉ cells across; refuses fewer than
    /// [`MIN_ACROSS`] cells across.
    pub fn new(t: f64, h: f64) -> Result<Self, DomainError> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(DomainError::Argument(format!(
                "t must lie in (0, 1], got {t}"
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(DomainError::Argument(format!(
                "mesh size must be positive, got {h}"
            )));
        }
        let nx = (1.0 / h - 1e-9).ceil().max(1.0) as usize;
        let ny = (t / h - 1e-9).ceil().max(1.0) as usize;
        Self::structured(t, nx, ny, h)
    }

    /// nₓ columns with n_y cells across each.
    pub fn structured(t: f64, nx: usize, ny: usize, h: f64) -> Result<Self, DomainError> {
        if ny < MIN_ACROSS {
            return Err(DomainError::Underresolved {
                across: ny,
                required: MIN_ACROSS,
                h_required: t / MIN_ACROSS as f64,
            });
        }
        if nx < 2 {
            return Err(DomainError::Argument("need at least two columns".into()));
        }
        let mut vertices = vec![[0.0, 0.0]];
        let mut boundary = vec![true];
        for i in 1..=nx {
            let x = i as f64 / nx as f64;
            for j in 0..=ny {
                vertices.push([x, t * x * j as f64 / ny as f64]);
                boundary.push(i == nx || j == 0 || j == ny);
            }
        }
        let node = |i: usize, j: usize| 1 + (i - 1) * (ny + 1) + j;
        let mut elements = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            elements.push([0, node(1, j), node(1, j + 1)]);
        }
        for i in 1..nx {
            for j in 0..ny {
                let (a, b) = (node(i, j), node(i + 1, j));
                let (c, d) = (node(i + 1, j + 1), node(i, j + 1));
                elements.push([a, b, c]);
                elements.push([a, c, d]);
            }
        }
        Ok(Self {
            t,
            h,
            nx,
            ny,
            vertices,
            elements,
            boundary,
        })
    }

    /// Twice the signed area of element `e`.
    fn twice_area(&self, e: &[usize; 3]) -> f64 {
        let [p, q, r] = e.map(|i| self.vertices[i]);
        (q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1])
    }

    pub fn min_area(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| 0.5 * self.twice_area(e))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest over smallest element diameter.
    pub fn quasi_uniformity(&self) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for e in &self.elements {
            let p = e.map(|i| self.vertices[i]);
            let d = (0..3)
                .map(|a| {
                    let (u, v) = (p[a], p[(a + 1) % 3]);
                    (u[0] - v[0]).hypot(u[1] - v[1])
                })
                .fold(0.0, f64::max);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        hi / lo
    }

    pub fn free_count(&self) -> usize {
        self.boundary.iter().filter(|b| !**b).count()
    }

    /// Vertex CSV (`index,x,y,boundary`).
    pub fn vertex_csv(&self) -> String {
        let mut s = String::from("index,x,y,boundary\n");
        for (i, (v, b)) in self.vertices.iter().zip(&self.boundary).enumerate() {
            s.push_str(&format!(
                "{i},{:.16e},{:.16e},{}\n",
                v[0],
                v[1],
                u8::from(*b)
            ));
        }
        s
    }

    /// Element CSV (`index,a,b,c`).
    pub fn element_csv(&self) -> String {
        let mut s = String::from("index,a,b,c\n");
        for (i, e) in self.elements.iter().enumerate() {
            s.push_str(&format!("{i},{},{},{}\n", e[0], e[1], e[2]));
        }
        s
    }
}

/// Stiffness K and consistent mass M on the free nodes.
pub fn assemble(mesh: &TriangleMesh) -> (CscMatrix<f64>, CscMatrix<f64>) {
    let mut dof = vec![usize::MAX; mesh.vertices.len()];
    let mut n = 0;
    for (i, b) in mesh.boundary.iter().enumerate() {
        if !b {
            dof[i] = n;
            n += 1;
        }
    }
    let mut k = CooMatrix::new(n, n);
    let mut m = CooMatrix::new(n, n);
    for e in &mesh.elements {
        let p = e.map(|i| mesh.vertices[i]);
        let area2 = mesh.twice_area(e);
        // ∇φ_a = (y_b − y_c, x_c − x_b)/(2A)
        let grad: [[f64; 2]; 3] = std::array::from_fn(|a| {
            let (b, c) = (p[(a + 1) % 3], p[(a + 2) % 3]);
            [(b[1] - c[1]) / area2, (c[0] - b[0]) / area2]
        });
        let area = 0.5 * area2;
        for a in 0..3 {
            let ia = dof[e[a]];
            if ia == usize::MAX {
                continue;
            }
            for b in 0..3 {
                let ib = dof[e[b]];
                if ib == usize::MAX {
                    continue;
                }
                let kab = area * (grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1]);
                let mab = area / 12.0 * if a == b { 2.0 } else { 1.0 };
                k.push(ia, ib, kab);
                m.push(ia, ib, mab);
            }
        }
    }
    (CscMatrix::from(&k), CscMatrix::from(&m))
}

/// FEM eigenvalues on one mesh.
#[derive(Debug, Clone, Serialize)]
pub struct FemEigenvalues {
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub dofs: usize,
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub lanczos_steps: usize,
}

/// Shift below the spectrum: T_t lies inside [0,1]×[0,t], whose first
/// Dirichlet eigenvalue π²(1 + 1/t²) bounds λ₁(T_t) from below, and
/// conforming eigenvalues lie above the exact ones.
fn safe_shift(t: f64) -> f64 {
    0.99 * PI * PI * (1.0 + 1.0 / (t * t))
}

/// The `n` smallest FEM eigenvalues on `mesh`.
pub fn fem_eigenvalues(mesh: &TriangleMesh, n: usize) -> Result<FemEigenvalues, DomainError> {
    let (k, m) = assemble(mesh);
    let r = shift_invert_lanczos(&k, &m, n, &LanczosOptions::with_shift(safe_shift(mesh.t)))?;
    Ok(FemEigenvalues {
        h: mesh.h,
        nx: mesh.nx,
        ny: mesh.ny,
        dofs: k.nrows(),
        values: r.values,
        residuals: r.residuals,
        lanczos_steps: r.steps,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TriangleSpectrum {
    pub t: f64,
    pub h: f64,
    pub coarse: FemEigenvalues,
    pub fine: FemEigenvalues,
    /// (4λ_{h/2} − λ_h)/3.
    pub lambda_extrap: Vec<f64>,
    /// |λ_extrap − λ_{h/2}|, the Richardson estimate of the fine-mesh error.
    pub error_estimate: Vec<f64>,
    /// t²·λ_extrap.
    pub renormalized: Vec<f64>,
}

/// First `n` Dirichlet eigenvalues of T_t from meshes of size h and h/2.
pub fn triangle_spectrum(t: f64, n: usize, h: f64) -> Result<TriangleSpectrum, DomainError> {
    let coarse_mesh = TriangleMesh::new(t, h)?;
    richardson(t, n, coarse_mesh)
}

/// As [`triangle_spectrum`] on an nₓ × n_y grid and its uniform refinement,
/// for meshes stretched along the axis.
pub fn triangle_spectrum_grid(
    t: f64,
    n: usize,
    nx: usize,
    ny: usize,
) -> Result<TriangleSpectrum, DomainError> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(DomainError::Argument(format!(
            "t must lie in (0, 1], got {t}"
        )));
    }
    let coarse_mesh = TriangleMesh::structured(t, nx, ny, 1.0 / nx as f64)?;
    richardson(t, n, coarse_mesh)
}

fn richardson(
    t: f64,
    n: usize,
    coarse_mesh: TriangleMesh,
) -> Result<TriangleSpectrum, DomainError> {
    let h = coarse_mesh.h;
    let fine_mesh = TriangleMesh::structured(t, 2 * coarse_mesh.nx, 2 * coarse_mesh.ny, h / 2.0)?;
    let (coarse, fine) = rayon::join(
        || fem_eigenvalues(&coarse_mesh, n),
        || fem_eigenvalues(&fine_mesh, n),
    );
    let (coarse, fine) = (coarse?, fine?);
    let lambda_extrap: Vec<f64> = coarse
        .values
        .iter()
        .zip(&fine.values)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect();
    let error_estimate = lambda_extrap
        .iter()
        .zip(&fine.values)
        .map(|(e, f)| (e - f).abs())
        .collect();
    let renormalized = lambda_extrap.iter().map(|l| t * t * l).collect();
    Ok(TriangleSpectrum {
        t,
        h,
        coarse,
        fine,
        lambda_extrap,
        error_estimate,
        renormalized,
    })
}
