//! Dense complex-matrix helpers shared by the exact simulation core.

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Dense 2^n x 2^n matrix of sigma_x, built from the generalized
/// permutation action sigma_x |c> = i^{|a&b|} (-1)^{|b&c|} |c xor a>.
pub fn pauli_matrix(x: &PauliString) -> CMatrix {
    let dim = 1usize << x.n();
    let a = x.x_bits() as usize;
    let b = x.z_bits() as usize;
    let phase = match (x.x_bits() & x.z_bits()).count_ones() & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let mut m = CMatrix::zeros(dim, dim);
    for c in 0..dim {
        let sign = if ((b & c).count_ones() & 1) == 1 { -1.0 } else { 1.0 };
        m[(c ^ a, c)] = phase * sign;
    }
    m
}

/// Hermiticity check up to an absolute entrywise tolerance.
pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    for i in 0..m.nrows() {
        for j in 0..=i {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Eigendecomposition of a Hermitian matrix: M = V diag(vals) V^dagger.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix) -> Result<Self> {
        if !is_hermitian(m, 1e-9) {
            return Err(Error::validation("matrix is not Hermitian within 1e-9"));
        }
        let eig = m.clone().symmetric_eigen();
        Ok(HermitianEigen {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        })
    }

    /// Largest eigenvalue magnitude (the operator norm for Hermitian input).
    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    /// f(M) = V diag(f(vals)) V^dagger for a scalar function of the spectrum.
    pub fn apply(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let dim = self.values.len();
        let mut d = CMatrix::zeros(dim, dim);
        for (i, &v) in self.values.iter().enumerate() {
            d[(i, i)] = f(v);
        }
        &self.vectors * d * self.vectors.adjoint()
    }
}

/// Operator (spectral) norm of an arbitrary matrix via sqrt of the largest
/// eigenvalue of M^dagger M.
pub fn operator_norm(m: &CMatrix) -> f64 {
    let gram = m.adjoint() * m;
    let eig = gram.symmetric_eigen();
    eig.eigenvalues
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.max(0.0)))
        .sqrt()
}

/// Unitarity deviation ||U U^dagger - I||.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let dim = u.nrows();
    (u * u.adjoint() - identity(dim)).norm()
}

/// Swap operator F on H x H with F |x y> = |y x>.
pub fn swap_operator(dim: usize) -> CMatrix {
    let mut f = CMatrix::zeros(dim * dim, dim * dim);
    for x in 0..dim {
        for y in 0..dim {
            f[(y * dim + x, x * dim + y)] = Complex64::new(1.0, 0.0);
        }
    }
    f
}
