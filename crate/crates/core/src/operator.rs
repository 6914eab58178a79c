//! Dense complex operators on `(C^q)^{⊗N}`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default absolute tolerance for equality assertions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A dense matrix acting on `n_sites` qudits of dimension `q`.
///
/// Basis states are ordered row-major with site 0 as the most significant digit.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    q: u64,
    n_sites: usize,
    mat: DMatrix<Complex64>,
    tol: f64,
}

impl DenseOperator {
    pub fn new(q: u64, n_sites: usize, mat: DMatrix<Complex64>) -> Result<Self> {
        let dim = dimension(q, n_sites)?;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: mat.nrows().max(mat.ncols()),
            });
        }
        Ok(DenseOperator {
            q,
            n_sites,
            mat,
            tol: DEFAULT_TOL,
        })
    }

    pub fn identity(q: u64, n_sites: usize) -> Result<Self> {
        let dim = dimension(q, n_sites)?;
        Self::new(q, n_sites, DMatrix::identity(dim, dim))
    }

    pub fn zeros(q: u64, n_sites: usize) -> Result<Self> {
        let dim = dimension(q, n_sites)?;
        Self::new(q, n_sites, DMatrix::zeros(dim, dim))
    }

    /// Maximally mixed state `I / q^N`.
    pub fn maximally_mixed(q: u64, n_sites: usize) -> Result<Self> {
        let mut op = Self::identity(q, n_sites)?;
        let d = op.dim() as f64;
        op.mat /= Complex64::new(d, 0.0);
        Ok(op)
    }

    /// Projector `|ψ⟩⟨ψ|`.
    pub fn from_pure(q: u64, n_sites: usize, amps: &[Complex64]) -> Result<Self> {
        let dim = dimension(q, n_sites)?;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: amps.len(),
            });
        }
        let mat = DMatrix::from_fn(dim, dim, |i, j| amps[i] * amps[j].conj());
        Self::new(q, n_sites, mat)
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    #[inline]
    pub fn tol(&self) -> f64 {
        self.tol
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.mat[(i, j)]
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator {
            mat: self.mat.adjoint(),
            ..self.clone()
        }
    }

    pub fn mul(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.check_same_shape(other)?;
        Ok(DenseOperator {
            mat: &self.mat * &other.mat,
            ..self.clone()
        })
    }

    /// Tensor product `self ⊗ other`, with `self` on the leading sites.
    pub fn kron(&self, other: &DenseOperator) -> Result<DenseOperator> {
        if self.q != other.q {
            return Err(Error::Validation(format!(
                "cannot tensor operators over q={} and q={}",
                self.q, other.q
            )));
        }
        dimension(self.q, self.n_sites + other.n_sites)?;
        Ok(DenseOperator {
            q: self.q,
            n_sites: self.n_sites + other.n_sites,
            mat: self.mat.kronecker(&other.mat),
            tol: self.tol.max(other.tol),
        })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DenseOperator) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= self.tol
    }

    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.mat.adjoint() * &self.mat;
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() <= self.tol
    }

    /// Checks Hermiticity and unit trace within the operator tolerance.
    pub fn validate_density(&self) -> Result<()> {
        let herm = self.hermiticity_defect();
        if herm > self.tol {
            return Err(Error::Validation(format!(
                "density matrix is not Hermitian (defect {herm:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > self.tol {
            return Err(Error::Validation(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        Ok(())
    }

    fn check_same_shape(&self, other: &DenseOperator) -> Result<()> {
        if self.q != other.q || self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }
}

/// Hilbert-space dimension `q^n`, failing if it does not fit in `usize`.
pub fn dimension(q: u64, n_sites: usize) -> Result<usize> {
    (q as usize)
        .checked_pow(n_sites as u32)
        .ok_or(Error::Guard {
            what: "Hilbert-space dimension",
            needed: u128::MAX,
            limit: usize::MAX as u128,
        })
}
