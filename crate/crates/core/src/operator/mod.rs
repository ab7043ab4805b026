//! Finite-dimensional complex-operator primitives.
//!
//! Everything here is dense: single systems are small (D ≤ 8) and composite
//! systems are bounded by a dimension cap (4096 by default).

pub(crate) mod json;
pub(crate) mod linalg;
mod random;

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use json::{MatrixJson, StateJson};
pub use linalg::{
    hermitian_eigenvalues, kron, max_abs_diff, partial_trace, permute_subsystems, tensor,
    tensor_capped, tensor_power, trace_distance,
};
pub use random::{haar_ket, haar_unitary, random_basis, sample_density, Ensemble};

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

/// Largest composite dimension materialized by default.
pub const DEFAULT_COMPOSITE_CAP: usize = 4096;

#[cfg(test)]
pub(crate) fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn modulus<T: Real>(z: Complex<T>) -> T {
    z.norm_sqr().sqrt()
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        Err(Error::InvalidDimension(dim))
    } else {
        Ok(())
    }
}

fn trace_of<T: Real>(m: &CMatrix<T>) -> Complex<T> {
    m.diagonal().iter().fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
}

fn hermiticity_residual<T: Real>(m: &CMatrix<T>) -> T {
    max_abs_diff(m, &m.adjoint())
}

/// Normalized state vector |ψ⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket<T: Real = f64> {
    amplitudes: CVector<T>,
}

impl<T: Real> Ket<T> {
    pub fn new(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let v = CVector::from_vec(amplitudes);
        let norm_sq: T = v.iter().map(|a| a.norm_sqr()).fold(T::zero(), |a, b| a + b);
        let residual = (norm_sq - T::one()).abs();
        if residual > T::tolerance() {
            return Err(Error::Invariant {
                invariant: "ket normalization",
                residual: residual.as_f64(),
            });
        }
        Ok(Self { amplitudes: v })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let v = CVector::from_vec(amplitudes);
        let norm = v.norm();
        if norm <= T::zero() {
            return Err(Error::Invariant {
                invariant: "ket normalization",
                residual: 1.0,
            });
        }
        Ok(Self { amplitudes: v.unscale(norm) })
    }

    /// Computational basis vector |j⟩.
    pub fn basis(dim: usize, j: usize) -> Result<Self> {
        check_dim(dim)?;
        if j >= dim {
            return Err(Error::OutcomeOutOfRange { index: j, dim });
        }
        let mut v = CVector::zeros(dim);
        v[j] = Complex::new(T::one(), T::zero());
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector<T> {
        &self.amplitudes
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Ket<T>) -> Complex<T> {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn projector(&self) -> Projector<T> {
        Projector {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

/// Rank-1 orthogonal projector |ψ⟩⟨ψ|.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector<T: Real = f64> {
    matrix: CMatrix<T>,
}

impl<T: Real> Projector<T> {
    /// Validates hermiticity, idempotence and unit trace.
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Malformed("projector matrix is not square".into()));
        }
        check_dim(matrix.nrows())?;
        let tol = T::tolerance();
        let herm = hermiticity_residual(&matrix);
        if herm > tol {
            return Err(Error::Invariant {
                invariant: "projector hermiticity",
                residual: herm.as_f64(),
            });
        }
        let idem = max_abs_diff(&(&matrix * &matrix), &matrix);
        if idem > tol {
            return Err(Error::Invariant {
                invariant: "projector idempotence",
                residual: idem.as_f64(),
            });
        }
        let tr = modulus(trace_of(&matrix) - Complex::new(T::one(), T::zero()));
        if tr > tol {
            return Err(Error::Invariant {
                invariant: "projector rank one (unit trace)",
                residual: tr.as_f64(),
            });
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    /// Phase-free equality: compares matrices, not kets.
    pub fn approx_eq(&self, other: &Projector<T>, tol: T) -> bool {
        self.dim() == other.dim() && max_abs_diff(&self.matrix, &other.matrix) <= tol
    }

    /// A unit vector spanning the range.
    pub fn ket(&self) -> Ket<T> {
        // The column with the largest diagonal entry is a nonzero multiple of |ψ⟩.
        let j = (0..self.dim())
            .max_by(|&a, &b| {
                self.matrix[(a, a)]
                    .re
                    .partial_cmp(&self.matrix[(b, b)].re)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(0);
        let col: Vec<_> = self.matrix.column(j).iter().copied().collect();
        Ket::normalized(col).expect("nonzero column of a rank-1 projector")
    }
}

/// A complete set of mutually orthogonal rank-1 projectors: one quantum question.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis<T: Real = f64> {
    projectors: Vec<Projector<T>>,
}

impl<T: Real> MeasurementBasis<T> {
    pub fn new(projectors: Vec<Projector<T>>) -> Result<Self> {
        let dim = projectors.first().map(Projector::dim).unwrap_or(0);
        check_dim(dim)?;
        if projectors.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: projectors.len(),
            });
        }
        if let Some(p) = projectors.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        let tol = T::tolerance();
        let zero = CMatrix::<T>::zeros(dim, dim);
        for (i, a) in projectors.iter().enumerate() {
            for b in &projectors[i + 1..] {
                let r = max_abs_diff(&(a.matrix() * b.matrix()), &zero);
                if r > tol {
                    return Err(Error::Invariant {
                        invariant: "basis orthogonality",
                        residual: r.as_f64(),
                    });
                }
            }
        }
        let sum = projectors
            .iter()
            .fold(zero, |acc, p| acc + p.matrix());
        let r = max_abs_diff(&sum, &CMatrix::identity(dim, dim));
        if r > tol {
            return Err(Error::Invariant {
                invariant: "basis completeness",
                residual: r.as_f64(),
            });
        }
        Ok(Self { projectors })
    }

    pub fn from_kets(kets: &[Ket<T>]) -> Result<Self> {
        Self::new(kets.iter().map(Ket::projector).collect())
    }

    /// Columns of a unitary as basis vectors.
    pub fn from_unitary(u: &CMatrix<T>) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::Malformed("unitary is not square".into()));
        }
        let kets = u
            .column_iter()
            .map(|col| Ket::new(col.iter().copied().collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_kets(&kets)
    }

    pub fn computational(dim: usize) -> Result<Self> {
        let kets = (0..dim).map(|j| Ket::basis(dim, j)).collect::<Result<Vec<_>>>()?;
        Self::from_kets(&kets)
    }

    pub fn dim(&self) -> usize {
        self.projectors.len()
    }

    pub fn projectors(&self) -> &[Projector<T>] {
        &self.projectors
    }
}

/// Hermitian, positive-semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator<T: Real = f64> {
    matrix: CMatrix<T>,
}

impl<T: Real> DensityOperator<T> {
    /// Validates all three invariants, naming the first one violated.
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        Self::validate(&matrix)?;
        Ok(Self { matrix })
    }

    /// Checks hermiticity, eigenvalue floor and unit trace at the default tolerance.
    pub fn validate(matrix: &CMatrix<T>) -> Result<()> {
        if !matrix.is_square() {
            return Err(Error::Malformed(format!(
                "matrix is {}x{}, not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        check_dim(matrix.nrows())?;
        let tol = T::tolerance();
        let herm = hermiticity_residual(matrix);
        if herm > tol {
            return Err(Error::Invariant {
                invariant: "hermiticity",
                residual: herm.as_f64(),
            });
        }
        let tr = modulus(trace_of(matrix) - Complex::new(T::one(), T::zero()));
        if tr > tol {
            return Err(Error::Invariant {
                invariant: "unit trace",
                residual: tr.as_f64(),
            });
        }
        let min_eig = hermitian_eigenvalues(matrix)
            .iter()
            .copied()
            .fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(b));
        if min_eig < -tol {
            return Err(Error::Invariant {
                invariant: "positive semidefiniteness",
                residual: (-min_eig).as_f64(),
            });
        }
        Ok(())
    }

    /// Caller guarantees the invariants (products and mixtures of valid states).
    pub(crate) fn from_matrix_unchecked(matrix: CMatrix<T>) -> Self {
        Self { matrix }
    }

    /// Explicit repair: symmetrize, clip negative eigenvalues, renormalize trace.
    pub fn repair(matrix: &CMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Malformed("matrix is not square".into()));
        }
        check_dim(matrix.nrows())?;
        let half = T::lit(0.5);
        let h = (matrix + matrix.adjoint()).map(|z| z * half);
        let n = h.nrows();
        let eig = h.symmetric_eigen();
        let clipped: Vec<T> = eig.eigenvalues.iter().map(|&l| l.max(T::zero())).collect();
        let total = clipped.iter().fold(T::zero(), |a, &b| a + b);
        if total <= T::zero() {
            return Err(Error::Invariant {
                invariant: "positive semidefiniteness",
                residual: 1.0,
            });
        }
        let mut out = CMatrix::zeros(n, n);
        for (k, &l) in clipped.iter().enumerate() {
            if l > T::zero() {
                let v = eig.eigenvectors.column(k);
                out += (v * v.adjoint()).map(|z| z * (l / total));
            }
        }
        let out = (&out + out.adjoint()).map(|z| z * half);
        Ok(Self { matrix: out })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let w = T::one() / T::from_usize(dim).unwrap();
        Ok(Self {
            matrix: CMatrix::from_diagonal_element(dim, dim, Complex::new(w, T::zero())),
        })
    }

    pub fn pure(ket: &Ket<T>) -> Self {
        Self {
            matrix: ket.projector().matrix,
        }
    }

    pub fn from_projector(p: &Projector<T>) -> Self {
        Self {
            matrix: p.matrix.clone(),
        }
    }

    /// diag(p_1, …, p_D) for a probability vector.
    pub fn diagonal(probs: &[T]) -> Result<Self> {
        let m = CMatrix::from_diagonal(&CVector::from_iterator(
            probs.len(),
            probs.iter().map(|&p| Complex::new(p, T::zero())),
        ));
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    /// tr(ρ²)
    pub fn purity(&self) -> T {
        (&self.matrix * &self.matrix)
            .diagonal()
            .iter()
            .fold(T::zero(), |a, z| a + z.re)
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Convex combination Σ w_j ρ_j; weights must already be a distribution.
    pub fn mixture<'a, I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (T, &'a DensityOperator<T>)>,
        T: 'a,
    {
        let mut m = CMatrix::zeros(dim, dim);
        for (w, rho) in terms {
            m += rho.matrix.map(|z| z * w);
        }
        Self { matrix: m }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ket_rejects_unnormalized() {
        let err = Ket::<f64>::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::Invariant { invariant: "ket normalization", .. }));
        assert!(matches!(
            Ket::<f64>::new(vec![c(1.0, 0.0)]),
            Err(Error::InvalidDimension(1))
        ));
    }

    #[test]
    fn projector_checks() {
        let plus = Ket::<f64>::normalized(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(Projector::new(plus.projector().matrix().clone()).is_ok());
        let not_idem = CMatrix::<f64>::from_diagonal_element(2, 2, c(0.5, 0.0));
        let err = Projector::new(not_idem).unwrap_err();
        assert!(matches!(err, Error::Invariant { invariant: "projector idempotence", .. }));
        let rank2 = CMatrix::<f64>::identity(2, 2);
        assert!(matches!(
            Projector::new(rank2),
            Err(Error::Invariant { invariant: "projector rank one (unit trace)", .. })
        ));
    }

    #[test]
    fn projector_ket_is_phase_free() {
        let k = Ket::<f64>::normalized(vec![c(0.0, 1.0), c(2.0, -1.0), c(0.5, 0.5)]).unwrap();
        let p = k.projector();
        let back = p.ket().projector();
        assert!(p.approx_eq(&back, 1e-12));
    }

    #[test]
    fn basis_rejects_non_orthogonal() {
        let zero = Ket::<f64>::basis(2, 0).unwrap();
        let plus = Ket::normalized(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let err = MeasurementBasis::from_kets(&[zero, plus]).unwrap_err();
        assert!(matches!(err, Error::Invariant { invariant: "basis orthogonality", .. }));
        let zero = Ket::<f64>::basis(3, 0).unwrap();
        let one = Ket::<f64>::basis(3, 1).unwrap();
        assert!(MeasurementBasis::from_kets(&[zero, one]).is_err());
    }

    #[test]
    fn density_invariants_are_named() {
        let mut m = CMatrix::<f64>::from_diagonal_element(2, 2, c(0.5, 0.0));
        m[(0, 1)] = c(0.1, 0.0);
        let err = DensityOperator::new(m).unwrap_err();
        assert!(matches!(err, Error::Invariant { invariant: "hermiticity", .. }));

        let m = CMatrix::<f64>::from_diagonal(&CVector::from_vec(vec![c(1.2, 0.0), c(-0.2, 0.0)]));
        match DensityOperator::new(m.clone()).unwrap_err() {
            Error::Invariant { invariant, residual } => {
                assert_eq!(invariant, "positive semidefiniteness");
                assert_abs_diff_eq!(residual, 0.2, epsilon = 1e-12);
            }
            e => panic!("unexpected {e:?}"),
        }
        let fixed = DensityOperator::repair(&m).unwrap();
        assert_abs_diff_eq!(fixed.matrix()[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fixed.matrix()[(1, 1)].re, 0.0, epsilon = 1e-12);

        let m = CMatrix::<f64>::from_diagonal_element(2, 2, c(0.6, 0.0));
        assert!(matches!(
            DensityOperator::new(m),
            Err(Error::Invariant { invariant: "unit trace", .. })
        ));
    }

    #[test]
    fn single_precision_states() {
        let rho = DensityOperator::<f32>::diagonal(&[0.25, 0.75]).unwrap();
        assert!((rho.purity() - 0.625).abs() < 1e-6);
        let mixed = DensityOperator::<f32>::maximally_mixed(2).unwrap();
        let t = tensor(&rho, &mixed).unwrap();
        assert_eq!(t.dim(), 4);
        let back = partial_trace(&t, &[2, 2], &[0]).unwrap();
        assert!(max_abs_diff(back.matrix(), rho.matrix()) < 1e-6);
    }
}
