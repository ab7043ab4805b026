use num_complex::Complex;

use super::{modulus, CMatrix, DensityOperator, DEFAULT_COMPOSITE_CAP};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| modulus(x - y))
        .fold(T::zero(), |m, d| m.max(d))
}

/// Eigenvalues of a Hermitian matrix (only the Hermitian part is used).
pub fn hermitian_eigenvalues<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    let half = T::lit(0.5);
    let h = (m + m.adjoint()).map(|z| z * half);
    h.symmetric_eigenvalues().iter().copied().collect()
}

/// Kronecker product of two matrices.
pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

/// ρ ⊗ σ, capped at [`DEFAULT_COMPOSITE_CAP`].
pub fn tensor<T: Real>(a: &DensityOperator<T>, b: &DensityOperator<T>) -> Result<DensityOperator<T>> {
    tensor_capped(a, b, DEFAULT_COMPOSITE_CAP)
}

pub fn tensor_capped<T: Real>(
    a: &DensityOperator<T>,
    b: &DensityOperator<T>,
    cap: usize,
) -> Result<DensityOperator<T>> {
    let requested = a.dim().saturating_mul(b.dim());
    if requested > cap {
        return Err(Error::CompositeCapExceeded { requested, cap });
    }
    Ok(DensityOperator::from_matrix_unchecked(kron(a.matrix(), b.matrix())))
}

/// ρ^{⊗n}; `n = 0` is rejected since the empty product is not a state of dimension ≥ 2.
pub fn tensor_power<T: Real>(rho: &DensityOperator<T>, n: usize, cap: usize) -> Result<DensityOperator<T>> {
    if n == 0 {
        return Err(Error::Malformed("tensor power of order 0".into()));
    }
    let requested = composite_dim(rho.dim(), n).unwrap_or(usize::MAX);
    if requested > cap {
        return Err(Error::CompositeCapExceeded { requested, cap });
    }
    let mut out = rho.matrix().clone();
    for _ in 1..n {
        out = kron(&out, rho.matrix());
    }
    Ok(DensityOperator::from_matrix_unchecked(out))
}

pub(crate) fn composite_dim(d: usize, n: usize) -> Option<usize> {
    (0..n).try_fold(1usize, |acc, _| acc.checked_mul(d))
}

/// Mixed-radix digits of `index`, subsystem 0 most significant (Kronecker order).
fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in dims.iter().enumerate().rev() {
        out[slot] = index % d;
        index /= d;
    }
    out
}

fn compose(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

fn check_dims(n: usize, dims: &[usize]) -> Result<()> {
    let prod = dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d));
    if dims.is_empty() || dims.contains(&0) || prod != Some(n) {
        return Err(Error::Malformed(format!(
            "subsystem dims {dims:?} inconsistent with matrix size {n}"
        )));
    }
    Ok(())
}

/// Reduced operator on the subsystems listed in `keep` (0-based, any order;
/// the result keeps them in ascending order).
pub fn partial_trace<T: Real>(
    rho: &DensityOperator<T>,
    dims: &[usize],
    keep: &[usize],
) -> Result<DensityOperator<T>> {
    let m = partial_trace_matrix(rho.matrix(), dims, keep)?;
    Ok(DensityOperator::from_matrix_unchecked(m))
}

pub(crate) fn partial_trace_matrix<T: Real>(
    m: &CMatrix<T>,
    dims: &[usize],
    keep: &[usize],
) -> Result<CMatrix<T>> {
    let n = m.nrows();
    check_dims(n, dims)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() || kept.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Malformed(format!("invalid keep set {keep:?}")));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|s| !kept.contains(s)).collect();
    let kdims: Vec<usize> = kept.iter().map(|&s| dims[s]).collect();
    let tdims: Vec<usize> = traced.iter().map(|&s| dims[s]).collect();
    let dk: usize = kdims.iter().product();
    let dt: usize = tdims.iter().product();

    // full index for each (kept, traced) pair
    let mut full = vec![0usize; dk * dt];
    for ki in 0..dk {
        let kd = digits(ki, &kdims);
        for ti in 0..dt {
            let td = digits(ti, &tdims);
            let mut all = vec![0; dims.len()];
            for (slot, &s) in kept.iter().enumerate() {
                all[s] = kd[slot];
            }
            for (slot, &s) in traced.iter().enumerate() {
                all[s] = td[slot];
            }
            full[ki * dt + ti] = compose(&all, dims);
        }
    }

    let mut out = CMatrix::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = Complex::new(T::zero(), T::zero());
            for t in 0..dt {
                acc += m[(full[i * dt + t], full[j * dt + t])];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Reorders subsystems: output slot `s` holds input subsystem `perm[s]`.
pub fn permute_subsystems<T: Real>(m: &CMatrix<T>, dims: &[usize], perm: &[usize]) -> Result<CMatrix<T>> {
    let n = m.nrows();
    check_dims(n, dims)?;
    let mut seen = vec![false; dims.len()];
    if perm.len() != dims.len() || perm.iter().any(|&p| p >= dims.len() || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::Malformed(format!("{perm:?} is not a permutation")));
    }
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let map: Vec<usize> = (0..n)
        .map(|i| {
            let d = digits(i, dims);
            let pd: Vec<usize> = perm.iter().map(|&p| d[p]).collect();
            compose(&pd, &out_dims)
        })
        .collect();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    Ok(out)
}

/// ½ Σ |λ_i(a − b)|, in [0, 1] for valid states.
pub fn trace_distance<T: Real>(a: &DensityOperator<T>, b: &DensityOperator<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let diff = a.matrix() - b.matrix();
    let s = hermitian_eigenvalues(&diff)
        .into_iter()
        .fold(T::zero(), |acc, l| acc + l.abs());
    Ok((s * T::lit(0.5)).min(T::one()))
}
