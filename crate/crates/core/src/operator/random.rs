use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{check_dim, CMatrix, DensityOperator, Ket, MeasurementBasis};
use crate::error::Result;
use crate::rng::SeededRng;
use crate::scalar::Real;

/// Ensemble for random states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    /// GG†/tr(GG†) for a square Ginibre matrix G.
    #[default]
    HilbertSchmidt,
    /// Projector onto a Haar-random ket.
    PureUniform,
}

impl std::str::FromStr for Ensemble {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "hilbert-schmidt" => Ok(Self::HilbertSchmidt),
            "pure-uniform" => Ok(Self::PureUniform),
            other => Err(format!("unknown ensemble {other:?}")),
        }
    }
}

fn gaussian<T: Real>(rng: &mut SeededRng) -> num_complex::Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    num_complex::Complex::new(T::lit(re), T::lit(im))
}

fn ginibre<T: Real>(dim: usize, rng: &mut SeededRng) -> CMatrix<T> {
    // column-major fill order is fixed, so output depends only on the stream
    CMatrix::from_fn(dim, dim, |_, _| gaussian(rng))
}

pub fn haar_ket<T: Real>(dim: usize, rng: &mut SeededRng) -> Result<Ket<T>> {
    check_dim(dim)?;
    let v: Vec<_> = (0..dim).map(|_| gaussian::<T>(rng)).collect();
    Ket::normalized(v)
}

/// Haar-distributed unitary: QR of a Ginibre matrix with R's diagonal phases removed.
pub fn haar_unitary<T: Real>(dim: usize, rng: &mut SeededRng) -> Result<CMatrix<T>> {
    check_dim(dim)?;
    let qr = ginibre::<T>(dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let n = super::modulus(d);
        if n > T::zero() {
            let phase = d / num_complex::Complex::new(n, T::zero());
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    Ok(q)
}

pub fn random_basis<T: Real>(dim: usize, rng: &mut SeededRng) -> Result<MeasurementBasis<T>> {
    MeasurementBasis::from_unitary(&haar_unitary(dim, rng)?)
}

/// Random state from `ensemble`; deterministic in the generator state.
pub fn sample_density<T: Real>(
    dim: usize,
    ensemble: Ensemble,
    rng: &mut SeededRng,
) -> Result<DensityOperator<T>> {
    check_dim(dim)?;
    match ensemble {
        Ensemble::PureUniform => Ok(DensityOperator::pure(&haar_ket(dim, rng)?)),
        Ensemble::HilbertSchmidt => {
            let g = ginibre::<T>(dim, rng);
            let w = &g * g.adjoint();
            let tr = w.diagonal().iter().fold(T::zero(), |a, z| a + z.re);
            let half = T::lit(0.5);
            let m = w.map(|z| z / num_complex::Complex::new(tr, T::zero()));
            Ok(DensityOperator::from_matrix_unchecked(
                (&m + m.adjoint()).map(|z| z * half),
            ))
        }
    }
}
