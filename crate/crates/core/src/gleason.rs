//! Born-rule evaluation and its converse at desk scale: reconstructing a
//! density operator from noncontextual frame probabilities, and inferring
//! the unique pure state from certainty.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    json::{matrix_from_json, matrix_to_json},
    trace_distance, CMatrix, DensityOperator, Ket, MatrixJson, MeasurementBasis, Projector,
};
use crate::scalar::Real;

/// Tolerance on quoted frame probabilities (range, normalization, noncontextuality).
pub const FRAME_TOLERANCE: f64 = 1e-9;

/// Re tr(ρΠ), snapped into [0, 1] only when within 1e-12 of the boundary.
pub fn born_probability<T: Real>(rho: &DensityOperator<T>, proj: &Projector<T>) -> Result<T> {
    if rho.dim() != proj.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: proj.dim(),
        });
    }
    Ok(snap(trace_product_re(rho.matrix(), proj.matrix())))
}

fn snap<T: Real>(v: T) -> T {
    let eps = T::lit(1e-12);
    if v < T::zero() && v > -eps {
        T::zero()
    } else if v > T::one() && v < T::one() + eps {
        T::one()
    } else {
        v
    }
}

/// Re tr(AB) without forming the product.
pub(crate) fn trace_product_re<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    let n = a.nrows();
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)] * b[(j, i)];
            acc += z.re;
        }
    }
    acc
}

/// Born probabilities for every outcome of one quantum question.
pub fn basis_distribution<T: Real>(rho: &DensityOperator<T>, basis: &MeasurementBasis<T>) -> Result<Vec<T>> {
    basis
        .projectors()
        .iter()
        .map(|p| born_probability(rho, p))
        .collect()
}

/// Quoted outcome probabilities for one basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<T: Real = f64> {
    pub basis: MeasurementBasis<T>,
    pub probs: Vec<T>,
}

/// Probability assignments over several quantum questions of one system.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameAssignment<T: Real = f64> {
    dim: usize,
    frames: Vec<Frame<T>>,
}

impl<T: Real> FrameAssignment<T> {
    /// Checks range, per-basis normalization and noncontextuality.
    pub fn new(dim: usize, frames: Vec<Frame<T>>) -> Result<Self> {
        let a = Self::unchecked(dim, frames)?;
        a.validate()?;
        Ok(a)
    }

    /// Only shapes are checked; quoted values may violate any rule.
    pub fn unchecked(dim: usize, frames: Vec<Frame<T>>) -> Result<Self> {
        for f in &frames {
            if f.basis.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: f.basis.dim(),
                });
            }
            if f.probs.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: f.probs.len(),
                });
            }
        }
        Ok(Self { dim, frames })
    }

    /// Quotes generated by the Born rule from `rho`.
    pub fn from_state(rho: &DensityOperator<T>, bases: &[MeasurementBasis<T>]) -> Result<Self> {
        let frames = bases
            .iter()
            .map(|b| {
                Ok(Frame {
                    basis: b.clone(),
                    probs: basis_distribution(rho, b)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::unchecked(rho.dim(), frames)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frames(&self) -> &[Frame<T>] {
        &self.frames
    }

    pub fn validate(&self) -> Result<()> {
        let tol = T::lit(FRAME_TOLERANCE);
        for f in &self.frames {
            for &p in &f.probs {
                if p < -tol || p > T::one() + tol {
                    return Err(Error::Invariant {
                        invariant: "frame probability range",
                        residual: if p < T::zero() { (-p).as_f64() } else { (p - T::one()).as_f64() },
                    });
                }
            }
            let sum = f.probs.iter().fold(T::zero(), |a, &b| a + b);
            if (sum - T::one()).abs() > tol {
                return Err(Error::Invariant {
                    invariant: "frame normalization",
                    residual: (sum - T::one()).abs().as_f64(),
                });
            }
        }
        let proj_tol = T::tolerance();
        let flat: Vec<(&Projector<T>, T)> = self
            .frames
            .iter()
            .flat_map(|f| f.basis.projectors().iter().zip(f.probs.iter().copied()))
            .collect();
        for (i, (pa, qa)) in flat.iter().enumerate() {
            for (pb, qb) in &flat[i + 1..] {
                if pa.approx_eq(pb, proj_tol) && (*qa - *qb).abs() > tol {
                    return Err(Error::Invariant {
                        invariant: "noncontextuality",
                        residual: (*qa - *qb).abs().as_f64(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Generalized Gell-Mann matrices: D² − 1 traceless Hermitian operators
/// with tr(G_a G_b) = 2δ_ab.
pub fn gell_mann_basis<T: Real>(dim: usize) -> Vec<CMatrix<T>> {
    let one = Complex::new(T::one(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    let mut out = Vec::with_capacity(dim * dim - 1);
    for j in 0..dim {
        for k in j + 1..dim {
            let mut s = CMatrix::zeros(dim, dim);
            s[(j, k)] = one;
            s[(k, j)] = one;
            out.push(s);
            let mut a = CMatrix::zeros(dim, dim);
            a[(j, k)] = -i;
            a[(k, j)] = i;
            out.push(a);
        }
    }
    for l in 1..dim {
        let lf = T::from_usize(l).unwrap();
        let norm = (T::lit(2.0) / (lf * (lf + T::one()))).sqrt();
        let mut d = CMatrix::zeros(dim, dim);
        for j in 0..l {
            d[(j, j)] = Complex::new(norm, T::zero());
        }
        d[(l, l)] = Complex::new(-lf * norm, T::zero());
        out.push(d);
    }
    out
}

fn design_matrix<T: Real>(dim: usize, bases: &[&MeasurementBasis<T>]) -> DMatrix<T> {
    let gm = gell_mann_basis::<T>(dim);
    let rows: Vec<&Projector<T>> = bases.iter().flat_map(|b| b.projectors()).collect();
    DMatrix::from_fn(rows.len(), gm.len(), |r, a| trace_product_re(&gm[a], rows[r].matrix()))
}

fn numeric_rank<T: Real>(m: &DMatrix<T>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let cut = max * T::lit(1e-10);
    sv.iter().filter(|&&s| s > cut).count()
}

/// Dimension of the span of {Π_k} inside the D²-dimensional real space of
/// Hermitian operators. D² means tomographically complete.
pub fn spanning_rank<T: Real>(dim: usize, bases: &[MeasurementBasis<T>]) -> usize {
    if bases.is_empty() {
        return 0;
    }
    // identity is always in the span since every basis sums to it
    let refs: Vec<&MeasurementBasis<T>> = bases.iter().collect();
    numeric_rank(&design_matrix(dim, &refs)) + 1
}

/// Fails with the rank achieved when `bases` are not tomographically complete.
pub fn require_complete<T: Real>(dim: usize, bases: &[MeasurementBasis<T>]) -> Result<()> {
    let rank = spanning_rank(dim, bases);
    if rank < dim * dim {
        return Err(Error::Incomplete {
            rank,
            required: dim * dim,
        });
    }
    Ok(())
}

/// Reconstructed state and how well it reproduces the quotes.
#[derive(Debug, Clone, PartialEq)]
pub struct Fit<T: Real = f64> {
    pub state: DensityOperator<T>,
    /// Root-mean-square gap between quoted and fitted Born probabilities.
    pub residual: T,
    pub spanning_rank: usize,
    /// False for D = 2, where noncontextual assignments need not be Born-rule ones.
    pub gleason_guarantee: bool,
}

/// Least-squares Hermitian unit-trace fit, projected once onto the PSD cone.
pub fn fit_density<T: Real>(assignment: &FrameAssignment<T>) -> Result<Fit<T>> {
    let dim = assignment.dim();
    let bases: Vec<&MeasurementBasis<T>> = assignment.frames().iter().map(|f| &f.basis).collect();
    let design = design_matrix(dim, &bases);
    let rank = if bases.is_empty() { 0 } else { numeric_rank(&design) + 1 };
    if rank < dim * dim {
        return Err(Error::Incomplete {
            rank,
            required: dim * dim,
        });
    }
    let inv_d = T::one() / T::from_usize(dim).unwrap();
    let quoted: Vec<T> = assignment
        .frames()
        .iter()
        .flat_map(|f| f.probs.iter().copied())
        .collect();
    let y = DVector::from_iterator(quoted.len(), quoted.iter().map(|&p| p - inv_d));
    let theta = design
        .svd(true, true)
        .solve(&y, T::lit(1e-14))
        .map_err(|e| Error::Malformed(format!("least squares failed: {e}")))?;

    let mut m = CMatrix::from_diagonal_element(dim, dim, Complex::new(inv_d, T::zero()));
    for (g, &t) in gell_mann_basis::<T>(dim).iter().zip(theta.iter()) {
        m += g.map(|z| z * t);
    }
    let state = DensityOperator::repair(&m)?;

    let mut sq = T::zero();
    for (b, &q) in bases.iter().flat_map(|b| b.projectors()).zip(&quoted) {
        let d = trace_product_re(state.matrix(), b.matrix()) - q;
        sq += d * d;
    }
    let residual = (sq / T::from_usize(quoted.len()).unwrap()).sqrt();
    Ok(Fit {
        state,
        residual,
        spanning_rank: rank,
        gleason_guarantee: dim >= 3,
    })
}

/// Certainty about Π forces the state ρ = Π.
pub fn infer_from_certainty<T: Real>(proj: &Projector<T>) -> DensityOperator<T> {
    DensityOperator::from_projector(proj)
}

/// As [`infer_from_certainty`], validating that `matrix` is a rank-1 projector.
pub fn infer_from_certainty_matrix<T: Real>(matrix: CMatrix<T>) -> Result<DensityOperator<T>> {
    Projector::new(matrix).map(|p| infer_from_certainty(&p))
}

/// How far a candidate state is from the unique state certainty demands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertaintyCheck<T: Real = f64> {
    /// ⟨ψ|ρ|ψ⟩
    pub expectation: T,
    /// Trace distance from ρ to |ψ⟩⟨ψ|.
    pub distance: T,
}

pub fn check_certainty<T: Real>(rho: &DensityOperator<T>, ket: &Ket<T>) -> Result<CertaintyCheck<T>> {
    let pure = DensityOperator::pure(ket);
    Ok(CertaintyCheck {
        expectation: born_probability(rho, &ket.projector())?,
        distance: trace_distance(rho, &pure)?,
    })
}

/// True when the pure state Π leaves the question Π' uncertain.
pub fn certainty_is_exclusive<T: Real>(certain: &Projector<T>, other: &Projector<T>) -> Result<bool> {
    let rho = infer_from_certainty(certain);
    let overlap = trace_product_re(certain.matrix(), other.matrix());
    let tol = T::tolerance();
    if overlap >= T::one() - tol {
        // same question up to tolerance
        return Ok(true);
    }
    Ok(born_probability(&rho, other)? < T::one() - tol)
}

/// `{"dim": D, "frames": [{"basis": [kets or projectors], "probs": [...]}]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameAssignmentJson {
    pub dim: usize,
    pub frames: Vec<FrameJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameJson {
    pub basis: Vec<BasisElementJson>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasisElementJson {
    Ket(Vec<[f64; 2]>),
    Projector(MatrixJson),
}

impl FrameAssignmentJson {
    pub fn from_assignment<T: Real>(a: &FrameAssignment<T>) -> Self {
        Self {
            dim: a.dim(),
            frames: a
                .frames()
                .iter()
                .map(|f| FrameJson {
                    basis: f
                        .basis
                        .projectors()
                        .iter()
                        .map(|p| BasisElementJson::Projector(matrix_to_json(p.matrix())))
                        .collect(),
                    probs: f.probs.iter().map(|p| p.as_f64()).collect(),
                })
                .collect(),
        }
    }

    /// Builds the assignment; `checked` also enforces the frame invariants.
    pub fn to_assignment<T: Real>(&self, checked: bool) -> Result<FrameAssignment<T>> {
        let frames = self
            .frames
            .iter()
            .map(|f| {
                let projectors = f
                    .basis
                    .iter()
                    .map(|e| match e {
                        BasisElementJson::Ket(amps) => Ket::new(
                            amps.iter()
                                .map(|[re, im]| Complex::new(T::lit(*re), T::lit(*im)))
                                .collect(),
                        )
                        .map(|k| k.projector()),
                        BasisElementJson::Projector(m) => Projector::new(matrix_from_json(m)?),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Frame {
                    basis: MeasurementBasis::new(projectors)?,
                    probs: f.probs.iter().map(|&p| T::lit(p)).collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if checked {
            FrameAssignment::new(self.dim, frames)
        } else {
            FrameAssignment::unchecked(self.dim, frames)
        }
    }
}

/// Fit output: matrix, residual, spanning rank and the D = 2 flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitJson {
    pub dim: usize,
    pub matrix: MatrixJson,
    pub residual: f64,
    pub spanning_rank: usize,
    pub gleason_guarantee: bool,
}

impl<T: Real> From<&Fit<T>> for FitJson {
    fn from(f: &Fit<T>) -> Self {
        Self {
            dim: f.state.dim(),
            matrix: matrix_to_json(f.state.matrix()),
            residual: f.residual.as_f64(),
            spanning_rank: f.spanning_rank,
            gleason_guarantee: f.gleason_guarantee,
        }
    }
}
