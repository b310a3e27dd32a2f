//! Finite-dimensional complex Hilbert-space primitives.
//!
//! States are dense complex vectors, measurements are orthogonal projectors
//! grouped into spectral families, and composite states live in tensor
//! products. The two-sector Fock composition `n e^{iγ}|C⟩ + m e^{iδ}(|A⟩⊗|B⟩)`
//! is represented by [`FockState`].
//!
//! Tensor-product index flattening is row-major: component `(i, j)` of
//! `u ⊗ v` sits at `i * dim(v) + j`.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle;

pub type ComplexScalar = Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Slack for structural invariants (normalization, idempotency, completeness).
    pub structural: f64,
    /// Slack for algebraic identities.
    pub algebraic: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: 1e-9,
            algebraic: 1e-12,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("state vector must have at least one component")]
    Empty,
    #[error("state is not normalized: squared norm {norm_sq}")]
    NotNormalized { norm_sq: f64 },
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("matrix is not a valid orthogonal projector: {0}")]
    InvalidProjector(String),
    #[error("impossible outcome: collapse onto a projector with probability {probability}")]
    ZeroProbability { probability: f64 },
    #[error("Fock weights violate n² + m² = 1: n² + m² = {sum}")]
    WeightViolation { sum: f64 },
}

/// A vector of a finite-dimensional complex Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    components: Vec<Complex64>,
}

impl StateVector {
    pub fn new(components: Vec<Complex64>) -> Result<Self, HilbertError> {
        if components.is_empty() {
            return Err(HilbertError::Empty);
        }
        Ok(Self { components })
    }

    /// Builds a vector and checks that it is a unit vector within the
    /// default structural tolerance.
    pub fn normalized(components: Vec<Complex64>) -> Result<Self, HilbertError> {
        let v = Self::new(components)?;
        v.check_normalized(Tolerances::default().structural)?;
        Ok(v)
    }

    pub fn from_real(components: &[f64]) -> Result<Self, HilbertError> {
        Self::new(components.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Canonical basis vector `e_index` (0-based).
    pub fn basis(dim: usize, index: usize) -> Result<Self, HilbertError> {
        if dim == 0 {
            return Err(HilbertError::Empty);
        }
        if index >= dim {
            return Err(HilbertError::IndexOutOfRange { index, dim });
        }
        let mut components = vec![Complex64::new(0.0, 0.0); dim];
        components[index] = Complex64::new(1.0, 0.0);
        Ok(Self { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Complex64] {
        &self.components
    }

    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn check_normalized(&self, tol: f64) -> Result<(), HilbertError> {
        let norm_sq = self.norm_sqr();
        if (norm_sq - 1.0).abs() > tol {
            return Err(HilbertError::NotNormalized { norm_sq });
        }
        Ok(())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            components: self.components.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, HilbertError> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Returns the vector divided by its norm.
    pub fn unit(&self) -> Result<Self, HilbertError> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(HilbertError::NotNormalized { norm_sq: 0.0 });
        }
        Ok(self.scale(Complex64::new(1.0 / norm, 0.0)))
    }
}

fn same_dim(expected: usize, actual: usize) -> Result<(), HilbertError> {
    if expected != actual {
        return Err(HilbertError::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// `⟨bra|ket⟩`, anti-linear in the bra and linear in the ket.
pub fn inner_product(bra: &StateVector, ket: &StateVector) -> Result<Complex64, HilbertError> {
    same_dim(bra.dim(), ket.dim())?;
    Ok(bra
        .components
        .iter()
        .zip(&ket.components)
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// Orthogonal projector. Diagonal projectors onto a subset of the canonical
/// basis keep a compact index-set form; everything else is dense.
#[derive(Debug, Clone, PartialEq)]
pub enum Projector {
    Diagonal { dim: usize, indices: BTreeSet<usize> },
    Dense(DMatrix<Complex64>),
}

impl Projector {
    pub fn diagonal<I: IntoIterator<Item = usize>>(dim: usize, indices: I) -> Result<Self, HilbertError> {
        if dim == 0 {
            return Err(HilbertError::Empty);
        }
        let indices: BTreeSet<usize> = indices.into_iter().collect();
        if let Some(&index) = indices.iter().find(|&&i| i >= dim) {
            return Err(HilbertError::IndexOutOfRange { index, dim });
        }
        Ok(Projector::Diagonal { dim, indices })
    }

    pub fn identity(dim: usize) -> Result<Self, HilbertError> {
        Self::diagonal(dim, 0..dim)
    }

    /// Rank-1 projector `|v⟩⟨v|` onto the direction of `v`.
    pub fn rank_one(v: &StateVector) -> Result<Self, HilbertError> {
        let u = v.unit()?;
        let n = u.dim();
        let m = DMatrix::from_fn(n, n, |i, j| u.components[i] * u.components[j].conj());
        Ok(Projector::Dense(m))
    }

    /// Wraps a dense matrix after checking hermiticity and idempotency.
    pub fn dense(matrix: DMatrix<Complex64>) -> Result<Self, HilbertError> {
        Self::dense_with(matrix, Tolerances::default())
    }

    pub fn dense_with(matrix: DMatrix<Complex64>, tol: Tolerances) -> Result<Self, HilbertError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(HilbertError::InvalidProjector(format!(
                "matrix is {}x{}, not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(HilbertError::Empty);
        }
        let n = matrix.nrows();
        for i in 0..n {
            for j in 0..n {
                if (matrix[(i, j)] - matrix[(j, i)].conj()).norm() > tol.structural {
                    return Err(HilbertError::InvalidProjector(format!(
                        "not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        let square = &matrix * &matrix;
        let worst = (&square - &matrix).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if worst > tol.structural {
            return Err(HilbertError::InvalidProjector(format!(
                "not idempotent: max |M·M − M| = {worst:e}"
            )));
        }
        Ok(Projector::Dense(matrix))
    }

    pub fn dim(&self) -> usize {
        match self {
            Projector::Diagonal { dim, .. } => *dim,
            Projector::Dense(m) => m.nrows(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match self {
            Projector::Diagonal { dim, indices } => {
                let mut m = DMatrix::zeros(*dim, *dim);
                for &i in indices {
                    m[(i, i)] = Complex64::new(1.0, 0.0);
                }
                m
            }
            Projector::Dense(m) => m.clone(),
        }
    }

    /// `I − M`.
    pub fn complement(&self) -> Self {
        match self {
            Projector::Diagonal { dim, indices } => Projector::Diagonal {
                dim: *dim,
                indices: (0..*dim).filter(|i| !indices.contains(i)).collect(),
            },
            Projector::Dense(m) => {
                let n = m.nrows();
                Projector::Dense(DMatrix::identity(n, n) - m)
            }
        }
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector, HilbertError> {
        same_dim(self.dim(), v.dim())?;
        let components = match self {
            Projector::Diagonal { indices, .. } => v
                .components
                .iter()
                .enumerate()
                .map(|(i, &c)| if indices.contains(&i) { c } else { Complex64::new(0.0, 0.0) })
                .collect(),
            Projector::Dense(m) => (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v.components[j]).sum())
                .collect(),
        };
        Ok(StateVector { components })
    }

    /// `⟨bra|M|ket⟩`.
    pub fn matrix_element(&self, bra: &StateVector, ket: &StateVector) -> Result<Complex64, HilbertError> {
        same_dim(bra.dim(), ket.dim())?;
        let projected = self.apply(ket)?;
        inner_product(bra, &projected)
    }
}

/// Second modeling rule: probability `⟨A|M|A⟩` of the outcome carried by `proj`.
pub fn born_probability(state: &StateVector, proj: &Projector) -> Result<f64, HilbertError> {
    same_dim(proj.dim(), state.dim())?;
    // ‖M|A⟩‖² equals ⟨A|M|A⟩ for an orthogonal projector and is real by construction.
    Ok(proj.apply(state)?.norm_sqr())
}

/// State after the outcome of `proj` is obtained: `M|A⟩ / ‖M|A⟩‖`.
pub fn collapse(state: &StateVector, proj: &Projector) -> Result<StateVector, HilbertError> {
    let projected = proj.apply(state)?;
    let probability = projected.norm_sqr();
    if probability <= 0.0 || !probability.is_finite() {
        return Err(HilbertError::ZeroProbability { probability });
    }
    projected.unit()
}

pub fn tensor_product(u: &StateVector, v: &StateVector) -> StateVector {
    let components = u
        .components
        .iter()
        .flat_map(|a| v.components.iter().map(move |b| a * b))
        .collect();
    StateVector { components }
}

/// Number of Schmidt coefficients of `joint`, viewed as a `dim_a × dim_b`
/// coefficient matrix, that exceed `1e−9`. Rank 1 means a product state.
pub fn schmidt_rank(joint: &StateVector, dim_a: usize, dim_b: usize) -> Result<usize, HilbertError> {
    schmidt_rank_with(joint, dim_a, dim_b, Tolerances::default().structural)
}

pub fn schmidt_rank_with(
    joint: &StateVector,
    dim_a: usize,
    dim_b: usize,
    tol: f64,
) -> Result<usize, HilbertError> {
    same_dim(dim_a * dim_b, joint.dim())?;
    let coeffs = DMatrix::from_fn(dim_a, dim_b, |i, j| joint.components[i * dim_b + j]);
    let singular = coeffs.singular_values();
    Ok(singular.iter().filter(|&&s| s > tol).count())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFamily {
    projectors: Vec<Projector>,
    dim: usize,
}

impl SpectralFamily {
    pub fn new(projectors: Vec<Projector>) -> Result<Self, HilbertError> {
        let dim = projectors.first().map(Projector::dim).ok_or(HilbertError::Empty)?;
        for p in &projectors {
            same_dim(dim, p.dim())?;
        }
        Ok(Self { projectors, dim })
    }

    /// One rank-1 projector per canonical basis vector.
    pub fn canonical(dim: usize) -> Result<Self, HilbertError> {
        Self::new((0..dim).map(|i| Projector::diagonal(dim, [i])).collect::<Result<_, _>>()?)
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub valid: bool,
    /// Index pairs `(k, l)` with `‖M_k M_l‖ > tol`.
    pub non_orthogonal_pairs: Vec<(usize, usize)>,
    /// Largest entry of `|Σ M_k − I|`.
    pub completeness_deviation: f64,
}

pub fn validate_spectral_family(fam: &SpectralFamily) -> SpectralReport {
    validate_spectral_family_with(fam, Tolerances::default().structural)
}

pub fn validate_spectral_family_with(fam: &SpectralFamily, tol: f64) -> SpectralReport {
    let mut non_orthogonal_pairs = Vec::new();
    let all_diagonal = fam
        .projectors
        .iter()
        .all(|p| matches!(p, Projector::Diagonal { .. }));

    let completeness_deviation = if all_diagonal {
        let mut counts = vec![0usize; fam.dim];
        let sets: Vec<&BTreeSet<usize>> = fam
            .projectors
            .iter()
            .map(|p| match p {
                Projector::Diagonal { indices, .. } => indices,
                Projector::Dense(_) => unreachable!(),
            })
            .collect();
        for (k, a) in sets.iter().enumerate() {
            for i in a.iter() {
                counts[*i] += 1;
            }
            for (l, b) in sets.iter().enumerate().skip(k + 1) {
                if a.intersection(b).next().is_some() {
                    non_orthogonal_pairs.push((k, l));
                }
            }
        }
        counts
            .iter()
            .map(|&c| (c as f64 - 1.0).abs())
            .fold(0.0, f64::max)
    } else {
        let dense: Vec<DMatrix<Complex64>> = fam.projectors.iter().map(Projector::to_dense).collect();
        for k in 0..dense.len() {
            for l in (k + 1)..dense.len() {
                let product = &dense[k] * &dense[l];
                if product.iter().any(|c| c.norm() > tol) {
                    non_orthogonal_pairs.push((k, l));
                }
            }
        }
        let mut sum = DMatrix::<Complex64>::identity(fam.dim, fam.dim).scale(-1.0);
        for m in &dense {
            sum += m;
        }
        sum.iter().map(|c| c.norm()).fold(0.0, f64::max)
    };

    SpectralReport {
        valid: non_orthogonal_pairs.is_empty() && completeness_deviation <= tol,
        non_orthogonal_pairs,
        completeness_deviation,
    }
}

/// Unit vector of `F = H ⊕ (H ⊗ H)`:
/// `n e^{iγ}|sector1⟩ ⊕ m e^{iδ}|sector2⟩` with `n² + m² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    pub sector1: StateVector,
    pub sector2: StateVector,
    pub n: f64,
    pub m: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl FockState {
    /// Flattened direct-sum vector, sector 1 first.
    pub fn to_vector(&self) -> StateVector {
        let a = Complex64::from_polar(self.n, self.gamma);
        let b = Complex64::from_polar(self.m, self.delta);
        let components = self
            .sector1
            .components
            .iter()
            .map(|c| c * a)
            .chain(self.sector2.components.iter().map(|c| c * b))
            .collect();
        StateVector { components }
    }
}

pub fn fock_compose(
    sector1: StateVector,
    sector2: StateVector,
    n: f64,
    m: f64,
    gamma: f64,
    delta: f64,
) -> Result<FockState, HilbertError> {
    let tol = Tolerances::default().structural;
    let sum = n * n + m * m;
    if (sum - 1.0).abs() > tol {
        return Err(HilbertError::WeightViolation { sum });
    }
    same_dim(sector1.dim() * sector1.dim(), sector2.dim())?;
    sector1.check_normalized(tol)?;
    sector2.check_normalized(tol)?;
    Ok(FockState {
        sector1,
        sector2,
        n,
        m,
        gamma,
        delta,
    })
}

// ---------------------------------------------------------------------------
// JSON forms

#[derive(Debug, Serialize, Deserialize)]
struct StateVectorJson {
    dim: usize,
    components: Vec<[f64; 2]>,
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        StateVectorJson {
            dim: self.dim(),
            components: self.components.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = StateVectorJson::deserialize(deserializer)?;
        if raw.dim != raw.components.len() {
            return Err(serde::de::Error::custom(format!(
                "dim {} does not match {} components",
                raw.dim,
                raw.components.len()
            )));
        }
        StateVector::new(raw.components.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ProjectorJson {
    Diagonal { dim: usize, basis_indices: Vec<usize> },
    Dense { dim: usize, matrix: Vec<Vec<[f64; 2]>> },
}

impl Serialize for Projector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Projector::Diagonal { dim, indices } => ProjectorJson::Diagonal {
                dim: *dim,
                basis_indices: indices.iter().copied().collect(),
            },
            Projector::Dense(m) => ProjectorJson::Dense {
                dim: m.nrows(),
                matrix: (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                    .collect(),
            },
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Projector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match ProjectorJson::deserialize(deserializer)? {
            ProjectorJson::Diagonal { dim, basis_indices } => {
                Projector::diagonal(dim, basis_indices).map_err(serde::de::Error::custom)
            }
            ProjectorJson::Dense { dim, matrix } => {
                if matrix.len() != dim || matrix.iter().any(|row| row.len() != dim) {
                    return Err(serde::de::Error::custom("matrix shape does not match dim"));
                }
                let m = DMatrix::from_fn(dim, dim, |i, j| Complex64::new(matrix[i][j][0], matrix[i][j][1]));
                Projector::dense(m).map_err(serde::de::Error::custom)
            }
        }
    }
}

#[derive(Serialize)]
struct FockStateJson<'a> {
    sector1: &'a StateVector,
    sector2: &'a StateVector,
    n: f64,
    m: f64,
    gamma_deg: f64,
    delta_deg: f64,
}

impl Serialize for FockState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        FockStateJson {
            sector1: &self.sector1,
            sector2: &self.sector2,
            n: self.n,
            m: self.m,
            gamma_deg: angle::to_degrees_4dp(self.gamma),
            delta_deg: angle::to_degrees_4dp(self.delta),
        }
        .serialize(serializer)
    }
}
