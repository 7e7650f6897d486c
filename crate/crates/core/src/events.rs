//! Quantum events: orthogonal projections with their order, orthogonality
//! and lattice structure.

use crate::error::{Error, Result};
use crate::linalg::{gram_schmidt, vector_norm, Complex, ComplexMatrix};
use crate::tolerance::Tolerances;

/// Iteration cap for the non-commuting meet.
pub const MEET_MAX_ITERATIONS: usize = 10_000;
/// Convergence threshold on `||a_{k+1} - a_k||_F` for the non-commuting meet.
pub const MEET_CONVERGENCE: f64 = 1e-12;

/// A validated orthogonal projection (self-adjoint, idempotent, integral trace).
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    matrix: ComplexMatrix,
    rank: usize,
}

/// Validates `m` as an event. See [`Event::new`].
pub fn validate_event(m: ComplexMatrix, tol: &Tolerances) -> Result<Event> {
    Event::new(m, tol)
}

impl Event {
    pub fn new(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let norm = m.frobenius_norm();
        let deviation = m.hermitian_deviation();
        if !tol.negligible(deviation, norm) {
            return Err(Error::NotSelfAdjoint { deviation });
        }
        let deviation = (&m * &m).distance(&m)?;
        if !tol.negligible(deviation, norm) {
            return Err(Error::NotIdempotent { deviation });
        }
        let trace = m.trace();
        let rank = trace.re.round();
        if rank < 0.0 || !tol.negligible((trace.re - rank).abs() + trace.im.abs(), norm) {
            return Err(Error::NonIntegralTrace { trace: trace.re });
        }
        Ok(Self {
            matrix: m,
            rank: rank as usize,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
            rank: dim,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim),
            rank: 0,
        }
    }

    /// Diagonal 0/1 projection selecting the marked basis vectors.
    pub fn diagonal(mask: &[bool]) -> Result<Self> {
        let values: Vec<f64> = mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let rank = mask.iter().filter(|&&b| b).count();
        Ok(Self {
            matrix: ComplexMatrix::diag(&values)?,
            rank,
        })
    }

    /// Rank-one projection onto the line through `v` (any non-zero vector).
    pub fn projector(v: &[Complex], tol: &Tolerances) -> Result<Self> {
        let norm = vector_norm(v);
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        if norm <= tol.atol {
            return Err(Error::ZeroVector);
        }
        let u: Vec<Complex> = v.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&u, &u)?, tol)
    }

    /// Projection onto the span of `vectors`.
    pub fn span(vectors: &[Vec<Complex>], tol: &Tolerances) -> Result<Self> {
        let dim = vectors.first().map(Vec::len).ok_or(Error::EmptyMatrix)?;
        let basis = gram_schmidt(vectors, tol)?;
        if basis.is_empty() {
            return Ok(Self::zero(dim));
        }
        Self::from_orthonormal(&basis)
    }

    /// `Σ |u⟩⟨u|` over an orthonormal family.
    pub fn from_orthonormal(basis: &[Vec<Complex>]) -> Result<Self> {
        let first = basis.first().ok_or(Error::EmptyMatrix)?;
        let mut m = ComplexMatrix::zeros(first.len());
        for u in basis {
            m = m.try_add(&ComplexMatrix::outer(u, u)?)?;
        }
        Self::new(m, &Tolerances::default())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }

    /// `true` for rank-one projections.
    pub fn is_minimal(&self) -> bool {
        self.rank == 1
    }

    /// Negation `e' = 𝕀 - e`.
    pub fn complement(&self) -> Self {
        let dim = self.dim();
        Self {
            matrix: &ComplexMatrix::identity(dim) - &self.matrix,
            rank: dim - self.rank,
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            })
        }
    }

    fn scale_with(&self, other: &Self) -> f64 {
        self.matrix.frobenius_norm() + other.matrix.frobenius_norm()
    }

    /// `ef = 0`.
    pub fn is_orthogonal(&self, other: &Self, tol: &Tolerances) -> Result<bool> {
        self.check_dim(other)?;
        let norm = (&self.matrix * &other.matrix).frobenius_norm();
        Ok(tol.negligible(norm, self.scale_with(other)))
    }

    /// `self ≤ other`, i.e. `other · self = self`.
    pub fn implies(&self, other: &Self, tol: &Tolerances) -> Result<bool> {
        self.check_dim(other)?;
        let deviation = (&other.matrix * &self.matrix).distance(&self.matrix)?;
        Ok(tol.negligible(deviation, self.scale_with(other)))
    }

    pub fn commutes(&self, other: &Self, tol: &Tolerances) -> Result<bool> {
        self.check_dim(other)?;
        let ef = &self.matrix * &other.matrix;
        let fe = &other.matrix * &self.matrix;
        Ok(tol.negligible(ef.distance(&fe)?, self.scale_with(other)))
    }

    /// `||self - other||_F <= tol`: the two projections are the same event.
    pub fn same_as(&self, other: &Self, tol: &Tolerances) -> Result<bool> {
        self.check_dim(other)?;
        Ok(tol.negligible(self.matrix.distance(&other.matrix)?, self.scale_with(other)))
    }

    /// Sum of two orthogonal events.
    pub fn orthogonal_sum(&self, other: &Self, tol: &Tolerances) -> Result<Self> {
        if !self.is_orthogonal(other, tol)? {
            return Err(Error::NotOrthogonal);
        }
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
            rank: self.rank + other.rank,
        })
    }

    /// Projection onto `range(self) ∩ range(other)`.
    ///
    /// Commuting pairs give `ef` directly. Two rank-one events meet in
    /// themselves when equal and in `0` otherwise. The general case takes the
    /// limit of `(efe)^k` by repeated squaring.
    pub fn meet(&self, other: &Self, tol: &Tolerances) -> Result<Self> {
        self.check_dim(other)?;
        if self.commutes(other, tol)? {
            return Self::new(&self.matrix * &other.matrix, tol);
        }
        if self.is_minimal() && other.is_minimal() {
            return Ok(if self.same_as(other, tol)? {
                self.clone()
            } else {
                Self::zero(self.dim())
            });
        }
        let efe = &(&self.matrix * &other.matrix) * &self.matrix;
        let mut current = efe.hermitian_part();
        for _ in 0..MEET_MAX_ITERATIONS {
            let next = (&current * &current).hermitian_part();
            let step = next.distance(&current)?;
            current = next;
            if step <= MEET_CONVERGENCE {
                return Self::new(current, tol).map_err(|e| {
                    Error::InvariantBreach(format!("meet limit is not a projection: {e}"))
                });
            }
        }
        Err(Error::NonConvergence {
            iterations: MEET_MAX_ITERATIONS,
        })
    }

    /// De Morgan dual of [`Event::meet`].
    pub fn join(&self, other: &Self, tol: &Tolerances) -> Result<Self> {
        Ok(self
            .complement()
            .meet(&other.complement(), tol)?
            .complement())
    }
}
