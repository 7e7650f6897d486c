//! Density operators and Lüders conditioning.
//!
//! A [`State`] is the probability measure `μ(a) = tr(ρa)`. Observing an event
//! `e` maps it to `ρ ↦ eρe / tr(ρe)`, and conditioning on a sequence of
//! events composes these updates. The sequence form has a closed expression,
//! `μ(e₁⋯eₙ d eₙ⋯e₁) / μ(e₁⋯eₙ⋯e₁)`, which [`repeated_cond_prob`] evaluates and
//! cross-checks against the step-by-step composition.

use crate::error::{Error, Result};
use crate::events::Event;
use crate::linalg::{vector_norm, Complex, ComplexMatrix};
use crate::tolerance::Tolerances;

/// Pivot tolerance of the positivity check.
pub const PSD_PIVOT_TOL: f64 = 1e-10;
/// Off-diagonal bound on the exhausted block of the positivity check.
const PSD_RESIDUAL_TOL: f64 = 1e-8;
/// Disagreement between the closed-form and iterated chain evaluations that
/// counts as an internal error.
pub const CROSS_CHECK_TOL: f64 = 1e-9;

/// A validated density operator: self-adjoint, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    rho: ComplexMatrix,
}

/// A non-zero vector, not necessarily normalised.
#[derive(Debug, Clone, PartialEq)]
pub struct PureVector {
    amplitudes: Vec<Complex>,
    norm: f64,
}

impl PureVector {
    pub fn new(amplitudes: Vec<Complex>, tol: &Tolerances) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        if amplitudes
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite);
        }
        let norm = vector_norm(&amplitudes);
        if norm <= tol.atol {
            return Err(Error::ZeroVector);
        }
        Ok(Self { amplitudes, norm })
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// The minimal event onto this vector's line.
    pub fn projector(&self, tol: &Tolerances) -> Result<Event> {
        Event::projector(&self.amplitudes, tol)
    }
}

impl State {
    /// Validates a raw density matrix.
    pub fn from_matrix(rho: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let deviation = rho.hermitian_deviation();
        if !tol.negligible(deviation, rho.frobenius_norm()) {
            return Err(Error::NotSelfAdjoint { deviation });
        }
        let trace = rho.trace();
        if !tol.approx_eq(trace.re, 1.0) || !tol.negligible(trace.im.abs(), 1.0) {
            return Err(Error::NotNormalized { trace: trace.re });
        }
        check_positive(&rho)?;
        Ok(Self { rho })
    }

    /// `ρ = Σ wᵢ |vᵢ⟩⟨vᵢ| / ‖vᵢ‖²`; weights must be non-negative and sum to 1.
    pub fn from_ensemble(members: &[(f64, Vec<Complex>)], tol: &Tolerances) -> Result<Self> {
        let dim = members
            .first()
            .map(|(_, v)| v.len())
            .ok_or(Error::EmptyMatrix)?;
        let mut rho = ComplexMatrix::zeros(dim.max(1));
        let mut total = 0.0;
        for (w, v) in members {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidWeight(*w));
            }
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: v.len(),
                });
            }
            let v = PureVector::new(v.clone(), tol)?;
            let outer = ComplexMatrix::outer(v.amplitudes(), v.amplitudes())?;
            rho = rho.try_add(&outer.scale_real(w / (v.norm() * v.norm())))?;
            total += w;
        }
        if !tol.approx_eq(total, 1.0) {
            return Err(Error::NotNormalized { trace: total });
        }
        Ok(Self { rho })
    }

    /// `|ψ⟩⟨ψ| / ‖ψ‖²`.
    pub fn pure(v: &[Complex], tol: &Tolerances) -> Result<Self> {
        Self::from_ensemble(&[(1.0, v.to_vec())], tol)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            rho: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// Unchecked constructor for operators that are density matrices by construction.
    pub(crate) fn from_trusted(rho: ComplexMatrix) -> Self {
        Self { rho }
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// `tr(ρa)` for any operator `a`, complex in general.
    pub fn expectation(&self, a: &ComplexMatrix) -> Result<Complex> {
        Ok(self.rho.matmul(a)?.trace())
    }

    /// `μ(e)`.
    pub fn prob(&self, e: &Event) -> Result<f64> {
        Ok(self.expectation(e.matrix())?.re)
    }
}

/// Pivoted Cholesky (LDL*) positivity test; no eigendecomposition.
fn check_positive(rho: &ComplexMatrix) -> Result<()> {
    let n = rho.dim();
    let mut a: Vec<Complex> = rho.entries().to_vec();
    let mut remaining: Vec<usize> = (0..n).collect();
    while !remaining.is_empty() {
        let (pos, &k) = remaining
            .iter()
            .enumerate()
            .max_by(|(_, &i), (_, &j)| a[i * n + i].re.total_cmp(&a[j * n + j].re))
            .expect("non-empty");
        let pivot = a[k * n + k].re;
        if pivot < -PSD_PIVOT_TOL {
            return Err(Error::NotPositive { pivot });
        }
        if pivot <= PSD_PIVOT_TOL {
            // Every remaining diagonal is ~0, so the remaining block must vanish.
            for &i in &remaining {
                for &j in &remaining {
                    if a[i * n + j].norm() > PSD_RESIDUAL_TOL {
                        return Err(Error::NotPositive { pivot });
                    }
                }
            }
            return Ok(());
        }
        remaining.swap_remove(pos);
        for &i in &remaining {
            let factor = a[i * n + k] / pivot;
            for &j in &remaining {
                let update = factor * a[k * n + j];
                a[i * n + j] -= update;
            }
        }
    }
    Ok(())
}

fn check_dims(mu: &State, dim: usize) -> Result<()> {
    if mu.dim() == dim {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            left: mu.dim(),
            right: dim,
        })
    }
}

/// `μ(a) = Re tr(ρa)` for self-adjoint `a`.
pub fn state_value(mu: &State, a: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    check_dims(mu, a.dim())?;
    let deviation = a.hermitian_deviation();
    if !tol.negligible(deviation, a.frobenius_norm()) {
        return Err(Error::NotSelfAdjoint { deviation });
    }
    Ok(mu.expectation(a)?.re)
}

fn conditioning_prob(mu: &State, e: &Event, tol: &Tolerances) -> Result<f64> {
    check_dims(mu, e.dim())?;
    let p = mu.prob(e)?;
    if p <= tol.prob_floor {
        return Err(Error::ZeroProbability { probability: p });
    }
    Ok(p)
}

/// Lüders update `ρ ↦ eρe / tr(ρe)`.
pub fn cond_state(mu: &State, e: &Event, tol: &Tolerances) -> Result<State> {
    let p = conditioning_prob(mu, e, tol)?;
    let e = e.matrix();
    let rho = (&(e * mu.rho()) * e).scale_real(1.0 / p).hermitian_part();
    Ok(State::from_trusted(rho))
}

/// `μ(d | e) = μ(ede) / μ(e)`.
pub fn cond_prob(mu: &State, d: &Event, e: &Event, tol: &Tolerances) -> Result<f64> {
    let p = conditioning_prob(mu, e, tol)?;
    check_dims(mu, d.dim())?;
    let ede = &(e.matrix() * d.matrix()) * e.matrix();
    Ok(mu.expectation(&ede)?.re / p)
}

/// `E = e₁e₂⋯eₙ`.
pub(crate) fn chain_product(chain: &[Event]) -> Result<ComplexMatrix> {
    ComplexMatrix::product(chain.iter().map(Event::matrix))
}

/// Closed form `μ(E d E†) / μ(E E†)` with `E = e₁⋯eₙ`, cross-checked against
/// the iterated Lüders composition.
pub fn repeated_cond_prob(mu: &State, d: &Event, chain: &[Event], tol: &Tolerances) -> Result<f64> {
    let closed = repeated_cond_prob_closed(mu, d, chain, tol)?;
    let iterated = repeated_cond_prob_iterated(mu, d, chain, tol)?;
    if (closed - iterated).abs() > CROSS_CHECK_TOL {
        return Err(Error::InvariantBreach(format!(
            "closed-form chain probability {closed} disagrees with iterated {iterated}"
        )));
    }
    Ok(closed)
}

pub fn repeated_cond_prob_closed(
    mu: &State,
    d: &Event,
    chain: &[Event],
    tol: &Tolerances,
) -> Result<f64> {
    check_dims(mu, d.dim())?;
    for e in chain {
        check_dims(mu, e.dim())?;
    }
    let e = chain_product(chain)?;
    let e_adj = e.adjoint();
    let denominator = mu.expectation(&(&e * &e_adj))?.re;
    if denominator <= tol.prob_floor {
        return Err(Error::ZeroProbability {
            probability: denominator,
        });
    }
    let numerator = mu.expectation(&(&(&e * d.matrix()) * &e_adj))?.re;
    Ok(numerator / denominator)
}

/// `μ_{e₁,…,eₙ} = (μ_{e₁,…,eₙ₋₁})_{eₙ}`, evaluated at `d`.
pub fn repeated_cond_prob_iterated(
    mu: &State,
    d: &Event,
    chain: &[Event],
    tol: &Tolerances,
) -> Result<f64> {
    if chain.is_empty() {
        return Err(Error::EmptyChain);
    }
    check_dims(mu, d.dim())?;
    let last = chain
        .iter()
        .try_fold(mu.clone(), |state, e| cond_state(&state, e, tol))?;
    last.prob(d)
}
