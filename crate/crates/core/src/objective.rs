//! State-independent ("objective") conditional probabilities.
//!
//! `ℙ(d | e)` exists when `ede = λe` for a real `λ`; it then equals `λ` for
//! every state. For a sequence `e₁,…,eₙ` with product `E = e₁⋯eₙ` the
//! condition becomes `E d E† = λ E E†`. Detection is numerical: `λ` is the
//! least-squares fit and the residual decides.

use serde::Serialize;

use crate::conditioning::{chain_product, PureVector, State};
use crate::error::{Error, Result};
use crate::events::Event;
use crate::linalg::{fit_scalar, inner, Complex};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CondProbResult {
    /// `Some(λ)` (clamped to `[0, 1]`) when the probability is objective.
    pub value: Option<f64>,
    /// Best-fit scalar, reported even when the fit is poor.
    pub lambda: Complex,
    pub residual: f64,
    pub objective: bool,
    pub chain_length: usize,
}

impl CondProbResult {
    /// The objective value, or [`Error::InvariantBreach`] naming the residual
    /// when the pair is not objective.
    pub fn require(&self) -> Result<f64> {
        self.value.ok_or_else(|| {
            Error::InvariantBreach(format!(
                "conditional probability is not objective (residual {:.3e})",
                self.residual
            ))
        })
    }
}

/// `ℙ(d | e)`: fits `ede ≈ λe`.
pub fn objective_cond_prob(d: &Event, e: &Event, tol: &Tolerances) -> Result<CondProbResult> {
    objective_seq(d, std::slice::from_ref(e), tol)
}

/// `ℙ(d | e₁,…,eₙ)`: fits `E d E† ≈ λ E E†` with `E = e₁⋯eₙ`.
pub fn objective_seq(d: &Event, chain: &[Event], tol: &Tolerances) -> Result<CondProbResult> {
    let product = chain_product(chain)?;
    if product.dim() != d.dim() {
        return Err(Error::DimensionMismatch {
            left: product.dim(),
            right: d.dim(),
        });
    }
    let adj = product.adjoint();
    let reference = &product * &adj;
    let weight = reference.trace().re;
    if weight <= tol.prob_floor {
        return Err(Error::VanishingProduct { trace: weight });
    }
    let target = &(&product * d.matrix()) * &adj;
    let fit = fit_scalar(&target, &reference, tol)?;
    let bound = tol.objectivity_tol * (1.0 + reference.frobenius_norm());
    let objective = fit.residual <= bound && fit.lambda.im.abs() <= tol.objectivity_tol;
    Ok(CondProbResult {
        value: objective.then(|| fit.lambda.re.clamp(0.0, 1.0)),
        lambda: fit.lambda,
        residual: fit.residual,
        objective,
        chain_length: chain.len(),
    })
}

/// `⟨ψ|d|ψ⟩ / ‖ψ‖²`.
pub fn pure_event_prob(psi: &PureVector, d: &Event) -> Result<f64> {
    let applied = d.matrix().apply(psi.amplitudes())?;
    Ok(inner(psi.amplitudes(), &applied).re / (psi.norm() * psi.norm()))
}

/// `|⟨ψ|ξ⟩|² / (‖ψ‖²‖ξ‖²)`.
pub fn transition_prob(psi: &PureVector, xi: &PureVector) -> Result<f64> {
    if psi.dim() != xi.dim() {
        return Err(Error::DimensionMismatch {
            left: psi.dim(),
            right: xi.dim(),
        });
    }
    let overlap = inner(psi.amplitudes(), xi.amplitudes()).norm_sqr();
    Ok(overlap / (psi.norm() * psi.norm() * xi.norm() * xi.norm()))
}

/// The state `ℙ(· | e)` after a minimal outcome: `ρ = e / tr(e)`.
///
/// Outcomes of higher rank do not determine a state, even when some
/// `ℙ(d | e)` exist.
pub fn state_from_outcome(e: &Event) -> Result<State> {
    if !e.is_minimal() {
        return Err(Error::NotMinimal { rank: e.rank() });
    }
    let rho = e.matrix().scale_real(1.0 / e.matrix().trace().re);
    Ok(State::from_trusted(rho))
}
