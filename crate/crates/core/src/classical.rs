//! Finite classical probability spaces, used as the contrast case for the
//! quantum computations and embedded diagonally for equivalence checks.

use serde::Deserialize;

use crate::conditioning::State;
use crate::error::{Error, Result};
use crate::events::Event;
use crate::linalg::ComplexMatrix;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSpace {
    weights: Vec<f64>,
}

/// A subset of the outcomes of a [`ClassicalSpace`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassicalEvent {
    membership: Vec<bool>,
}

impl ClassicalSpace {
    pub fn new(weights: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        if let Some(&w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidWeight(w));
        }
        let total: f64 = weights.iter().sum();
        if !tol.approx_eq(total, 1.0) {
            return Err(Error::NotNormalized { trace: total });
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn n_outcomes(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn check(&self, e: &ClassicalEvent) -> Result<()> {
        if e.len() == self.n_outcomes() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.n_outcomes(),
                right: e.len(),
            })
        }
    }

    /// `μ(e)`.
    pub fn measure(&self, e: &ClassicalEvent) -> Result<f64> {
        self.check(e)?;
        Ok(self
            .weights
            .iter()
            .zip(&e.membership)
            .filter(|(_, &m)| m)
            .map(|(w, _)| w)
            .sum())
    }
}

impl ClassicalEvent {
    pub fn new(membership: Vec<bool>) -> Self {
        Self { membership }
    }

    /// Event from a list of outcome indices.
    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut membership = vec![false; n];
        for &i in indices {
            *membership
                .get_mut(i)
                .ok_or_else(|| Error::Malformed(format!("outcome {i} out of range 0..{n}")))? =
                true;
        }
        Ok(Self { membership })
    }

    pub fn full(n: usize) -> Self {
        Self {
            membership: vec![true; n],
        }
    }

    pub fn len(&self) -> usize {
        self.membership.len()
    }

    pub fn is_empty(&self) -> bool {
        !self.membership.iter().any(|&b| b)
    }

    pub fn contains(&self, outcome: usize) -> bool {
        self.membership[outcome]
    }

    pub fn membership(&self) -> &[bool] {
        &self.membership
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(Self {
            membership: self
                .membership
                .iter()
                .zip(&other.membership)
                .map(|(a, b)| *a && *b)
                .collect(),
        })
    }

    pub fn complement(&self) -> Self {
        Self {
            membership: self.membership.iter().map(|b| !b).collect(),
        }
    }
}

/// `μ(d | e) = μ(d ∩ e) / μ(e)`.
pub fn classical_cond_prob(
    space: &ClassicalSpace,
    d: &ClassicalEvent,
    e: &ClassicalEvent,
    tol: &Tolerances,
) -> Result<f64> {
    let pe = space.measure(e)?;
    if pe <= tol.prob_floor {
        return Err(Error::ZeroProbability { probability: pe });
    }
    Ok(space.measure(&d.intersection(e)?)? / pe)
}

/// Conditioning on a sequence reduces to conditioning on the intersection;
/// the order of `chain` is irrelevant.
pub fn classical_repeated(
    space: &ClassicalSpace,
    d: &ClassicalEvent,
    chain: &[ClassicalEvent],
    tol: &Tolerances,
) -> Result<f64> {
    let (first, rest) = chain.split_first().ok_or(Error::EmptyChain)?;
    let meet = rest
        .iter()
        .try_fold(first.clone(), |acc, e| acc.intersection(e))?;
    classical_cond_prob(space, d, &meet, tol)
}

/// Diagonal embedding of a classical space: `ρ = diag(weights)` and each
/// subset becomes a diagonal 0/1 projection.
#[derive(Debug, Clone)]
pub struct DiagonalEmbedding {
    pub state: State,
}

impl DiagonalEmbedding {
    pub fn event(&self, e: &ClassicalEvent) -> Result<Event> {
        if e.len() != self.state.dim() {
            return Err(Error::DimensionMismatch {
                left: self.state.dim(),
                right: e.len(),
            });
        }
        Event::diagonal(e.membership())
    }
}

pub fn embed_diagonal(space: &ClassicalSpace) -> DiagonalEmbedding {
    let rho = ComplexMatrix::diag(space.weights()).expect("weights validated finite");
    DiagonalEmbedding {
        state: State::from_trusted(rho),
    }
}

/// `{"weights": [..]}`.
#[derive(Debug, Clone, Deserialize)]
pub struct SpaceFile {
    pub weights: Vec<f64>,
}

impl SpaceFile {
    pub fn into_space(self, tol: &Tolerances) -> Result<ClassicalSpace> {
        ClassicalSpace::new(self.weights, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditioning::{cond_prob, repeated_cond_prob};
    use crate::random::{random_weights, seeded};
    use proptest::prelude::*;
    use rand::Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// Oracle: enumerate outcomes, keep those in every conditioning event.
    fn enumerate(space: &ClassicalSpace, d: &ClassicalEvent, chain: &[ClassicalEvent]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (k, w) in space.weights().iter().enumerate() {
            if chain.iter().all(|e| e.contains(k)) {
                den += w;
                if d.contains(k) {
                    num += w;
                }
            }
        }
        num / den
    }

    fn random_event<R: Rng>(rng: &mut R, n: usize) -> ClassicalEvent {
        ClassicalEvent::new((0..n).map(|_| rng.random_bool(0.6)).collect())
    }

    #[test]
    fn cond_prob_examples() {
        let space = ClassicalSpace::uniform(4);
        let e = ClassicalEvent::from_indices(4, &[1, 2]).unwrap();
        let d = ClassicalEvent::from_indices(4, &[2, 3]).unwrap();
        assert_eq!(classical_cond_prob(&space, &e, &e, &tol()).unwrap(), 1.0);
        assert_eq!(
            classical_cond_prob(&space, &e.complement(), &e, &tol()).unwrap(),
            0.0
        );
        assert_eq!(classical_cond_prob(&space, &d, &e, &tol()).unwrap(), 0.5);
        let null = ClassicalEvent::new(vec![false; 4]);
        assert!(matches!(
            classical_cond_prob(&space, &d, &null, &tol()),
            Err(Error::ZeroProbability { .. })
        ));
        assert!(ClassicalEvent::from_indices(4, &[4]).is_err());
    }

    #[test]
    fn space_validation() {
        assert!(ClassicalSpace::new(vec![0.5, 0.6], &tol()).is_err());
        assert!(ClassicalSpace::new(vec![1.5, -0.5], &tol()).is_err());
        assert!(ClassicalSpace::new(vec![], &tol()).is_err());
        let file: SpaceFile = serde_json::from_str(r#"{"weights": [0.25, 0.75]}"#).unwrap();
        assert_eq!(file.into_space(&tol()).unwrap().n_outcomes(), 2);
    }

    #[test]
    fn repeated_examples() {
        let mut rng = seeded(4);
        let space = ClassicalSpace::uniform(8);
        for _ in 0..50 {
            let d = random_event(&mut rng, 8);
            let chain: Vec<_> = (0..3).map(|_| random_event(&mut rng, 8)).collect();
            let Ok(value) = classical_repeated(&space, &d, &chain, &tol()) else {
                continue;
            };
            assert!((value - enumerate(&space, &d, &chain)).abs() < 1e-15);
            let mut reversed = chain.clone();
            reversed.reverse();
            assert_eq!(
                value,
                classical_repeated(&space, &d, &reversed, &tol()).unwrap()
            );
            let single = classical_repeated(&space, &d, &chain[..1], &tol()).unwrap();
            assert_eq!(
                single,
                classical_cond_prob(&space, &d, &chain[0], &tol()).unwrap()
            );
        }
    }

    #[test]
    fn embedding_examples() {
        let emb = embed_diagonal(&ClassicalSpace::uniform(2));
        assert_eq!(emb.state.rho(), &ComplexMatrix::diag(&[0.5, 0.5]).unwrap());
        let first = ClassicalEvent::from_indices(2, &[0]).unwrap();
        assert_eq!(
            emb.event(&first).unwrap().matrix(),
            &ComplexMatrix::diag(&[1.0, 0.0]).unwrap()
        );
        assert_eq!(
            emb.event(&ClassicalEvent::full(2)).unwrap(),
            Event::identity(2)
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn embedding_matches_classical(seed in any::<u64>(), n in 1usize..=8, len in 1usize..=4) {
            let mut rng = seeded(seed);
            let space = ClassicalSpace::new(random_weights(&mut rng, n), &tol()).unwrap();
            let emb = embed_diagonal(&space);
            let d = random_event(&mut rng, n);
            let chain: Vec<_> = (0..len).map(|_| random_event(&mut rng, n)).collect();
            let qd = emb.event(&d).unwrap();
            let qchain: Vec<_> = chain.iter().map(|e| emb.event(e).unwrap()).collect();
            if let Ok(c) = classical_cond_prob(&space, &d, &chain[0], &tol()) {
                let q = cond_prob(&emb.state, &qd, &qchain[0], &tol()).unwrap();
                prop_assert!((c - q).abs() <= 1e-12);
            }
            if let Ok(c) = classical_repeated(&space, &d, &chain, &tol()) {
                let q = repeated_cond_prob(&emb.state, &qd, &qchain, &tol()).unwrap();
                prop_assert!((c - q).abs() <= 1e-12);
            }
        }

        #[test]
        fn two_part_decomposition(seed in any::<u64>(), n in 2usize..=8) {
            let mut rng = seeded(seed);
            let space = ClassicalSpace::new(random_weights(&mut rng, n), &tol()).unwrap();
            let d = random_event(&mut rng, n);
            let e1 = random_event(&mut rng, n);
            let e2 = random_event(&mut rng, n).intersection(&e1.complement()).unwrap();
            prop_assume!(!e1.is_empty() && !e2.is_empty());
            let e = ClassicalEvent::new(e1.membership().iter().zip(e2.membership()).map(|(a, b)| *a || *b).collect());
            let lhs = classical_cond_prob(&space, &d, &e, &tol()).unwrap() * space.measure(&e).unwrap();
            let rhs = classical_cond_prob(&space, &d, &e1, &tol()).unwrap() * space.measure(&e1).unwrap()
                + classical_cond_prob(&space, &d, &e2, &tol()).unwrap() * space.measure(&e2).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }
    }
}
