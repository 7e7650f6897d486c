//! Two-branch decomposition of conditional probabilities.
//!
//! For `e = e₁ + e₂` with `e₁ ⟂ e₂`,
//!
//! ```text
//! μ(d|e)·μ(e) = μ(d|e₁)μ(e₁) + μ(d|e₂)μ(e₂) + 2 Re μ(e₁ d e₂)
//! ```
//!
//! and, for a minimal preparation `f`, the same identity holds for the
//! objective probabilities with `f e₁ d e₂ f = λ f` in place of `μ(e₁ d e₂)`.
//! When which-path information exists the cross term is dropped.

use serde::Serialize;

use crate::conditioning::{cond_prob, State};
use crate::error::{Error, Result};
use crate::events::Event;
use crate::linalg::{fit_scalar, Complex};
use crate::objective::{objective_cond_prob, objective_seq};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterferenceReport {
    /// Conditional probability of `d` under `e₁ + e₂`.
    pub total: f64,
    /// `μ(d|e₁)μ(e₁)` or `ℙ(d|f,e₁)ℙ(e₁|f)`.
    pub classical_part_1: f64,
    pub classical_part_2: f64,
    /// Signed cross term; zero for incoherent combination.
    pub interference: f64,
    /// `μ(e)` or `ℙ(e|f)`; `total · normalizer` equals the sum of the three parts.
    pub normalizer: f64,
    /// `λ` with `f e₁ d e₂ f = λ f` (objective variants only).
    pub lambda_complex: Option<Complex>,
    pub coherent: bool,
}

impl InterferenceReport {
    /// `total·normalizer - (parts + interference)`.
    pub fn identity_gap(&self) -> f64 {
        self.total * self.normalizer
            - (self.classical_part_1 + self.classical_part_2 + self.interference)
    }
}

fn check_branches(e1: &Event, e2: &Event, tol: &Tolerances) -> Result<Event> {
    e1.orthogonal_sum(e2, tol)
}

/// Decomposes `μ(d | e₁ + e₂)` for a state `μ`.
pub fn split_cond_prob(
    mu: &State,
    d: &Event,
    e1: &Event,
    e2: &Event,
    tol: &Tolerances,
) -> Result<InterferenceReport> {
    let e = check_branches(e1, e2, tol)?;
    let mut parts = [0.0; 2];
    for (part, branch) in parts.iter_mut().zip([e1, e2]) {
        let weight = mu.prob(branch)?;
        if weight <= tol.prob_floor {
            return Err(Error::ZeroProbability {
                probability: weight,
            });
        }
        *part = cond_prob(mu, d, branch, tol)? * weight;
    }
    let cross = mu.expectation(&(&(e1.matrix() * d.matrix()) * e2.matrix()))?;
    Ok(InterferenceReport {
        total: cond_prob(mu, d, &e, tol)?,
        classical_part_1: parts[0],
        classical_part_2: parts[1],
        interference: 2.0 * cross.re,
        normalizer: mu.prob(&e)?,
        lambda_complex: None,
        coherent: true,
    })
}

struct Branches {
    parts: [f64; 2],
    normalizer: f64,
}

fn objective_branches(
    f: &Event,
    d: &Event,
    e1: &Event,
    e2: &Event,
    tol: &Tolerances,
) -> Result<Branches> {
    if !f.is_minimal() {
        return Err(Error::NotMinimal { rank: f.rank() });
    }
    let e = check_branches(e1, e2, tol)?;
    let mut parts = [0.0; 2];
    for (part, branch) in parts.iter_mut().zip([e1, e2]) {
        let weight = objective_cond_prob(branch, f, tol)?.require()?;
        if weight <= tol.prob_floor {
            return Err(Error::ZeroProbability {
                probability: weight,
            });
        }
        let given_branch = objective_seq(d, &[f.clone(), branch.clone()], tol)?.require()?;
        *part = given_branch * weight;
    }
    let normalizer = objective_cond_prob(&e, f, tol)?.require()?;
    Ok(Branches { parts, normalizer })
}

/// Coherent decomposition of `ℙ(d | f, e₁ + e₂)` for minimal `f`.
pub fn objective_split(
    f: &Event,
    d: &Event,
    e1: &Event,
    e2: &Event,
    tol: &Tolerances,
) -> Result<InterferenceReport> {
    let Branches { parts, normalizer } = objective_branches(f, d, e1, e2, tol)?;
    let fe1de2f = &(&(&(f.matrix() * e1.matrix()) * d.matrix()) * e2.matrix()) * f.matrix();
    let lambda = fit_scalar(&fe1de2f, f.matrix(), tol)?.lambda;
    let interference = 2.0 * lambda.re;
    Ok(InterferenceReport {
        total: ((parts[0] + parts[1] + interference) / normalizer).clamp(0.0, 1.0),
        classical_part_1: parts[0],
        classical_part_2: parts[1],
        interference,
        normalizer,
        lambda_complex: Some(lambda),
        coherent: true,
    })
}

/// Which-path rule: the same branch terms without the cross term.
pub fn incoherent_combine(
    f: &Event,
    d: &Event,
    e1: &Event,
    e2: &Event,
    tol: &Tolerances,
) -> Result<InterferenceReport> {
    let Branches { parts, normalizer } = objective_branches(f, d, e1, e2, tol)?;
    Ok(InterferenceReport {
        total: (parts[0] + parts[1]) / normalizer,
        classical_part_1: parts[0],
        classical_part_2: parts[1],
        interference: 0.0,
        normalizer,
        lambda_complex: None,
        coherent: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub index: usize,
    /// `None` when the point is undefined (vanishing branch probabilities).
    pub coherent: Option<f64>,
    pub incoherent: Option<f64>,
}

impl ScanPoint {
    pub fn defined(&self) -> bool {
        self.coherent.is_some() && self.incoherent.is_some()
    }
}

/// Evaluates both combination rules at every detector event.
///
/// Undefined points (zero branch probability) are marked, not zeroed; other
/// errors abort the scan.
pub fn double_slit_scan(
    f: &Event,
    e1: &Event,
    e2: &Event,
    detectors: &[Event],
    tol: &Tolerances,
) -> Result<Vec<ScanPoint>> {
    detectors
        .iter()
        .enumerate()
        .map(|(index, d)| {
            let coherent = objective_split(f, d, e1, e2, tol);
            let incoherent = incoherent_combine(f, d, e1, e2, tol);
            match (coherent, incoherent) {
                (Ok(c), Ok(i)) => Ok(ScanPoint {
                    index,
                    coherent: Some(c.total),
                    incoherent: Some(i.total),
                }),
                (Err(e), _) | (_, Err(e)) if e.kind() == crate::error::ErrorKind::Undefined => {
                    Ok(ScanPoint {
                        index,
                        coherent: None,
                        incoherent: None,
                    })
                }
                (Err(e), _) | (_, Err(e)) => Err(e),
            }
        })
        .collect()
}

/// CSV with header `index,coherent,incoherent,defined`.
pub fn scan_to_csv(points: &[ScanPoint], format_value: impl Fn(f64) -> String) -> String {
    let mut out = String::from("index,coherent,incoherent,defined\n");
    for p in points {
        let cell = |v: Option<f64>| v.map(&format_value).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.index,
            cell(p.coherent),
            cell(p.incoherent),
            p.defined()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;
    use crate::objective::state_from_outcome;
    use crate::random::{random_event, random_orthonormal, random_state, seeded};
    use proptest::prelude::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn basis(dim: usize, i: usize) -> Vec<Complex> {
        (0..dim)
            .map(|k| if k == i { c(1., 0.) } else { c(0., 0.) })
            .collect()
    }

    #[test]
    fn commuting_detector_has_no_interference() {
        let mu = random_state(&mut seeded(1), 3);
        let e1 = Event::diagonal(&[true, false, false]).unwrap();
        let e2 = Event::diagonal(&[false, true, false]).unwrap();
        let d = Event::diagonal(&[true, false, true]).unwrap();
        let r = split_cond_prob(&mu, &d, &e1, &e2, &tol()).unwrap();
        assert_eq!(r.interference, 0.0);
        assert!(r.identity_gap().abs() < 1e-15);
    }

    #[test]
    fn interference_takes_both_signs() {
        // f = |+⟩ on two "slit" modes; d = |±⟩ detectors
        let s = 0.5f64.sqrt();
        let mu = State::pure(&[c(s, 0.), c(s, 0.)], &tol()).unwrap();
        let e1 = Event::diagonal(&[true, false]).unwrap();
        let e2 = e1.complement();
        let plus = Event::projector(&[c(1., 0.), c(1., 0.)], &tol()).unwrap();
        let minus = plus.complement();
        let r = split_cond_prob(&mu, &plus, &e1, &e2, &tol()).unwrap();
        assert!((r.interference - 0.5).abs() < 1e-12);
        let r = split_cond_prob(&mu, &minus, &e1, &e2, &tol()).unwrap();
        assert!((r.interference + 0.5).abs() < 1e-12);
        assert!(r.total.abs() < 1e-12);
    }

    #[test]
    fn split_preconditions() {
        let mu = State::from_matrix(ComplexMatrix::diag(&[1.0, 0.0]).unwrap(), &tol()).unwrap();
        let e1 = Event::diagonal(&[true, false]).unwrap();
        let d = Event::identity(2);
        assert!(matches!(
            split_cond_prob(&mu, &d, &e1, &e1.complement(), &tol()),
            Err(Error::ZeroProbability { .. })
        ));
        assert!(matches!(
            split_cond_prob(&mu, &d, &e1, &e1, &tol()),
            Err(Error::NotOrthogonal)
        ));
        assert!(matches!(
            split_cond_prob(&mu, &d, &e1, &Event::zero(2), &tol()),
            Err(Error::ZeroProbability { .. })
        ));
    }

    #[test]
    fn objective_split_requires_minimal_f() {
        let f = Event::diagonal(&[true, true, false]).unwrap();
        let e1 = Event::diagonal(&[true, false, false]).unwrap();
        let e2 = Event::diagonal(&[false, true, false]).unwrap();
        let err = objective_split(&f, &Event::identity(3), &e1, &e2, &tol());
        assert!(matches!(err, Err(Error::NotMinimal { rank: 2 })));
    }

    #[test]
    fn normalisation_with_identity_detector() {
        let mut rng = seeded(12);
        for dim in 2..=5 {
            let f = random_event(&mut rng, dim, 1);
            let b = random_orthonormal(&mut rng, dim, 2);
            let e1 = Event::from_orthonormal(&b[..1]).unwrap();
            let e2 = Event::from_orthonormal(&b[1..]).unwrap();
            let r = objective_split(&f, &Event::identity(dim), &e1, &e2, &tol()).unwrap();
            assert!((r.total - 1.0).abs() < 1e-12);
            let deficit = r.normalizer - r.classical_part_1 - r.classical_part_2;
            assert!((r.interference - deficit).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_everything_has_zero_lambda() {
        let f = Event::diagonal(&[true, false, false, false]).unwrap();
        let e1 = Event::diagonal(&[true, false, false, false]).unwrap();
        let e2 = Event::diagonal(&[false, true, false, false]).unwrap();
        let d = Event::diagonal(&[true, true, false, false]).unwrap();
        let r = objective_split(&f, &d, &e1, &e2, &tol());
        // ℙ(e₂|f) = 0 here, so the instance is excluded
        assert!(matches!(r, Err(Error::ZeroProbability { .. })));
        let f = Event::projector(&[c(1., 0.), c(1., 0.), c(0., 0.), c(0., 0.)], &tol()).unwrap();
        let r = objective_split(&f, &d, &e1, &e2, &tol()).unwrap();
        assert_eq!(r.lambda_complex.unwrap().re, 0.0);
        assert_eq!(r.interference, 0.0);
    }

    #[test]
    fn spin_chain_incoherent_half() {
        let s = 0.5f64.sqrt();
        let x = Event::projector(&[c(s, 0.), c(s, 0.)], &tol()).unwrap();
        let y = Event::projector(&[c(s, 0.), c(0., s)], &tol()).unwrap();
        let r = incoherent_combine(&x, &x, &y, &y.complement(), &tol()).unwrap();
        assert!((r.total - 0.5).abs() < 1e-12);
        assert!(!r.coherent);
        let coherent = objective_split(&x, &x, &y, &y.complement(), &tol()).unwrap();
        assert!((coherent.total - 1.0).abs() < 1e-12);
        let relation = coherent.total - coherent.interference / coherent.normalizer;
        assert!((r.total - relation).abs() < 1e-12);
    }

    #[test]
    fn scan_edge_cases() {
        let dim = 4;
        let f = Event::projector(&[c(1., 0.), c(1., 0.), c(1., 0.), c(0., 0.)], &tol()).unwrap();
        let e1 = Event::diagonal(&[true, false, false, false]).unwrap();
        let e2 = Event::diagonal(&[false, true, false, false]).unwrap();
        let ids = vec![Event::identity(dim); 3];
        for p in double_slit_scan(&f, &e1, &e2, &ids, &tol()).unwrap() {
            assert!((p.coherent.unwrap() - 1.0).abs() < 1e-12);
            assert!((p.incoherent.unwrap() - 1.0).abs() < 1e-12);
        }
        let diag: Vec<Event> = (0..dim)
            .map(|i| Event::projector(&basis(dim, i), &tol()).unwrap())
            .collect();
        for p in double_slit_scan(&f, &e1, &e2, &diag, &tol()).unwrap() {
            assert!((p.coherent.unwrap() - p.incoherent.unwrap()).abs() < 1e-12);
        }
        // f orthogonal to the second slit: every point undefined
        let f = Event::projector(&basis(dim, 0), &tol()).unwrap();
        let pts = double_slit_scan(&f, &e1, &e2, &diag, &tol()).unwrap();
        assert!(pts.iter().all(|p| !p.defined()));
        let csv = scan_to_csv(&pts[..1], |v| v.to_string());
        assert_eq!(csv, "index,coherent,incoherent,defined\n0,,,false\n");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn interference_identity(seed in any::<u64>(), dim in 2usize..=6) {
            let mut rng = seeded(seed);
            let mu = random_state(&mut rng, dim);
            let d = random_event(&mut rng, dim, 1 + seed as usize % dim);
            let k = 1 + (seed >> 16) as usize % (dim - 1);
            let b = random_orthonormal(&mut rng, dim, dim);
            let e1 = Event::from_orthonormal(&b[..k]).unwrap();
            let e2 = Event::from_orthonormal(&b[k..]).unwrap();
            let r = split_cond_prob(&mu, &d, &e1, &e2, &tol()).unwrap();
            prop_assert!(r.identity_gap().abs() <= 1e-12);
        }

        #[test]
        fn objective_split_matches_sequential_oracle(seed in any::<u64>(), dim in 2usize..=6) {
            let mut rng = seeded(seed);
            let f = random_event(&mut rng, dim, 1);
            let d = random_event(&mut rng, dim, 1 + seed as usize % dim);
            let b = random_orthonormal(&mut rng, dim, 2);
            let e1 = Event::from_orthonormal(&b[..1]).unwrap();
            let e2 = Event::from_orthonormal(&b[1..]).unwrap();
            let r = objective_split(&f, &d, &e1, &e2, &tol()).unwrap();
            let e = e1.orthogonal_sum(&e2, &tol()).unwrap();
            let oracle = objective_seq(&d, &[f.clone(), e], &tol()).unwrap().value.unwrap();
            prop_assert!((r.total - oracle).abs() <= 1e-10);
            prop_assert!(r.identity_gap().abs() <= 1e-12);
            let inc = incoherent_combine(&f, &d, &e1, &e2, &tol()).unwrap();
            prop_assert!((inc.total - (r.total - r.interference / r.normalizer)).abs() <= 1e-12);
            // the same preparation as a state gives the same cross term
            let mu = state_from_outcome(&f).unwrap();
            let s = split_cond_prob(&mu, &d, &e1, &e2, &tol()).unwrap();
            prop_assert!((s.interference - r.interference).abs() <= 1e-12);
        }
    }
}
