//! Serial measurement arrangements and their outcome probabilities.
//!
//! A [`Chain`] starts from a minimal preparation outcome (never from an
//! assumed state), passes through a list of [`Apparatus`] and ends in a final
//! test. Each apparatus either blocks the negative outcome, or lets both
//! outcomes through and rejoins them, optionally with a detector recording
//! which branch was taken.
//!
//! Evaluation rules:
//! * blocked: the surviving branch event joins the conditioning sequence;
//! * joined without a detector: the apparatus contributes the sum of its
//!   branch events (`f + f' = 𝕀`) and no which-path information exists;
//! * joined with a detector: branch probabilities combine incoherently.

mod sampler;

pub use sampler::{sample_chain, SampleOptions, SampleReport, DEFAULT_TRIALS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::Event;
use crate::linalg::Complex;
use crate::objective::objective_seq;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

/// Projector onto spin `±ħ/2` along `axis`, `(𝕀 ± σ_axis)/2`, with the
/// z-eigenbasis as the standard basis:
/// `σx = [[0,1],[1,0]]`, `σy = [[0,-i],[i,0]]`, `σz = [[1,0],[0,-1]]`.
pub fn spin_projector(axis: Axis, sign: Sign) -> Event {
    let s = match sign {
        Sign::Plus => 0.5,
        Sign::Minus => -0.5,
    };
    let (off_upper, diag) = match axis {
        Axis::X => (Complex::new(s, 0.0), 0.0),
        Axis::Y => (Complex::new(0.0, -s), 0.0),
        Axis::Z => (Complex::new(0.0, 0.0), s),
    };
    let m = crate::linalg::ComplexMatrix::new(
        2,
        vec![
            Complex::new(0.5 + diag, 0.0),
            off_upper,
            off_upper.conj(),
            Complex::new(0.5 - diag, 0.0),
        ],
    )
    .expect("finite entries");
    Event::new(m, &Tolerances::default()).expect("spin projectors are rank-one projections")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    BlockOnNegation,
    PassBoth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Positive,
    Negation,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::Positive => "positive",
            Branch::Negation => "negation",
        }
    }

    fn select(self, event: &Event) -> Event {
        match self {
            Branch::Positive => event.clone(),
            Branch::Negation => event.complement(),
        }
    }
}

/// An apparatus testing `e` versus `e'`.
#[derive(Debug, Clone, PartialEq)]
pub struct Apparatus {
    test_event: Event,
    mode: Mode,
    detector: Option<Branch>,
}

impl Apparatus {
    pub fn new(test_event: Event, mode: Mode, detector: Option<Branch>) -> Result<Self> {
        if detector.is_some() && mode != Mode::PassBoth {
            return Err(Error::InvalidScenario(
                "a detector requires pass_both mode".into(),
            ));
        }
        Ok(Self {
            test_event,
            mode,
            detector,
        })
    }

    pub fn blocking(test_event: Event) -> Self {
        Self {
            test_event,
            mode: Mode::BlockOnNegation,
            detector: None,
        }
    }

    pub fn joined(test_event: Event) -> Self {
        Self {
            test_event,
            mode: Mode::PassBoth,
            detector: None,
        }
    }

    pub fn with_detector(test_event: Event, branch: Branch) -> Self {
        Self {
            test_event,
            mode: Mode::PassBoth,
            detector: Some(branch),
        }
    }

    pub fn test_event(&self) -> &Event {
        &self.test_event
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn detector(&self) -> Option<Branch> {
        self.detector
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    preparation: Event,
    apparatuses: Vec<Apparatus>,
    final_outcome: Event,
}

impl Chain {
    pub fn new(
        preparation: Event,
        apparatuses: Vec<Apparatus>,
        final_outcome: Event,
    ) -> Result<Self> {
        if !preparation.is_minimal() {
            return Err(Error::InvalidScenario(format!(
                "preparation must be a minimal outcome, got rank {}",
                preparation.rank()
            )));
        }
        let dim = preparation.dim();
        let dims = apparatuses
            .iter()
            .map(|a| a.test_event.dim())
            .chain([final_outcome.dim()]);
        if let Some(bad) = dims.into_iter().find(|&d| d != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: bad,
            });
        }
        Ok(Self {
            preparation,
            apparatuses,
            final_outcome,
        })
    }

    pub fn preparation(&self) -> &Event {
        &self.preparation
    }

    pub fn apparatuses(&self) -> &[Apparatus] {
        &self.apparatuses
    }

    pub fn final_outcome(&self) -> &Event {
        &self.final_outcome
    }

    pub fn dim(&self) -> usize {
        self.preparation.dim()
    }

    pub fn has_detector(&self) -> bool {
        self.apparatuses.iter().any(|a| a.detector.is_some())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Joined branches, no record: the apparatus acts as `f + f'`.
    Coherent,
    /// Negative branch blocked: the surviving event is conditioned on.
    Blocked,
    /// Joined branches with a record: incoherent sum over branches.
    WhichPath,
    /// The record of a detector has been read.
    RecordRead,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivationStep {
    pub apparatus: usize,
    pub rule: Rule,
    pub reason: String,
    /// Where and when which-path information comes into existence, if at all.
    pub annotation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainEvaluation {
    /// Probability of the final outcome.
    pub probability: f64,
    /// Probability of its negation.
    pub negation_probability: f64,
    /// Probability that the particle is not blocked along the way.
    pub survival: f64,
    pub trace: Vec<DerivationStep>,
}

struct Path {
    history: Vec<Event>,
    weight: f64,
}

fn extend(path: &Path, event: Event, tol: &Tolerances) -> Result<Option<Path>> {
    let p = objective_seq(&event, &path.history, tol)?.require()?;
    if p <= tol.prob_floor {
        return Ok(None);
    }
    let mut history = path.history.clone();
    history.push(event);
    Ok(Some(Path {
        history,
        weight: path.weight * p,
    }))
}

/// Evaluates the chain with the given detector records treated as read.
fn evaluate_with_records(
    chain: &Chain,
    records: &[(usize, Branch)],
    tol: &Tolerances,
) -> Result<ChainEvaluation> {
    let mut paths = vec![Path {
        history: vec![chain.preparation.clone()],
        weight: 1.0,
    }];
    let mut trace = Vec::with_capacity(chain.apparatuses.len());

    for (index, app) in chain.apparatuses.iter().enumerate() {
        let read = records.iter().find(|(i, _)| *i == index).map(|&(_, b)| b);
        let step = match (app.mode, app.detector, read) {
            (Mode::BlockOnNegation, _, _) => {
                paths = paths
                    .iter()
                    .map(|p| extend(p, app.test_event.clone(), tol))
                    .filter_map(Result::transpose)
                    .collect::<Result<_>>()?;
                DerivationStep {
                    apparatus: index,
                    rule: Rule::Blocked,
                    reason: "negative outlet blocked; the surviving outcome is conditioned on"
                        .into(),
                    annotation: None,
                }
            }
            (Mode::PassBoth, None, _) => {
                let joined = app
                    .test_event
                    .orthogonal_sum(&app.test_event.complement(), tol)?;
                for p in &mut paths {
                    p.history.push(joined.clone());
                }
                DerivationStep {
                    apparatus: index,
                    rule: Rule::Coherent,
                    reason: "outlets rejoined without a record; the apparatus acts as the sum of its branch events".into(),
                    annotation: Some("no which-path information is created".into()),
                }
            }
            (Mode::PassBoth, Some(detector), Some(branch)) => {
                let event = branch.select(&app.test_event);
                paths = paths
                    .iter()
                    .map(|p| extend(p, event.clone(), tol))
                    .filter_map(Result::transpose)
                    .collect::<Result<_>>()?;
                DerivationStep {
                    apparatus: index,
                    rule: Rule::RecordRead,
                    reason: format!("detector record read: branch {}", branch.label()),
                    annotation: Some(format!(
                        "record created at the detector on the {} outlet",
                        detector.label()
                    )),
                }
            }
            (Mode::PassBoth, Some(detector), None) => {
                let branches = [app.test_event.clone(), app.test_event.complement()];
                let mut next = Vec::with_capacity(paths.len() * 2);
                for p in &paths {
                    for b in &branches {
                        next.extend(extend(p, b.clone(), tol)?);
                    }
                }
                paths = next;
                DerivationStep {
                    apparatus: index,
                    rule: Rule::WhichPath,
                    reason: "a detector stores which outlet was taken; branch probabilities add without interference".into(),
                    annotation: Some(format!(
                        "record created at the detector on the {} outlet when the particle passes (or would have passed) it, \
                         not when the particle leaves the apparatus",
                        detector.label()
                    )),
                }
            }
        };
        trace.push(step);
    }

    let survival: f64 = paths.iter().map(|p| p.weight).sum();
    if paths.is_empty() || survival <= tol.prob_floor {
        return Err(Error::VanishingProduct { trace: survival });
    }
    let mut positive = 0.0;
    let mut negative = 0.0;
    for p in &paths {
        positive += p.weight * objective_seq(&chain.final_outcome, &p.history, tol)?.require()?;
        negative += p.weight
            * objective_seq(&chain.final_outcome.complement(), &p.history, tol)?.require()?;
    }
    Ok(ChainEvaluation {
        probability: positive / survival,
        negation_probability: negative / survival,
        survival,
        trace,
    })
}

/// Probability of the final outcome, with the rule applied at each apparatus.
pub fn evaluate_chain(chain: &Chain, tol: &Tolerances) -> Result<ChainEvaluation> {
    evaluate_with_records(chain, &[], tol)
}

/// Probability of the final outcome after reading the first detector's record.
pub fn conditioned_on_record(
    chain: &Chain,
    record: Branch,
    tol: &Tolerances,
) -> Result<ChainEvaluation> {
    let index = chain
        .apparatuses
        .iter()
        .position(|a| a.detector.is_some())
        .ok_or_else(|| Error::InvalidScenario("chain has no detector".into()))?;
    evaluate_with_records(chain, &[(index, record)], tol)
}
