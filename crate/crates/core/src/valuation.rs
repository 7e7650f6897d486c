//! Search for non-contextual true/false assignments.
//!
//! A valuation assigns `true` to exactly one event of every resolution of the
//! identity (a pairwise-orthogonal family summing to `𝕀`), with events shared
//! between resolutions carrying a single value. Classical (commuting) event
//! sets always admit one; Kochen-Specker sets do not.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::events::Event;
use crate::linalg::ComplexMatrix;
use crate::tolerance::Tolerances;

pub const MAX_SEARCH_EVENTS: usize = 24;
pub const MAX_RESOLUTION_EVENTS: usize = 64;

#[derive(Debug, Clone)]
pub struct ValuationProblem {
    events: Vec<Event>,
    resolutions: Vec<Vec<usize>>,
    /// Maps each input event to its deduplicated index.
    input_index: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum ValuationOutcome {
    /// One value per deduplicated event.
    Sat { assignment: Vec<bool>, nodes: u64 },
    /// Exhaustion certificate: the number of search nodes explored.
    Unsat { nodes: u64 },
}

impl ValuationOutcome {
    pub fn nodes(&self) -> u64 {
        match self {
            ValuationOutcome::Sat { nodes, .. } | ValuationOutcome::Unsat { nodes } => *nodes,
        }
    }

    pub fn is_sat(&self) -> bool {
        matches!(self, ValuationOutcome::Sat { .. })
    }
}

impl ValuationProblem {
    /// Deduplicates `events` and validates or discovers the resolutions.
    ///
    /// Resolution indices refer to the input order.
    pub fn new(
        events: Vec<Event>,
        resolutions: Option<Vec<Vec<usize>>>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let dim = events
            .first()
            .map(Event::dim)
            .ok_or_else(|| Error::InvalidResolution("no events".into()))?;
        let mut unique: Vec<Event> = Vec::new();
        let mut input_index = Vec::with_capacity(events.len());
        for e in events {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: e.dim(),
                });
            }
            let found = unique
                .iter()
                .position(|u| u.same_as(&e, tol).unwrap_or(false));
            input_index.push(match found {
                Some(i) => i,
                None => {
                    unique.push(e);
                    unique.len() - 1
                }
            });
        }

        let resolutions = match resolutions {
            None => build_resolutions(&unique, tol)?,
            Some(given) => {
                let mut out = Vec::with_capacity(given.len());
                for r in given {
                    let mut mapped = Vec::with_capacity(r.len());
                    for i in r {
                        let &j = input_index.get(i).ok_or_else(|| {
                            Error::InvalidResolution(format!("event index {i} out of range"))
                        })?;
                        mapped.push(j);
                    }
                    check_resolution(&unique, &mapped, tol)?;
                    out.push(mapped);
                }
                out
            }
        };
        Ok(Self {
            events: unique,
            resolutions,
            input_index,
        })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn resolutions(&self) -> &[Vec<usize>] {
        &self.resolutions
    }

    /// Deduplicated index of each input event.
    pub fn input_index(&self) -> &[usize] {
        &self.input_index
    }

    /// Pairs `(i, j)`, `i < j`, with `eᵢ + eⱼ = 𝕀`.
    pub fn complement_pairs(&self, tol: &Tolerances) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for i in 0..self.events.len() {
            let c = self.events[i].complement();
            for j in i + 1..self.events.len() {
                if c.same_as(&self.events[j], tol).unwrap_or(false) {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }

    /// Checks that `assignment` makes exactly one event per resolution true.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        assignment.len() == self.events.len()
            && self
                .resolutions
                .iter()
                .all(|r| r.iter().filter(|&&i| assignment[i]).count() == 1)
    }
}

fn check_resolution(events: &[Event], family: &[usize], tol: &Tolerances) -> Result<()> {
    let Some(&first) = family.first() else {
        return Err(Error::InvalidResolution("empty resolution".into()));
    };
    for (a, &i) in family.iter().enumerate() {
        for &j in &family[a + 1..] {
            if i == j || !events[i].is_orthogonal(&events[j], tol)? {
                return Err(Error::InvalidResolution(format!(
                    "events {i} and {j} are not orthogonal"
                )));
            }
        }
    }
    let dim = events[first].dim();
    let sum = family
        .iter()
        .try_fold(ComplexMatrix::zeros(dim), |acc, &i| {
            acc.try_add(events[i].matrix())
        })?;
    let gap = sum.distance(&ComplexMatrix::identity(dim))?;
    if !tol.negligible(gap, (dim as f64).sqrt()) {
        return Err(Error::InvalidResolution(format!(
            "family {family:?} does not sum to the identity"
        )));
    }
    Ok(())
}

/// All maximal pairwise-orthogonal families (of non-zero events) that sum to `𝕀`,
/// each sorted, in lexicographic order.
pub fn build_resolutions(events: &[Event], tol: &Tolerances) -> Result<Vec<Vec<usize>>> {
    let n = events.len();
    if n > MAX_RESOLUTION_EVENTS {
        return Err(Error::TooLarge {
            count: n,
            limit: MAX_RESOLUTION_EVENTS,
        });
    }
    let Some(dim) = events.first().map(Event::dim) else {
        return Ok(Vec::new());
    };
    let mut adjacency = vec![0u64; n];
    for i in 0..n {
        for j in i + 1..n {
            if events[i].is_orthogonal(&events[j], tol)? {
                adjacency[i] |= 1 << j;
                adjacency[j] |= 1 << i;
            }
        }
    }
    let candidates = (0..n)
        .filter(|&i| !events[i].is_zero())
        .fold(0u64, |acc, i| acc | (1 << i));

    let mut cliques = Vec::new();
    bron_kerbosch(0, candidates, 0, &adjacency, &mut cliques);

    let mut out: Vec<Vec<usize>> = cliques
        .into_iter()
        .map(|set| (0..n).filter(|i| set >> i & 1 == 1).collect::<Vec<_>>())
        .filter(|family| family.iter().map(|&i| events[i].rank()).sum::<usize>() == dim)
        .filter(|family| check_resolution(events, family, tol).is_ok())
        .collect();
    out.sort();
    Ok(out)
}

fn bron_kerbosch(r: u64, mut p: u64, mut x: u64, adj: &[u64], out: &mut Vec<u64>) {
    if p == 0 {
        if x == 0 && r != 0 {
            out.push(r);
        }
        return;
    }
    let pivot = (p | x).trailing_zeros() as usize;
    let mut todo = p & !adj[pivot];
    while todo != 0 {
        let v = todo.trailing_zeros() as usize;
        todo &= todo - 1;
        bron_kerbosch(r | 1 << v, p & adj[v], x & adj[v], adj, out);
        p &= !(1 << v);
        x |= 1 << v;
    }
}

/// Backtracking search with unit propagation over the resolutions.
///
/// Complement pairs are added as two-element resolutions so that `e` and `e'`
/// always receive opposite values. Events outside every resolution are set
/// to `false`.
pub fn search_valuation(problem: &ValuationProblem, tol: &Tolerances) -> Result<ValuationOutcome> {
    let n = problem.events.len();
    if n > MAX_SEARCH_EVENTS {
        return Err(Error::TooLarge {
            count: n,
            limit: MAX_SEARCH_EVENTS,
        });
    }
    let mut constraints = problem.resolutions.clone();
    for (i, j) in problem.complement_pairs(tol) {
        if !constraints
            .iter()
            .any(|r| r.len() == 2 && r.contains(&i) && r.contains(&j))
        {
            constraints.push(vec![i, j]);
        }
    }
    let mut search = Search {
        constraints: &constraints,
        nodes: 0,
    };
    let found = search.run(vec![None; n]);
    Ok(match found {
        Some(a) => ValuationOutcome::Sat {
            assignment: a.into_iter().map(|v| v.unwrap_or(false)).collect(),
            nodes: search.nodes,
        },
        None => ValuationOutcome::Unsat {
            nodes: search.nodes,
        },
    })
}

struct Search<'a> {
    constraints: &'a [Vec<usize>],
    nodes: u64,
}

impl Search<'_> {
    /// Unit propagation to a fixpoint; `false` on conflict.
    fn propagate(&self, a: &mut [Option<bool>]) -> bool {
        loop {
            let mut changed = false;
            for r in self.constraints {
                let trues = r.iter().filter(|&&i| a[i] == Some(true)).count();
                let open: Vec<usize> = r.iter().copied().filter(|&i| a[i].is_none()).collect();
                match (trues, open.len()) {
                    (t, _) if t > 1 => return false,
                    (0, 0) => return false,
                    (1, k) if k > 0 => {
                        for i in open {
                            a[i] = Some(false);
                        }
                        changed = true;
                    }
                    (0, 1) => {
                        a[open[0]] = Some(true);
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn run(&mut self, mut a: Vec<Option<bool>>) -> Option<Vec<Option<bool>>> {
        self.nodes += 1;
        if !self.propagate(&mut a) {
            return None;
        }
        let open = self
            .constraints
            .iter()
            .find(|r| !r.iter().any(|&i| a[i] == Some(true)));
        let Some(r) = open else {
            return Some(a);
        };
        for &choice in r.iter().filter(|&&i| a[i].is_none()) {
            let mut next = a.clone();
            for &i in r {
                if next[i].is_none() {
                    next[i] = Some(i == choice);
                }
            }
            if let Some(done) = self.run(next) {
                return Some(done);
            }
        }
        None
    }
}
