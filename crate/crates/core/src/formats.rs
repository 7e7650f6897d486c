//! JSON input files.
//!
//! Events are written either as a matrix literal `{"dim": n, "entries": ...}`
//! or as one of the named builders:
//!
//! ```json
//! {"spin": {"axis": "x", "sign": "+"}}
//! {"projector": [[1, 0], [0, 1]]}        // onto one (unnormalized) vector
//! {"span": [[[1, 0], [0, 0]], ...]}       // onto the span of several vectors
//! {"diagonal": [true, false, true]}
//! {"identity": 3}
//! {"zero": 3}
//! ```
//!
//! Vectors are lists of `[re, im]` pairs. Every event is validated on load.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::conditioning::State;
use crate::error::{Error, Result};
use crate::events::Event;
use crate::experiments::{spin_projector, Apparatus, Axis, Branch, Chain, Mode, Sign};
use crate::linalg::{complex, Complex, ComplexMatrix};
use crate::tolerance::Tolerances;
use crate::valuation::ValuationProblem;

fn vector(pairs: &[[f64; 2]]) -> Result<Vec<Complex>> {
    pairs.iter().map(|&[re, im]| complex(re, im)).collect()
}

fn field<T: DeserializeOwned>(value: &Value) -> Result<T> {
    Ok(T::deserialize(value)?)
}

#[derive(Deserialize)]
struct SpinSpec {
    axis: Axis,
    sign: Sign,
}

/// Parses an event from its JSON form.
pub fn event_from_value(value: &Value, tol: &Tolerances) -> Result<Event> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Malformed("an event must be a JSON object".into()))?;
    if obj.contains_key("entries") {
        let m: ComplexMatrix = field(value)?;
        return Event::new(m, tol);
    }
    if obj.len() != 1 {
        return Err(Error::Malformed(format!(
            "unrecognized event object with keys {:?}",
            obj.keys().collect::<Vec<_>>()
        )));
    }
    let (key, body) = obj.iter().next().expect("one key");
    match key.as_str() {
        "spin" => {
            let s: SpinSpec = field(body)?;
            Ok(spin_projector(s.axis, s.sign))
        }
        "projector" => Event::projector(&vector(&field::<Vec<[f64; 2]>>(body)?)?, tol),
        "span" => {
            let vs: Vec<Vec<[f64; 2]>> = field(body)?;
            let vs = vs.iter().map(|v| vector(v)).collect::<Result<Vec<_>>>()?;
            Event::span(&vs, tol)
        }
        "diagonal" => Event::diagonal(&field::<Vec<bool>>(body)?),
        "identity" => Ok(Event::identity(positive_dim(body)?)),
        "zero" => Ok(Event::zero(positive_dim(body)?)),
        other => Err(Error::Malformed(format!("unknown event builder `{other}`"))),
    }
}

fn positive_dim(body: &Value) -> Result<usize> {
    match field::<usize>(body)? {
        0 => Err(Error::EmptyMatrix),
        n => Ok(n),
    }
}

#[derive(Deserialize)]
struct EnsembleMember {
    weight: f64,
    vector: Vec<[f64; 2]>,
}

/// Parses a density matrix literal or `{"ensemble": [{"weight", "vector"}]}`.
pub fn state_from_value(value: &Value, tol: &Tolerances) -> Result<State> {
    match value.get("ensemble") {
        Some(members) => {
            let members: Vec<EnsembleMember> = field(members)?;
            let members = members
                .into_iter()
                .map(|m| Ok((m.weight, vector(&m.vector)?)))
                .collect::<Result<Vec<_>>>()?;
            State::from_ensemble(&members, tol)
        }
        None => State::from_matrix(field(value)?, tol),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ApparatusSpec {
    event: Value,
    mode: Mode,
    #[serde(default)]
    detector: Option<Branch>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSpec {
    dim: usize,
    preparation: Value,
    #[serde(default)]
    apparatuses: Vec<ApparatusSpec>,
    #[serde(rename = "final")]
    final_outcome: Value,
}

pub fn chain_from_value(value: &Value, tol: &Tolerances) -> Result<Chain> {
    let spec: ScenarioSpec = field(value)?;
    let checked = |v: &Value| -> Result<Event> {
        let e = event_from_value(v, tol)?;
        if e.dim() != spec.dim {
            return Err(Error::DimensionMismatch {
                left: spec.dim,
                right: e.dim(),
            });
        }
        Ok(e)
    };
    let preparation = checked(&spec.preparation)?;
    let apparatuses = spec
        .apparatuses
        .iter()
        .map(|a| Apparatus::new(checked(&a.event)?, a.mode, a.detector))
        .collect::<Result<Vec<_>>>()?;
    Chain::new(preparation, apparatuses, checked(&spec.final_outcome)?)
}

/// A double-slit model: preparation `f`, slits `e₁ ⊥ e₂`, and screen detectors.
#[derive(Debug, Clone)]
pub struct SlitModel {
    pub momentum: Event,
    pub slit1: Event,
    pub slit2: Event,
    pub detectors: Vec<Event>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SlitSpec {
    dim: usize,
    momentum: Value,
    slit1: Value,
    slit2: Value,
    detectors: Vec<Value>,
}

pub fn slit_model_from_value(value: &Value, tol: &Tolerances) -> Result<SlitModel> {
    let spec: SlitSpec = field(value)?;
    let checked = |v: &Value| -> Result<Event> {
        let e = event_from_value(v, tol)?;
        if e.dim() != spec.dim {
            return Err(Error::DimensionMismatch {
                left: spec.dim,
                right: e.dim(),
            });
        }
        Ok(e)
    };
    Ok(SlitModel {
        momentum: checked(&spec.momentum)?,
        slit1: checked(&spec.slit1)?,
        slit2: checked(&spec.slit2)?,
        detectors: spec.detectors.iter().map(checked).collect::<Result<_>>()?,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ValuationSpec {
    events: Vec<Value>,
    #[serde(default)]
    resolutions: Option<Vec<Vec<usize>>>,
}

pub fn valuation_from_value(value: &Value, tol: &Tolerances) -> Result<ValuationProblem> {
    let spec: ValuationSpec = field(value)?;
    let events = spec
        .events
        .iter()
        .map(|v| event_from_value(v, tol))
        .collect::<Result<Vec<_>>>()?;
    ValuationProblem::new(events, spec.resolutions, tol)
}

pub fn read_json(path: impl AsRef<Path>) -> Result<Value> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn load_event(path: impl AsRef<Path>, tol: &Tolerances) -> Result<Event> {
    event_from_value(&read_json(path)?, tol)
}

pub fn load_state(path: impl AsRef<Path>, tol: &Tolerances) -> Result<State> {
    state_from_value(&read_json(path)?, tol)
}

pub fn load_chain(path: impl AsRef<Path>, tol: &Tolerances) -> Result<Chain> {
    chain_from_value(&read_json(path)?, tol)
}

pub fn load_slit_model(path: impl AsRef<Path>, tol: &Tolerances) -> Result<SlitModel> {
    slit_model_from_value(&read_json(path)?, tol)
}

pub fn load_valuation(path: impl AsRef<Path>, tol: &Tolerances) -> Result<ValuationProblem> {
    valuation_from_value(&read_json(path)?, tol)
}
