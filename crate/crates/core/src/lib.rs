//! Conditional probabilities on quantum event lattices.
//!
//! Events are orthogonal projections on a finite-dimensional Hilbert space.
//! Conditioning a state on an event uses the Lüders update; when the
//! conditional probability `ℙ(d | e₁, …, eₙ)` does not depend on the state it
//! is *objective* and is computed from the events alone. On top of this sit
//! the interference decomposition, sequential measurement chains with a
//! seeded sampler, and a search for non-contextual valuations.
//!
//! ```
//! use qcondprob::{cond_prob, Event, State, Tolerances};
//!
//! let tol = Tolerances::default();
//! let e = Event::diagonal(&[true, true, false]).unwrap();
//! let d = Event::diagonal(&[true, false, false]).unwrap();
//! let mu = State::maximally_mixed(3);
//! assert!((cond_prob(&mu, &d, &e, &tol).unwrap() - 0.5).abs() < 1e-12);
//! ```

pub mod classical;
pub mod conditioning;
pub mod error;
pub mod events;
pub mod experiments;
pub mod formats;
pub mod interference;
pub mod linalg;
pub mod objective;
pub mod random;
pub mod tolerance;
pub mod valuation;

pub use classical::{
    classical_cond_prob, classical_repeated, embed_diagonal, ClassicalEvent, ClassicalSpace,
};
pub use conditioning::{cond_prob, cond_state, repeated_cond_prob, state_value, PureVector, State};
pub use error::{Error, ErrorKind, Result};
pub use events::Event;
pub use experiments::{
    conditioned_on_record, evaluate_chain, sample_chain, spin_projector, Apparatus, Axis, Branch,
    Chain, ChainEvaluation, Mode, SampleOptions, SampleReport, Sign,
};
pub use interference::{
    double_slit_scan, incoherent_combine, objective_split, split_cond_prob, InterferenceReport,
};
pub use linalg::{fit_scalar, Complex, ComplexMatrix};
pub use objective::{objective_cond_prob, objective_seq, CondProbResult};
pub use tolerance::Tolerances;
pub use valuation::{build_resolutions, search_valuation, ValuationOutcome, ValuationProblem};
