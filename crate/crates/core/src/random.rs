//! Seeded random instances: vectors, matrices, events and full-rank states.
//!
//! All generators draw from [`ChaCha8Rng`], so instances are reproducible
//! from a `u64` seed on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conditioning::State;
use crate::events::Event;
use crate::linalg::{gram_schmidt, Complex, ComplexMatrix};
use crate::tolerance::Tolerances;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<Complex> {
    (0..dim).map(|_| random_complex(rng)).collect()
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    ComplexMatrix::new(dim, random_vector(rng, dim * dim)).expect("finite entries")
}

/// Orthonormal family of `count` random vectors in dimension `dim`.
pub fn random_orthonormal<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    count: usize,
) -> Vec<Vec<Complex>> {
    assert!(
        count <= dim,
        "cannot draw {count} orthonormal vectors in dimension {dim}"
    );
    let tol = Tolerances::default();
    loop {
        let vs: Vec<_> = (0..count).map(|_| random_vector(rng, dim)).collect();
        let basis = gram_schmidt(&vs, &tol).expect("consistent dimensions");
        if basis.len() == count {
            return basis;
        }
    }
}

/// Random projection of the given rank.
pub fn random_event<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Event {
    if rank == 0 {
        return Event::zero(dim);
    }
    let basis = random_orthonormal(rng, dim, rank);
    Event::from_orthonormal(&basis).expect("orthonormal basis yields a projection")
}

/// Random full-rank density operator: `(A A† + c·𝕀) / tr(·)` with `c` bounded away from zero.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> State {
    let a = random_matrix(rng, dim);
    let shift = rng.random_range(0.05..0.5);
    let m = &(&a * &a.adjoint()) + &ComplexMatrix::identity(dim).scale_real(shift);
    let rho = m.scale_real(1.0 / m.trace().re).hermitian_part();
    State::from_matrix(rho, &Tolerances::default()).expect("positive definite by construction")
}

/// Random pure state `|ψ⟩⟨ψ|`.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> State {
    let v = random_vector(rng, dim);
    State::pure(&v, &Tolerances::default()).expect("non-zero vector")
}

/// Random probability vector of length `n` with strictly positive entries.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}
