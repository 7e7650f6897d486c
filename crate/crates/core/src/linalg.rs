//! Dense complex square matrices.
//!
//! Every operator in the crate (events, density operators, chain products)
//! is a [`ComplexMatrix`]. Storage is row-major; dimensions in practice are
//! small (≤ 8), so nothing here is blocked or vectorised.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

pub type Complex = Complex64;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);

/// Checked complex constructor; rejects NaN and infinities.
pub fn complex(re: f64, im: f64) -> Result<Complex> {
    if re.is_finite() && im.is_finite() {
        Ok(Complex::new(re, im))
    } else {
        Err(Error::NonFinite)
    }
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixLiteral", into = "MatrixLiteral")]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex>,
}

/// On-disk form: `{"dim": n, "entries": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixLiteral {
    pub dim: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<MatrixLiteral> for ComplexMatrix {
    type Error = Error;

    fn try_from(lit: MatrixLiteral) -> Result<Self> {
        if lit.entries.len() != lit.dim {
            return Err(Error::Malformed(format!(
                "expected {} rows, found {}",
                lit.dim,
                lit.entries.len()
            )));
        }
        let mut data = Vec::with_capacity(lit.dim * lit.dim);
        for (i, row) in lit.entries.iter().enumerate() {
            if row.len() != lit.dim {
                return Err(Error::Malformed(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    lit.dim
                )));
            }
            for &[re, im] in row {
                data.push(complex(re, im)?);
            }
        }
        ComplexMatrix::new(lit.dim, data)
    }
}

impl From<ComplexMatrix> for MatrixLiteral {
    fn from(m: ComplexMatrix) -> Self {
        let entries = m
            .data
            .chunks(m.dim)
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        MatrixLiteral {
            dim: m.dim,
            entries,
        }
    }
}

impl ComplexMatrix {
    /// Builds a matrix from `dim * dim` row-major entries.
    pub fn new(dim: usize, data: Vec<Complex>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != dim * dim {
            return Err(Error::Malformed(format!(
                "{} entries for dimension {dim}",
                data.len()
            )));
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, data })
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::new(dim, data.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let dim = values.len();
        let mut data = vec![ZERO; dim * dim];
        for (i, &v) in values.iter().enumerate() {
            data[i * dim + i] = complex(v, 0.0)?;
        }
        Ok(Self { dim, data })
    }

    /// `|v⟩⟨w|`.
    pub fn outer(v: &[Complex], w: &[Complex]) -> Result<Self> {
        if v.len() != w.len() {
            return Err(Error::DimensionMismatch {
                left: v.len(),
                right: w.len(),
            });
        }
        let dim = v.len();
        let mut data = Vec::with_capacity(dim * dim);
        for vi in v {
            for wj in w {
                data.push(vi * wj.conj());
            }
        }
        Self::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.data[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex]> {
        self.data.chunks(self.dim)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                for (o, b) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(Self { dim: n, data: out })
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                out[j * n + i] = self.data[i * n + j].conj();
            }
        }
        Self { dim: n, data: out }
    }

    pub fn trace(&self) -> Complex {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: Complex) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex::new(factor, 0.0))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex, Complex) -> Complex) -> Self {
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `||self - other||_F`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// `||self - self†||_F`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.data[i * n + j] - self.data[j * n + i].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `(self + self†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        self.zip_with(&adj, |a, b| (a + b) * 0.5)
    }

    pub fn apply(&self, v: &[Complex]) -> Result<Vec<Complex>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: v.len(),
            });
        }
        Ok(self
            .rows()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Product of a non-empty sequence of matrices, left to right.
    pub fn product<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> Result<Self> {
        let mut iter = factors.into_iter();
        let first = iter.next().ok_or(Error::EmptyChain)?.clone();
        iter.try_fold(first, |acc, m| acc.matmul(m))
    }
}

pub fn inner(v: &[Complex], w: &[Complex]) -> Complex {
    v.iter().zip(w).map(|(a, b)| a.conj() * b).sum()
}

pub fn vector_norm(v: &[Complex]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Modified Gram-Schmidt. Vectors whose remainder has norm `<= atol` are dropped,
/// so the output is an orthonormal basis of the span.
pub fn gram_schmidt(vectors: &[Vec<Complex>], tol: &Tolerances) -> Result<Vec<Vec<Complex>>> {
    let mut basis: Vec<Vec<Complex>> = Vec::new();
    let Some(dim) = vectors.first().map(Vec::len) else {
        return Ok(basis);
    };
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: v.len(),
            });
        }
        if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        let mut r = v.clone();
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for u in &basis {
                let c = inner(u, &r);
                for (ri, ui) in r.iter_mut().zip(u) {
                    *ri -= c * ui;
                }
            }
        }
        let norm = vector_norm(&r);
        if norm > tol.atol.max(tol.rtol * vector_norm(v)) {
            basis.push(r.into_iter().map(|z| z / norm).collect());
        }
    }
    Ok(basis)
}

/// Least-squares fit of `a ≈ λ b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarFit {
    pub lambda: Complex,
    /// `||a - λ b||_F`.
    pub residual: f64,
}

/// Fits `a ≈ λ b` with `λ = tr(b† a) / tr(b† b)`.
///
/// Fails when `b` is numerically zero (`||b||_F <= atol`).
pub fn fit_scalar(a: &ComplexMatrix, b: &ComplexMatrix, tol: &Tolerances) -> Result<ScalarFit> {
    a.check_dim(b)?;
    let b_norm_sq: f64 = b.data.iter().map(|z| z.norm_sqr()).sum();
    if b_norm_sq.sqrt() <= tol.atol {
        return Err(Error::ZeroMatrix);
    }
    // tr(b† a) = Σ conj(b_ij) a_ij
    let inner: Complex = b.data.iter().zip(&a.data).map(|(x, y)| x.conj() * y).sum();
    let lambda = inner / b_norm_sq;
    let residual = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - lambda * y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(ScalarFit { lambda, residual })
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for row in self.rows() {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:>9.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

// Operator sugar for internal use once dimensions are known to agree.
// These panic on mismatch; public entry points use the checked forms.

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix dimension mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix dimension mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix dimension mismatch")
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_matrix, seeded};
    use proptest::prelude::*;

    fn plane_e() -> ComplexMatrix {
        ComplexMatrix::diag(&[1.0, 1.0, 0.0, 0.0]).unwrap()
    }

    fn plane_d() -> ComplexMatrix {
        #[rustfmt::skip]
        let d = [
            0.5, 0.0, 0.5, 0.0,
            0.0, 0.5, 0.0, 0.5,
            0.5, 0.0, 0.5, 0.0,
            0.0, 0.5, 0.0, 0.5,
        ];
        ComplexMatrix::from_real(4, &d).unwrap()
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(matches!(
            ComplexMatrix::new(0, vec![]),
            Err(Error::EmptyMatrix)
        ));
        assert!(ComplexMatrix::new(2, vec![ONE; 3]).is_err());
        assert!(matches!(
            ComplexMatrix::new(1, vec![Complex::new(f64::NAN, 0.0)]),
            Err(Error::NonFinite)
        ));
        assert!(complex(f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn identity_is_neutral() {
        let mut rng = seeded(1);
        let a = random_matrix(&mut rng, 4);
        assert_eq!(ComplexMatrix::identity(4).matmul(&a).unwrap(), a);
        assert_eq!(a.matmul(&ComplexMatrix::identity(4)).unwrap(), a);
    }

    #[test]
    fn matmul_dimension_mismatch() {
        let err = ComplexMatrix::identity(2).matmul(&ComplexMatrix::identity(3));
        assert!(matches!(
            err,
            Err(Error::DimensionMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn plane_pair_products() {
        let e = plane_e();
        let d = plane_d();
        assert_eq!(&e * &e, e);
        let ede = &(&e * &d) * &e;
        assert!(ede.distance(&e.scale_real(0.5)).unwrap() < 1e-15);
    }

    #[test]
    fn adjoint_trace_norm() {
        let e = plane_e();
        assert_eq!(
            ComplexMatrix::identity(3).adjoint(),
            ComplexMatrix::identity(3)
        );
        assert_eq!(e.adjoint(), e);
        assert_eq!(plane_d().adjoint(), plane_d());
        assert_eq!(ComplexMatrix::identity(5).trace(), Complex::new(5.0, 0.0));
        assert_eq!(e.trace(), Complex::new(2.0, 0.0));
        assert_eq!(ComplexMatrix::zeros(3).frobenius_norm(), 0.0);
        assert!((ComplexMatrix::identity(7).frobenius_norm() - 7f64.sqrt()).abs() < 1e-15);
        assert!((e.frobenius_norm() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn fit_scalar_examples() {
        let tol = Tolerances::default();
        let e = plane_e();
        let fit = fit_scalar(&e.scale_real(0.5), &e, &tol).unwrap();
        assert!((fit.lambda - Complex::new(0.5, 0.0)).norm() < 1e-15);
        assert!(fit.residual < 1e-15);

        let fit = fit_scalar(&e, &e, &tol).unwrap();
        assert_eq!(fit.lambda, ONE);
        assert_eq!(fit.residual, 0.0);

        let a = ComplexMatrix::diag(&[0.0, 0.0, 3.0, 0.0]).unwrap();
        let fit = fit_scalar(&a, &e, &tol).unwrap();
        assert_eq!(fit.lambda, ZERO);
        assert!((fit.residual - a.frobenius_norm()).abs() < 1e-15);

        assert!(matches!(
            fit_scalar(&e, &ComplexMatrix::zeros(4), &tol),
            Err(Error::ZeroMatrix)
        ));
    }

    /// Brute-force oracle: minimise ||a - λ b|| over a grid of complex λ.
    fn grid_best(a: &ComplexMatrix, b: &ComplexMatrix) -> (Complex, f64) {
        let mut best = (ZERO, f64::INFINITY);
        for i in -200..=200 {
            for j in -200..=200 {
                let lambda = Complex::new(i as f64 * 0.01, j as f64 * 0.01);
                let r = a.distance(&b.scale(lambda)).unwrap();
                if r < best.1 {
                    best = (lambda, r);
                }
            }
        }
        best
    }

    #[test]
    fn fit_scalar_matches_grid_scan_for_rank_one_reference() {
        let tol = Tolerances::default();
        let mut rng = seeded(7);
        for case in 0..4 {
            let v = crate::random::random_vector(&mut rng, 3);
            let b = ComplexMatrix::outer(&v, &v).unwrap();
            // exact multiple on the grid
            let lambda = Complex::new(0.37 - 0.2 * case as f64, 0.11 * case as f64);
            let a = b.scale(lambda);
            let fit = fit_scalar(&a, &b, &tol).unwrap();
            let (grid_lambda, grid_res) = grid_best(&a, &b);
            assert!((fit.lambda - grid_lambda).norm() < 1e-9);
            assert!(fit.residual <= 1e-12 * b.frobenius_norm());
            assert!(grid_res < 1e-9);

            // perturbed: residual must be positive and no grid λ does better
            let noise = random_matrix(&mut rng, 3).scale_real(0.05);
            let a = &a + &noise;
            let fit = fit_scalar(&a, &b, &tol).unwrap();
            let (_, grid_res) = grid_best(&a, &b);
            assert!(fit.residual > 1e-6);
            assert!(fit.residual <= grid_res + 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn matmul_associative(seed in any::<u64>(), dim in 1usize..=8) {
            let mut rng = seeded(seed);
            let a = random_matrix(&mut rng, dim);
            let b = random_matrix(&mut rng, dim);
            let c = random_matrix(&mut rng, dim);
            let left = &(&a * &b) * &c;
            let right = &a * &(&b * &c);
            let scale = left.frobenius_norm().max(right.frobenius_norm());
            prop_assert!(left.distance(&right).unwrap() <= 1e-12 * scale);
        }

        #[test]
        fn adjoint_is_involution(seed in any::<u64>(), dim in 1usize..=8) {
            let a = random_matrix(&mut seeded(seed), dim);
            prop_assert_eq!(a.adjoint().adjoint(), a);
        }

        #[test]
        fn trace_is_cyclic(seed in any::<u64>(), dim in 1usize..=8) {
            let mut rng = seeded(seed);
            let a = random_matrix(&mut rng, dim);
            let b = random_matrix(&mut rng, dim);
            let ab = (&a * &b).trace();
            let ba = (&b * &a).trace();
            prop_assert!((ab - ba).norm() <= 1e-12 * (1.0 + ab.norm()));
        }

        #[test]
        fn gram_trace_is_squared_norm(seed in any::<u64>(), dim in 1usize..=8) {
            let a = random_matrix(&mut seeded(seed), dim);
            let t = (&a.adjoint() * &a).trace();
            let n2 = a.frobenius_norm().powi(2);
            prop_assert!(t.im.abs() <= 1e-12 * n2);
            prop_assert!((t.re - n2).abs() <= 1e-12 * n2);
        }

        #[test]
        fn fit_residual_zero_iff_multiple(seed in any::<u64>(), dim in 1usize..=6, re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let tol = Tolerances::default();
            let mut rng = seeded(seed);
            let b = random_matrix(&mut rng, dim);
            let lambda = Complex::new(re, im);
            let fit = fit_scalar(&b.scale(lambda), &b, &tol).unwrap();
            prop_assert!(fit.residual <= 1e-12 * b.frobenius_norm() * (1.0 + lambda.norm()));
            prop_assert!((fit.lambda - lambda).norm() <= 1e-12 * (1.0 + lambda.norm()));
            if dim > 1 {
                let other = random_matrix(&mut rng, dim);
                let fit = fit_scalar(&other, &b, &tol).unwrap();
                prop_assert!(fit.residual > 1e-6);
            }
        }
    }

    #[test]
    fn literal_round_trip() {
        let m = plane_d();
        let json = serde_json::to_string(&m).unwrap();
        let back: ComplexMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"dim": 2, "entries": [[[1,0],[0,0]]]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(bad).is_err());
    }
}
