//! Dense complex matrices and state vectors.
//!
//! Everything in the crate is expressed through [`ComplexMatrix`] (row-major)
//! and [`StateVector`]. Decompositions that need a proper eigensolver go
//! through `nalgebra`; the rest is written out directly since the dimensions
//! stay at desk scale.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Default tolerance for unitarity and equality checks.
pub const DEFAULT_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Reduce an angle to the principal branch (-pi, pi].
pub fn wrap_phase(phi: f64) -> f64 {
    let mut x = phi % (2.0 * PI);
    if x <= -PI {
        x += 2.0 * PI;
    } else if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Phase of a complex number with the convention arg(0) = 0.
pub fn arg0(z: C64) -> f64 {
    if z.norm() == 0.0 {
        0.0
    } else {
        wrap_phase(z.arg())
    }
}

/// Deterministic RNG used everywhere a seed is accepted.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// A dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for k in 0..dim {
            m[(k, k)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (k, &z) in diag.iter().enumerate() {
            m[(k, k)] = z;
        }
        m
    }

    /// Build from row-major entries; fails when `rows * cols != data.len()`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} entries", rows * cols),
                found: format!("{} entries", data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from nested rows; all rows must share a length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch {
                expected: format!("rows of length {cols}"),
                found: "ragged rows".into(),
            });
        }
        let data = rows.iter().flatten().copied().collect();
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> StateVector {
        StateVector::new((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        for (i, &z) in v.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                expected: format!("{} rows", self.cols),
                found: format!("{} rows", other.rows),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("vector of length {}", self.cols),
                found: format!("length {}", v.len()),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Kronecker product. Row index of the result is `i_a * rows_b + i_b`,
    /// so the left factor holds the more significant digit.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for ia in 0..self.rows {
            for ja in 0..self.cols {
                let a = self[(ia, ja)];
                if a == ZERO {
                    continue;
                }
                for ib in 0..other.rows {
                    for jb in 0..other.cols {
                        out[(ia * other.rows + ib, ja * other.cols + jb)] = a * other[(ib, jb)];
                    }
                }
            }
        }
        out
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |M^dag M - I|`, or infinity for non-square input.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += self[(k, i)].conj() * self[(k, j)];
                }
                if i == j {
                    acc -= ONE;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// Returns `Err(NotUnitary)` carrying the measured deviation.
    pub fn check_unitary(&self, tol: f64) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation <= tol {
            Ok(())
        } else {
            Err(Error::NotUnitary { deviation })
        }
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        let (rows, cols) = m.shape();
        let mut out = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out[(i, j)] = m[(i, j)];
            }
        }
        out
    }

    /// Haar-like random unitary: Gram-Schmidt on a seeded complex Gaussian matrix.
    pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut columns: Vec<Vec<C64>> = Vec::with_capacity(dim);
        while columns.len() < dim {
            let mut v: Vec<C64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
            // two passes keep the basis orthonormal to machine precision
            for _ in 0..2 {
                for q in &columns {
                    let overlap: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= overlap * qi;
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                continue;
            }
            v.iter_mut().for_each(|z| *z /= norm);
            columns.push(v);
        }
        let mut m = Self::zeros(dim, dim);
        for (j, col) in columns.iter().enumerate() {
            m.set_column(j, col);
        }
        m
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on a shape mismatch; use [`ComplexMatrix::matmul`] for a fallible product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix shapes must agree")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product of two matrices.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// A vector of complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    /// Computational basis state `|k>` of the given dimension.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[k] = ONE;
        Self { amplitudes }
    }

    /// Seeded random normalized state.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let amps = (0..dim).map(|_| complex_gaussian(rng)).collect();
        Self::new(amps).normalized()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|z| *z /= n);
        }
        self
    }

    /// Fails with `NotNormalized` when `| |psi|^2 - 1 | > tol`.
    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let norm_sqr = self.norm_sqr();
        if (norm_sqr - 1.0).abs() <= tol {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm_sqr })
        }
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for StateVector {
    type Output = C64;

    fn index(&self, k: usize) -> &C64 {
        &self.amplitudes[k]
    }
}

impl IndexMut<usize> for StateVector {
    fn index_mut(&mut self, k: usize) -> &mut C64 {
        &mut self.amplitudes[k]
    }
}

/// Eigenphases and orthonormal eigenvectors of a unitary.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    /// Eigenphases in (-pi, pi], ascending.
    pub phases: Vec<f64>,
    pub vectors: Vec<StateVector>,
}

impl SpectralDecomposition {
    /// Rebuild `sum_m e^{i psi_m} |psi_m><psi_m|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let dim = self.vectors.first().map_or(0, StateVector::dim);
        let mut out = ComplexMatrix::zeros(dim, dim);
        for (phase, v) in self.phases.iter().zip(&self.vectors) {
            let e = C64::from_polar(1.0, *phase);
            for i in 0..dim {
                let vi = e * v[i];
                for j in 0..dim {
                    out[(i, j)] += vi * v[j].conj();
                }
            }
        }
        out
    }
}

/// Eigen-decomposition of a unitary matrix.
///
/// A unitary is normal, so its complex Schur form is diagonal and the Schur
/// vectors are an orthonormal eigenbasis (any basis of a degenerate
/// eigenspace is returned as-is). Phases are sorted ascending; equal phases
/// keep their Schur column order.
pub fn spectral_decompose(u: &ComplexMatrix, tol: f64) -> Result<SpectralDecomposition> {
    u.check_unitary(tol)?;
    let dim = u.rows();
    if dim == 0 {
        return Ok(SpectralDecomposition {
            phases: vec![],
            vectors: vec![],
        });
    }
    let schur = nalgebra::linalg::Schur::try_new(u.to_nalgebra(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Domain("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let mut pairs: Vec<(f64, usize)> = (0..dim).map(|m| (arg0(t[(m, m)]), m)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let phases = pairs.iter().map(|p| p.0).collect();
    let vectors = pairs
        .iter()
        .map(|&(_, m)| StateVector::new(q.column(m).iter().copied().collect()))
        .collect();
    Ok(SpectralDecomposition { phases, vectors })
}

/// Hermitian eigen-decomposition: returns real eigenvalues and the matrix
/// whose columns are the eigenvectors.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if h.entries().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let eig = nalgebra::linalg::SymmetricEigen::try_new(h.to_nalgebra(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Domain("Hermitian eigensolver did not converge".into()))?;
    Ok((
        eig.eigenvalues.iter().copied().collect(),
        ComplexMatrix::from_nalgebra(&eig.eigenvectors),
    ))
}

/// Result of comparing two matrices modulo one global phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseComparison {
    pub matches: bool,
    /// `theta` such that `e^{i theta} A ~ B`, in (-pi, pi].
    pub phase: f64,
    pub max_deviation: f64,
}

/// Decide whether `e^{i theta} a == b` for some theta.
///
/// Theta is read off the entry where `|a|` is largest (first one on ties).
pub fn equal_up_to_global_phase(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: f64,
) -> Result<PhaseComparison> {
    if (a.rows(), a.cols()) != (b.rows(), b.cols()) {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{}", a.rows(), a.cols()),
            found: format!("{}x{}", b.rows(), b.cols()),
        });
    }
    let mut best = 0usize;
    let mut best_mod = -1.0;
    for (k, z) in a.entries().iter().enumerate() {
        if z.norm() > best_mod {
            best_mod = z.norm();
            best = k;
        }
    }
    let phase = if best_mod > 0.0 {
        arg0(b.entries()[best] / a.entries()[best])
    } else {
        0.0
    };
    let rot = C64::from_polar(1.0, phase);
    let max_deviation = a
        .entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| (rot * x - y).norm())
        .fold(0.0, f64::max);
    Ok(PhaseComparison {
        matches: max_deviation <= tol,
        phase,
        max_deviation,
    })
}
