//! Small dense complex linear algebra.
//!
//! Everything here is sized for the handful of levels a measurement chain
//! deals with (N ≤ 8), so matrices are plain row-major `Vec`s and the
//! eigensolver is a cyclic complex Jacobi iteration.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for the Hermitian symmetry check.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance for `U†U = I`.
pub const UNITARY_TOL: f64 = 1e-10;

const JACOBI_OFF_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m[(k, k)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (k, &v) in values.iter().enumerate() {
            m[(k, k)] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, k: usize) -> Vec<C64> {
        (0..self.dim).map(|r| self[(r, k)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self[(k, k)]).sum()
    }

    /// Largest entrywise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!(self.dim, rhs.dim);
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut acc = 0.0;
        for r in 0..self.dim {
            for c in 0..self.dim {
                if r != c {
                    acc += self[(r, c)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }

    /// Max entrywise deviation of `self†·self` from the identity.
    pub fn unitary_deviation(&self) -> f64 {
        self.adjoint()
            .matmul(self)
            .max_abs_diff(&Self::identity(self.dim))
    }

    pub fn hermitian_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for r in 0..self.dim {
            list.entry(&&self.data[r * self.dim..(r + 1) * self.dim]);
        }
        list.finish()
    }
}

/// A validated Hermitian operator (Hamiltonian or observable).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.dim() < 2 {
            return Err(Error::InvalidDimension(m.dim()));
        }
        let max_asymmetry = m.hermitian_asymmetry();
        if max_asymmetry > HERMITIAN_TOL {
            return Err(Error::NonHermitianInput { max_asymmetry });
        }
        Ok(Self(m))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(CMatrix::from_real_rows(rows)?)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// Real linear combination `a·self + b·other`, still Hermitian.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(Self(
            self.0
                .scale(C64::new(a, 0.0))
                .add(&other.0.scale(C64::new(b, 0.0))),
        ))
    }

    pub fn square(&self) -> Self {
        Self(self.0.matmul(&self.0))
    }
}

/// A matrix with orthonormal columns (within [`UNITARY_TOL`]).
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let max_deviation = m.unitary_deviation();
        if max_deviation > UNITARY_TOL || !max_deviation.is_finite() {
            return Err(Error::NonUnitaryBasis { max_deviation });
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// Product of two unitaries; unitary up to rounding so no re-check.
    pub fn compose(&self, rhs: &Self) -> Self {
        Self(self.0.matmul(&rhs.0))
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }
}

/// Eigenvalues in ascending order; column `k` of `vectors` belongs to `values[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: UnitaryMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V·diag(values)·V†`
    pub fn reconstruct(&self) -> CMatrix {
        let v = self.vectors.matrix();
        let d = CMatrix::diagonal(
            &self
                .values
                .iter()
                .map(|&x| C64::new(x, 0.0))
                .collect::<Vec<_>>(),
        );
        v.matmul(&d).matmul(&v.adjoint())
    }
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
pub fn eig_hermitian(m: &HermitianMatrix) -> Result<EigenSystem> {
    let n = m.dim();
    let mut a = m.matrix().clone();
    let mut v = CMatrix::identity(n);
    let threshold = JACOBI_OFF_TOL * a.frobenius_norm().max(1.0);

    let mut sweeps = 0;
    while a.off_diagonal_norm() >= threshold {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: a.off_diagonal_norm(),
            });
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = CMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    Ok(EigenSystem {
        values,
        vectors: UnitaryMatrix(vectors),
    })
}

fn jacobi_rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let b = a[(p, q)];
    let mag = b.norm();
    if mag == 0.0 {
        return;
    }
    let phase = C64::from_polar(1.0, -b.arg());
    let zeta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
    } else {
        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // J restricted to the (p, q) plane; J†AJ zeroes A[p][q].
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = phase * (-s);
    let jqq = phase * c;

    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;

        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
}

/// `U(τ) = V·diag(e^{-i λ τ})·V†` in the basis the eigensystem was computed in.
pub fn propagator(es: &EigenSystem, tau: f64) -> UnitaryMatrix {
    let v = es.vectors.matrix();
    let n = es.dim();
    let phases: Vec<C64> = es
        .values
        .iter()
        .map(|&e| C64::from_polar(1.0, -e * tau))
        .collect();
    UnitaryMatrix(CMatrix::from_fn(n, |r, c| {
        (0..n)
            .map(|k| v[(r, k)] * phases[k] * v[(c, k)].conj())
            .sum()
    }))
}

/// Square real matrix, row-major. Used for transition kernels and joint
/// distributions.
#[derive(Clone, PartialEq)]
pub struct RealMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m[(k, k)] = 1.0;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (k, &x) in values.iter().enumerate() {
            m[(k, k)] = x;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.dim).map(|r| self[(r, c)]).collect()
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == 0.0 {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        out
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim).map(|r| self.row(r).iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|c| (0..self.dim).map(|r| self[(r, c)]).sum())
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Largest deviation of any row or column sum from one.
    pub fn doubly_stochastic_defect(&self) -> f64 {
        self.row_sums()
            .into_iter()
            .chain(self.column_sums())
            .map(|s| (s - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!(self.dim, rhs.dim);
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.dim + c]
    }
}

impl fmt::Debug for RealMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for r in 0..self.dim {
            list.entry(&self.row(r));
        }
        list.finish()
    }
}

/// `T[j][k] = |⟨a_j|b_k⟩|²` for two orthonormal bases given as columns.
pub fn overlap_stochastic(basis_a: &UnitaryMatrix, basis_b: &UnitaryMatrix) -> Result<RealMatrix> {
    if basis_a.dim() != basis_b.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis_a.dim(),
            actual: basis_b.dim(),
        });
    }
    let a = basis_a.matrix();
    let b = basis_b.matrix();
    let n = a.dim();
    Ok(RealMatrix::from_fn(n, |j, k| {
        (0..n)
            .map(|i| a[(i, j)].conj() * b[(i, k)])
            .sum::<C64>()
            .norm_sqr()
    }))
}
