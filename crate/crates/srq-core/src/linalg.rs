//! Dense complex linear algebra kernels.
//!
//! Everything here operates on small row-major matrices: single-site density
//! operators (`d x d`), charge projectors, and the `2d^2 x 2d^2` operators of
//! the interference measurement circuit. States never materialize their full
//! `N x N` density matrix; the single-site partial trace walks the amplitude
//! vector directly.

use num_complex::Complex64;

use crate::error::{Result, SrqError};
use crate::states::PureState;

/// Tolerance for Hermiticity and trace checks on computed operators.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(SrqError::Dimension(format!(
                "entry count {} does not match {}x{}",
                entries.len(),
                rows,
                cols
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::ONE);
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, Complex64::new(v, 0.0));
        }
        m
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        let mut m = Self::zeros(u.len(), v.len());
        for (i, a) in u.iter().enumerate() {
            for (j, b) in v.iter().enumerate() {
                m.set(i, j, a * b.conj());
            }
        }
        m
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.entries[i * self.cols + j] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn mul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(SrqError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(SrqError::Dimension(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        ComplexMatrix::new(self.rows, self.cols, entries)
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(SrqError::Dimension(format!(
                "cannot subtract {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        ComplexMatrix::new(self.rows, self.cols, entries)
    }

    pub fn scale(&self, factor: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// `Tr(self * other)` without forming the product matrix.
    pub fn trace_product(&self, other: &ComplexMatrix) -> Result<Complex64> {
        if self.cols != other.rows || self.rows != other.cols {
            return Err(SrqError::Dimension(format!(
                "trace of {}x{} times {}x{} is undefined",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut acc = Complex64::ZERO;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += self.get(i, j) * other.get(j, i);
            }
        }
        Ok(acc)
    }

    /// `(A + A^dag) / 2`; suppresses roundoff drift off the Hermitian manifold.
    pub fn hermitized(&self) -> ComplexMatrix {
        debug_assert!(self.is_square());
        let mut out = ComplexMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = (self.get(i, j) + self.get(j, i).conj()) * 0.5;
                out.set(i, j, v);
            }
        }
        out
    }

    /// Largest `|A_ij - conj(A_ji)|` over all entries.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_error() <= tol
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Sum of all pairwise products of eigenvalues, computed from traces:
/// `((Tr A)^2 - Tr(A^2)) / 2`.
///
/// The trace form is exact for rank-deficient inputs such as projected
/// density matrices, where an eigensolver would only add noise.
pub fn f2(a: &ComplexMatrix) -> Result<Complex64> {
    if !a.is_square() {
        return Err(SrqError::Dimension(format!(
            "f2 requires a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let t = a.trace();
    let t2 = a.trace_product(a)?;
    Ok((t * t - t2) * 0.5)
}

/// Standard Kronecker product; dimensions multiply.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for ia in 0..a.rows() {
        for ja in 0..a.cols() {
            let va = a.get(ia, ja);
            if va == Complex64::ZERO {
                continue;
            }
            for ib in 0..b.rows() {
                for jb in 0..b.cols() {
                    out.set(ia * b.rows() + ib, ja * b.cols() + jb, va * b.get(ib, jb));
                }
            }
        }
    }
    out
}

/// Two-copy exchange operator on `C^d (x) C^d`: maps basis `(i, j)` to `(j, i)`.
///
/// Satisfies `SWAP (A (x) B) SWAP = B (x) A` and `Tr((A (x) B) SWAP) = Tr(AB)`.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            out.set(j * d + i, i * d + j, Complex64::ONE);
        }
    }
    out
}

/// Reduced density matrix of one site, straight from the amplitudes.
///
/// Site `site`'s digit has stride `d^(n-1-site)` in the basis index, so
/// `rho[a][b] = sum_{hi,lo} psi[hi*d*s + a*s + lo] * conj(psi[hi*d*s + b*s + lo])`.
/// Runs in `O(d^2 * d^(n-1))` time and `O(d^2)` space. The result is
/// symmetrized so downstream trace identities see an exactly Hermitian input.
pub fn partial_trace_single_site(psi: &PureState, site: usize) -> Result<ComplexMatrix> {
    Ok(partial_trace_raw(psi, site)?.hermitized())
}

/// Single-site partial trace without the final symmetrization pass.
///
/// Used by the validation harness to probe the effect of skipping the
/// symmetrization; library code should call [`partial_trace_single_site`].
pub fn partial_trace_raw(psi: &PureState, site: usize) -> Result<ComplexMatrix> {
    let n = psi.n();
    let d = psi.d();
    if site >= n {
        return Err(SrqError::Index(format!(
            "site {site} out of range for {n} particles"
        )));
    }
    let amps = psi.amplitudes();
    let stride = d.pow((n - 1 - site) as u32);
    let outer = psi.dim() / (d * stride);
    let mut rho = ComplexMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let mut acc = Complex64::ZERO;
            for hi in 0..outer {
                let base = hi * d * stride;
                let row = base + a * stride;
                let col = base + b * stride;
                for lo in 0..stride {
                    acc += amps[row + lo] * amps[col + lo].conj();
                }
            }
            rho.set(a, b, acc);
        }
    }
    Ok(rho)
}

/// Reduced density matrices of every site, in site order.
pub fn single_site_rdms(psi: &PureState) -> Vec<ComplexMatrix> {
    (0..psi.n())
        .map(|k| partial_trace_single_site(psi, k).expect("site index in range"))
        .collect()
}
