//! Dense complex matrices for the small (≤ 16×16) operators used throughout the crate.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Row-major complex matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() || data.is_empty() {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real row-major entries. Panics on a length mismatch.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(rows * cols, data.len());
        Self { rows, cols, data: data.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    /// Builds a matrix from complex row-major entries. Panics on a length mismatch.
    pub fn from_rows(rows: usize, cols: usize, data: &[C64]) -> Self {
        assert_eq!(rows * cols, data.len());
        Self { rows, cols, data: data.to_vec() }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        Self::diag(&entries.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
    }

    /// |ψ⟩⟨ψ| for a column vector given as a slice.
    pub fn outer(ket: &[C64]) -> Self {
        Self::from_fn(ket.len(), ket.len(), |r, c| ket[r] * ket[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self · rhs · self†`, the conjugation used by every Kraus map.
    pub fn sandwich(&self, rhs: &Self) -> Self {
        &(self * rhs) * &self.dagger()
    }

    pub fn apply(&self, ket: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, ket.len());
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)] * ket[c]).sum())
            .collect()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to another matrix of the same shape.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// max |M − M†|
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// (M + M†)/2
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5)
    }

    /// Tr(A†B), the Hilbert–Schmidt inner product.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        tensor(self, other)
    }

    /// Sub-block copy: rows `r0..r0+n`, cols `c0..c0+m`.
    pub fn block(&self, r0: usize, c0: usize, n: usize, m: usize) -> Self {
        Self::from_fn(n, m, |r, c| self[(r0 + r, c0 + c)])
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &CMat {
    type Output = CMat;
    /// Panics on a shape mismatch; use [`CMat::matmul`] for the checked form.
    fn mul(self, rhs: &CMat) -> CMat {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Kronecker product a ⊗ b.
pub fn tensor(a: &CMat, b: &CMat) -> CMat {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    CMat::from_fn(rows, cols, |r, c| {
        a[(r / b.rows, c / b.cols)] * b[(r % b.rows, c % b.cols)]
    })
}

/// Traces out every subsystem not listed in `keep`. Subsystem `k` has dimension `dims[k]`
/// and the leftmost factor is the most significant index.
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::Dimension(format!(
            "partial trace over dims {dims:?} needs a {total}x{total} matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Dimension(format!("keep {keep:?} out of range for {dims:?}")));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept.contains(k)).collect();
    let out_dim: usize = kept.iter().map(|&k| dims[k]).product();
    let tr_dim: usize = traced.iter().map(|&k| dims[k]).product();

    // Compose a full multi-index from kept and traced digits.
    let compose = |kept_idx: usize, traced_idx: usize| -> usize {
        let mut digits = vec![0usize; dims.len()];
        let mut rem = kept_idx;
        for &k in kept.iter().rev() {
            digits[k] = rem % dims[k];
            rem /= dims[k];
        }
        let mut rem = traced_idx;
        for &k in traced.iter().rev() {
            digits[k] = rem % dims[k];
            rem /= dims[k];
        }
        digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
    };

    let mut out = CMat::zeros(out_dim, out_dim);
    for r in 0..out_dim {
        for c in 0..out_dim {
            let mut acc = ZERO;
            for t in 0..tr_dim {
                acc += m[(compose(r, t), compose(c, t))];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Eigenvalues in ascending order with orthonormal eigenvectors stored as columns.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl EigenSystem {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.rows()).map(|r| self.vectors[(r, k)]).collect()
    }

    /// V Λ V†
    pub fn reconstruct(&self) -> CMat {
        let n = self.values.len();
        CMat::from_fn(n, n, |r, c| {
            (0..n)
                .map(|k| self.vectors[(r, k)] * self.values[k] * self.vectors[(c, k)].conj())
                .sum()
        })
    }
}

const EIGH_HERMITIAN_TOL: f64 = 1e-10;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Within a degenerate cluster the eigenvector choice is arbitrary; callers that need
/// stability should work with spectral projectors.
pub fn eigh(m: &CMat) -> Result<EigenSystem> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("eigh needs a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    let scale = m.max_abs().max(1.0);
    let resid = m.hermiticity_residual();
    if resid > EIGH_HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(resid));
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = CMat::identity(n);
    let tol = 1e-15 * a.frob_norm().max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[(r, c)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[(p, q)];
                let babs = b.norm();
                if babs <= tol * 1e-3 {
                    continue;
                }
                let phase = b / babs; // e^{iα}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let zeta = (aqq - app) / (2.0 * babs);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G acts on columns p, q: G = [[c, s], [-s e^{-iα}, c e^{-iα}]]
                let g00 = C64::new(c, 0.0);
                let g01 = C64::new(s, 0.0);
                let g10 = -phase.conj() * s;
                let g11 = phase.conj() * c;
                // A <- A G
                for r in 0..n {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = arp * g00 + arq * g10;
                    a[(r, q)] = arp * g01 + arq * g11;
                }
                // A <- G† A
                for cidx in 0..n {
                    let apc = a[(p, cidx)];
                    let aqc = a[(q, cidx)];
                    a[(p, cidx)] = g00.conj() * apc + g10.conj() * aqc;
                    a[(q, cidx)] = g01.conj() * apc + g11.conj() * aqc;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp * g00 + vrq * g10;
                    v[(r, q)] = vrp * g01 + vrq * g11;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMat::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenSystem { values, vectors })
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn spectral_max(m: &CMat) -> Result<f64> {
    Ok(*eigh(m)?.values.last().expect("non-empty spectrum"))
}

pub fn dagger(m: &CMat) -> CMat {
    m.dagger()
}

pub fn matmul(a: &CMat, b: &CMat) -> Result<CMat> {
    a.matmul(b)
}

pub fn frob_norm(m: &CMat) -> f64 {
    m.frob_norm()
}

/// Square root of a positive semidefinite Hermitian matrix; negative eigenvalues are clipped.
pub fn psd_sqrt(m: &CMat) -> Result<CMat> {
    let es = eigh(m)?;
    let n = es.values.len();
    Ok(CMat::from_fn(n, n, |r, c| {
        (0..n)
            .map(|k| es.vectors[(r, k)] * es.values[k].max(0.0).sqrt() * es.vectors[(c, k)].conj())
            .sum()
    }))
}

/// Single-qubit Pauli matrices in the order (𝟙, X, Y, Z).
pub fn paulis() -> [CMat; 4] {
    [pauli_i(), pauli_x(), pauli_y(), pauli_z()]
}

pub fn pauli_i() -> CMat {
    CMat::identity(2)
}

pub fn pauli_x() -> CMat {
    CMat::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> CMat {
    CMat::from_rows(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMat {
    CMat::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// Tolerances a density matrix must satisfy.
pub const DENSITY_HERMITIAN_TOL: f64 = 1e-12;
pub const DENSITY_TRACE_TOL: f64 = 1e-12;
pub const DENSITY_MIN_EIGENVALUE: f64 = -1e-10;

/// Positive, unit-trace Hermitian matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity at the module tolerances.
    pub fn new(mat: CMat) -> Result<Self> {
        Self::with_tolerance(mat, DENSITY_HERMITIAN_TOL, DENSITY_TRACE_TOL, DENSITY_MIN_EIGENVALUE)
    }

    pub fn with_tolerance(mat: CMat, herm_tol: f64, trace_tol: f64, min_eig: f64) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Dimension(format!("density matrix must be square, got {}x{}", mat.rows(), mat.cols())));
        }
        let resid = mat.hermiticity_residual();
        if resid > herm_tol {
            return Err(Error::InvalidState(format!("not Hermitian (residual {resid:.3e})")));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let lowest = eigh(&mat)?.values[0];
        if lowest < min_eig {
            return Err(Error::InvalidState(format!("negative eigenvalue {lowest:.3e}")));
        }
        Ok(Self { mat: mat.hermitian_part() })
    }

    /// Skips validation; for internal results whose validity follows by construction.
    pub(crate) fn from_trusted(mat: CMat) -> Self {
        Self { mat: mat.hermitian_part() }
    }

    pub fn pure(ket: &[C64]) -> Result<Self> {
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let ket: Vec<C64> = ket.iter().map(|z| z / norm).collect();
        Ok(Self { mat: CMat::outer(&ket) })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { mat: CMat::identity(dim).scale_real(1.0 / dim as f64) }
    }

    /// |Φ⁺⟩ = Σ_k |kk⟩/√d on a d×d system.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut ket = vec![ZERO; d * d];
        for k in 0..d {
            ket[k * d + k] = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        }
        Self { mat: CMat::outer(&ket) }
    }

    /// Qubit state with the given Bloch vector (|r| ≤ 1).
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let [x, y, z] = r;
        let m = CMat::from_rows(
            2,
            2,
            &[
                C64::new((1.0 + z) / 2.0, 0.0),
                C64::new(x / 2.0, -y / 2.0),
                C64::new(x / 2.0, y / 2.0),
                C64::new((1.0 - z) / 2.0, 0.0),
            ],
        );
        Self::new(m)
    }

    pub fn bloch(&self) -> Option<[f64; 3]> {
        if self.dim() != 2 {
            return None;
        }
        let m = &self.mat;
        Some([2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re])
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self { mat: tensor(&self.mat, &other.mat) }
    }

    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        Ok(Self::from_trusted(partial_trace(&self.mat, dims, keep)?))
    }

    pub fn purity(&self) -> f64 {
        self.mat.hs_inner(&self.mat).re
    }
}
