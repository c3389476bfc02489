//! Dense complex matrices of dimension 2 and 4.
//!
//! Two-qubit operators live in the computational basis
//! `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`, with subsystem A as the left tensor factor, so
//! the basis index of `|a b⟩` is `2a + b`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Inputs to [`hermitian_eigen`] may deviate from Hermiticity by this much.
pub const EIGEN_HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance used for density-matrix validation (Hermiticity, trace, positivity).
pub const STATE_TOL: f64 = 1e-12;

const JACOBI_OFF_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;
const DEGENERACY_TOL: f64 = 1e-12;

/// A `dim × dim` complex matrix with `dim ∈ {2, 4}`, stored row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: [C64; 16],
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 4 {
        Ok(())
    } else {
        Err(Error::Dimension {
            expected: "2 or 4",
            got: dim,
        })
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            data: [ZERO; 16],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        Ok(m)
    }

    /// Builds a matrix from `dim²` row-major entries.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::Dimension {
                expected: "dim² entries",
                got: entries.len(),
            });
        }
        let mut m = Self::zeros(dim)?;
        m.data[..dim * dim].copy_from_slice(entries);
        Ok(m)
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        let complex: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_row_major(dim, &complex)
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(values.len())?;
        for (i, &x) in values.iter().enumerate() {
            m.set(i, i, C64::new(x, 0.0));
        }
        Ok(m)
    }

    /// `|v⟩⟨w|`.
    pub fn outer(v: &[C64], w: &[C64]) -> Result<Self> {
        if v.len() != w.len() {
            return Err(Error::Dimension {
                expected: "vectors of equal length",
                got: w.len(),
            });
        }
        let mut m = Self::zeros(v.len())?;
        for (i, vi) in v.iter().enumerate() {
            for (j, wj) in w.iter().enumerate() {
                m.set(i, j, vi * wj.conj());
            }
        }
        Ok(m)
    }

    /// Projector `|v⟩⟨v|` (no normalization is applied).
    pub fn projector(v: &[C64]) -> Result<Self> {
        Self::outer(v, v)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        debug_assert!(i < self.dim && j < self.dim);
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        debug_assert!(i < self.dim && j < self.dim);
        self.data[i * self.dim + j] = z;
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[C64] {
        &self.data[..self.dim * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let mut out = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(i, j, self.get(j, i).conj());
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(i, j, self.get(j, i));
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = *self;
        out.data.iter_mut().for_each(|z| *z *= s);
        out
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// `M v`.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// `⟨v| M |v⟩`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let mv = self.apply(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |M_ij − conj(M_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale_real(0.5)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self.get(i, j);
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(mut self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a += b;
        }
        self
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(mut self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a -= b;
        }
        self
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix {
            dim: n,
            data: [ZERO; 16],
        };
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

/// Which tensor factor of a two-qubit operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Kronecker product of two single-qubit operators.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    for m in [a, b] {
        if m.dim != 2 {
            return Err(Error::Dimension {
                expected: "2x2 operand",
                got: m.dim,
            });
        }
    }
    let mut out = ComplexMatrix::zeros(4)?;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out.set(2 * i + k, 2 * j + l, a.get(i, j) * b.get(k, l));
                }
            }
        }
    }
    Ok(out)
}

fn require_two_qubit(m: &ComplexMatrix) -> Result<()> {
    if m.dim == 4 {
        Ok(())
    } else {
        Err(Error::Dimension {
            expected: "4x4 two-qubit operator",
            got: m.dim,
        })
    }
}

/// Traces out `subsystem`, leaving the 2×2 operator on the other qubit.
pub fn partial_trace(m: &ComplexMatrix, subsystem: Subsystem) -> Result<ComplexMatrix> {
    require_two_qubit(m)?;
    let mut out = ComplexMatrix::zeros(2)?;
    for x in 0..2 {
        for y in 0..2 {
            let z: C64 = (0..2)
                .map(|k| match subsystem {
                    Subsystem::B => m.get(2 * x + k, 2 * y + k),
                    Subsystem::A => m.get(2 * k + x, 2 * k + y),
                })
                .sum();
            out.set(x, y, z);
        }
    }
    Ok(out)
}

/// Transposes the indices of `subsystem` only.
pub fn partial_transpose(m: &ComplexMatrix, subsystem: Subsystem) -> Result<ComplexMatrix> {
    require_two_qubit(m)?;
    let mut out = ComplexMatrix::zeros(4)?;
    for a in 0..2 {
        for b in 0..2 {
            for a2 in 0..2 {
                for b2 in 0..2 {
                    let z = match subsystem {
                        Subsystem::B => m.get(2 * a + b2, 2 * a2 + b),
                        Subsystem::A => m.get(2 * a2 + b, 2 * a + b2),
                    };
                    out.set(2 * a + b, 2 * a2 + b2, z);
                }
            }
        }
    }
    Ok(out)
}

/// Spectral decomposition `M = V diag(λ) V†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, each phase-fixed so its first nonzero
    /// component is real and positive.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        (0..self.dim()).map(|i| self.eigenvectors.get(i, k)).collect()
    }

    /// `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        let mut out = ComplexMatrix::zeros(n).expect("spectrum dimension is valid");
        for i in 0..n {
            for j in 0..n {
                let z: C64 = (0..n)
                    .map(|k| v.get(i, k) * v.get(j, k).conj() * fl[k])
                    .sum();
                out.set(i, j, z);
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|x| x)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// The input is symmetrized before rotation. Eigenvalues come out ascending;
/// eigenvectors inside a degenerate cluster are ordered lexicographically
/// (descending by component) after phase fixing, so the output is reproducible.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<Spectrum> {
    let deviation = m.hermitian_deviation();
    if !(deviation <= EIGEN_HERMITIAN_TOL) {
        return Err(Error::NotHermitian { deviation });
    }
    let n = m.dim;
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n)?;
    let scale = a.frobenius_norm().max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_OFF_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|k| {
            let mut col: Vec<C64> = (0..n).map(|i| v.get(i, k)).collect();
            fix_phase(&mut col);
            (a.get(k, k).re, col)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();

    // Reorder vectors inside clusters of (numerically) equal eigenvalues.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n
            && (eigenvalues[end] - eigenvalues[start]).abs()
                <= DEGENERACY_TOL * eigenvalues[start].abs().max(1.0)
        {
            end += 1;
        }
        pairs[start..end].sort_by(|x, y| lex_cmp(&y.1, &x.1));
        start = end;
    }

    let mut vectors = ComplexMatrix::zeros(n)?;
    for (k, (_, col)) in pairs.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            vectors.set(i, k, *z);
        }
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: vectors,
    })
}

fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    // Negligible against both diagonal entries: zero it outright.
    if mag <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a.set(p, q, ZERO);
        a.set(q, p, ZERO);
        return;
    }
    let phase_conj = (apq / mag).conj();
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // U acts on columns p, q: U = diag(1, e^{-iφ}) · [[c, s], [-s, c]].
    let u_pp = C64::new(c, 0.0);
    let u_pq = C64::new(s, 0.0);
    let u_qp = phase_conj * (-s);
    let u_qq = phase_conj * c;

    let n = a.dim;
    for k in 0..n {
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        a.set(k, p, akp * u_pp + akq * u_qp);
        a.set(k, q, akp * u_pq + akq * u_qq);
    }
    for k in 0..n {
        let apk = a.get(p, k);
        let aqk = a.get(q, k);
        a.set(p, k, u_pp.conj() * apk + u_qp.conj() * aqk);
        a.set(q, k, u_pq.conj() * apk + u_qq.conj() * aqk);
    }
    a.set(p, q, ZERO);
    a.set(q, p, ZERO);
    a.set(p, p, C64::new(a.get(p, p).re, 0.0));
    a.set(q, q, C64::new(a.get(q, q).re, 0.0));

    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * u_pp + vkq * u_qp);
        v.set(k, q, vkp * u_pq + vkq * u_qq);
    }
}

fn fix_phase(col: &mut [C64]) {
    let norm: f64 = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let threshold = 1e-12 * norm.max(f64::MIN_POSITIVE);
    if let Some(lead) = col.iter().find(|z| z.norm() > threshold).copied() {
        let rot = lead.conj() / lead.norm();
        for z in col.iter_mut() {
            *z *= rot;
        }
        // The rotated leading component is real by construction.
        if let Some(z) = col.iter_mut().find(|z| z.norm() > threshold) {
            z.im = 0.0;
        }
    }
}

fn lex_cmp(x: &[C64], y: &[C64]) -> std::cmp::Ordering {
    for (a, b) in x.iter().zip(y) {
        let ord = a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im));
        if ord != std::cmp::Ordering::Equal {
            return ord;
        }
    }
    std::cmp::Ordering::Equal
}

/// `V diag(λ^r) V†` for a positive semi-definite Hermitian matrix.
///
/// Uses `0^r = 0` for `r > 0`; rounding-level negative eigenvalues count as
/// zero. Negative powers require the spectrum to clear [`STATE_TOL`].
pub fn psd_power(m: &ComplexMatrix, r: f64) -> Result<ComplexMatrix> {
    let spec = hermitian_eigen(m)?;
    psd_power_of(&spec, r)
}

/// [`psd_power`] on an existing decomposition.
pub fn psd_power_of(spec: &Spectrum, r: f64) -> Result<ComplexMatrix> {
    let min = spec.min_eigenvalue();
    if min < -STATE_TOL {
        return Err(Error::NotDensityMatrix {
            reason: format!("negative eigenvalue {min:.3e} in fractional power"),
        });
    }
    if r < 0.0 && min <= STATE_TOL {
        return Err(Error::SingularMatrix { eigenvalue: min });
    }
    Ok(spec.map(|x| if x <= 0.0 { 0.0 } else { x.powf(r) }))
}

/// A validated density matrix: Hermitian, unit trace, positive semi-definite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let deviation = matrix.hermitian_deviation();
        if deviation > STATE_TOL {
            return Err(Error::NotDensityMatrix {
                reason: format!("Hermitian deviation {deviation:.3e}"),
            });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::NotDensityMatrix {
                reason: format!("trace {tr}"),
            });
        }
        let min = hermitian_eigen(&matrix)?.min_eigenvalue();
        if min < -STATE_TOL {
            return Err(Error::NotDensityMatrix {
                reason: format!("negative eigenvalue {min:.3e}"),
            });
        }
        Ok(Self { matrix })
    }

    /// Pure state `|v⟩⟨v|` from a (not necessarily normalized) vector.
    pub fn pure(v: &[C64]) -> Result<Self> {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::NotDensityMatrix {
                reason: "zero vector".into(),
            });
        }
        let unit: Vec<C64> = v.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::projector(&unit)?)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Ok(Self {
            matrix: ComplexMatrix::identity(dim)?.scale_real(1.0 / dim as f64),
        })
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    pub fn spectrum(&self) -> Spectrum {
        hermitian_eigen(&self.matrix).expect("density matrices are Hermitian")
    }

    /// Product state `self ⊗ other` of two single-qubit states.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(Self::from_trusted(kron(&self.matrix, &other.matrix)?))
    }
}
