use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{QmacError, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Largest tolerated `max|M - M†|` before a matrix is rejected as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Eigenvalues below `-PSD_TOL` count as genuinely negative.
pub const PSD_TOL: f64 = 1e-9;
/// Default support cutoff for pseudo-inverse powers.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product of a list (empty list gives the 1×1 identity).
pub fn kron_all(ms: &[&CMat]) -> CMat {
    ms.iter().fold(identity(1), |acc, m| acc.kronecker(*m))
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    a.kronecker(b)
}

/// `|v⟩⟨v|`.
pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

/// Real part of the trace.
pub fn tr(m: &CMat) -> f64 {
    m.trace().re
}

/// `Re Tr{a b}` without forming the product.
pub fn tr_prod(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..n {
            s += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    s
}

/// Entrywise maximum modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * r(0.5)
}

/// Hermitian eigendecomposition, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, aligned with `values`.
    pub vectors: CMat,
}

impl Eigen {
    /// Reassembles `Σ f(λ) |v⟩⟨v|`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.vectors.nrows();
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let w = f(l);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Projector onto the eigenvectors with indices in `keep`.
    pub fn projector(&self, keep: impl IntoIterator<Item = usize>) -> CMat {
        let n = self.vectors.nrows();
        let mut p = CMat::zeros(n, n);
        for j in keep {
            let v = self.vectors.column(j);
            p += v * v.adjoint();
        }
        p
    }
}

/// Eigen-decomposes `(M + M†)/2` after checking `M` is Hermitian to [`HERMITIAN_TOL`].
///
/// Eigenvalues are sorted by a stable descending sort, so ties keep ascending basis order.
pub fn eig_hermitian(m: &CMat) -> Result<Eigen> {
    if m.nrows() != m.ncols() {
        return Err(QmacError::ShapeMismatch(format!(
            "{}x{} is not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let asym = max_abs(&(m - m.adjoint()));
    if asym > HERMITIAN_TOL {
        return Err(QmacError::NotHermitian(asym));
    }
    Ok(eig_hermitian_unchecked(&hermitian_part(m)))
}

pub(crate) fn eig_hermitian_unchecked(h: &CMat) -> Eigen {
    let n = h.nrows();
    if n == 0 {
        return Eigen {
            values: vec![],
            vectors: CMat::zeros(0, 0),
        };
    }
    let se = SymmetricEigen::new(h.clone());
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[b].total_cmp(&se.eigenvalues[a]));
    let values = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (j, &i) in idx.iter().enumerate() {
        vectors.set_column(j, &se.eigenvectors.column(i));
    }
    Eigen { values, vectors }
}

/// Eigenvalues only, descending.
pub fn eigenvalues_hermitian(m: &CMat) -> Result<Vec<f64>> {
    Ok(eig_hermitian(m)?.values)
}

/// Largest eigenvalue of a Hermitian matrix (0 for an empty matrix).
pub fn lambda_max(m: &CMat) -> Result<f64> {
    Ok(eigenvalues_hermitian(m)?.first().copied().unwrap_or(0.0))
}

/// `A^p` on the support of a PSD `A`: eigenvalues at or below `cutoff` map to 0.
pub fn operator_power(a: &CMat, p: f64, cutoff: f64) -> Result<CMat> {
    let e = eig_hermitian(a)?;
    if let Some(&lo) = e.values.last() {
        if lo < -PSD_TOL {
            return Err(QmacError::NegativeEigenvalue(lo));
        }
    }
    Ok(e.map(|l| if l > cutoff { l.powf(p) } else { 0.0 }))
}

/// Square root of a PSD matrix.
pub fn sqrt_psd(a: &CMat) -> Result<CMat> {
    operator_power(a, 0.5, 0.0)
}

/// Projector onto the eigenspace of eigenvalues above `cutoff`.
pub fn support_projector(a: &CMat, cutoff: f64) -> Result<CMat> {
    let e = eig_hermitian(a)?;
    Ok(e.map(|l| if l > cutoff { 1.0 } else { 0.0 }))
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm_hermitian(a: &CMat) -> Result<f64> {
    Ok(eigenvalues_hermitian(a)?.iter().map(|l| l.abs()).sum())
}

/// Checks `P² = P = P†` to `tol`.
pub fn check_projector(p: &CMat, tol: f64) -> Result<()> {
    let herm = max_abs(&(p - p.adjoint()));
    let idem = max_abs(&(p * p - p));
    if herm > tol || idem > tol {
        return Err(QmacError::NotProjector(format!(
            "hermiticity {herm:e}, idempotence {idem:e}"
        )));
    }
    Ok(())
}

/// Smallest eigenvalue of `P A P` restricted to the range of the projector `P`.
///
/// Returns `None` when `P` is zero.
pub fn min_eig_on_support(a: &CMat, p: &CMat) -> Result<Option<f64>> {
    let ep = eig_hermitian(p)?;
    let basis: Vec<usize> = ep
        .values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 0.5)
        .map(|(i, _)| i)
        .collect();
    if basis.is_empty() {
        return Ok(None);
    }
    let n = a.nrows();
    let mut w = CMat::zeros(n, basis.len());
    for (j, &i) in basis.iter().enumerate() {
        w.set_column(j, &ep.vectors.column(i));
    }
    let restricted = w.adjoint() * a * &w;
    Ok(eigenvalues_hermitian(&restricted)?.last().copied())
}

/// Heisenberg–Weyl shift `X(x)|j⟩ = |j+x mod d⟩`.
pub fn shift(d: usize, x: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    for j in 0..d {
        m[((j + x) % d, j)] = r(1.0);
    }
    m
}

/// Heisenberg–Weyl clock `Z(z)|j⟩ = e^{2πi jz/d}|j⟩`.
pub fn clock(d: usize, z: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    for j in 0..d {
        let ang = 2.0 * std::f64::consts::PI * ((j * z) % d) as f64 / d as f64;
        m[(j, j)] = C64::from_polar(1.0, ang);
    }
    m
}

/// `X(x) Z(z)`.
pub fn heisenberg_weyl(d: usize, x: usize, z: usize) -> CMat {
    shift(d, x) * clock(d, z)
}
