//! Types of sequences, type-class projectors, weakly typical projectors and the
//! measured constants of the packing hypotheses.

use serde::{Deserialize, Serialize};

use crate::error::{QmacError, Result};
use crate::info::entropy_of_spectrum;
use crate::qmat::{
    copy_labels, eig_hermitian, identity, kron_all, lambda_max, max_abs, min_eig_on_support, CMat,
    FactorSpace, Operator,
};

/// Largest number of sequences `k^n` the enumerators will walk.
pub const SEQUENCE_CAP: u128 = 1 << 24;

/// Slack added to the typicality window to absorb rounding in `-log2 λ` sums.
const WINDOW_SLACK: f64 = 1e-10;

/// Eigenvalues at or below this are treated as exact zeros.
const ZERO_EIG: f64 = 1e-14;

/// A composition of `n` over an alphabet of size `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypeClass {
    pub counts: Vec<usize>,
    /// Number of sequences of this type (the multinomial coefficient).
    pub size: u128,
    /// Lexicographically least sequence of the type.
    pub representative: Vec<usize>,
}

impl TypeClass {
    pub fn from_counts(counts: Vec<usize>) -> Self {
        let size = multinomial(&counts);
        let representative = counts
            .iter()
            .enumerate()
            .flat_map(|(j, &c)| std::iter::repeat_n(j, c))
            .collect();
        Self {
            counts,
            size,
            representative,
        }
    }

    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn alphabet(&self) -> usize {
        self.counts.len()
    }

    /// All sequences of this type in lexicographic order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.size as usize);
        let mut cur = Vec::with_capacity(self.n());
        let mut left = self.counts.clone();
        fill_members(&mut left, &mut cur, self.n(), &mut out);
        out
    }

    /// `Π_j p_j^{counts_j}`.
    pub fn sequence_probability(&self, p: &[f64]) -> f64 {
        self.counts
            .iter()
            .zip(p)
            .map(|(&c, &pj)| pj.powi(c as i32))
            .product()
    }
}

fn fill_members(left: &mut [usize], cur: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
    if cur.len() == n {
        out.push(cur.clone());
        return;
    }
    for j in 0..left.len() {
        if left[j] > 0 {
            left[j] -= 1;
            cur.push(j);
            fill_members(left, cur, n, out);
            cur.pop();
            left[j] += 1;
        }
    }
}

/// `n! / Π c_j!` in exact integer arithmetic.
pub fn multinomial(counts: &[usize]) -> u128 {
    let mut total: u128 = 1;
    let mut m: u128 = 0;
    for &c in counts {
        for i in 1..=c as u128 {
            m += 1;
            total = total * m / i;
        }
    }
    total
}

/// Row-major index of a sequence over an alphabet of size `k`.
pub fn sequence_index(seq: &[usize], k: usize) -> usize {
    seq.iter().fold(0, |acc, &z| acc * k + z)
}

fn check_sequence_cap(n: usize, k: usize) -> Result<()> {
    let mut total: u128 = 1;
    for _ in 0..n {
        total = total.saturating_mul(k as u128);
    }
    if total > SEQUENCE_CAP {
        return Err(QmacError::EnumerationCap {
            required: total,
            cap: SEQUENCE_CAP,
        });
    }
    Ok(())
}

/// All types of length `n` over `k` letters, ordered by their representatives lexicographically.
pub fn enumerate_types(n: usize, k: usize) -> Result<Vec<TypeClass>> {
    if k == 0 {
        return Err(QmacError::InvalidParameter("empty alphabet".into()));
    }
    check_sequence_cap(n, k)?;
    let mut out = Vec::new();
    let mut counts = vec![0usize; k];
    compositions(n, 0, &mut counts, &mut out);
    Ok(out)
}

fn compositions(left: usize, pos: usize, counts: &mut Vec<usize>, out: &mut Vec<TypeClass>) {
    if pos == counts.len() - 1 {
        counts[pos] = left;
        out.push(TypeClass::from_counts(counts.clone()));
        return;
    }
    for c in (0..=left).rev() {
        counts[pos] = c;
        compositions(left - c, pos + 1, counts, out);
    }
    counts[pos] = 0;
}

/// Projector onto `span{|b_{z_1}⟩ ⊗ … ⊗ |b_{z_n}⟩ : z^n ∈ T_t}` where `b_j` are the columns of `basis`.
pub fn type_class_projector(t: &TypeClass, basis: &CMat) -> Result<CMat> {
    if basis.ncols() != t.alphabet() {
        return Err(QmacError::ShapeMismatch(format!(
            "basis has {} vectors for an alphabet of {}",
            basis.ncols(),
            t.alphabet()
        )));
    }
    let d = basis.nrows();
    let n = t.n();
    let dim = d.checked_pow(n as u32).unwrap_or(usize::MAX);
    FactorSpace::new(&copy_labels("X", n), &vec![d; n])?;
    let mut p = CMat::zeros(dim, dim);
    for seq in t.members() {
        let cols: Vec<CMat> = seq
            .iter()
            .map(|&z| basis.columns(z, 1).into_owned())
            .collect();
        let refs: Vec<&CMat> = cols.iter().collect();
        let v = kron_all(&refs);
        p += &v * v.adjoint();
    }
    Ok(p)
}

/// Weakly typical projector of `ρ^⊗n` with its spectral statistics.
#[derive(Debug, Clone)]
pub struct TypicalProjector {
    /// Projector in copy-major order `X_1, Y_1, X_2, …`.
    pub projector: Operator,
    pub n: usize,
    pub delta: f64,
    /// `H(ρ)` in bits.
    pub base_entropy: f64,
    /// `Tr{Π ρ^⊗n}`.
    pub trace_captured: f64,
    /// Largest retained eigenvalue of `ρ^⊗n` (0 if nothing is retained).
    pub max_eigenvalue: f64,
    /// Smallest retained eigenvalue of `ρ^⊗n` (0 if nothing is retained).
    pub min_eigenvalue: f64,
    pub rank: u128,
}

/// Keeps the eigenvectors `|e_{z^n}⟩` of `ρ^⊗n` with `|-(1/n) log2 λ_{z^n} - H(ρ)| ≤ δ`.
///
/// The product eigenbasis of a single-copy decomposition is used, so the projector commutes with
/// `ρ^⊗n` exactly, and typicality is decided per type of eigen-letters.
pub fn typical_projector(rho: &Operator, n: usize, delta: f64) -> Result<TypicalProjector> {
    if n == 0 {
        return Err(QmacError::InvalidParameter("n must be positive".into()));
    }
    if !(delta > 0.0) {
        return Err(QmacError::InvalidParameter(format!(
            "delta {delta} must be positive"
        )));
    }
    let space = rho.space().power(n)?;
    let eig = eig_hermitian(rho.matrix())?;
    let k = eig.values.len();
    let lambdas: Vec<f64> = eig
        .values
        .iter()
        .map(|&l| if l > ZERO_EIG { l } else { 0.0 })
        .collect();
    let h = entropy_of_spectrum(&eig.values)?;
    let types = enumerate_types(n, k)?;
    let w = {
        let refs: Vec<&CMat> = std::iter::repeat_n(&eig.vectors, n).collect();
        kron_all(&refs)
    };
    let mut cols: Vec<usize> = Vec::new();
    let (mut trace, mut rank) = (0.0, 0u128);
    let (mut lmax, mut lmin) = (0.0f64, f64::INFINITY);
    for t in &types {
        if t.counts
            .iter()
            .zip(&lambdas)
            .any(|(&c, &l)| c > 0 && l == 0.0)
        {
            continue;
        }
        let s: f64 = t
            .counts
            .iter()
            .zip(&lambdas)
            .filter(|(&c, _)| c > 0)
            .map(|(&c, &l)| -(c as f64) * l.log2())
            .sum();
        if (s / n as f64 - h).abs() > delta + WINDOW_SLACK {
            continue;
        }
        let lam = t.sequence_probability(&lambdas);
        trace += lam * t.size as f64;
        rank += t.size;
        lmax = lmax.max(lam);
        lmin = lmin.min(lam);
        cols.extend(t.members().iter().map(|s| sequence_index(s, k)));
    }
    cols.sort_unstable();
    let dim = space.dim();
    let mut wk = CMat::zeros(dim, cols.len());
    for (j, &c) in cols.iter().enumerate() {
        wk.set_column(j, &w.column(c));
    }
    let p = &wk * wk.adjoint();
    if rank == 0 {
        lmin = 0.0;
    }
    Ok(TypicalProjector {
        projector: Operator::new(space, p)?,
        n,
        delta,
        base_entropy: h,
        trace_captured: trace,
        max_eigenvalue: lmax,
        min_eigenvalue: lmin,
        rank,
    })
}

/// Conditionally typical projector of `ρ_1 ⊗ ⋯ ⊗ ρ_n`: keeps the product eigenvectors with
/// `|-(1/n) log2 λ - target| ≤ δ`, where `target` is the conditional entropy.
pub fn product_typical_projector(states: &[CMat], target: f64, delta: f64) -> Result<CMat> {
    let n = states.len();
    if n == 0 {
        return Err(QmacError::InvalidParameter("no states".into()));
    }
    if !(delta > 0.0) {
        return Err(QmacError::InvalidParameter(format!(
            "delta {delta} must be positive"
        )));
    }
    let dims: Vec<usize> = states.iter().map(|s| s.nrows()).collect();
    let space = FactorSpace::new(&copy_labels("X", n), &dims)?;
    let eigs = states
        .iter()
        .map(eig_hermitian)
        .collect::<Result<Vec<_>>>()?;
    let logs: Vec<Vec<Option<f64>>> = eigs
        .iter()
        .map(|e| {
            e.values
                .iter()
                .map(|&l| if l > ZERO_EIG { Some(-l.log2()) } else { None })
                .collect()
        })
        .collect();
    let dim = space.dim();
    let strides = space.strides();
    let mut keep: Vec<Vec<usize>> = Vec::new();
    'outer: for idx in 0..dim {
        let mut s = 0.0;
        let mut digits = Vec::with_capacity(n);
        for i in 0..n {
            let z = (idx / strides[i]) % dims[i];
            match logs[i][z] {
                Some(v) => s += v,
                None => continue 'outer,
            }
            digits.push(z);
        }
        if (s / n as f64 - target).abs() <= delta + WINDOW_SLACK {
            keep.push(digits);
        }
    }
    let mut w = CMat::zeros(dim, keep.len());
    for (j, digits) in keep.iter().enumerate() {
        let cols: Vec<CMat> = digits
            .iter()
            .zip(&eigs)
            .map(|(&z, e)| e.vectors.columns(z, 1).into_owned())
            .collect();
        let refs: Vec<&CMat> = cols.iter().collect();
        w.set_column(j, &kron_all(&refs).column(0));
    }
    Ok(&w * w.adjoint())
}

/// Labels of `n` copies of `labels`, grouped by factor: `X_1..X_n, Y_1..Y_n`.
pub fn grouped_labels<S: AsRef<str>>(labels: &[S], n: usize) -> Vec<String> {
    labels
        .iter()
        .flat_map(|l| copy_labels(l.as_ref(), n))
        .collect()
}

/// [`typical_projector`] permuted into grouped factor order.
pub fn typical_projector_grouped(
    rho: &Operator,
    n: usize,
    delta: f64,
) -> Result<(Operator, TypicalProjector)> {
    let tp = typical_projector(rho, n, delta)?;
    let order = grouped_labels(rho.space().labels(), n);
    Ok((tp.projector.permute(&order)?, tp))
}

/// Measured constants of the packing hypotheses for an ensemble and its projectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PackingConstants {
    /// `1 - min_x min(Tr{Π ρ_x}, Tr{Π_x ρ_x})`.
    pub epsilon: f64,
    /// `1 / min_x λ_min(Π_x ρ_x Π_x)` on the support of `Π_x`.
    pub d: f64,
    /// `1 / λ_max(Π ρ Π)` with `ρ` the ensemble average.
    #[serde(rename = "D")]
    pub big_d: f64,
    /// `max_x max|[Π_x, ρ_x]|`.
    pub commutator_residual: f64,
}

/// Measures ε, d, D and the commutator residual.
///
/// When every `Π_x` is zero, `d` is reported as 1.
pub fn measure_packing_constants(
    ensemble: &[(f64, CMat)],
    pi: &CMat,
    pis: &[CMat],
) -> Result<PackingConstants> {
    if ensemble.len() != pis.len() || ensemble.is_empty() {
        return Err(QmacError::ShapeMismatch(format!(
            "{} states and {} codeword projectors",
            ensemble.len(),
            pis.len()
        )));
    }
    let dim = pi.nrows();
    let mut min_trace = f64::INFINITY;
    let mut min_eig = f64::INFINITY;
    let mut comm = 0.0f64;
    let mut avg = CMat::zeros(dim, dim);
    for ((p, rho), px) in ensemble.iter().zip(pis) {
        avg += rho * crate::qmat::r(*p);
        let t1 = crate::qmat::tr_prod(pi, rho);
        let t2 = crate::qmat::tr_prod(px, rho);
        min_trace = min_trace.min(t1).min(t2);
        comm = comm.max(max_abs(&(px * rho - rho * px)));
        if let Some(l) = min_eig_on_support(&(px * rho * px), px)? {
            min_eig = min_eig.min(l);
        }
    }
    let d = if min_eig == f64::INFINITY {
        1.0
    } else if min_eig <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / min_eig
    };
    let lm = lambda_max(&(pi * avg * pi))?;
    let big_d = if lm <= 0.0 { f64::INFINITY } else { 1.0 / lm };
    Ok(PackingConstants {
        epsilon: (1.0 - min_trace).max(0.0),
        d,
        big_d,
        commutator_residual: comm,
    })
}

/// Identity projector of dimension `d` (convenience for callers that disable a projector).
pub fn full_projector(d: usize) -> CMat {
    identity(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multinomial_small() {
        assert_eq!(multinomial(&[2, 1]), 3);
        assert_eq!(multinomial(&[2, 2, 2]), 90);
        assert_eq!(multinomial(&[0, 5]), 1);
    }

    #[test]
    fn members_lexicographic() {
        let t = TypeClass::from_counts(vec![1, 2]);
        assert_eq!(
            t.members(),
            vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]
        );
        assert_eq!(t.representative, vec![0, 1, 1]);
    }
}
