use crate::error::{QmacError, Result};

use super::linalg::{identity, kron, max_abs, CMat, CVec, HERMITIAN_TOL};
use super::space::{offsets, FactorSpace};

/// A square operator on a labelled tensor-product space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: FactorSpace,
    matrix: CMat,
}

impl Operator {
    pub fn new(space: FactorSpace, matrix: CMat) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(QmacError::ShapeMismatch(format!(
                "{}x{} matrix on a space of dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: FactorSpace) -> Self {
        let d = space.dim();
        Self {
            space,
            matrix: identity(d),
        }
    }

    pub fn space(&self) -> &FactorSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        max_abs(&(&self.matrix - self.matrix.adjoint())) <= tol
    }

    /// Same matrix, new labels.
    pub fn relabel<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        Ok(Self {
            space: self.space.relabel(labels)?,
            matrix: self.matrix.clone(),
        })
    }

    /// Reorders the tensor factors to `order` (a permutation of the labels).
    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        let map = permutation_map(&self.space, order)?;
        let d = map.len();
        let m = &self.matrix;
        let out = CMat::from_fn(d, d, |i, j| m[(map[i], map[j])]);
        Ok(Self {
            space: self.space.select(order)?,
            matrix: out,
        })
    }

    /// Partial trace keeping the listed factors, in their original order.
    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        partial_trace(self, keep)
    }

    /// `self ⊗ I` on `full`, with factors arranged in `full`'s order.
    pub fn embed(&self, full: &FactorSpace) -> Result<Self> {
        for l in self.space.labels() {
            if full.dim_of(l)? != self.space.dim_of(l)? {
                return Err(QmacError::ShapeMismatch(format!(
                    "factor {l} changes dimension"
                )));
            }
        }
        let rest = full.complement(self.space.labels());
        let rest_space = full.select(&rest)?;
        let big = Operator::new(
            self.space.concat(&rest_space)?,
            kron(&self.matrix, &identity(rest_space.dim())),
        )?;
        big.permute(full.labels())
    }
}

/// For each row-major index in the permuted space, the corresponding index in `space`.
pub(crate) fn permutation_map<S: AsRef<str>>(
    space: &FactorSpace,
    order: &[S],
) -> Result<Vec<usize>> {
    if order.len() != space.len() {
        return Err(QmacError::ShapeMismatch(format!(
            "permutation of {} labels given for {} factors",
            order.len(),
            space.len()
        )));
    }
    let idx = order
        .iter()
        .map(|l| space.index_of(l.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    for (i, k) in idx.iter().enumerate() {
        if idx[..i].contains(k) {
            return Err(QmacError::DuplicateLabel(space.labels()[*k].clone()));
        }
    }
    Ok(offsets(space, &idx))
}

/// Reorders the factors of a state vector.
pub(crate) fn permute_vector<S: AsRef<str>>(
    space: &FactorSpace,
    v: &CVec,
    order: &[S],
) -> Result<CVec> {
    let map = permutation_map(space, order)?;
    Ok(CVec::from_fn(map.len(), |i, _| v[map[i]]))
}

/// Partial trace keeping `keep`.
pub fn partial_trace<S: AsRef<str>>(op: &Operator, keep: &[S]) -> Result<Operator> {
    let space = op.space();
    let mut keep_idx = keep
        .iter()
        .map(|l| space.index_of(l.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    keep_idx.sort_unstable();
    for w in keep_idx.windows(2) {
        if w[0] == w[1] {
            return Err(QmacError::DuplicateLabel(space.labels()[w[0]].clone()));
        }
    }
    let trace_idx: Vec<usize> = (0..space.len()).filter(|k| !keep_idx.contains(k)).collect();
    let ko = offsets(space, &keep_idx);
    let to = offsets(space, &trace_idx);
    let kd = ko.len();
    let m = op.matrix();
    let out = CMat::from_fn(kd, kd, |a, b| {
        let mut s = num_complex::Complex64::new(0.0, 0.0);
        for &t in &to {
            s += m[(ko[a] + t, ko[b] + t)];
        }
        s
    });
    let labels: Vec<&str> = keep_idx
        .iter()
        .map(|&k| space.labels()[k].as_str())
        .collect();
    let dims: Vec<usize> = keep_idx.iter().map(|&k| space.dims()[k]).collect();
    Operator::new(FactorSpace::new(&labels, &dims)?, out)
}

/// Kronecker product of labelled operators. Labels must be disjoint.
pub fn tensor(ops: &[&Operator]) -> Result<Operator> {
    let mut space = FactorSpace::trivial();
    for o in ops {
        space = space.concat(o.space())?;
    }
    let mut m = identity(1);
    for o in ops {
        m = kron(&m, o.matrix());
    }
    Operator::new(space, m)
}

/// Checks Hermiticity of a labelled operator.
pub fn require_hermitian(op: &Operator) -> Result<()> {
    let asym = max_abs(&(op.matrix() - op.matrix().adjoint()));
    if asym > HERMITIAN_TOL {
        return Err(QmacError::NotHermitian(asym));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::linalg::r;

    fn diag(v: &[f64]) -> CMat {
        CMat::from_diagonal(&CVec::from_vec(v.iter().map(|&x| r(x)).collect()))
    }

    #[test]
    fn trace_of_product_state() {
        let a = Operator::new(FactorSpace::single("A", 2).unwrap(), diag(&[0.25, 0.75])).unwrap();
        let b =
            Operator::new(FactorSpace::single("B", 3).unwrap(), diag(&[0.5, 0.3, 0.2])).unwrap();
        let ab = tensor(&[&a, &b]).unwrap();
        let ra = ab.partial_trace(&["A"]).unwrap();
        let rb = ab.partial_trace(&["B"]).unwrap();
        assert!(max_abs(&(ra.matrix() - a.matrix())) < 1e-15);
        assert!(max_abs(&(rb.matrix() - b.matrix())) < 1e-15);
    }

    #[test]
    fn permute_swaps_kron() {
        let a = Operator::new(FactorSpace::single("A", 2).unwrap(), diag(&[1.0, 2.0])).unwrap();
        let b =
            Operator::new(FactorSpace::single("B", 3).unwrap(), diag(&[3.0, 4.0, 5.0])).unwrap();
        let ab = tensor(&[&a, &b]).unwrap();
        let ba = tensor(&[&b, &a]).unwrap();
        let p = ab.permute(&["B", "A"]).unwrap();
        assert_eq!(p.space(), ba.space());
        assert!(max_abs(&(p.matrix() - ba.matrix())) < 1e-15);
    }
}
