use crate::error::{QmacError, Result};

use super::linalg::{eigenvalues_hermitian, kron, kron_vec, outer, CMat, CVec, PSD_TOL};
use super::operator::{permute_vector, Operator};
use super::space::FactorSpace;

/// Trace tolerance for density operators.
pub const TRACE_TOL: f64 = 1e-9;

/// A validated density operator: Hermitian, PSD and unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator(Operator);

impl DensityOperator {
    pub fn new(op: Operator) -> Result<Self> {
        let ev = eigenvalues_hermitian(op.matrix())?;
        if let Some(&lo) = ev.last() {
            if lo < -PSD_TOL {
                return Err(QmacError::NegativeEigenvalue(lo));
            }
        }
        let t = op.trace();
        if (t - 1.0).abs() > TRACE_TOL {
            return Err(QmacError::TraceNotOne(t));
        }
        Ok(Self(op))
    }

    pub fn from_matrix(space: FactorSpace, m: CMat) -> Result<Self> {
        Self::new(Operator::new(space, m)?)
    }

    pub fn operator(&self) -> &Operator {
        &self.0
    }

    pub fn matrix(&self) -> &CMat {
        self.0.matrix()
    }

    pub fn space(&self) -> &FactorSpace {
        self.0.space()
    }

    pub fn into_operator(self) -> Operator {
        self.0
    }
}

/// A pure state vector on a labelled space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    space: FactorSpace,
    vector: CVec,
}

impl PureState {
    /// Requires unit norm to [`TRACE_TOL`].
    pub fn new(space: FactorSpace, vector: CVec) -> Result<Self> {
        let s = Self::unnormalized(space, vector)?;
        let n = s.vector.norm();
        if (n - 1.0).abs() > TRACE_TOL {
            return Err(QmacError::InvalidParameter(format!("state norm {n}")));
        }
        Ok(s)
    }

    /// No norm check; used for intermediate vectors.
    pub fn unnormalized(space: FactorSpace, vector: CVec) -> Result<Self> {
        if vector.len() != space.dim() {
            return Err(QmacError::ShapeMismatch(format!(
                "vector of length {} on a space of dimension {}",
                vector.len(),
                space.dim()
            )));
        }
        Ok(Self { space, vector })
    }

    /// `Σ_j √p_j |j⟩|j⟩` on `a ⊗ b`, both of dimension `p.len()`.
    pub fn schmidt_diagonal(a: &str, b: &str, p: &[f64]) -> Result<Self> {
        let d = p.len();
        let space = FactorSpace::new(&[a, b], &[d, d])?;
        let mut v = CVec::zeros(d * d);
        for (j, &pj) in p.iter().enumerate() {
            if pj < 0.0 {
                return Err(QmacError::InvalidParameter(format!(
                    "negative Schmidt weight {pj}"
                )));
            }
            v[j * d + j] = pj.sqrt().into();
        }
        Self::new(space, v)
    }

    /// Maximally entangled state of two `d`-level systems.
    pub fn max_entangled(a: &str, b: &str, d: usize) -> Result<Self> {
        Self::schmidt_diagonal(a, b, &vec![1.0 / d as f64; d])
    }

    pub fn space(&self) -> &FactorSpace {
        &self.space
    }

    pub fn vector(&self) -> &CVec {
        &self.vector
    }

    pub fn density(&self) -> Operator {
        Operator::new(self.space.clone(), outer(&self.vector))
            .expect("shape checked at construction")
    }

    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        Ok(Self {
            space: self.space.concat(&other.space)?,
            vector: kron_vec(&self.vector, &other.vector),
        })
    }

    /// `n` copies, copy-major labels `X_1, Y_1, X_2, ...`.
    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        let space = self.space.power(n)?;
        let mut v = CVec::from_element(1, 1.0.into());
        for _ in 0..n {
            v = kron_vec(&v, &self.vector);
        }
        Ok(Self { space, vector: v })
    }

    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        Ok(Self {
            space: self.space.select(order)?,
            vector: permute_vector(&self.space, &self.vector, order)?,
        })
    }

    pub fn relabel<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        Ok(Self {
            space: self.space.relabel(labels)?,
            vector: self.vector.clone(),
        })
    }

    /// Applies a linear map `map: acting_on → out` (an `out_dim × in_dim` matrix).
    ///
    /// The output factors take the place of the first acting factor; the others keep their order.
    pub fn apply_map<S: AsRef<str>>(
        &self,
        map: &CMat,
        acting_on: &[S],
        out: &FactorSpace,
    ) -> Result<Self> {
        let acting: Vec<&str> = acting_on.iter().map(|s| s.as_ref()).collect();
        let in_space = self.space.select(&acting)?;
        if map.ncols() != in_space.dim() || map.nrows() != out.dim() {
            return Err(QmacError::ShapeMismatch(format!(
                "map {}x{} for input {} and output {}",
                map.nrows(),
                map.ncols(),
                in_space.dim(),
                out.dim()
            )));
        }
        let rest = self.space.complement(&acting);
        let mut order: Vec<String> = acting.iter().map(|s| s.to_string()).collect();
        order.extend(rest.iter().cloned());
        let moved = self.permute(&order)?;
        let r = self.space.select(&rest)?.dim();
        let full = kron(map, &CMat::identity(r, r));
        let v = full * moved.vector;
        let space = out.concat(&self.space.select(&rest)?)?;
        let target = replaced_order(&self.space, &acting, out.labels());
        Self::unnormalized(space, v)?.permute(&target)
    }
}

/// Label order after replacing `acting` by `out` at the position of the first acting factor.
pub(crate) fn replaced_order(space: &FactorSpace, acting: &[&str], out: &[String]) -> Vec<String> {
    let mut order = Vec::new();
    let mut placed = false;
    for l in space.labels() {
        if acting.contains(&l.as_str()) {
            if !placed {
                order.extend(out.iter().cloned());
                placed = true;
            }
        } else {
            order.push(l.clone());
        }
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_marginal_is_mixed() {
        let phi = PureState::max_entangled("A", "B", 2).unwrap();
        let ra = phi.density().partial_trace(&["A"]).unwrap();
        assert!((ra.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!(ra.matrix()[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn density_rejects_bad_trace() {
        let space = FactorSpace::single("A", 2).unwrap();
        assert!(matches!(
            DensityOperator::from_matrix(space, CMat::identity(2, 2)),
            Err(QmacError::TraceNotOne(_))
        ));
    }
}
