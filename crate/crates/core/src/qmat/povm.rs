use crate::error::{QmacError, Result};

use super::linalg::{eigenvalues_hermitian, identity, tr_prod, CMat, PSD_TOL};

/// Tolerance on `Σ Λ ≤ I`.
pub const POVM_TOL: f64 = 1e-9;

/// Sub-normalised POVM: PSD elements with `Σ Λ_k ≤ I`. The completion `I - Σ Λ_k` is the abort outcome.
#[derive(Debug, Clone)]
pub struct PovmSet {
    elements: Vec<CMat>,
    dim: usize,
    sum_max_eig: f64,
}

impl PovmSet {
    /// Validates positivity of each element and `Σ Λ ≤ I` to [`POVM_TOL`].
    pub fn new(dim: usize, elements: Vec<CMat>) -> Result<Self> {
        let mut sum = CMat::zeros(dim, dim);
        for e in &elements {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(QmacError::ShapeMismatch(format!(
                    "POVM element {}x{} in dimension {dim}",
                    e.nrows(),
                    e.ncols()
                )));
            }
            if let Some(&lo) = eigenvalues_hermitian(e)?.last() {
                if lo < -PSD_TOL {
                    return Err(QmacError::NegativeEigenvalue(lo));
                }
            }
            sum += e;
        }
        let sum_max_eig = eigenvalues_hermitian(&sum)?.first().copied().unwrap_or(0.0);
        if sum_max_eig > 1.0 + POVM_TOL {
            return Err(QmacError::PovmOverComplete(sum_max_eig));
        }
        Ok(Self {
            elements,
            dim,
            sum_max_eig,
        })
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest eigenvalue of `Σ Λ_k`.
    pub fn sum_max_eigenvalue(&self) -> f64 {
        self.sum_max_eig
    }

    /// `I - Σ Λ_k`.
    pub fn completion(&self) -> CMat {
        let mut c = identity(self.dim);
        for e in &self.elements {
            c -= e;
        }
        c
    }

    /// Elements followed by the completion.
    pub fn completed(&self) -> Vec<CMat> {
        let mut v = self.elements.clone();
        v.push(self.completion());
        v
    }

    /// `Tr{Λ_k ρ}`.
    pub fn probability(&self, k: usize, rho: &CMat) -> f64 {
        tr_prod(&self.elements[k], rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::linalg::r;

    #[test]
    fn rejects_overcomplete() {
        let e = identity(2) * r(0.6);
        assert!(matches!(
            PovmSet::new(2, vec![e.clone(), e]),
            Err(QmacError::PovmOverComplete(_))
        ));
    }
}
