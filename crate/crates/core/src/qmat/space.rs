use serde::{Deserialize, Serialize};

use crate::error::{QmacError, Result};

/// Default upper bound on the total Hilbert-space dimension of any operator.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Environment variable overriding [`DEFAULT_DIM_CAP`].
pub const DIM_CAP_ENV: &str = "QMAC_DIM_CAP";

/// Current dimension cap: `QMAC_DIM_CAP` if set and parseable, else the default.
pub fn dim_cap() -> usize {
    std::env::var(DIM_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(DEFAULT_DIM_CAP)
}

/// Ordered list of labelled tensor factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorSpace {
    labels: Vec<String>,
    dims: Vec<usize>,
}

impl FactorSpace {
    /// Builds a space under the global dimension cap.
    pub fn new<S: AsRef<str>>(labels: &[S], dims: &[usize]) -> Result<Self> {
        Self::with_cap(labels, dims, dim_cap())
    }

    /// Builds a space under an explicit dimension cap.
    pub fn with_cap<S: AsRef<str>>(labels: &[S], dims: &[usize], cap: usize) -> Result<Self> {
        if labels.len() != dims.len() {
            return Err(QmacError::ShapeMismatch(format!(
                "{} labels for {} dimensions",
                labels.len(),
                dims.len()
            )));
        }
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(QmacError::DuplicateLabel(l.clone()));
            }
        }
        if let Some(&d) = dims.iter().find(|&&d| d == 0) {
            return Err(QmacError::InvalidParameter(format!("factor dimension {d}")));
        }
        let mut total: usize = 1;
        for &d in dims {
            total = total.saturating_mul(d);
            if total > cap {
                let required = dims.iter().fold(1u128, |a, &d| a.saturating_mul(d as u128));
                return Err(QmacError::DimensionCap {
                    required: required.min(usize::MAX as u128) as usize,
                    cap,
                });
            }
        }
        Ok(Self {
            labels,
            dims: dims.to_vec(),
        })
    }

    /// Single factor.
    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new(&[label], &[dim])
    }

    /// Space with no factors (dimension 1).
    pub fn trivial() -> Self {
        Self {
            labels: vec![],
            dims: vec![],
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Total dimension.
    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| QmacError::UnknownLabel(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.index_of(label)?])
    }

    /// Concatenation `self ⊗ other`.
    pub fn concat(&self, other: &FactorSpace) -> Result<Self> {
        let labels: Vec<&str> = self
            .labels
            .iter()
            .chain(&other.labels)
            .map(String::as_str)
            .collect();
        let dims: Vec<usize> = self.dims.iter().chain(&other.dims).copied().collect();
        Self::new(&labels, &dims)
    }

    /// Sub-space of the given labels, in the given order.
    pub fn select<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let dims = labels
            .iter()
            .map(|l| self.dim_of(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels, &dims)
    }

    /// Labels not in `labels`, in original order.
    pub fn complement<S: AsRef<str>>(&self, labels: &[S]) -> Vec<String> {
        self.labels
            .iter()
            .filter(|l| !labels.iter().any(|k| k.as_ref() == l.as_str()))
            .cloned()
            .collect()
    }

    /// Same dims, new labels.
    pub fn relabel<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        Self::new(labels, &self.dims)
    }

    /// `n` copies, copy-major: `X_1, Y_1, X_2, Y_2, ...`.
    pub fn power(&self, n: usize) -> Result<Self> {
        let mut labels = Vec::with_capacity(self.len() * n);
        let mut dims = Vec::with_capacity(self.len() * n);
        for i in 1..=n {
            for (l, &d) in self.labels.iter().zip(&self.dims) {
                labels.push(copy_label(l, i));
                dims.push(d);
            }
        }
        Self::new(&labels, &dims)
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }
}

/// Label of copy `i` (1-based) of factor `label`.
pub fn copy_label(label: &str, i: usize) -> String {
    format!("{label}_{i}")
}

/// Labels `label_1 .. label_n`.
pub fn copy_labels(label: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| copy_label(label, i)).collect()
}

/// For each index of the space `sub` (a subset of `full`), the offset it contributes
/// to a row-major index of `full`.
pub(crate) fn offsets(full: &FactorSpace, sub: &[usize]) -> Vec<usize> {
    let strides = full.strides();
    let mut out = vec![0usize];
    for &k in sub {
        let d = full.dims()[k];
        let mut next = Vec::with_capacity(out.len() * d);
        for &o in &out {
            for v in 0..d {
                next.push(o + v * strides[k]);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_cap() {
        assert!(matches!(
            FactorSpace::new(&["A", "A"], &[2, 2]),
            Err(QmacError::DuplicateLabel(_))
        ));
        assert!(matches!(
            FactorSpace::with_cap(&["A", "B"], &[8, 8], 32),
            Err(QmacError::DimensionCap {
                required: 64,
                cap: 32
            })
        ));
    }

    #[test]
    fn offsets_match_row_major() {
        let s = FactorSpace::new(&["A", "B", "C"], &[2, 3, 2]).unwrap();
        let off = offsets(&s, &[1]);
        assert_eq!(off, vec![0, 2, 4]);
        let off = offsets(&s, &[0, 2]);
        assert_eq!(off, vec![0, 1, 6, 7]);
    }

    #[test]
    fn power_labels() {
        let s = FactorSpace::new(&["A", "C"], &[2, 3]).unwrap();
        let p = s.power(2).unwrap();
        assert_eq!(p.labels(), &["A_1", "C_1", "A_2", "C_2"]);
        assert_eq!(p.dim(), 36);
    }
}
