//! Labeled tensor-product structure.
//!
//! Subsystems are ordered; the first label is the most significant digit of a
//! flat basis index (row-major / Kronecker ordering).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct SystemDims {
    labels: Vec<String>,
    dims: Vec<usize>,
}

impl SystemDims {
    pub fn new<S: Into<String>>(systems: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut out = SystemDims::default();
        for (label, dim) in systems {
            out.push(label, dim)?;
        }
        Ok(out)
    }

    /// The trivial (one-dimensional) space with no subsystems.
    pub fn trivial() -> Self {
        SystemDims::default()
    }

    /// A single subsystem.
    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        SystemDims::new([(label.into(), dim)])
    }

    fn push(&mut self, label: impl Into<String>, dim: usize) -> Result<()> {
        let label = label.into();
        if dim == 0 {
            return Err(Error::InvalidParameter(format!(
                "subsystem `{label}` has dimension 0"
            )));
        }
        if self.labels.contains(&label) {
            return Err(Error::DuplicateLabel(label));
        }
        self.labels.push(label);
        self.dims.push(dim);
        Ok(())
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

    /// Product of all subsystem dimensions.
    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.position(label)
            .map(|i| self.dims[i])
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Concatenation; fails on a label collision.
    pub fn concat(&self, other: &SystemDims) -> Result<SystemDims> {
        let mut out = self.clone();
        for (l, &d) in other.labels.iter().zip(&other.dims) {
            out.push(l.clone(), d)?;
        }
        Ok(out)
    }

    /// Sub-structure made of the listed labels, in the listed order.
    pub fn select<S: AsRef<str>>(&self, labels: &[S]) -> Result<SystemDims> {
        let mut out = SystemDims::default();
        for l in labels {
            let l = l.as_ref();
            out.push(l, self.dim_of(l)?)?;
        }
        Ok(out)
    }

    /// Everything except the listed labels, original order preserved.
    pub fn without<S: AsRef<str>>(&self, labels: &[S]) -> Result<SystemDims> {
        self.check_labels(labels)?;
        let drop: Vec<&str> = labels.iter().map(|s| s.as_ref()).collect();
        let mut out = SystemDims::default();
        for (l, &d) in self.labels.iter().zip(&self.dims) {
            if !drop.contains(&l.as_str()) {
                out.push(l.clone(), d)?;
            }
        }
        Ok(out)
    }

    /// Same dimensions under new names.
    pub fn relabel<S: AsRef<str>>(&self, labels: &[S]) -> Result<SystemDims> {
        if labels.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "relabel with {} labels for {} subsystems",
                labels.len(),
                self.len()
            )));
        }
        SystemDims::new(labels.iter().map(|l| l.as_ref().to_string()).zip(self.dims.iter().copied()))
    }

    /// Renames a single subsystem.
    pub fn rename(&self, from: &str, to: &str) -> Result<SystemDims> {
        let pos = self
            .position(from)
            .ok_or_else(|| Error::UnknownLabel(from.to_string()))?;
        let mut labels = self.labels.clone();
        labels[pos] = to.to_string();
        self.relabel(&labels)
    }

    pub fn check_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<()> {
        for l in labels {
            if !self.contains(l.as_ref()) {
                return Err(Error::UnknownLabel(l.as_ref().to_string()));
            }
        }
        Ok(())
    }

    /// Same labels with the same dimensions, possibly in a different order.
    pub fn same_systems(&self, other: &SystemDims) -> bool {
        self.len() == other.len()
            && self
                .labels
                .iter()
                .zip(&self.dims)
                .all(|(l, &d)| other.dim_of(l).map(|od| od == d).unwrap_or(false))
    }

    /// Mixed-radix digits of a flat index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.len()];
        for k in (0..self.len()).rev() {
            out[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&d, &n)| acc * n + d)
    }
}

impl fmt::Display for SystemDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .labels
            .iter()
            .zip(&self.dims)
            .map(|(l, d)| format!("{l}={d}"))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Splits flat indices of a space into a "selected" part (the listed
/// subsystems) and a "rest" part, and merges them back.
#[derive(Debug, Clone)]
pub(crate) struct SubsystemSplit {
    sel_of: Vec<usize>,
    rest_of: Vec<usize>,
    merge: Vec<usize>,
    pub n_rest: usize,
}

impl SubsystemSplit {
    pub fn new<S: AsRef<str>>(dims: &SystemDims, selected: &[S]) -> Result<Self> {
        dims.check_labels(selected)?;
        let mask: Vec<bool> = dims
            .labels()
            .iter()
            .map(|l| selected.iter().any(|s| s.as_ref() == l))
            .collect();
        let rest_dims: Vec<usize> = dims
            .dims()
            .iter()
            .zip(&mask)
            .filter(|(_, &m)| !m)
            .map(|(&d, _)| d)
            .collect();
        let n_rest: usize = rest_dims.iter().product();
        let n = dims.total();
        let mut sel_of = vec![0; n];
        let mut rest_of = vec![0; n];
        let mut merge = vec![0; n];
        for i in 0..n {
            let digits = dims.digits(i);
            let (mut s, mut r) = (0, 0);
            for (k, &dig) in digits.iter().enumerate() {
                if mask[k] {
                    s = s * dims.dims()[k] + dig;
                } else {
                    r = r * dims.dims()[k] + dig;
                }
            }
            sel_of[i] = s;
            rest_of[i] = r;
            merge[s * n_rest + r] = i;
        }
        Ok(SubsystemSplit {
            sel_of,
            rest_of,
            merge,
            n_rest,
        })
    }

    #[inline]
    pub fn sel(&self, i: usize) -> usize {
        self.sel_of[i]
    }

    #[inline]
    pub fn rest(&self, i: usize) -> usize {
        self.rest_of[i]
    }

    #[inline]
    pub fn merge(&self, sel: usize, rest: usize) -> usize {
        self.merge[sel * self.n_rest + rest]
    }

    /// Index pair after transposing the selected subsystems.
    #[inline]
    pub fn transpose_pair(&self, r: usize, c: usize) -> (usize, usize) {
        (
            self.merge(self.sel(c), self.rest(r)),
            self.merge(self.sel(r), self.rest(c)),
        )
    }

    /// Index pair after tracing out the selected subsystems, if it survives.
    #[inline]
    pub fn trace_pair(&self, r: usize, c: usize) -> Option<(usize, usize)> {
        (self.sel(r) == self.sel(c)).then(|| (self.rest(r), self.rest(c)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_zero_dims() {
        assert!(matches!(
            SystemDims::new([("A", 2), ("A", 3)]),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(SystemDims::new([("A", 0)]).is_err());
    }

    #[test]
    fn digits_roundtrip() {
        let d = SystemDims::new([("A", 2), ("B", 3), ("C", 4)]).unwrap();
        for i in 0..d.total() {
            assert_eq!(d.index(&d.digits(i)), i);
        }
        assert_eq!(d.digits(5), vec![0, 1, 1]);
    }

    #[test]
    fn split_merges_back() {
        let d = SystemDims::new([("A", 2), ("B", 3), ("C", 2)]).unwrap();
        let s = SubsystemSplit::new(&d, &["C", "A"]).unwrap();
        assert_eq!(s.n_rest, 3);
        assert_eq!((0..d.total()).map(|i| s.sel(i)).max(), Some(3));
        for i in 0..d.total() {
            assert_eq!(s.merge(s.sel(i), s.rest(i)), i);
        }
    }
}
