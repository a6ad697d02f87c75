use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Identifier of a single qubit within a register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QubitLabel(pub u32);

impl std::fmt::Display for QubitLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// An ordered set of distinct qubit labels.
///
/// The qubit at position `p` addresses bit `p` of a basis-state index
/// (little-endian tensor ordering). All subset operations go through labels,
/// never through raw index arithmetic at call sites.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitRegister {
    labels: Vec<QubitLabel>,
}

impl QubitRegister {
    /// Register with labels `0..n-1`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "register needs at least one qubit");
        Self {
            labels: (0..n as u32).map(QubitLabel).collect(),
        }
    }

    pub fn from_labels(labels: Vec<QubitLabel>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Domain("register needs at least one qubit".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(*l) {
                return Err(Error::LabelCollision(l.0));
            }
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Hilbert-space dimension, `2^n`.
    pub fn dim(&self) -> usize {
        1 << self.labels.len()
    }

    pub fn labels(&self) -> &[QubitLabel] {
        &self.labels
    }

    pub fn contains(&self, label: QubitLabel) -> bool {
        self.labels.contains(&label)
    }

    /// Position of `label` in the tensor ordering.
    pub fn position(&self, label: QubitLabel) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| *l == label)
            .ok_or(Error::UnknownLabel(label.0))
    }

    /// Positions of a subset of labels, in register order.
    pub fn positions(&self, subset: &[QubitLabel]) -> Result<Vec<usize>> {
        let mut ps: Vec<usize> = subset
            .iter()
            .map(|l| self.position(*l))
            .collect::<Result<_>>()?;
        ps.sort_unstable();
        ps.dedup();
        if ps.len() != subset.len() {
            return Err(Error::Domain("duplicate labels in subset".into()));
        }
        Ok(ps)
    }

    /// New register with this register's labels followed by `other`'s.
    pub fn join(&self, other: &QubitRegister) -> Result<QubitRegister> {
        for l in other.labels() {
            if self.contains(*l) {
                return Err(Error::LabelCollision(l.0));
            }
        }
        let mut labels = self.labels.clone();
        labels.extend_from_slice(other.labels());
        Ok(QubitRegister { labels })
    }

    /// Sub-register of the given labels, kept in this register's order.
    pub fn subset(&self, keep: &[QubitLabel]) -> Result<QubitRegister> {
        let ps = self.positions(keep)?;
        Ok(QubitRegister {
            labels: ps.iter().map(|&p| self.labels[p]).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_follow_register_order() {
        let r = QubitRegister::new(4);
        let ps = r.positions(&[QubitLabel(3), QubitLabel(1)]).unwrap();
        assert_eq!(ps, vec![1, 3]);
    }

    #[test]
    fn join_rejects_collisions() {
        let a = QubitRegister::new(2);
        let b = QubitRegister::from_labels(vec![QubitLabel(1), QubitLabel(5)]).unwrap();
        assert!(matches!(a.join(&b), Err(Error::LabelCollision(1))));
    }

    #[test]
    fn unknown_label_errors() {
        let r = QubitRegister::new(2);
        assert!(matches!(
            r.position(QubitLabel(7)),
            Err(Error::UnknownLabel(7))
        ));
    }
}
