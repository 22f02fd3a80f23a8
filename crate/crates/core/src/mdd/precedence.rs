use std::fmt;

use crate::engine::{DomainStore, PropResult, VarId};
use crate::jobset::JobSet;

/// Pairs `(i, j)` meaning job `i` completes before job `j` starts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PrecedenceSet {
    /// `preds[j]` holds every `i` with `i ≺ j`.
    preds: Vec<JobSet>,
}

impl PrecedenceSet {
    pub fn empty(n: usize) -> Self {
        Self {
            preds: vec![JobSet::EMPTY; n],
        }
    }

    /// Every ordered pair of distinct jobs.
    pub fn all_pairs(n: usize) -> Self {
        Self {
            preds: (0..n).map(|j| JobSet::full(n).difference(JobSet::singleton(j))).collect(),
        }
    }

    pub fn num_jobs(&self) -> usize {
        self.preds.len()
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        debug_assert_ne!(i, j);
        self.preds[j] = self.preds[j].with(i);
    }

    pub fn remove(&mut self, i: usize, j: usize) {
        self.preds[j] = self.preds[j].difference(JobSet::singleton(i));
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.preds[j].contains(i)
    }

    pub fn predecessors(&self, j: usize) -> JobSet {
        self.preds[j]
    }

    pub fn len(&self) -> usize {
        self.preds.iter().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_subset(&self, other: &PrecedenceSet) -> bool {
        self.preds
            .iter()
            .zip(&other.preds)
            .all(|(a, b)| a.difference(*b).is_empty())
    }

    /// Sorted `(i, j)` pairs.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .preds
            .iter()
            .enumerate()
            .flat_map(|(j, s)| s.iter().map(move |i| (i, j)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Pairwise propagation of every precedence:
    /// `s_j >= s_i + p_i` and `e_i <= e_j - p_j`.
    pub fn propagate(&self, store: &mut DomainStore, starts: &[VarId], processing: &[i64]) -> PropResult {
        for (i, j) in self.pairs() {
            store.set_min(starts[j], store.lo(starts[i]) + processing[i])?;
            // e_i <= hi(e_j) - p_j, i.e. s_i <= hi(s_j) - p_i
            store.set_max(starts[i], store.hi(starts[j]) - processing[i])?;
        }
        Ok(())
    }
}

/// Printed with 1-based ids: `{1≺4, 2≺4}`.
impl fmt::Debug for PrecedenceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (i, j)) in self.pairs().into_iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}≺{}", i + 1, j + 1)?;
        }
        write!(f, "}}")
    }
}
