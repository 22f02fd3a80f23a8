//! Interval propagation of `obj = Σ |s_j + p_j - d_j|`.

use crate::engine::{DomainStore, PropResult, Propagator, Time, VarId};
use crate::instance::Instance;

/// Smallest and largest deviation `|s + p - d|` over `s ∈ [lo, hi]`.
fn deviation_range(lo: Time, hi: Time, p: Time, d: Time) -> (Time, Time) {
    let (a, b) = (lo + p - d, hi + p - d);
    let min = if a <= 0 && 0 <= b { 0 } else { a.abs().min(b.abs()) };
    (min, a.abs().max(b.abs()))
}

/// Links the objective variable to the start variables with plain interval
/// arithmetic, in both directions.
pub struct EarlinessTardiness {
    processing: Vec<Time>,
    due: Vec<Time>,
    starts: Vec<VarId>,
    objective: VarId,
}

impl EarlinessTardiness {
    pub fn new(instance: &Instance, starts: Vec<VarId>, objective: VarId) -> Self {
        Self {
            processing: instance.jobs().iter().map(|j| j.processing).collect(),
            due: instance.jobs().iter().map(|j| j.due).collect(),
            starts,
            objective,
        }
    }
}

impl Propagator for EarlinessTardiness {
    fn name(&self) -> &str {
        "earliness-tardiness"
    }

    fn priority(&self) -> u8 {
        0
    }

    fn propagate(&mut self, store: &mut DomainStore) -> PropResult {
        let ranges: Vec<(Time, Time)> = (0..self.starts.len())
            .map(|j| {
                let v = self.starts[j];
                deviation_range(store.lo(v), store.hi(v), self.processing[j], self.due[j])
            })
            .collect();
        let min_sum: Time = ranges.iter().map(|r| r.0).sum();
        let max_sum: Time = ranges.iter().map(|r| r.1).sum();
        store.set_min(self.objective, min_sum)?;
        store.set_max(self.objective, max_sum)?;

        let budget = store.hi(self.objective);
        for (j, &(min_dev, _)) in ranges.iter().enumerate() {
            let slack = budget - (min_sum - min_dev);
            let target = self.due[j] - self.processing[j];
            store.set_min(self.starts[j], target - slack)?;
            store.set_max(self.starts[j], target + slack)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Infeasible, Propagator};
    use crate::instance::Job;

    #[test]
    fn deviation_ranges() {
        assert_eq!(deviation_range(0, 10, 2, 5), (0, 7));
        assert_eq!(deviation_range(6, 8, 2, 5), (3, 5));
        assert_eq!(deviation_range(0, 1, 2, 10), (7, 8));
    }

    #[test]
    fn both_directions() {
        let inst = Instance::new(vec![Job::new(0, 2, 20, 10), Job::new(0, 3, 20, 5)]).unwrap();
        let mut store = DomainStore::new();
        let s0 = store.new_var(0, 18);
        let s1 = store.new_var(10, 17);
        let obj = store.new_var(0, 1000);
        let mut p = EarlinessTardiness::new(&inst, vec![s0, s1], obj);
        p.propagate(&mut store).unwrap();
        // job 2 ends at >= 13, so it is at least 8 late
        assert_eq!(store.lo(obj), 8);
        assert_eq!(store.hi(obj), 10 + 15);
        store.tighten_upper(obj, 9);
        p.propagate(&mut store).unwrap();
        // job 1 may deviate by at most 1: end in [9, 11]
        assert_eq!((store.lo(s0), store.hi(s0)), (7, 9));
        assert_eq!((store.lo(s1), store.hi(s1)), (10, 11));
        store.tighten_upper(obj, 8);
        p.propagate(&mut store).unwrap();
        assert_eq!((store.lo(s0), store.hi(s0)), (8, 8));
        assert_eq!((store.lo(s1), store.hi(s1)), (10, 10));
        let mut tight = DomainStore::new();
        let a = tight.new_var(10, 17);
        let b = tight.new_var(0, 0);
        let o = tight.new_var(0, 3);
        let mut q = EarlinessTardiness::new(&inst, vec![b, a], o);
        assert_eq!(q.propagate(&mut tight), Err(Infeasible));
    }
}
