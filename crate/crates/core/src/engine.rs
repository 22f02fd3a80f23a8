//! Propagation kernel: trailed interval domains, checkpoint/restore and a
//! priority-ordered fixpoint loop.

use std::collections::VecDeque;

/// Integral time unit used everywhere in the crate.
pub type Time = i64;

/// Identifier of an interval variable inside a [`DomainStore`].
#[derive(Debug, Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

/// Raised by propagators when the current domains admit no solution.
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub struct Infeasible;

pub type PropResult = Result<(), Infeasible>;

/// Outcome of a whole fixpoint computation.
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum Outcome {
    Feasible,
    Infeasible,
}

/// Result of a single bound update.
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum ChangeResult {
    Unchanged,
    Changed,
    EmptyDomain,
}

/// Snapshot of a single variable.
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub struct IntervalVar {
    pub id: VarId,
    pub lo: Time,
    pub hi: Time,
}

#[derive(Debug, Copy, Clone, PartialEq, Eq)]
enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Copy, Clone)]
struct TrailEntry {
    var: usize,
    side: Side,
    old: Time,
}

/// Token handed out by [`DomainStore::checkpoint`]. Tokens must be restored
/// in LIFO order.
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    level: usize,
}

/// Reversible interval domains.
///
/// Every bound change is recorded on a trail so that `restore` can undo a
/// whole checkpoint scope. Bounds only tighten inside a scope.
#[derive(Debug, Clone, Default)]
pub struct DomainStore {
    lo: Vec<Time>,
    hi: Vec<Time>,
    trail: Vec<TrailEntry>,
    checkpoints: Vec<usize>,
    /// Bumped on every bound change; lets the fixpoint loop detect activity.
    changes: u64,
    /// Bumped on every restore. Cached structures built for a given epoch
    /// stay valid while the epoch is unchanged, since bounds only tighten.
    epoch: u64,
}

impl DomainStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a fresh variable. Panics when `lo > hi`.
    pub fn new_var(&mut self, lo: Time, hi: Time) -> VarId {
        assert!(lo <= hi, "empty initial domain [{lo}, {hi}]");
        self.lo.push(lo);
        self.hi.push(hi);
        VarId(self.lo.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.lo.len()
    }

    #[inline]
    pub fn lo(&self, v: VarId) -> Time {
        self.lo[v.0]
    }

    #[inline]
    pub fn hi(&self, v: VarId) -> Time {
        self.hi[v.0]
    }

    #[inline]
    pub fn is_fixed(&self, v: VarId) -> bool {
        self.lo[v.0] == self.hi[v.0]
    }

    pub fn var(&self, v: VarId) -> IntervalVar {
        IntervalVar {
            id: v,
            lo: self.lo[v.0],
            hi: self.hi[v.0],
        }
    }

    /// All (lo, hi) pairs, in variable order.
    pub fn bounds(&self) -> Vec<(Time, Time)> {
        self.lo.iter().copied().zip(self.hi.iter().copied()).collect()
    }

    pub fn change_count(&self) -> u64 {
        self.changes
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn trail_len(&self) -> usize {
        self.trail.len()
    }

    pub fn depth(&self) -> usize {
        self.checkpoints.len()
    }

    /// Raises the lower bound of `v` to `value`. On `EmptyDomain` the store
    /// is left untouched.
    pub fn tighten_lower(&mut self, v: VarId, value: Time) -> ChangeResult {
        let i = v.0;
        if value <= self.lo[i] {
            return ChangeResult::Unchanged;
        }
        if value > self.hi[i] {
            return ChangeResult::EmptyDomain;
        }
        self.trail.push(TrailEntry {
            var: i,
            side: Side::Lower,
            old: self.lo[i],
        });
        self.lo[i] = value;
        self.changes += 1;
        ChangeResult::Changed
    }

    /// Lowers the upper bound of `v` to `value`.
    pub fn tighten_upper(&mut self, v: VarId, value: Time) -> ChangeResult {
        let i = v.0;
        if value >= self.hi[i] {
            return ChangeResult::Unchanged;
        }
        if value < self.lo[i] {
            return ChangeResult::EmptyDomain;
        }
        self.trail.push(TrailEntry {
            var: i,
            side: Side::Upper,
            old: self.hi[i],
        });
        self.hi[i] = value;
        self.changes += 1;
        ChangeResult::Changed
    }

    /// `tighten_lower` for use inside propagators.
    pub fn set_min(&mut self, v: VarId, value: Time) -> Result<bool, Infeasible> {
        match self.tighten_lower(v, value) {
            ChangeResult::Unchanged => Ok(false),
            ChangeResult::Changed => Ok(true),
            ChangeResult::EmptyDomain => Err(Infeasible),
        }
    }

    /// `tighten_upper` for use inside propagators.
    pub fn set_max(&mut self, v: VarId, value: Time) -> Result<bool, Infeasible> {
        match self.tighten_upper(v, value) {
            ChangeResult::Unchanged => Ok(false),
            ChangeResult::Changed => Ok(true),
            ChangeResult::EmptyDomain => Err(Infeasible),
        }
    }

    pub fn assign(&mut self, v: VarId, value: Time) -> Result<bool, Infeasible> {
        let a = self.set_min(v, value)?;
        let b = self.set_max(v, value)?;
        Ok(a || b)
    }

    pub fn checkpoint(&mut self) -> Checkpoint {
        self.checkpoints.push(self.trail.len());
        Checkpoint {
            level: self.checkpoints.len(),
        }
    }

    /// Undoes every change made since `token` was taken.
    ///
    /// Panics if `token` is not the innermost open checkpoint.
    pub fn restore(&mut self, token: Checkpoint) {
        assert_eq!(
            token.level,
            self.checkpoints.len(),
            "checkpoints must be restored in LIFO order"
        );
        let mark = self.checkpoints.pop().expect("no open checkpoint");
        while self.trail.len() > mark {
            let e = self.trail.pop().unwrap();
            match e.side {
                Side::Lower => self.lo[e.var] = e.old,
                Side::Upper => self.hi[e.var] = e.old,
            }
        }
        self.changes += 1;
        self.epoch += 1;
    }
}

/// A filtering algorithm that narrows bounds in a [`DomainStore`].
///
/// Implementations must be sound (never remove a value that belongs to a
/// solution) and may only tighten.
pub trait Propagator: Send {
    fn name(&self) -> &str;

    /// Smaller runs first.
    fn priority(&self) -> u8 {
        1
    }

    fn propagate(&mut self, store: &mut DomainStore) -> PropResult;
}

/// Any closure over the store is a propagator with the default priority.
pub struct FnPropagator<F> {
    name: String,
    priority: u8,
    f: F,
}

impl<F> FnPropagator<F>
where
    F: FnMut(&mut DomainStore) -> PropResult + Send,
{
    pub fn new(name: impl Into<String>, priority: u8, f: F) -> Self {
        Self {
            name: name.into(),
            priority,
            f,
        }
    }
}

impl<F> Propagator for FnPropagator<F>
where
    F: FnMut(&mut DomainStore) -> PropResult + Send,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn priority(&self) -> u8 {
        self.priority
    }

    fn propagate(&mut self, store: &mut DomainStore) -> PropResult {
        (self.f)(store)
    }
}

/// Runs `propagators` until none of them changes a bound.
///
/// Scheduling is priority-then-FIFO: the queue always serves the smallest
/// priority class first, and whenever a propagator changes something every
/// propagator not already queued is scheduled again (including itself,
/// since propagators need not be idempotent).
pub fn fixpoint(store: &mut DomainStore, propagators: &mut [Box<dyn Propagator>]) -> Outcome {
    if propagators.is_empty() {
        return Outcome::Feasible;
    }
    let mut classes: Vec<u8> = propagators.iter().map(|p| p.priority()).collect();
    classes.sort_unstable();
    classes.dedup();
    let mut queues: Vec<VecDeque<usize>> = vec![VecDeque::new(); classes.len()];
    let class_of: Vec<usize> = propagators
        .iter()
        .map(|p| classes.binary_search(&p.priority()).unwrap())
        .collect();
    let mut queued = vec![true; propagators.len()];
    for (i, &c) in class_of.iter().enumerate() {
        queues[c].push_back(i);
    }

    loop {
        let Some(idx) = queues.iter_mut().find_map(|q| q.pop_front()) else {
            return Outcome::Feasible;
        };
        queued[idx] = false;
        let before = store.change_count();
        if propagators[idx].propagate(store).is_err() {
            return Outcome::Infeasible;
        }
        if store.change_count() != before {
            for (i, &c) in class_of.iter().enumerate() {
                if !queued[i] {
                    queued[i] = true;
                    queues[c].push_back(i);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_pcg::Pcg32;

    #[test]
    fn tighten_lower_examples() {
        let mut s = DomainStore::new();
        let v = s.new_var(4, 6);
        assert_eq!(s.tighten_lower(v, 3), ChangeResult::Unchanged);
        assert_eq!(s.lo(v), 4);
        assert_eq!(s.tighten_lower(v, 7), ChangeResult::EmptyDomain);
        assert_eq!((s.lo(v), s.hi(v)), (4, 6));

        let w = s.new_var(7, 13);
        assert_eq!(s.tighten_lower(w, 8), ChangeResult::Changed);
        assert_eq!(s.lo(w), 8);
    }

    #[test]
    fn restore_undoes_scope() {
        let mut s = DomainStore::new();
        let v = s.new_var(0, 20);
        let cp = s.checkpoint();
        s.tighten_lower(v, 9);
        s.tighten_upper(v, 12);
        s.restore(cp);
        assert_eq!((s.lo(v), s.hi(v)), (0, 20));

        let before = s.bounds();
        let cp = s.checkpoint();
        s.restore(cp);
        assert_eq!(s.bounds(), before);
    }

    #[test]
    #[should_panic(expected = "LIFO")]
    fn out_of_order_restore_panics() {
        let mut s = DomainStore::new();
        s.new_var(0, 1);
        let outer = s.checkpoint();
        let _inner = s.checkpoint();
        s.restore(outer);
    }

    #[test]
    fn nested_restore_matches_copy_reference() {
        let mut rng = Pcg32::new(42, 7);
        for _ in 0..200 {
            let mut s = DomainStore::new();
            let vars: Vec<VarId> = (0..5).map(|_| s.new_var(0, 100)).collect();
            let mut snapshots: Vec<(Checkpoint, Vec<(Time, Time)>)> = Vec::new();
            for _ in 0..60 {
                match rng.gen_range(0..4) {
                    0 => {
                        let snap = s.bounds();
                        snapshots.push((s.checkpoint(), snap));
                    }
                    1 if !snapshots.is_empty() => {
                        let (cp, snap) = snapshots.pop().unwrap();
                        s.restore(cp);
                        assert_eq!(s.bounds(), snap);
                    }
                    _ => {
                        let v = vars[rng.gen_range(0..vars.len())];
                        let x = rng.gen_range(0..=100);
                        if rng.gen_bool(0.5) {
                            s.tighten_lower(v, x);
                        } else {
                            s.tighten_upper(v, x);
                        }
                    }
                }
                for &v in &vars {
                    assert!(s.lo(v) <= s.hi(v));
                }
            }
            while let Some((cp, snap)) = snapshots.pop() {
                s.restore(cp);
                assert_eq!(s.bounds(), snap);
            }
        }
    }

    #[test]
    fn fixpoint_trivial_cases() {
        let mut s = DomainStore::new();
        let v = s.new_var(0, 10);
        assert_eq!(fixpoint(&mut s, &mut []), Outcome::Feasible);
        assert_eq!((s.lo(v), s.hi(v)), (0, 10));

        let mut props: Vec<Box<dyn Propagator>> =
            vec![Box::new(FnPropagator::new("fail", 0, |_s: &mut DomainStore| Err(Infeasible)))];
        assert_eq!(fixpoint(&mut s, &mut props), Outcome::Infeasible);
    }

    #[test]
    fn fixpoint_chains_and_is_idempotent() {
        // x < y < z encoded as bound propagators, cheap one last to check requeueing
        let mut s = DomainStore::new();
        let x = s.new_var(3, 10);
        let y = s.new_var(0, 10);
        let z = s.new_var(0, 10);
        let mut props: Vec<Box<dyn Propagator>> = vec![
            Box::new(FnPropagator::new("y<z", 2, move |s: &mut DomainStore| {
                s.set_min(z, s.lo(y) + 1)?;
                s.set_max(y, s.hi(z) - 1)?;
                Ok(())
            })),
            Box::new(FnPropagator::new("x<y", 0, move |s: &mut DomainStore| {
                s.set_min(y, s.lo(x) + 1)?;
                s.set_max(x, s.hi(y) - 1)?;
                Ok(())
            })),
        ];
        assert_eq!(fixpoint(&mut s, &mut props), Outcome::Feasible);
        assert_eq!(s.bounds(), vec![(3, 8), (4, 9), (5, 10)]);
        let trail = s.trail_len();
        assert_eq!(fixpoint(&mut s, &mut props), Outcome::Feasible);
        assert_eq!(s.trail_len(), trail);
    }
}
