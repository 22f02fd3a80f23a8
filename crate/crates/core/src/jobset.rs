//! Fixed-width job sets.

use std::fmt;

/// Largest job count representable in a [`JobSet`].
pub const MAX_JOBS: usize = 64;

/// A set of job indices (0-based) packed into a single word.
#[derive(Copy, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JobSet(pub u64);

impl JobSet {
    pub const EMPTY: JobSet = JobSet(0);

    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_JOBS);
        if n == 64 {
            JobSet(u64::MAX)
        } else {
            JobSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        JobSet(1u64 << i)
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    #[inline]
    pub fn with(self, i: usize) -> Self {
        JobSet(self.0 | 1u64 << i)
    }

    #[inline]
    pub fn union(self, o: Self) -> Self {
        JobSet(self.0 | o.0)
    }

    #[inline]
    pub fn intersection(self, o: Self) -> Self {
        JobSet(self.0 & o.0)
    }

    #[inline]
    pub fn difference(self, o: Self) -> Self {
        JobSet(self.0 & !o.0)
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }
}

impl FromIterator<usize> for JobSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        iter.into_iter().fold(JobSet::EMPTY, JobSet::with)
    }
}

/// Printed with 1-based job ids, e.g. `{1,3}`.
impl fmt::Debug for JobSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for JobSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
