//! No-Overlap multi-valued decision diagrams over job sequences.

pub mod exact;
pub mod precedence;
pub mod relaxed;

pub use exact::{exact_bc, ExactBcPropagator, ExactMdd, ExactState, FilterPass};
pub use precedence::PrecedenceSet;
pub use relaxed::{
    bucket_layer, merge_down, merge_up, DownState, RelaxedMdd, RelaxedMode, RelaxedMddPropagator,
    RelaxedState, UpState,
};

use crate::engine::{DomainStore, PropResult, VarId};
use crate::instance::Windows;

/// A labeled arc between two consecutive layers.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: usize,
}

/// Writes tightened windows back onto start variables.
pub(crate) fn apply_windows(store: &mut DomainStore, starts: &[VarId], w: &Windows) -> PropResult {
    for (i, &v) in starts.iter().enumerate() {
        store.set_min(v, w.est[i])?;
        store.set_max(v, w.lct[i] - w.processing[i])?;
    }
    Ok(())
}
