//! Disjunctive (No-Overlap) scheduling propagation built around job
//! sequencing decision diagrams.
//!
//! The crate offers a small trailed propagation kernel ([`engine`]), the
//! classic No-Overlap rules ([`classic`]), bound-consistent filtering on an
//! exact diagram and its width-bounded relaxation ([`mdd`]), a brute-force
//! [`oracle`], and a branch-and-bound search whose trees can be recorded
//! and replayed under other models ([`search`]).

pub mod classic;
pub mod engine;
pub mod error;
pub mod instance;
pub mod jobset;
pub mod mdd;
pub mod model;
pub mod objective;
pub mod oracle;
pub mod report;
pub mod search;

pub use engine::{DomainStore, Outcome, Time, VarId};
pub use error::{Error, Result};
pub use instance::{generate_instance, Instance, Job, Schedule, Windows};
pub use model::{Model, ModelOptions, ModelVariant};
