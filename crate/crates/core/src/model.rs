//! Assembly of the four model variants compared in the experiments.

use std::fmt;
use std::str::FromStr;

use crate::classic::ClassicNoOverlap;
use crate::engine::{fixpoint, DomainStore, Outcome, Propagator, VarId};
use crate::error::Error;
use crate::instance::{Instance, Schedule, Windows};
use crate::mdd::{ExactBcPropagator, RelaxedMddPropagator, RelaxedMode};
use crate::objective::EarlinessTardiness;

/// Which No-Overlap filtering is posted on top of the classic suite.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Hash)]
pub enum ModelVariant {
    Baseline,
    RelaxedBc { width: usize },
    PrecedenceExtraction { width: usize },
    ExactBc,
}

impl ModelVariant {
    /// Short name used on the command line and in CSV files.
    pub fn name(&self) -> &'static str {
        match self {
            ModelVariant::Baseline => "baseline",
            ModelVariant::RelaxedBc { .. } => "relaxed-bc",
            ModelVariant::PrecedenceExtraction { .. } => "pe",
            ModelVariant::ExactBc => "exact-bc",
        }
    }

    pub fn width(&self) -> Option<usize> {
        match *self {
            ModelVariant::RelaxedBc { width } | ModelVariant::PrecedenceExtraction { width } => Some(width),
            _ => None,
        }
    }

    /// Builds a variant from its name; `width` is required by the relaxed
    /// variants and ignored otherwise.
    pub fn from_name(name: &str, width: Option<usize>) -> Result<Self, Error> {
        let need = |w: Option<usize>| match w {
            Some(w) if w >= 1 => Ok(w),
            Some(_) => Err(Error::InvalidArgument("width must be at least 1".into())),
            None => Err(Error::InvalidArgument(format!("variant `{name}` needs a width"))),
        };
        match name {
            "baseline" => Ok(ModelVariant::Baseline),
            "relaxed-bc" => Ok(ModelVariant::RelaxedBc { width: need(width)? }),
            "pe" => Ok(ModelVariant::PrecedenceExtraction { width: need(width)? }),
            "exact-bc" => Ok(ModelVariant::ExactBc),
            other => Err(Error::InvalidArgument(format!("unknown variant `{other}`"))),
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.width() {
            Some(w) => write!(f, "{}:{w}", self.name()),
            None => write!(f, "{}", self.name()),
        }
    }
}

/// Parses `name` or `name:width`.
impl FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.split_once(':') {
            Some((name, w)) => {
                let width = w
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad width in `{s}`")))?;
                ModelVariant::from_name(name, Some(width))
            }
            None => ModelVariant::from_name(s, None),
        }
    }
}

#[derive(Debug, Copy, Clone, PartialEq, Eq)]
#[derive(Default)]
pub struct ModelOptions {
    /// Node splits per relaxed-diagram propagation; `None` means two per job.
    pub refine_budget: Option<usize>,
}


/// Start variables, the objective variable and the posted propagators.
pub struct Model {
    pub instance: Instance,
    pub variant: ModelVariant,
    pub store: DomainStore,
    pub starts: Vec<VarId>,
    pub objective: VarId,
    pub propagators: Vec<Box<dyn Propagator>>,
}

impl Model {
    pub fn new(instance: &Instance, variant: ModelVariant) -> Self {
        Self::with_options(instance, variant, ModelOptions::default())
    }

    /// Posts `s_i ∈ [r_i, dbar_i - p_i]`, the objective and the propagators
    /// of `variant`. Every variant includes the classic suite.
    pub fn with_options(instance: &Instance, variant: ModelVariant, options: ModelOptions) -> Self {
        let mut store = DomainStore::new();
        let starts: Vec<VarId> = instance
            .jobs()
            .iter()
            .map(|j| store.new_var(j.release, j.latest_start()))
            .collect();
        let max_cost: i64 = instance
            .jobs()
            .iter()
            .map(|j| (j.due - j.release - j.processing).max(j.deadline - j.due))
            .sum();
        let objective = store.new_var(0, max_cost);

        let mut propagators: Vec<Box<dyn Propagator>> = vec![
            Box::new(EarlinessTardiness::new(instance, starts.clone(), objective)),
            Box::new(ClassicNoOverlap::new(instance.clone(), starts.clone())),
        ];
        let budget = options
            .refine_budget
            .unwrap_or_else(|| RelaxedMddPropagator::default_budget(instance.len()));
        match variant {
            ModelVariant::Baseline => {}
            ModelVariant::RelaxedBc { width } => propagators.push(Box::new(RelaxedMddPropagator::new(
                instance.clone(),
                starts.clone(),
                RelaxedMode::BoundFiltering,
                width,
                budget,
            ))),
            ModelVariant::PrecedenceExtraction { width } => {
                propagators.push(Box::new(RelaxedMddPropagator::new(
                    instance.clone(),
                    starts.clone(),
                    RelaxedMode::Precedences,
                    width,
                    budget,
                )))
            }
            ModelVariant::ExactBc => {
                propagators.push(Box::new(ExactBcPropagator::new(instance.clone(), starts.clone())))
            }
        }
        Self {
            instance: instance.clone(),
            variant,
            store,
            starts,
            objective,
            propagators,
        }
    }

    pub fn propagate(&mut self) -> Outcome {
        fixpoint(&mut self.store, &mut self.propagators)
    }

    pub fn windows(&self) -> Windows {
        Windows::from_store(&self.instance, &self.store, &self.starts)
    }

    /// `(lo, hi)` of every start variable.
    pub fn start_bounds(&self) -> Vec<(i64, i64)> {
        self.starts.iter().map(|&v| (self.store.lo(v), self.store.hi(v))).collect()
    }

    pub fn all_fixed(&self) -> bool {
        self.starts.iter().all(|&v| self.store.is_fixed(v))
    }

    /// The schedule given by the lower bounds of the start variables.
    pub fn schedule(&self) -> Schedule {
        Schedule {
            start: self.starts.iter().map(|&v| self.store.lo(v)).collect(),
        }
    }
}
