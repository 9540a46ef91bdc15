//! Compile a user's dependency-laden fact graph into atomic macro-facets and
//! select a near-optimal subset under hierarchical quota constraints.
//!
//! The pipeline has three stages:
//!
//! 1. [`chronicle`]: raw facets with implication edges are condensed (one
//!    macro-facet per strongly connected component), so every selectable unit
//!    already carries its full logical closure.
//! 2. [`matroid`]: nested or disjoint quota sets over macro-facets form a
//!    laminar matroid; a counter tree answers "can this be added?" in time
//!    proportional to the tree height.
//! 3. [`selection`]: greedy maximization of a monotone submodular utility
//!    under the matroid oracle, with a lazy variant, an exhaustive baseline,
//!    and full decision traces.
//!
//! [`utility`] supplies the set-function contract plus weighted-coverage,
//! modular, lifted, and scripted implementations, and [`simulation`]
//! regenerates randomized approximation-ratio experiments.

pub mod chronicle;
pub mod error;
pub mod formats;
pub mod matroid;
pub mod selection;
pub mod simulation;
pub mod utility;

mod bits;

pub use chronicle::{Chronicle, Facet, MacroFacet, MacroFacetSet, ValidationWarning};
pub use error::{Error, Result};
pub use formats::{ConstraintsFile, UtilitySpec};
pub use matroid::{AxiomVerdict, Feasibility, OracleState, QuotaConstraint, QuotaNode, QuotaTree};
pub use selection::{
    approximation_ratio, brute_force_optimal, greedy_select, lazy_greedy_select, SelectionResult,
    SelectionTrace, SolverStats, StopReason, TraceIteration,
};
pub use simulation::{
    generate_instance, histogram, run_experiment, ExperimentConfig, ExperimentReport, Histogram,
    TrialRecord,
};
pub use utility::{
    lift, marginal_gain_ids, verify_monotone_submodular, verify_monotone_submodular_sampled,
    LiftedUtility, ModularUtility, ScriptedUtility, TraceEntry, Utility, UtilityVerdict,
    WeightedCoverage,
};
