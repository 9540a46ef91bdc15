//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong while building or querying the domain types.
///
/// Variants marked "internal invariant" indicate bugs rather than bad input;
/// the CLI maps them to a dedicated exit code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown facet id `{0}`")]
    UnknownFacet(String),

    #[error("unknown macro-facet id `{0}`")]
    UnknownMacroFacet(String),

    #[error("duplicate facet id `{0}`")]
    DuplicateFacetId(String),

    #[error("facet id must be non-empty")]
    EmptyFacetId,

    #[error("facet `{id}` has invalid cost {cost} (must be finite and >= 0)")]
    InvalidCost { id: String, cost: f64 },

    #[error("edge ({src} -> {dst}) references unknown facet `{missing}`")]
    EdgeEndpointMissing {
        src: String,
        dst: String,
        missing: String,
    },

    #[error("duplicate macro-facet id `{0}` in set")]
    DuplicateMacroFacetId(String),

    #[error("macro-facet `{id}` closure does not contain its members (missing `{missing}`)")]
    ClosureMissingMember { id: String, missing: String },

    #[error("facet `{member}` belongs to both macro-facets `{a}` and `{b}`")]
    MemberInTwoMacroFacets { member: String, a: String, b: String },

    #[error("constraint sets `{a}` and `{b}` overlap without nesting (shared member `{shared}`)")]
    LaminarityViolation {
        a: String,
        b: String,
        shared: String,
    },

    #[error("constraint `{node}` references `{member}` which is not in the universe")]
    MemberNotInUniverse { node: String, member: String },

    #[error("duplicate constraint name `{0}` for distinct member sets")]
    DuplicateConstraintName(String),

    #[error("partition groups overlap on `{shared}` (groups `{a}` and `{b}`)")]
    GroupsOverlap {
        a: String,
        b: String,
        shared: String,
    },

    #[error("macro-facet `{0}` is already chosen")]
    AlreadyChosen(String),

    #[error("macro-facet `{0}` is not chosen")]
    NotChosen(String),

    #[error("adding `{element}` violates quota at node `{node}`")]
    InfeasibleAdd { element: String, node: String },

    #[error("universe size {size} exceeds the exhaustive-check limit {limit}")]
    UniverseTooLarge { size: usize, limit: usize },

    #[error("utility ground does not match: {reason}")]
    GroundMismatch { reason: String },

    #[error("scripted utility has no entry for candidate `{candidate}` given the current set {current:?}")]
    UnscriptedQuery {
        current: Vec<String>,
        candidate: String,
    },

    #[error("scripted trace is inconsistent: `{reason}`")]
    InconsistentTrace { reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("trial {trial} failed: {message}")]
    SimulationTrial { trial: usize, message: String },

    // internal invariant: greedy must never beat the exhaustive optimum
    #[error("greedy value {greedy} exceeds optimal value {optimal} beyond tolerance")]
    OptimalityViolated { greedy: f64, optimal: f64 },

    // internal invariant: the 1/2 floor is a theorem, not a statistic
    #[error("trial {trial} produced ratio {ratio}, below the guarantee floor")]
    GuaranteeViolated { trial: usize, ratio: f64 },

    // internal invariant: accumulated and re-evaluated values must agree
    #[error("selection value mismatch: accumulated {accumulated}, re-evaluated {reevaluated}")]
    ValueMismatch { accumulated: f64, reevaluated: f64 },
}

impl Error {
    /// True for errors that indicate a bug in this crate rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::OptimalityViolated { .. }
                | Error::ValueMismatch { .. }
                | Error::GuaranteeViolated { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
