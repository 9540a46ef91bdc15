//! Structured diagnostics and the error-to-exit-code contract.
//!
//! Exit codes: 0 success, 1 validation failure, 2 infeasible or limit
//! exceeded, 3 internal invariant breach (a bug, not bad input).
//! Diagnostics are emitted to stderr as single-line JSON so scripts can
//! match on `code` without parsing prose.

use facetsel::Error;
use serde::Serialize;
use serde_json::json;

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_LIMIT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Serialize)]
pub struct Diagnostic {
    pub severity: &'static str,
    pub code: String,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

impl Diagnostic {
    pub fn error(code: &str, text: impl Into<String>) -> Self {
        Diagnostic {
            severity: "error",
            code: code.to_string(),
            text: text.into(),
            witness: None,
        }
    }

    pub fn warning(code: &str, text: impl Into<String>) -> Self {
        Diagnostic {
            severity: "warning",
            code: code.to_string(),
            text: text.into(),
            witness: None,
        }
    }

    pub fn with_witness(mut self, witness: serde_json::Value) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn emit(&self) {
        eprintln!(
            "{}",
            serde_json::to_string(self).expect("diagnostic serializes")
        );
    }
}

/// A command failure: diagnostic plus process exit code.
#[derive(Debug)]
pub struct Failure {
    pub diagnostic: Diagnostic,
    pub exit_code: i32,
}

impl Failure {
    pub fn new(diagnostic: Diagnostic, exit_code: i32) -> Self {
        Failure {
            diagnostic,
            exit_code,
        }
    }

    pub fn io(context: &str, err: std::io::Error) -> Self {
        Failure::new(
            Diagnostic::error("IO_ERROR", format!("{context}: {err}")),
            EXIT_VALIDATION,
        )
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = code_for(&err);
        let exit_code = exit_code_for(&err);
        let witness = witness_for(&err);
        let mut diagnostic = Diagnostic::error(code, err.to_string());
        if let Some(w) = witness {
            diagnostic = diagnostic.with_witness(w);
        }
        Failure::new(diagnostic, exit_code)
    }
}

pub fn code_for(err: &Error) -> &'static str {
    match err {
        Error::UnknownFacet(_) | Error::UnknownMacroFacet(_) => "UNKNOWN_ID",
        Error::DuplicateFacetId(_) | Error::DuplicateMacroFacetId(_) => "DUPLICATE_ID",
        Error::EmptyFacetId => "EMPTY_ID",
        Error::InvalidCost { .. } => "INVALID_COST",
        Error::EdgeEndpointMissing { .. } => "DANGLING_EDGE",
        Error::ClosureMissingMember { .. } => "CLOSURE_NOT_EXTENSIVE",
        Error::MemberInTwoMacroFacets { .. } => "MEMBERS_NOT_DISJOINT",
        Error::LaminarityViolation { .. } => "LAMINARITY_VIOLATION",
        Error::MemberNotInUniverse { .. } => "UNKNOWN_MEMBER",
        Error::DuplicateConstraintName(_) => "DUPLICATE_NAME",
        Error::GroupsOverlap { .. } => "GROUPS_OVERLAP",
        Error::AlreadyChosen(_) | Error::NotChosen(_) | Error::InfeasibleAdd { .. } => {
            "ORACLE_MISUSE"
        }
        Error::UniverseTooLarge { .. } => "LIMIT_EXCEEDED",
        Error::GroundMismatch { .. } => "GROUND_MISMATCH",
        Error::UnscriptedQuery { .. } => "UNSCRIPTED_QUERY",
        Error::InconsistentTrace { .. } => "INCONSISTENT_TRACE",
        Error::InvalidArgument(_) => "INVALID_INPUT",
        Error::InvalidConfig(_) => "INVALID_CONFIG",
        Error::SimulationTrial { .. } => "TRIAL_FAILED",
        Error::OptimalityViolated { .. } => "OPTIMALITY_VIOLATED",
        Error::ValueMismatch { .. } => "VALUE_MISMATCH",
        Error::GuaranteeViolated { .. } => "GUARANTEE_VIOLATED",
    }
}

pub fn exit_code_for(err: &Error) -> i32 {
    if err.is_internal() {
        return EXIT_INTERNAL;
    }
    match err {
        Error::UniverseTooLarge { .. } | Error::SimulationTrial { .. } => EXIT_LIMIT,
        _ => EXIT_VALIDATION,
    }
}

fn witness_for(err: &Error) -> Option<serde_json::Value> {
    match err {
        Error::UnknownFacet(id) | Error::UnknownMacroFacet(id) => Some(json!({ "id": id })),
        Error::EdgeEndpointMissing { src, dst, missing } => {
            Some(json!({ "edge": [src, dst], "missing": missing }))
        }
        Error::LaminarityViolation { a, b, shared } => {
            Some(json!({ "a": a, "b": b, "shared": shared }))
        }
        Error::MemberNotInUniverse { node, member } => {
            Some(json!({ "node": node, "member": member }))
        }
        Error::GroupsOverlap { a, b, shared } => Some(json!({ "a": a, "b": b, "shared": shared })),
        Error::UniverseTooLarge { size, limit } => Some(json!({ "size": size, "limit": limit })),
        Error::UnscriptedQuery { current, candidate } => {
            Some(json!({ "current": current, "candidate": candidate }))
        }
        Error::InvalidCost { id, cost } => Some(json!({ "id": id, "cost": cost })),
        _ => None,
    }
}
