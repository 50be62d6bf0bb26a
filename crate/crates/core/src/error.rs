use thiserror::Error;

use crate::circuit::Diagnostic;
use crate::state::PureState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two states or an operator and a state live on different spaces.
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    /// A tensor product was requested between spaces sharing a factor.
    #[error("overlapping factors: {0}")]
    OverlappingFactors(String),

    /// An operator or selection refers to a factor the space does not carry.
    #[error("factor `{0}` is absent from the space")]
    FactorAbsent(String),

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("unknown basis label `{0}`")]
    UnknownLabel(String),

    #[error("invalid circuit:\n{}", format_diagnostics(.0))]
    InvalidCircuit(Vec<Diagnostic>),

    #[error("boundary {boundary} out of range (circuit has {stages} stages)")]
    BoundaryOutOfRange { boundary: usize, stages: usize },

    #[error("unknown detector `{0}`")]
    UnknownDetector(String),

    #[error("unknown marked point `{0}`")]
    UnknownPoint(String),

    #[error("incomplete post-selection for detector `{detector}`: the {factor} outcome must be given (e.g. `{detector}:{example}`)")]
    IncompletePostSelection {
        detector: String,
        factor: &'static str,
        example: &'static str,
    },

    /// The post-selected state is orthogonal to the pre-selected one.
    #[error("impossible post-selection: <Phi|Psi> = 0")]
    ImpossiblePostSelection {
        forward: Box<PureState>,
        backward: Box<PureState>,
    },

    #[error("duplicate coupling at point `{0}`")]
    DuplicateCoupling(String),

    #[error("point `{0}` is not coupled to a pointer")]
    UncoupledPoint(String),

    #[error("pointer state has zero norm")]
    ZeroNorm,

    #[error("invalid pointer configuration: {0}")]
    InvalidPointer(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("scenario `{scenario}` does not allow post-selection `{post}`")]
    UnknownPostSelection { scenario: String, post: String },

    #[error("unknown operator `{0}`")]
    UnknownOperator(String),

    #[error("invalid ensemble configuration: {0}")]
    InvalidEnsemble(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("  - {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}
