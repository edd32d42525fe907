use thiserror::Error;

/// Errors raised by parsers, validators and solvers.
///
/// Vertex ids carried by variants are 1-based, matching the file formats.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: duplicate edge {{{u}, {v}}}")]
    DuplicateEdge { line: usize, u: usize, v: usize },

    #[error("line {line}: self-loop on vertex {v}")]
    SelfLoop { line: usize, v: usize },

    #[error("line {line}: negative profit {value}")]
    NegativeProfit { line: usize, value: String },

    #[error("vertex {id} out of range 1..={n}")]
    VertexOutOfRange { id: usize, n: usize },

    #[error("declared {what} = {declared}, found {found}")]
    CountMismatch {
        what: &'static str,
        declared: usize,
        found: usize,
    },

    #[error("total profit of agent {agent} overflows 64 bits")]
    ProfitOverflow { agent: usize },

    #[error("profile set exceeds the cap of {cap} profiles")]
    ProfileCapExceeded { cap: usize },

    #[error("enumeration of {required} assignments exceeds the cap of {cap}")]
    EnumerationCapExceeded { required: u128, cap: u128 },

    #[error("independence number of bag {bag} could not be certified within {cap} search nodes")]
    AlphaCapExceeded { bag: usize, cap: u64 },

    #[error("profile arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },

    #[error("profile set is empty")]
    EmptyProfileSet,

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("not convex bipartite: {0}")]
    NotConvex(String),

    #[error("invalid expression: {0}")]
    InvalidExpression(String),

    #[error("expression does not build the instance graph: {0}")]
    ExpressionMismatch(String),

    #[error("invalid tree decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("graph is not chordal")]
    NotChordal,

    #[error("invalid coloring: {0}")]
    InvalidColoring(String),

    #[error("invalid epsilon {0}: must be a rational strictly between 0 and 1")]
    InvalidEpsilon(String),
}

impl Error {
    /// True for errors caused by exhausting a configured resource cap.
    pub fn is_resource_cap(&self) -> bool {
        matches!(
            self,
            Error::ProfileCapExceeded { .. }
                | Error::EnumerationCapExceeded { .. }
                | Error::AlphaCapExceeded { .. }
        )
    }

    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
