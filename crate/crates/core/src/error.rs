use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate action label `{0}`")]
    DuplicateAction(String),
    #[error("name `{0}` is already used by the model")]
    NameCollision(String),
    #[error("invalid identifier `{0}`")]
    InvalidName(String),
    #[error("contradictory literals in {0}")]
    Contradiction(String),
    #[error("ill-formed model: {0}")]
    InvalidModel(String),
    #[error("action `{action}` is inapplicable at step {step}")]
    Inapplicable { step: usize, action: String },
    #[error("plan does not reach the goal")]
    NotAPlan,
    #[error("resource limit exceeded: {what} (limit {limit})")]
    ResourceLimit { what: &'static str, limit: usize },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("hitting set requires a nonempty family of nonempty sets")]
    EmptyFamily,
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error("no plan satisfies the contrast case, even without the principle")]
    ContrastCaseInfeasible,
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownVariable(_) => "unknown_variable",
            Error::UnknownAction(_) => "unknown_action",
            Error::DuplicateVariable(_) => "duplicate_variable",
            Error::DuplicateAction(_) => "duplicate_action",
            Error::NameCollision(_) => "name_collision",
            Error::InvalidName(_) => "invalid_name",
            Error::Contradiction(_) => "contradiction",
            Error::InvalidModel(_) => "invalid_model",
            Error::Inapplicable { .. } => "inapplicable",
            Error::NotAPlan => "not_a_plan",
            Error::ResourceLimit { .. } => "resource_limit",
            Error::Parse { .. } => "parse_error",
            Error::Syntax(_) => "syntax_error",
            Error::Io(_) => "io_error",
            Error::EmptyFamily => "empty_family",
            Error::InvalidConstraint(_) => "invalid_constraint",
            Error::ContrastCaseInfeasible => "contrast_case_infeasible",
            Error::InvariantViolation(_) => "invariant_violation",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
