//! Error types shared across the analysis pipeline.

use thiserror::Error;

/// Coarse failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Caller passed an invalid parameter (exit code 1).
    Usage,
    /// The input data violates a format or domain rule (exit code 2).
    Data,
    /// A numerical routine failed (exit code 3).
    Numerical,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Usage => 1,
            ErrorClass::Data => 2,
            ErrorClass::Numerical => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: duplicate citation record {citing} -> {cited}")]
    DuplicateRecord {
        line: u64,
        citing: String,
        cited: String,
    },

    #[error("journal '{0}' is not registered in the corpus")]
    MissingJournal(String),

    #[error("environment of '{focal}' has no members beyond the focal at min_count {min_count}")]
    DegenerateEnvironment { focal: String, min_count: u64 },

    #[error("dropping isolates would leave {remaining} journals; at least 3 are required")]
    DegenerateMatrix { remaining: usize },

    #[error("profile of journal '{0}' has zero variance; Pearson correlation is undefined")]
    UndefinedCorrelation(String),

    #[error("profile of journal '{0}' is all zeros; cosine is undefined")]
    UndefinedCosine(String),

    #[error("graph has {0} nodes; betweenness centrality requires at least 3")]
    DegenerateGraph(usize),

    #[error("journal '{0}' is missing from the factor assignment")]
    IncompleteAssignment(String),

    #[error("eigendecomposition failed to converge")]
    EigenFailure,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Classify the error for exit-code mapping. `Stage` delegates to its cause.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter(_) => ErrorClass::Usage,
            Error::EigenFailure => ErrorClass::Numerical,
            Error::Stage { source, .. } => source.class(),
            _ => ErrorClass::Data,
        }
    }

    /// Wrap an error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Attach a stage name to any error bubbling out of `result`.
pub fn stage<T>(name: &'static str, result: Result<T>) -> Result<T> {
    result.map_err(|e| e.in_stage(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_class_mapping() {
        assert_eq!(Error::InvalidParameter("x".into()).class().exit_code(), 1);
        assert_eq!(Error::MissingJournal("x".into()).class().exit_code(), 2);
        assert_eq!(
            Error::Parse {
                line: 3,
                message: "m".into()
            }
            .class()
            .exit_code(),
            2
        );
        assert_eq!(Error::EigenFailure.class().exit_code(), 3);
    }

    #[test]
    fn stage_wrapper_keeps_the_cause_class_and_names_the_stage() {
        let wrapped = Error::MissingJournal("x".into()).in_stage("environment");
        assert_eq!(wrapped.class(), ErrorClass::Data);
        let message = wrapped.to_string();
        assert!(message.contains("environment"));
        assert!(message.contains('x'));
    }
}
