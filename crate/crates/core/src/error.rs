use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("arity must be at least 2, got {0}")]
    InvalidArity(usize),

    #[error("row {row}: expected {expected} fields, found {found}")]
    Format {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}: tuple already carries value {existing}, got conflicting value {conflicting}")]
    Functionality {
        row: usize,
        existing: f64,
        conflicting: f64,
    },

    #[error("{values} values supplied for {rows} rows")]
    ValueCount { rows: usize, values: usize },

    #[error("tuple is not a member of the relation")]
    NotInRelation,

    #[error("mode {mode} is out of range for arity {arity}")]
    ModeOutOfRange { mode: usize, arity: usize },

    #[error("density is undefined for a cluster of zero volume")]
    ZeroVolume,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("pipeline integrity violated in {stage}: {detail}")]
    Integrity { stage: &'static str, detail: String },
}
