use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse group spec `{0}`")]
    GroupSpec(String),

    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    #[error("malformed multiplication table {path}: {reason}")]
    MalformedTable { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("element id {id} out of range for group of order {order}")]
    InvalidElement { id: u32, order: usize },

    #[error("rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },

    #[error("letter {letter} exceeds rank {rank}")]
    LetterOutOfRange { letter: i32, rank: usize },

    #[error("invalid move: {0}")]
    InvalidMove(String),

    #[error("cannot parse {what}: `{text}`")]
    Parse { what: &'static str, text: String },

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("group is not simple and nonabelian")]
    NotSimple,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("target not in the generated diagonal subgroup (subgroup order {subgroup_order})")]
    Unreachable { subgroup_order: u64 },

    #[error("no generating pair inside tuple {0:?}")]
    NoGeneratingPair(Vec<u32>),

    #[error("no spread witness for {0:?}")]
    NoSpreadWitness(Vec<u32>),

    #[error("need {needed} pairwise generating elements, but at most {largest} exist")]
    CliqueTooSmall { needed: usize, largest: usize },

    #[error("class table cache: {0}")]
    Cache(String),

    #[error("matrix search exhausted after {steps} steps")]
    Exhausted { steps: u64 },

    #[error("matrix fails verification: {0}")]
    Verification(String),

    #[error("no admissible auxiliary element z")]
    NoAdmissibleZ,

    #[error("forbidden 4x4 configuration blocks every row rearrangement")]
    ForbiddenConfiguration,

    #[error("internal consistency failure: {0}")]
    Internal(String),
}
