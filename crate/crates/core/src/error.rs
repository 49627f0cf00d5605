use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("uniformity r must be at least 2, got {0}")]
    InvalidUniformity(usize),

    #[error("edge {edge} has {found} vertices, expected {expected}")]
    WrongArity {
        edge: usize,
        expected: usize,
        found: usize,
    },

    #[error("edge {edge} repeats vertex {vertex}")]
    RepeatedVertex { edge: usize, vertex: u32 },

    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: u64, n: usize },

    #[error("duplicate edge {edge:?}")]
    DuplicateEdge { edge: Vec<u32> },

    #[error("too many {what} for 32-bit ids: {count}")]
    IdOverflow { what: &'static str, count: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("binomial coefficient C({n}, {r}) overflows 128-bit rank arithmetic")]
    Capacity { n: u64, r: usize },

    #[error("rank {rank} out of range for C({n}, {r}) subsets")]
    RankOutOfRange { rank: u128, n: u64, r: usize },

    #[error("not a sorted subset of [0, {n}): {subset:?}")]
    InvalidSubset { subset: Vec<u32>, n: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("could not bracket a minimum: {0}")]
    Bracket(String),

    #[error("enumeration needs {required} subsets, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
