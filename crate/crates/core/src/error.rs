use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("constraint on edge ({0}, {1}) is not a bijection on the color set")]
    NotBijection(usize, usize),
    #[error("variable index {index} out of range (instance has {num_vars} variables)")]
    DanglingVariable { index: usize, num_vars: usize },
    #[error("duplicate constraint edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("self-loop constraint on variable {0}")]
    SelfLoop(usize),
    #[error("color count {0} exceeds the cap of {max}", max = crate::ulc::MAX_COLORS)]
    TooManyColors(usize),
    #[error("labelling does not assign variable {0}")]
    MissingLabel(usize),
    #[error("label set for variable {var} is invalid: {reason}")]
    InvalidLabelSet { var: usize, reason: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("instance has no planted labelling")]
    PlantedMissing,
    #[error("independent set violated by edge ({0}, {1})")]
    NotIndependent(usize, usize),
    #[error("not a matching: {0}")]
    NotAMatching(String),
    #[error("vertex set is not a vertex cover: edge ({0}, {1}) uncovered")]
    NotACover(usize, usize),
    #[error("no Hamiltonian cycle: {0}")]
    NoHamiltonianCycle(String),
    #[error("search budget of {budget} expansions exhausted: {context}")]
    BudgetExhausted { budget: u64, context: String },
    #[error("size cap exceeded: {0}")]
    CapExceeded(String),
    #[error("singleton class of empty-set vertices cannot be saturated within its class ({0}); need >= 2 variables per class")]
    SingletonClass(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },
    #[error("unknown lemma id `{0}`")]
    UnknownLemma(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
