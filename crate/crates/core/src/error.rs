use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(u32),
    #[error("modulus {0} exceeds the 8-bit cell range (m <= 256)")]
    ModulusTooLarge(u32),
    #[error("element {g} is not in 1..{m}")]
    ElementOutOfRange { g: u32, m: u32 },
    #[error("rule selection supports at most two distinct prime factors, {m} has {primes}")]
    TooManyPrimes { m: u32, primes: usize },
    #[error("neighborhood must be odd and at least 3, got {0}")]
    InvalidNeighborhood(usize),
    #[error("invalid rule: {0}")]
    InvalidRule(String),
    #[error("modulus mismatch: rule over Z_{rule}, configuration over Z_{cfg}")]
    ModulusMismatch { rule: u32, cfg: u32 },
    #[error("lattice of {len} cells is shorter than the neighborhood {neighborhood}")]
    LatticeTooShort { len: usize, neighborhood: usize },
    #[error("cell value {value} out of range for Z_{m}")]
    CellOutOfRange { value: u32, m: u32 },
    #[error("no repeated state within {0} iterations")]
    BudgetExhausted(u64),
    #[error("input {0} outside [-1, 1]")]
    InputOutOfRange(f64),
    #[error("normal equations are rank deficient")]
    RankDeficient,
    #[error("ground truth has zero variance")]
    ZeroVariance,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("unknown dataset '{0}'")]
    UnknownDataset(String),
    #[error("NARMA recurrence diverged for {0} consecutive sub-seeds")]
    NarmaDiverged(u32),
    #[error("sequence of {len} samples does not exceed the washout of {washout}")]
    SequenceTooShort { len: usize, washout: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
