use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("negative truncation bound ({0}, {1})")]
    NegativeBound(i64, i64),
    #[error("operators live on different spaces")]
    SpaceMismatch,
    #[error("window `{0}` selects no basis states")]
    EmptyWindow(String),
    #[error("singular diagonal entry at |{0},{1}>")]
    Singular(usize, usize),
    #[error("DOMAIN: negative radicand {value:e} at |{n1},{n2}>")]
    Domain { n1: usize, n2: usize, value: f64 },
    #[error("recursion hits a zero coefficient at |{0},{1}>")]
    ZeroCoefficient(usize, usize),
    #[error("chain too short for the product recursion (length {0})")]
    ShortChain(usize),
    #[error("no admissible magnetic numbers for jtilde = {0}")]
    EmptyAdmissible(f64),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

impl Error {
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain { .. } | Error::ZeroCoefficient(..))
    }
}
