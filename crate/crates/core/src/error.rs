use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("weight system has a zero weight")]
    ZeroWeight,

    #[error("weight system is not consistent: {0}")]
    BadWeights(String),

    #[error("unsupported prime {0}; expected one of 3, 5, 7, 13")]
    UnsupportedPrime(u32),

    #[error("exponent matrix is not invertible: {0}")]
    NotInvertible(String),

    #[error("cannot parse {what}: {msg}")]
    Parse { what: &'static str, msg: String },

    #[error("genus formula gave non-integral or negative value {0}")]
    NonIntegerGenus(String),

    #[error("inconsistent data: {0}")]
    Inconsistent(String),

    #[error("fixed-locus analysis is ambiguous: {0}")]
    Ambiguous(String),

    #[error("no classification row matches the fixed locus {0}")]
    NoConfiguration(String),

    #[error("{0} is not a valid (W,G) pair: {1}")]
    InvalidPair(String, String),

    #[error("prime {p} requires p = {need} mod 4 for this lattice")]
    CongruenceViolation { p: i64, need: i64 },

    #[error("no classification row for p={p}, (r,a)=({r},{a})")]
    NoSuchRow { p: u32, r: u32, a: u32 },

    #[error("p={p}, (r,a)=({r},{a}) is not mirror-hyperbolic")]
    NotMirrorHyperbolic { p: u32, r: u32, a: u32 },

    #[error("lattice: {0}")]
    Lattice(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(what: &'static str, msg: impl Into<String>) -> Self {
        Error::Parse {
            what,
            msg: msg.into(),
        }
    }
}
