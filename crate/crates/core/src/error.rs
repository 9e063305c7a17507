use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse rational {0:?}")]
    ParseRational(String),
    #[error("elements live over different central charges ({left} vs {right})")]
    ContextMismatch { left: String, right: String },
    #[error("Gram matrix at level {level} is singular")]
    SingularGram { level: usize },
    #[error("vector has a component at level {level}, beyond the form cutoff {cutoff}")]
    CutoffExceeded { level: usize, cutoff: usize },
    #[error("L_{m} is not in the Whittaker subalgebra of order {order}")]
    IndexOutsideSubalgebra { m: i32, order: i32 },
    #[error("no Whittaker subspace description for order {r_prime} (r = {r}, rank = {rank})")]
    NotClassified { r: i32, rank: i32, r_prime: i32 },
    #[error("invalid Whittaker type: {0}")]
    InvalidType(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
