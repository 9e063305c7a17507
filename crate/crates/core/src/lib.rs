//! Exact computations in Virasoro Verma modules and universal Whittaker
//! modules: PBW normal ordering, Shapovalov Gram matrices, Gaiotto and BMT
//! states as dual forms and as truncated Verma vectors, and explicit
//! Whittaker-vector families.

pub mod cli;
pub mod engine;
pub mod error;
pub mod exact;
pub mod forms;
pub mod linalg;
pub mod par;
pub mod shapovalov;
pub mod universal;
pub mod verma;
pub mod virasoro;

pub use error::{Error, Result};
pub use exact::Rational;
