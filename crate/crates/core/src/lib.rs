pub mod cli;
pub mod difference;
pub mod error;
pub mod hankel;
pub mod jet;
pub mod ladder;
pub mod moments;
pub mod painleve;
pub mod precision;
pub mod quadrature;
pub mod residual;
pub mod scaling;

pub use error::{Error, Result};
pub use precision::PrecisionConfig;
