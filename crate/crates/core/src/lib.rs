pub mod cli;
pub mod divisibility;
pub mod error;
pub mod exact;
pub mod interval;
pub mod recurrence;
pub mod roots;
pub mod vandermonde;

pub use error::{Error, Result};
