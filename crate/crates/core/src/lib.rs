pub mod cli;
pub mod construction;
pub mod error;
pub mod freealg;
pub mod growth;
pub mod linear;
pub mod quotient;
pub mod report;
pub mod schedule;

pub use error::{Error, Result};
