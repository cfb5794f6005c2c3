//! Exact linear algebra on homogeneous components `H(n)` over a prime field.
//!
//! Coordinates of `H(n)` are indexed by the binary reading of degree-`n`
//! words (`x = 0`, `y = 1`, leftmost letter most significant), so index order
//! and lex order agree.

mod echelon;
mod field;
mod row;
mod subspace;

use std::sync::atomic::{AtomicUsize, Ordering};

pub use echelon::{Echelon, PivotOrder};
pub use field::Field;
pub use row::Row;
pub use subspace::{DenseVector, Repr, Subspace, SubspaceJson};

use crate::error::{Error, Result};

/// Default ceiling on the ambient degree the dense engine will materialise.
pub const DEFAULT_DENSE_DEGREE_LIMIT: usize = 16;

/// Largest explicit monomial set produced by monomial-path products.
pub const MONOMIAL_SET_LIMIT: usize = 1 << 20;

static DENSE_DEGREE_LIMIT: AtomicUsize = AtomicUsize::new(DEFAULT_DENSE_DEGREE_LIMIT);

pub fn dense_degree_limit() -> usize {
    DENSE_DEGREE_LIMIT.load(Ordering::Relaxed)
}

/// Process-wide; intended to be set once at start-up.
pub fn set_dense_degree_limit(degree: usize) {
    DENSE_DEGREE_LIMIT.store(degree.min(30), Ordering::Relaxed);
}

pub(crate) fn check_dense(degree: usize) -> Result<()> {
    let limit = dense_degree_limit();
    if degree > limit {
        Err(Error::Budget(format!("dense engine asked for degree {degree}, limit is {limit}")))
    } else {
        Ok(())
    }
}

/// Exponent of two as `usize`, for ambient dimensions known to be small.
pub(crate) fn ambient(degree: usize) -> usize {
    1usize << degree
}
