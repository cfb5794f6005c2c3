//! The free algebra on two letters `x`, `y`: words, homogeneous polynomials
//! and their text form.

mod monomial;
mod poly;

pub use monomial::Monomial;
pub use poly::{format_poly, parse_poly, GeneralPoly, HomPoly, TERM_LIMIT};
