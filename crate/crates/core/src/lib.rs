//! Classical and virtual knotoids as Gauss codes: move calculus, closures,
//! carrier genus of the abstract diagram, the writhe-normalised bracket and
//! bounded equivalence search.

pub mod code;
pub mod invariants;
pub mod moves;
pub mod planar;
pub mod poly;
pub mod search;
pub mod surface;

pub use code::{parse_code, parse_gko, CodeError, CyclicGaussCode, GaussEntry, OpenGaussCode, Pass, Sign, Violation};
pub use poly::LaurentPolynomial;
