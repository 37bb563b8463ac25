//! Anick-style free resolutions of Lawvere theories presented by reduced
//! complete term rewriting systems, computed with algebraic discrete Morse
//! theory, together with their homology and Morse inequalities.

pub mod chains;
pub mod coeff;
pub mod error;
pub mod homology;
pub mod monoid;
pub mod morse;
pub mod parse;
pub mod relations;
pub mod report;
pub mod rewrite;
pub mod sample;
pub mod term;
pub mod unify;

pub use error::{Error, Result};
