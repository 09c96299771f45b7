//! Constructive factorization calculus on the circle: interval splittings of
//! diffeomorphisms and loops, central extension cocycles, word rewriting in
//! interval-supported groups, and affine weight combinatorics.

pub mod cocycles;
pub mod diffeo;
pub mod error;
pub mod geometry;
pub mod json;
mod linalg;
pub mod loops;
pub mod selftest;
pub mod weights;
pub mod words;

pub use error::{Error, Result};
pub use linalg::CMat;
