//! Constructive cancellation of finitely presented modules over
//! stable-range-one endomorphism rings.

pub mod cancel;
pub mod cli;
pub mod delta;
pub mod elim;
pub mod error;
pub mod finmod;
pub mod heinzer;
pub mod linalg;
pub mod rings;
pub mod suites;

pub use error::{Error, Result};
