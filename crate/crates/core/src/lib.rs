//! Shortened polar codes, affine automorphisms of their mother codes, and
//! automorphism-ensemble decoding.

pub mod ae;
pub mod autgroup;
pub mod construct;
pub mod decoders;
pub mod error;
pub mod f2linalg;
pub mod parallel;
pub mod sim;

pub use error::{Error, Result};
