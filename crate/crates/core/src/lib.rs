//! Private crowdsourced counting.
//!
//! Owners privatize their answers locally with a two-round sampling mechanism
//! ([`mechanisms`]), upload them as non-attributable XOR-shared writes
//! ([`privwrite`]), and aggregators check every write is a unit vector before
//! folding it in ([`verify`]). [`harness`] runs whole epochs end to end.

pub mod error;
pub mod field;
pub mod harness;
pub mod mechanisms;
pub mod privwrite;
pub mod verify;

pub use error::{Error, Result};
pub use field::{BitString, Fe, Fp};
