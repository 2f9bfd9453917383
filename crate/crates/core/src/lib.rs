//! Exhaustive and constructive tools around the generalized Hales-Jewett
//! theorem: index models, spaces and lines, monochromatic search, the
//! reductions used to prove the partition theorem, and the bound recursions.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod model;
pub mod polyramsey;
pub mod reductions;
pub mod search;
pub mod space;

pub use error::{Error, Result};
