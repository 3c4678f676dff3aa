//! Classification of dense complex matrices by the binormal / complex
//! symmetric property lattice, with Aluthge and Duggal transforms and
//! executable checks of the theorems that relate them.

// Index loops read closer to the matrix formulas than iterator chains.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod facts;
pub mod fixtures;
pub mod io;
pub mod kernel;
pub mod properties;
pub mod search;
pub mod symmetry;
pub mod theorems;
pub mod transforms;

pub use error::{OpError, Result};
pub use kernel::{ComplexMatrix, Tolerances, C64};
