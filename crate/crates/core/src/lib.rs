pub mod bits;
pub mod compress;
pub mod complexity;
pub mod error;
pub mod nonlocal;
pub mod poset;
pub mod process;
pub mod thermo;

pub use bits::{BitOp, BitString, Seed, SymbolString};
pub use error::{Error, Result};
