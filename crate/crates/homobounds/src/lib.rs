pub mod error;
pub mod gclosure;
pub mod hashin;
pub mod homog1d;
pub mod laminates;
pub mod pairbounds;
pub mod relaxation;
pub mod sweep;
pub mod symtensor;

pub use error::{Error, Result};
pub use gclosure::PhaseA;
pub use pairbounds::PhaseB;
pub use symtensor::{Mat, SymTensor};
