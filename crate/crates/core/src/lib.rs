pub mod cli;
pub mod error;
pub mod estimate;
pub mod gap;
pub mod io;
pub mod report;
pub mod row;
pub mod synth;
pub mod verify;

pub use error::{Error, Result};
