pub mod bench;
pub mod coverage;
pub mod error;
pub mod io;
pub mod mobile;
pub mod model;
pub mod pipeline;
pub mod static_solver;
pub mod tiebreak;
pub mod welfare;

pub use error::{Error, Result};
