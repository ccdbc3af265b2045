pub mod convergence;
pub mod error;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod material;
pub mod monitors;
pub mod stepper;

pub use error::{Error, Result};
