pub mod balanced;
pub mod cli;
pub mod error;
pub mod fractal;
pub mod render;
pub mod spectral;
pub mod word;

pub use error::{Error, Result};
