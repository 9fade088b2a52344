pub mod error;
pub mod json;
pub mod linalg;
pub mod measurable;
pub mod normed;
pub mod operator_measure;
pub mod quantum;
pub mod vector_measure;
pub mod verify;

pub use error::{Error, Result};
