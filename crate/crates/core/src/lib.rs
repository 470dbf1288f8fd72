pub mod basis;
pub mod data;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod msm;
pub mod simulate;
pub mod spectral;

pub use error::{Error, Result};
