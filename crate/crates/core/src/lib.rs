pub mod basis;
pub mod error;
pub mod forms;
pub mod geometry;
pub mod models;
pub mod numerics;
pub mod operators;
pub mod report;
pub mod reproduce;
pub mod spectral;

pub use error::{Error, ErrorClass, Result};
pub use forms::{Component, FormCoefficients};
pub use models::{parse_model, ModelSpec};
pub use numerics::MultiIndex;
