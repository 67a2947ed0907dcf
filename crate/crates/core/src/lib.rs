pub mod data_io;
pub mod error;
pub mod experiment;
pub mod landscape;
pub mod model;
pub mod persistence;
pub mod reconstruction;
pub mod selection;
pub mod signal;
pub mod synthetic;

pub use error::{Error, Result};
