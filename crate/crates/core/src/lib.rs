pub mod airy;
pub mod linear;
pub mod scaling;
pub mod secular;
pub mod shooting;
pub mod stokes;
pub mod error;
pub mod numerics;
pub mod report;

pub use error::{Error, Result};
