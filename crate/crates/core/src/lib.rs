pub mod error;
pub mod exec;
pub mod hardness;
pub mod maxplus;
pub mod patterns;
pub mod reduction;
pub mod regularize;
pub mod rng;
pub mod solvers;
pub mod sysid;
pub mod text;

pub use error::{Error, Result};
