pub mod angles;
pub mod c_operator;
pub mod csymmetry;
pub mod error;
pub mod extension;
pub mod linalg;
pub mod models;
pub mod space;
pub mod transition;

pub use error::{KreinError, Result};
