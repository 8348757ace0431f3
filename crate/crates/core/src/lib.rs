pub mod affine;
pub mod definiteness;
pub mod error;
pub mod gauss;
pub mod grid;
pub mod io;
pub mod kernel;
mod linalg;
pub mod negdef;
pub mod quotient;
pub mod tolerance;
