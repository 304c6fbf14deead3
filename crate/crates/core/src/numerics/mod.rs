//! Numerical building blocks shared by the physics modules.

pub mod jet;
pub mod ode;
pub mod quad;
pub mod roots;
pub mod smooth;

pub use jet::{Jet, Scalar};
