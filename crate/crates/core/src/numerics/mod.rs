//! Numerical building blocks shared by the spectral modules.

pub mod assign;
pub mod fit;
pub mod interp;
pub mod ode;
pub mod quad;
pub mod roots;
