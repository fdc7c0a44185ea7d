//! Radiation reaction of electrons in strong laser fields: classical
//! Lorentz-Abraham-Dirac and Landau-Lifshitz dynamics, the quantum
//! correction factor q(χ), and stochastic ensembles of Nelson-type paths.

pub mod bessel;
pub mod classical;
pub mod constants;
pub mod error;
pub mod fields;
pub mod minkowski;
pub mod ode;
pub mod quad;
pub mod quantum;
pub mod stochastic;

pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use fields::{FieldModel, FieldSpec};
pub use minkowski::{dot, FieldGradient, FieldTensor, FourVector};
