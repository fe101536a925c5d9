//! Linear thermoelasticity of micropolar porous media with relaxed heat flux.
//!
//! One-dimensional simulator and numerical checks of the reciprocal,
//! variational and energy identities of the theory.

pub mod config;
pub mod constitutive;
pub mod dynamics;
pub mod energetics;
pub mod error;
pub mod field;
pub mod loads;
pub mod material;
pub mod reciprocity;
pub mod report;
pub mod tensor;
pub mod variational;

pub use error::{Error, Result};
