//! Exact extension, domination and amalgam checks for charges on finite
//! fragments of definable-set algebras.

pub mod algebra;
pub mod charge;
pub mod domination;
pub mod error;
pub mod fragments;
pub mod lp;
pub mod rational;
pub mod suites;

pub use algebra::{AtomSet, AtomSpace, Automorphism, Fragment, Pair, Projection, Subalgebra, FULL};
pub use charge::Charge;
pub use error::{Error, Result};
pub use rational::Q;
