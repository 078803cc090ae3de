//! Tautological relations on moduli spaces of stable curves.
//!
//! The pipeline enumerates stable graphs ([`graphs`]), builds the decorated
//! strata basis ([`strata`]), expands Pixton's relations ([`pixton`]),
//! row-reduces them exactly ([`linalg`]) and translates the κ-free relations
//! into universal equations for Gromov-Witten correlators ([`gwcalc`]).

pub mod error;
pub mod graphs;
pub mod gwcalc;
pub mod linalg;
pub mod pixton;
pub mod scalar;
pub mod strata;

pub use error::{Error, Result};
pub use scalar::{Fp, Scalar};

/// Exact rational numbers, the default coefficient field.
pub type Rational = num_rational::BigRational;

/// Strata vectors with exact coefficients.
pub type QStrataVector = strata::StrataVector<Rational>;
