//! Spectra of finite commutative rings and monoids relative to a cone system.

pub mod algebra;
pub mod context;
pub mod corpus;
pub mod error;
pub mod glue;
pub mod hypercover;
pub mod io;
pub mod nerve;
pub mod reduction;
pub mod spectrum;

pub use algebra::{AlgebraKind, FiniteAlgebra, Hom};
pub use context::{Branch, CellDatum, LocalForm, Localization, SpectralContext};
pub use error::{Error, Result};
