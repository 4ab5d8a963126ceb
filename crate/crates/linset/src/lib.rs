//! Exact-arithmetic library for F_q-linear sets in PG(r-1, q^h): point
//! weights, algebraic and geometric fields of linearity, the projection
//! model with its line types, explicit constructions (sublines, clubs,
//! block constructions), direction counting for maps on finite fields,
//! and exhaustive desk-scale verification suites.

pub mod error;
pub mod field;
pub mod linalg;
pub mod linset;
pub mod linearity;
pub mod projection;
pub mod construct;
pub mod directions;
pub mod verify;
pub mod io;

pub use error::{Error, Result};
pub use field::{parse_field_spec, Fe, FieldTower};
