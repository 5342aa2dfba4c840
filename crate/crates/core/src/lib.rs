//! Unitary actions of compact connected Lie groups on complex vector spaces.
//!
//! The library builds concrete matrix realizations of classical compact
//! groups (`lie`), decomposes polynomial rings into irreducibles with exact
//! Laurent-polynomial characters (`chars`), evaluates the moment map and its
//! finite-to-one rank test (`moment`), manipulates polynomial-coefficient
//! differential operators in exact rational arithmetic (`weyl`), and models
//! the Heisenberg group together with the semidirect-product coadjoint
//! action (`heis`). The headline cross-check: an action is multiplicity-free
//! exactly when its moment map is finite-to-one on group orbits, and the two
//! verdicts are computed by independent engines.

pub mod chars;
pub mod error;
pub mod heis;
pub mod invariants;
pub mod lie;
pub mod linalg;
pub mod moment;
pub mod optimize;
pub mod poly;
pub mod scalar;
pub mod weyl;

pub use error::CoreError;
pub use lie::{DualElement, Factor, GroupElement, GroupSpec, MatrixRealization, RepTag};
