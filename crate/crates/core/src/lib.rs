//! Big Witt vectors over divisor-stable truncation sets, their q-deformations,
//! and the constructions relating them.

pub mod error;
pub mod expr;
pub mod indwitt;
pub mod mpoly;
pub mod onedim;
pub mod qdeform;
pub mod report;
pub mod rings;
pub mod suites;
pub mod systems;
pub mod truncset;
pub mod universal;
pub mod witt;

pub use error::{Error, Result};
pub use mpoly::{MPoly, Monomial, Var};
pub use report::{Check, Report};
pub use rings::{Elem, Ring, RingFlags, RingKind, UPoly};
pub use truncset::TruncationSet;
pub use universal::{Family, UniversalPolySet};
pub use witt::{QBinding, WittRing, WittVector};
