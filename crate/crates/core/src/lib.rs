//! Finite-field lab for permutation polynomials: trinomials
//! `cx − x^s + x^(qs)` over GF(q^2) and GF(q^4), delta forms
//! `(x^(q^k) − x + δ)^s + cx`, and the transform relating them.
//!
//! Modules build bottom-up: [`field`] arithmetic, [`perm`] map descriptors
//! and the exhaustive bijectivity check, [`families`] the family catalog,
//! [`transform`] the composition machinery, and [`harness`]/[`report`] the
//! verification runs the command-line tool drives.

pub mod families;
pub mod field;
pub mod harness;
pub mod perm;
pub mod report;
pub mod transform;

pub use families::{FamilyError, FamilyParams, FamilySpec};
pub use field::{make_field, Element, FieldCtx, FieldError, Tower, DEFAULT_SIZE_CAP};
pub use harness::{HarnessError, RunConfig};
pub use perm::{is_permutation, FnSpec, PermError, PermVerdict, Term};
pub use report::{RunReport, VerifyReport};
pub use transform::{DeltaPolicy, GSpec, TransformError};
