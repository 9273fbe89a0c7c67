//! Computational order theory on finitely presented posets.
//!
//! Finite posets ([`order::FinPoset`]) are extended with declared ω-chain
//! limits ([`dposet::DPoset`]) and stacked into level-indexed windows
//! ([`family::TruncationFamily`]) to present countable posets. On top of
//! that sit the Scott-topological operators ([`scott`]), the property
//! checkers and theorem suite ([`properties`]), finite Smyth powerdomains
//! ([`smyth`]), the built-in example corpus ([`corpus`]) and a small text
//! format for all of the above ([`dsl`]), with line-delimited verdict
//! reports ([`report`]).

pub mod corpus;
pub mod dposet;
pub mod dsl;
pub mod family;
pub mod mask;
pub mod order;
pub mod properties;
pub mod report;
pub mod scott;
pub mod smyth;
pub mod suite;
pub mod verdict;

pub use dposet::{DPoset, LimitDecl};
pub use family::{SchemaSet, TruncationFamily};
pub use mask::Mask;
pub use order::{FinPoset, RelationMode};
pub use properties::{CheckConfig, Property};
pub use verdict::Verdict;
