//! Exact computation of contravariant forms, shifted extremal projectors and
//! extremal twists for tensor products of highest-weight modules over
//! quantized enveloping algebras of small rank.

pub mod scalars;
pub mod linalg;
pub mod rootdata;
pub mod modules;
pub mod forms;
pub mod projector;
pub mod twist;
pub mod oracle;
pub mod cli;
