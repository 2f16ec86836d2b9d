//! Factor codes on shifts of finite type.
//!
//! The crate represents shifts of finite type and sofic shifts by labeled
//! graphs, sliding block codes between them, and the invariants that organize
//! factor codes: degree for finite-to-one codes and class degree in general.
//! [`decomp`] factors any code on an irreducible SFT as a class-degree-one
//! code followed by a finite-to-one code whose degree is the class degree,
//! and verifies the factorization. [`thermo`] and [`relopt`] supply the
//! Perron-Frobenius and convex-optimization machinery for equilibrium states
//! and measures of maximal relative entropy.

pub mod bitset;
pub mod blockcode;
pub mod classdeg;
pub mod cli;
pub mod config;
pub mod decomp;
pub mod error;
pub mod fixtures;
pub mod fto;
pub mod graph;
pub mod hitting;
pub mod io;
pub mod relopt;
pub mod shiftspace;
pub mod thermo;

pub use config::{AnalysisConfig, Limits, Tolerances};
pub use error::{Error, Result};
