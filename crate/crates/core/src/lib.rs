//! Numerical toolkit for weighted metrics on domains and the Hardy–Littlewood
//! type inequalities that connect derivative growth with Hölder-type
//! continuity.
//!
//! The crate is `no_std` (with `alloc`). Everything here is pure computation:
//!
//! - [`majorant`]: moduli of continuity φ and their axiom checks.
//! - [`curves`]: polylines, length and weighted curve integrals.
//! - [`domains`]: domains with exact boundary distance, and weights built on them.
//! - [`geodesics`]: upper bounds for weighted distances (inner distance,
//!   quasi-hyperbolic distance) and the extension-domain condition.
//! - [`estimators`]: D*f, Bloch-type, Lipschitz-type and regular-oscillation
//!   constants for concrete mappings.
//! - [`harness`]: theorem checks with explicit constants.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

mod error;
mod math;
mod point;

pub mod curves;
pub mod domains;
pub mod estimators;
pub mod geodesics;
pub mod harness;
pub mod majorant;
pub mod sampling;

pub use curves::{curve_integral, curve_length, Curve, DEFAULT_TOL};
pub use domains::{Domain, DomainKind, Weight, WeightKind};
pub use error::{Error, Result};
pub use estimators::{Mapping, MappingKind, NormEstimate};
pub use geodesics::{ConditionReport, GeodesicOptions, GeodesicResult};
pub use harness::{Status, TheoremId, TheoremReport};
pub use majorant::{Majorant, MajorantKind};
pub use point::{Point, MAX_DIM};
