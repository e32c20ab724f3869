//! Numerical engine for weighted plurisubharmonic envelopes.
//!
//! The central object is the envelope equality for a current
//! `omega = dd^c psi1 - dd^c psi2` and a weight `phi = phi1 - phi2`: the
//! largest `omega`-plurisubharmonic minorant of `phi` coincides with the
//! infimum over centered analytic discs of
//! `-R_{f* omega}(0) + mean_T phi(f)`. This crate computes both sides
//! independently: the infimum by derivative-free search over parametric
//! disc families, the supremum by a monotone obstacle iteration on a grid,
//! cross-checked against each other.

// `!(x > 0.0)` rejects NaN configuration values; `x <= 0.0` would accept them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cvec;
pub mod disc;
pub mod domain;
pub mod envelope;
pub mod error;
pub mod extreal;
pub mod functional;
pub mod mollify;
pub mod neldermead;
pub mod oracle;
pub mod potential;
pub mod riesz;
pub mod runner;
pub mod scenario;

pub use cvec::{CMatrix, ComplexVector};
pub use disc::{AnalyticDisc, DiscKind, DiscTemplate};
pub use domain::DomainSpec;
pub use envelope::{envelope_at, envelope_field, EnvelopeEstimate, FamilySpec, OptimizerSettings};
pub use error::{Error, Result};
pub use extreal::ExtReal;
pub use functional::{
    absorb_psh_weight, global_potential_shift, omega_functional, poisson_functional,
    FunctionalResult,
};
pub use mollify::{mollified_envelope_check, mollify_value, Mollifier, MollifierConfig};
pub use oracle::{
    format_f64, largest_psh_minorant, omega_envelope_oracle, GridFunction, OracleSettings,
};
pub use potential::{AffineForm, AffineMap, CurrentSpec, PotentialExpr, Weight};
pub use riesz::{
    green_disc, pullback_density, riesz_area, riesz_boundary, riesz_current, QuadratureConfig,
};
pub use scenario::Scenario;
