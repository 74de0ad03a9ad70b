//! Variable-order fractional calculus on intervals and rectangles.
//!
//! The crate evaluates left/right Riemann–Liouville integrals, Riemann–Liouville
//! derivatives and Caputo derivatives whose order `α(t, τ)` depends on both the
//! evaluation point and the integration variable, together with their partial
//! counterparts on a rectangle. On top of those operators it provides
//!
//! * [`identities`]: numerical checks of the integration-by-parts formula for
//!   partial integrals and of the Green-type formula for Caputo derivatives,
//! * [`variational`]: the two-dimensional fractional functional, its first
//!   variation, the Euler–Lagrange residual and a Ritz solver.
//!
//! Everything is built on the weakly singular quadrature in [`quadrature`].

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod error;
pub mod function;
pub mod identities;
pub mod operators;
pub mod optimize;
pub mod order;
pub mod quadrature;
pub mod specialfn;
pub mod variational;

pub use domain::{Axis, Interval, Rect2};
pub use error::{Error, Result};
pub use function::{DerivativeKind, SmoothFn1, SmoothFn2};
pub use operators::{OperatorKind, Stencil, StencilPolicy};
pub use order::{BoundMode, VariableOrder};
pub use quadrature::{QuadConfig, Side, SingularKernel, WeightShift};
