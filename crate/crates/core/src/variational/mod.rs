//! The two-dimensional variable-order fractional functional
//! `J[u] = ∬ L(t, u, ᶜD₁^{α₁}u, ᶜD₂^{α₂}u) dt` on a rectangle, its first
//! variation, the pointwise Euler–Lagrange residual and a Ritz solver.
//!
//! Lagrangian slots follow the order `(t₁, t₂, u, d₁, d₂)`, where `d₁`, `d₂`
//! receive the left Caputo partials of `u`.

mod boundary;
mod functional;
mod lagrangian;
mod ritz;

pub use boundary::{mode_fn, BoundaryData, RitzExpansion, MAX_MODES};
pub use functional::{
    caputo_partials, el_integrand, el_residual, first_variation, functional_eval, green_transformed_variation,
    string_action, Problem, ResidualField,
};
pub use lagrangian::{LagFn, Lagrangian, Slots};
pub use ritz::{ritz_solve, AssembledFunctional, RitzOptions, RitzSolution, SolveReport};
