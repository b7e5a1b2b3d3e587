//! Damped, driven harmonic oscillator in a squeezed thermal bath.
//!
//! Two independent routes to the state at time `t`: a closed-form
//! phase-space propagator acting on Wigner functions by Gaussian convolution,
//! and a truncated-Fock master-equation integrator used as an oracle. The
//! Gaussian family of kernels is also exposed as an operator toolkit
//! (transition operators, quasi-distributions, reconstruction).

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
mod fft;
pub mod fock;
pub mod grid;
pub mod kernel;
pub mod propagator;
pub mod quadrature;
pub mod harness;
pub mod quasidist;

pub use error::{Error, Result};
pub use grid::{GridSpec, PhaseSpaceGrid};
pub use kernel::{ComplexPoint, GaussianIntegralParams, GaussianPhaseFunction, OrderingVector};
