//! Ground and first excited states of the one-dimensional fractional
//! nonlinear Schrödinger equation in an infinite potential well.
//!
//! The Riesz fractional Laplacian is discretised with a trapezoidal-type
//! quadrature into a symmetric Toeplitz matrix, and stationary states are
//! found by a normalized gradient flow stepped with semi-implicit Euler.
//!
//! The numerical core is generic over the scalar type ([`Scalar`], `f32` or
//! `f64`); the aliases below fix it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod flow;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod observables;
pub mod operator;
pub mod reference;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
pub use flow::{
    initial_state, project, run_flow, solve_flow, solve_flow_with, step, FlowOptions, FlowReport, NonlinearTreatment,
    Parity, SolverMode,
};
pub use grid::{c1_alpha, make_discretization, StateKind};
pub use observables::Observables;
pub use operator::{apply_to_samples, assemble};
pub use scalar::Scalar;

pub type WellConfig = grid::WellConfig<f64>;
pub type Discretization = grid::Discretization<f64>;
pub type Grid = grid::Grid<f64>;
pub type FractionalOperator = operator::FractionalOperator<f64>;
pub type StateVector = flow::StateVector<f64>;
pub type SolverPlan = flow::SolverPlan<f64>;
