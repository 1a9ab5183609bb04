//! Coboundary equation toolkit for structured isometries and contractions.
//!
//! The crate decides whether a vector `x` lies in the range of `I - T` for a
//! structured operator `T` on Hilbert space, constructs the solution of
//! `(I - T) y = x` when one exists, and solves the functional equation
//! `f(t) = g(t) - g(b t)` exactly in Fourier-coefficient space.
//!
//! The main entry points are [`solver::solve_isometry`],
//! [`dilation::solve_contraction`] and [`dyadic::chain_solve`]; the
//! [`oracle`] module offers an independent dense least-squares check.

pub mod dilation;
pub mod dyadic;
mod error;
mod fit;
pub mod io;
pub mod operator;
pub mod oracle;
pub mod solver;
pub mod vector;
pub mod wold;

pub use error::Error;
pub use num_complex::Complex64;
pub use operator::{
    adjoint_orbit, power_sum, AdjointOrbit, LinearOperator, OperatorClass, OperatorSpec,
    DEFAULT_ORBIT_CUTOFF,
};
pub use vector::{CoeffVector, HilbertVec, Index, Space, Tolerances, ZERO_EPS};
