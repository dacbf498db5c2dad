//! Linear boundary-value problems `y' + A(t) y = f(t)`, `B y = c` for systems
//! of first-order ODEs in Sobolev spaces `W_p^n`, analysed through their
//! characteristic matrix.
//!
//! The numerical core is generic over the real scalar type (`f32` or `f64`);
//! complex values are `num_complex::Complex<R>`. The aliases below fix the
//! common types to one precision.

pub mod boundary;
pub mod error;
pub mod exprs;
pub mod fredholm;
pub mod funcspace;
pub mod integrator;
pub mod linalg;
pub mod oracle;
pub mod paramlab;
pub mod scalar;

pub use error::{Error, Result};
pub use fredholm::{analyze, characteristic_matrix, solve, verify_solution};
pub use scalar::{Cplx, Real};

pub type Grid64 = funcspace::Grid<f64>;
pub type Exponent64 = funcspace::Exponent<f64>;
pub type SampledFunction64 = funcspace::SampledFunction<f64>;
pub type BoundaryOperator64 = boundary::BoundaryOperator<f64>;
pub type ProblemSpec64 = fredholm::ProblemSpec<f64>;
pub type SolvabilityReport64 = fredholm::SolvabilityReport<f64>;
pub type BvpSolution64 = fredholm::BvpSolution<f64>;

pub type Grid32 = funcspace::Grid<f32>;
pub type Exponent32 = funcspace::Exponent<f32>;
pub type SampledFunction32 = funcspace::SampledFunction<f32>;
pub type BoundaryOperator32 = boundary::BoundaryOperator<f32>;
pub type ProblemSpec32 = fredholm::ProblemSpec<f32>;
pub type SolvabilityReport32 = fredholm::SolvabilityReport<f32>;
pub type BvpSolution32 = fredholm::BvpSolution<f32>;
