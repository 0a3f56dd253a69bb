//! Gaussian beam superposition engine for the semiclassical Schrödinger
//! equation.
//!
//! All beam ingredients (action, complex phase Hessian, Taylor jets of the
//! phase, amplitude hierarchy) are computed in phase space along
//! bi-characteristics or on Eulerian grids via Liouville transport, assembled
//! into asymptotic wave fields, and checked against spectral and closed-form
//! references by a convergence-rate harness.
//!
//! Core numerics are generic over the floating scalar; concrete `f64` aliases
//! are exported at the crate root.

pub mod beam;
pub mod error;
pub mod flow;
pub mod hamiltonian;
pub mod harness;
pub mod index;
pub mod jets;
pub mod linalg;
pub mod liouville;
pub mod poly;
pub mod reference;
pub mod scalar;
pub mod superposition;
pub mod wavefield;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

/// Concrete `f64` instantiations of the main domain types.
pub type Model = hamiltonian::HamiltonianModel<f64>;
pub type Point = flow::PhasePoint<f64>;
pub type Ray = flow::Trajectory<f64>;
pub type Beam = beam::BeamRecord<f64>;
pub type Field = wavefield::WaveField<f64>;
pub type C64 = num_complex::Complex64;
