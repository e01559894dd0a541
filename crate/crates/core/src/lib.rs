//! Lie–Hamilton systems with nonlinear Hamiltonians built from momentum maps.
//!
//! A Hamiltonian `h(t, x) = F(t, J(x))` is assembled from a finite-dimensional
//! Lie algebra of functions `h_α` (a realization of the momentum map `J`) and
//! a function `F` on the dual of the algebra. Replicating a realization over
//! `N` copies gives the Poisson coalgebra invariants `I_L^(k)` and `I_R^(k)`,
//! which Poisson commute with every such Hamiltonian.

pub mod algebra;
pub mod catalog;
pub mod coalgebra;
pub mod error;
pub mod integrate;
pub mod momentum;
pub mod phase;

pub use algebra::{DualFunction, DualPoint, LieAlgebra, Polynomial, PolynomialFunction, ValidationReport};
pub use catalog::{build_system, CurvedSpaceSpec, SystemParams, SystemSpec};
pub use coalgebra::{InvariantField, ReplicatedSpace, Side, SidedLevel};
pub use error::{Error, Result};
pub use integrate::{integrate, IntegratorConfig, Method, OdeSystem, Status, Trajectory};
pub use momentum::{compose, ComposedHamiltonian, FnDual, Realization};
pub use phase::{PhasePoint, PhaseSpace, SampleBox, ScalarField, TimeCoefficient};
