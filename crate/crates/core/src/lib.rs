//! Closed-form propagators for three Lindblad-type master equations on a
//! truncated Fock space:
//!
//! * the damped Kerr oscillator at zero temperature ([`kerr_zero_t`]),
//! * the damped Kerr oscillator coupled to a thermal bath ([`kerr_finite_t`]),
//! * degenerate parametric down conversion in the diffusive limit ([`pdc`]).
//!
//! Every superoperator is expressed as a [`superop::SuperopExpr`], which can be
//! applied directly to a density matrix or vectorized into a dense Liouvillian
//! for the brute-force [`oracle`]. The factorized propagators never touch the
//! Liouvillian; they act elementwise on Fock matrix elements, which is what
//! makes them fast and what the oracle is there to check.

pub mod commutators;
pub mod error;
pub mod fock;
pub mod kerr_finite_t;
pub mod kerr_zero_t;
pub mod linalg;
pub mod oracle;
pub mod pdc;
pub mod superop;

pub use error::Error;
pub use fock::{DensityMatrix, FockOperator, FockSpace, StateVector};
pub use superop::{LiouvillianMatrix, SuperopExpr};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix used for operators, densities and Liouvillians.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

pub type Result<T, E = Error> = std::result::Result<T, E>;
