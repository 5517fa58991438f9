//! Exact and brute-force simulation of Gaussian circuits acting on
//! 0-logical GKP states followed by homodyne measurement.
//!
//! The crate decides whether a circuit lies in one of two efficiently
//! simulatable classes, builds the Dirac-comb outcome distribution and
//! samples from it:
//!
//! * class A: any number of modes, a single measured mode. Every mode's
//!   coefficient pair in the Heisenberg-evolved position operator must
//!   correspond to a rotation angle whose cotangent has an odd denominator
//!   (or be a multiple of pi).
//! * class B: several measured modes. The symplectic matrix has to factor
//!   as a block-lower-triangular part times parallel single-mode rotations
//!   with angles of the same kind.
//!
//! Floating point never decides membership on its own. Gate parameters are
//! kept as exact rationals and propagated through the circuit in the field
//! generated by square roots of integers (see [`numtheory::SurdSum`]); a
//! float reconstruction path exists but is opt-in.
//!
//! The [`oracle`] module evaluates truncated theta series and finitely
//! squeezed wavefunctions so the analytic combs can be cross-checked
//! numerically.

pub mod circuit;
pub mod classify;
pub mod json;
pub mod numtheory;
pub mod oracle;
pub mod par;
pub mod sampler;
pub mod symplectic;

pub use circuit::{Circuit, Gate, LinearQuadratureForm, Param};
pub use classify::{AngleSpec, MembershipVerdict, ReconstructionPolicy, ThetaClass};
pub use numtheory::Rational;
pub use sampler::{CombPdf1d, CombPdfNd, SampleConfig};
pub use symplectic::SymplecticTransform;

/// `sqrt(pi)`, the GKP lattice unit.
pub const SQRT_PI: f64 = 1.772_453_850_905_516;
