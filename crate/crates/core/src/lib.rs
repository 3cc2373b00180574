//! Simulator and exact analyzer for almost-optimally fair two- and
//! three-party coin-flipping protocols against rushing fail-stop
//! adversaries.
//!
//! The crate is organized around five subsystems:
//!
//! * [`numerics`] — probability kernels for the biased ±1-sum binomial and
//!   the hypergeometric distribution, their upper tails, the bias-inversion
//!   function `sbias`, and the normal upper tail.
//! * [`games`] — online binomial games with pluggable hint channels, an
//!   exact optimal-stopping solver, and Monte Carlo policy evaluation.
//! * [`shares`] — XOR secret sharing and the three share-generating
//!   dealer functionalities.
//! * [`protocol`] — party state machines for the two- and three-party
//!   protocols, their wrapped (oracle-calling) variants, the majority
//!   baseline, and exact view-value computation.
//! * [`sim`] — fail-stop adversary strategies, game-reduction emulators,
//!   and exact/Monte Carlo bias measurement.
//!
//! Core probability routines are generic over a scalar type (see
//! [`scalar`]): `f64` for log-space numerics and, for desk-scale oracles,
//! exact rationals.

pub mod games;
pub mod numerics;
pub mod protocol;
pub mod rng;
pub mod scalar;
pub mod shares;
pub mod sim;
pub mod special;

/// Default floating-point scalar used throughout the simulator.
pub type Real = f64;

/// Exact arbitrary-precision rational, used by oracles and the
/// exact measurement engine.
pub type Exact = num_rational::BigRational;

/// Library version stamped into every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
