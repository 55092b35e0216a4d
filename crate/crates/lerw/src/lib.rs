//! Transition probabilities and finite-dimensional marginals of the
//! infinite two-sided loop-erased random walk on `Z^2`.
//!
//! The library computes the probability that the two-sided loop-erased
//! random walk traces a given finite self-avoiding walk through the origin,
//! by two independent routes that cross-check each other:
//!
//! * a determinant route: the one-step transition probability is
//!   `1/4 * G^q(zeta, zeta) * |D^q(eta^zeta) / D^q(eta)|`, where `G^q` is a
//!   Green's function for signed edge weights and `D^q` is a 2x2 determinant
//!   of signed Laplacians of discrete square-root-like harmonic functions
//!   evaluated at the walk's tips;
//! * a sampling route: path weights factor as
//!   `(2d)^(-len) * F_eta * phi(eta)` with `F_eta` a product of Green's
//!   function diagonals and `phi` a two-walk non-intersection probability
//!   estimated by Monte Carlo.
//!
//! See the `book/` directory for a guided tour, and [`validate`] for the
//! acceptance suite behind `lerw validate`.

pub mod cli;
pub mod error;
pub mod fxhash;
pub mod estimate;
pub mod harmonic;
pub mod lattice;
pub mod linops;
pub mod montecarlo;
pub mod solve;
pub mod transition;
pub mod validate;
pub mod weights;

pub use error::{Error, Result};
