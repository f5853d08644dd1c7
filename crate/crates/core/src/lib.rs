//! Bounds on the longest chain among `n` uniform random points in `[0, 1]^t`
//! under the componentwise order.
//!
//! * [`bounds`] computes the equalized Chernoff rate `q(x)`, the upper-bound
//!   constant `x̄(t)` and the Bollobás–Winkler lower bound.
//! * [`chains`] samples point clouds, computes longest chains and counts
//!   maximal chains on small instances.
//! * [`harness`] runs seeded, thread-count-independent Monte Carlo
//!   experiments and compares them against the bounds.

pub mod bounds;
pub mod chains;
pub mod error;
pub mod harness;
pub mod specfun;

pub use error::{Error, Result};
