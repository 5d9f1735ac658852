//! Dynamic market models expressed as ordinary differential equations.
//!
//! The crate covers four families of models together with the numerical
//! kernel used to solve and cross-check them:
//!
//! * [`monopoly`]: a single supplier with innovators only (constant,
//!   scheduled, segmented, hesitation and birth/death variants).
//! * [`feedback`]: single markets where adoption intensity depends on the
//!   installed base through a kernel `F(u)`.
//! * [`competition`]: several suppliers with Bass-type acquisition and
//!   spontaneous, periodic or stimulated churn.
//! * [`games`]: the buyer/player/quitter lifecycle of games and services
//!   with limited popularity.
//!
//! Every closed form in the crate has a numerical counterpart built on
//! [`numerics`], so results can always be checked against a plain RK4 run.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
// `!(x > 0.0)` is the NaN-rejecting form used by every parameter check, and
// the small dense kernels read best with explicit indices.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod competition;
pub mod error;
pub mod feedback;
pub mod games;
pub(crate) mod math;
pub mod monopoly;
pub mod numerics;

pub use error::{Error, Result};
pub use numerics::{TimeGrid, Trajectory};
