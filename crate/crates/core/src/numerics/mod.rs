//! Numerical kernel shared by every model family.
//!
//! | Piece             | Method                                             |
//! |-------------------|----------------------------------------------------|
//! | [`integrate_ivp`] | classical fixed-step RK4                           |
//! | [`quadrature`]    | adaptive Simpson on a pre-split interval           |
//! | [`solve_root`]    | bracketed Newton with bisection fallback           |
//! | [`erf`]           | error function (plus `erfc` and scaled `erfcx`)    |
//! | [`SquareMatrix`]  | partial-pivot LU: solve, determinant, cofactors    |
//! | [`mat_exp_apply`] | scaling and squaring of the truncated series       |
//!
//! All routines are pure functions of their inputs.

mod linalg;
mod ode;
mod quad;
mod root;
mod special;
mod trajectory;

pub use linalg::{mat_exp_apply, SquareMatrix};
pub use ode::{integrate_ivp, integrate_on_grid, rk4_step, FnField, VectorField};
pub use quad::{quadrature, QUAD_MAX_EVALS};
pub use root::{golden_max, solve_root};
pub use special::{erf, erfc, erfcx};
pub use trajectory::{TimeGrid, Trajectory};
