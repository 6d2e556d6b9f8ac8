//! Exact computations along p-adic submanifolds of `Z_p^n`.
//!
//! A submanifold is cut out by integer polynomials `f_1, ..., f_{l-1}`; a
//! further polynomial `f_l` plays the role of the phase. Everything here is
//! computed at finite level `p^m` with exact integer or rational arithmetic,
//! except character values, which are complex floats.
//!
//! - [`padic`]: truncated p-adic integers, valuation, angular component, the
//!   standard additive character.
//! - [`mpoly`]: integer multivariate polynomials, parser, shift/rescale.
//! - [`characters`]: multiplicative characters of `(Z/p^c)^x`, Gauss sums.
//! - [`variety`]: point counting, Hensel lifting, good reduction, probes.
//! - [`smoothing`]: DVR echelon form, rescaled charts, global decomposition.
//! - [`ratfn`]: exact polynomials over Q, rational reconstruction, poles.
//! - [`zeta`]: twisted local zeta coefficients and pole analysis.
//! - [`expsum`]: exponential sums and the stationary phase formula.
//! - [`poincare`]: congruence counts along the submanifold and `P(t)`.
//! - [`regularize`]: the `delta_r` approximation of the surface measure.
//! - [`instances`]: a few named example systems.

pub mod characters;
pub mod enumerate;
pub mod error;
pub mod expsum;
pub mod instances;
pub mod modring;
pub mod mpoly;
pub mod padic;
pub mod poincare;
pub mod ratfn;
pub mod regularize;
pub mod smoothing;
pub mod support;
pub mod system;
pub mod variety;
pub mod zeta;

pub use error::{Error, Result};
pub use mpoly::MPoly;
pub use padic::{PAdicApprox, ScaledUnit, Valuation};
pub use ratfn::{QPoly, RationalFn};
pub use support::Support;
pub use system::{Budget, PolySystem};
