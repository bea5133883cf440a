//! Self-validated interval arithmetic and verified elementary/special functions.
//!
//! Every quantity that feeds a certificate goes through this module. The
//! containment contract is: the result of any operation encloses the exact
//! real result for every choice of members of the operand intervals. Outward
//! rounding is realized by one-ulp endpoint nudging after each native
//! floating-point operation, which is portable and sufficient because IEEE
//! round-to-nearest is off by at most half an ulp.

mod interval;
mod func;
mod special;

pub use interval::{Interval, RigorError};
pub use special::{beta, gamma, ln_gamma};
pub(crate) use func::expm1_ratio;

/// Enclosure of pi.
pub const PI: Interval = Interval::from_endpoints_unchecked(
    std::f64::consts::PI,
    std::f64::consts::PI.next_up(),
);

/// Enclosure of the Euler-Mascheroni constant.
pub(crate) const EULER_GAMMA: Interval = Interval::from_endpoints_unchecked(
    0.577215664901532_8,
    0.577215664901532_9,
);
