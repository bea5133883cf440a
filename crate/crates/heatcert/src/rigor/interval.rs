//! The interval type and its outward-rounded arithmetic.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

/// Errors raised by operations with restricted domains.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RigorError {
    #[error("division by an interval containing zero")]
    DivisionByZero,
    #[error("invalid interval endpoints: lo={lo}, hi={hi}")]
    InvalidEndpoints { lo: f64, hi: f64 },
    #[error("domain violation in {op}: argument [{lo}, {hi}]")]
    Domain { op: &'static str, lo: f64, hi: f64 },
}

/// A closed real interval `[lo, hi]` with `lo <= hi`.
///
/// Endpoints are finite on construction. Arithmetic may overflow to an
/// infinite endpoint, which remains a valid (if useless) bound; NaN never
/// appears.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

#[inline]
fn nd(x: f64) -> f64 {
    x.next_down()
}

#[inline]
fn nu(x: f64) -> f64 {
    x.next_up()
}

/// TwoSum exactness test: fl(a+b) carries no rounding error iff the
/// reconstructed error term vanishes.
#[inline]
fn sum_is_exact(a: f64, b: f64, r: f64) -> bool {
    let bv = r - a;
    let av = r - bv;
    (a - av) + (b - bv) == 0.0
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    /// Construct from endpoints, checking `lo <= hi` and finiteness.
    pub fn new(lo: f64, hi: f64) -> Result<Interval, RigorError> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Interval { lo, hi })
        } else {
            Err(RigorError::InvalidEndpoints { lo, hi })
        }
    }

    /// The degenerate interval `[x, x]` for an exactly representable value.
    #[inline]
    pub fn point(x: f64) -> Interval {
        debug_assert!(x.is_finite(), "point interval from non-finite {x}");
        Interval { lo: x, hi: x }
    }

    /// Compile-time constructor for constants whose ordering is known.
    pub(crate) const fn from_endpoints_unchecked(lo: f64, hi: f64) -> Interval {
        Interval { lo, hi }
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn mid(self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }

    #[inline]
    pub fn width(self) -> f64 {
        self.hi - self.lo
    }

    /// Magnitude: the largest absolute value of any member.
    #[inline]
    pub fn mag(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    #[inline]
    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    #[inline]
    pub fn encloses(self, other: Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    #[inline]
    pub fn is_subset_of(self, other: Interval) -> bool {
        other.encloses(self)
    }

    #[inline]
    pub fn hull(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Enclosure of `|x|` over the interval.
    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            Interval { lo: -self.hi, hi: -self.lo }
        } else {
            Interval { lo: 0.0, hi: self.mag() }
        }
    }

    /// Enclosure of `max(x, 0)` over the interval.
    pub fn pos_part(self) -> Interval {
        Interval {
            lo: self.lo.max(0.0),
            hi: self.hi.max(0.0),
        }
    }

    /// Reciprocal; errors when the interval contains zero.
    pub fn recip(self) -> Result<Interval, RigorError> {
        Interval::ONE.checked_div(self)
    }

    /// Division with the domain check exposed.
    pub fn checked_div(self, rhs: Interval) -> Result<Interval, RigorError> {
        if rhs.lo <= 0.0 && rhs.hi >= 0.0 {
            return Err(RigorError::DivisionByZero);
        }
        if self.lo == 0.0 && self.hi == 0.0 {
            return Ok(Interval::ZERO);
        }
        if rhs.lo == 1.0 && rhs.hi == 1.0 {
            return Ok(self);
        }
        let candidates = [
            self.lo / rhs.lo,
            self.lo / rhs.hi,
            self.hi / rhs.lo,
            self.hi / rhs.hi,
        ];
        let mut lo = candidates[0];
        let mut hi = candidates[0];
        for &c in &candidates[1..] {
            lo = lo.min(c);
            hi = hi.max(c);
        }
        Ok(Interval { lo: nd(lo), hi: nu(hi) })
    }

    /// Integer power with sharp handling of even powers across zero.
    pub fn powi(self, n: u32) -> Interval {
        match n {
            0 => Interval::ONE,
            1 => self,
            _ => {
                if n.is_multiple_of(2) && self.lo < 0.0 && self.hi > 0.0 {
                    // even power, zero inside: minimum is exactly 0
                    let m = self.abs();
                    let hi = pow_up(m.hi, n);
                    Interval { lo: 0.0, hi }
                } else {
                    let a = pow_pair(self.lo, n);
                    let b = pow_pair(self.hi, n);
                    Interval {
                        lo: a.0.min(b.0),
                        hi: a.1.max(b.1),
                    }
                }
            }
        }
    }

    /// Square root; errors when any member is negative.
    pub fn sqrt(self) -> Result<Interval, RigorError> {
        if self.lo < 0.0 {
            return Err(RigorError::Domain { op: "sqrt", lo: self.lo, hi: self.hi });
        }
        // IEEE sqrt is correctly rounded, so one nudge per endpoint suffices;
        // 0 and 1 stay sharp.
        let exact = |x: f64| x == 0.0 || x == 1.0;
        Ok(Interval {
            lo: if exact(self.lo) { self.lo } else { nd(self.lo.sqrt()).max(0.0) },
            hi: if exact(self.hi) { self.hi } else { nu(self.hi.sqrt()) },
        })
    }
}

/// `[x^n rounded down, x^n rounded up]` by repeated interval squaring.
fn pow_pair(x: f64, n: u32) -> (f64, f64) {
    let mut acc = Interval::ONE;
    let base = Interval::point(x);
    let mut sq = base;
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * sq;
        }
        sq = sq * sq;
        k >>= 1;
    }
    (acc.lo, acc.hi)
}

fn pow_up(x: f64, n: u32) -> f64 {
    pow_pair(x, n).1
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Interval {
        Interval::point(x)
    }
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, rhs: Interval) -> Interval {
        let lo = self.lo + rhs.lo;
        let hi = self.hi + rhs.hi;
        Interval {
            lo: if sum_is_exact(self.lo, rhs.lo, lo) { lo } else { nd(lo) },
            hi: if sum_is_exact(self.hi, rhs.hi, hi) { hi } else { nu(hi) },
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, rhs: Interval) -> Interval {
        let lo = self.lo - rhs.hi;
        let hi = self.hi - rhs.lo;
        Interval {
            lo: if sum_is_exact(self.lo, -rhs.hi, lo) { lo } else { nd(lo) },
            hi: if sum_is_exact(self.hi, -rhs.lo, hi) { hi } else { nu(hi) },
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, rhs: Interval) -> Interval {
        // trivial exact factors keep zeros and sign flips sharp
        if self.lo == 0.0 && self.hi == 0.0 || rhs.lo == 0.0 && rhs.hi == 0.0 {
            return Interval::ZERO;
        }
        if self.lo == 1.0 && self.hi == 1.0 {
            return rhs;
        }
        if rhs.lo == 1.0 && rhs.hi == 1.0 {
            return self;
        }
        if self.lo == -1.0 && self.hi == -1.0 {
            return -rhs;
        }
        if rhs.lo == -1.0 && rhs.hi == -1.0 {
            return -self;
        }
        let candidates = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        let mut lo = candidates[0];
        let mut hi = candidates[0];
        for &c in &candidates[1..] {
            lo = lo.min(c);
            hi = hi.max(c);
        }
        Interval { lo: nd(lo), hi: nu(hi) }
    }
}

/// Panics when the divisor contains zero; use [`Interval::checked_div`] when
/// the divisor is not known to be signed.
impl Div for Interval {
    type Output = Interval;
    #[inline]
    fn div(self, rhs: Interval) -> Interval {
        self.checked_div(rhs)
            .unwrap_or_else(|e| panic!("{e}: {self:?} / {rhs:?}"))
    }
}
