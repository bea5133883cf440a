//! Verified elementary functions built on the interval kernel.
//!
//! Nothing here trusts the accuracy of libm: exp and ln are computed from
//! argument-reduced series evaluated in interval arithmetic with an explicit
//! truncation remainder, so containment only relies on the kernel's
//! outward-rounded +,-,*,/.

use std::sync::LazyLock;

use super::interval::{Interval, RigorError};

/// Enclosure of ln 2 via 2*atanh(1/3).
static LN2: LazyLock<Interval> = LazyLock::new(|| {
    let u = Interval::ONE / Interval::point(3.0);
    Interval::point(2.0) * atanh_series(u)
});

/// Enclosure of e.
static E: LazyLock<Interval> = LazyLock::new(|| exp_series(Interval::ONE));

/// Taylor enclosure of exp on a reduced argument, |x| <= 1, evaluated in
/// Horner form: acc_{k-1} = 1 + (x/k) acc_k.
fn exp_series(x: Interval) -> Interval {
    debug_assert!(x.mag() <= 1.0, "exp_series argument too large: {x:?}");
    const K: u32 = 26;
    let mut acc = Interval::ONE;
    for k in (1..=K).rev() {
        acc = Interval::ONE + x * acc / Interval::point(f64::from(k));
    }
    // |tail| <= |x|^{K+1}/(K+1)! / (1 - |x|/(K+2)), doubled for the rounding
    // of the bound itself; 27! > 1e28 so this is far below one ulp of e^x.
    let r = 2e-28;
    acc + Interval::new(-r, r).expect("finite remainder")
}

/// Enclosure of exp at an exact point argument.
fn exp_point(x: f64) -> Interval {
    if x >= 710.0 {
        // e^710 exceeds f64::MAX
        return Interval::from_endpoints_unchecked(f64::MAX, f64::INFINITY);
    }
    let n = x.round();
    let frac = Interval::point(x) - Interval::point(n);
    let s = exp_series(frac);
    if n == 0.0 {
        return s;
    }
    let en = E.powi(n.abs() as u32);
    if n > 0.0 {
        s * en
    } else {
        // en.lo > 1, so the division cannot fail
        s * (Interval::ONE.checked_div(en).expect("e^n positive"))
    }
}

/// atanh series on |u| <= 0.36, used for ln after range reduction.
/// Evaluated as u * P(u^2) with P in Horner form.
fn atanh_series(u: Interval) -> Interval {
    debug_assert!(u.mag() <= 0.36, "atanh_series argument too large: {u:?}");
    const K: u32 = 24;
    let w = u * u;
    let mut acc = Interval::ONE / Interval::point(f64::from(2 * K + 1));
    for k in (0..K).rev() {
        acc = Interval::ONE / Interval::point(f64::from(2 * k + 1)) + w * acc;
    }
    let m = u.mag();
    let tail = 2.0 * m.powi((2 * K + 3) as i32) / (f64::from(2 * K + 3) * (1.0 - m * m));
    u * acc + Interval::new(-tail, tail).expect("finite remainder")
}

/// Enclosure of ln at an exact positive point argument.
fn ln_point(x: f64) -> Interval {
    debug_assert!(x > 0.0);
    if x < f64::MIN_POSITIVE {
        // Rescale subnormals exactly into the normal range.
        return ln_point(x * pow2(1000)) - Interval::point(1000.0) * *LN2;
    }
    // x = m * 2^e with m in [~0.707, ~1.415]; the scaling is exact.
    let e = x.log2().round();
    let scale = pow2(e as i32);
    let m = x / scale;
    let mi = Interval::point(m);
    let u = (mi - Interval::ONE) / (mi + Interval::ONE);
    let ln_m = Interval::point(2.0) * atanh_series(u);
    ln_m + Interval::point(e) * *LN2
}

/// Exact power of two for exponents of normal numbers.
fn pow2(e: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

impl Interval {
    /// Enclosure of the exponential over the interval.
    pub fn exp(self) -> Interval {
        let lo = exp_point(self.lo()).lo().max(0.0);
        let hi = exp_point(self.hi()).hi();
        Interval::from_endpoints_unchecked(lo, hi)
    }

    /// Enclosure of the natural logarithm; requires a strictly positive
    /// interval.
    pub fn ln(self) -> Result<Interval, RigorError> {
        if self.lo() <= 0.0 {
            return Err(RigorError::Domain { op: "ln", lo: self.lo(), hi: self.hi() });
        }
        Ok(Interval::from_endpoints_unchecked(
            ln_point(self.lo()).lo(),
            ln_point(self.hi()).hi(),
        ))
    }

    /// Enclosure of `self^q` for a strictly positive base, via exp(q ln self).
    /// Point exponents 0.5 and small integers take the sharp direct route.
    pub fn pow(self, q: Interval) -> Result<Interval, RigorError> {
        if self.lo() <= 0.0 {
            return Err(RigorError::Domain { op: "pow", lo: self.lo(), hi: self.hi() });
        }
        if q.lo() == q.hi() {
            let qq = q.lo();
            if qq == 0.5 {
                return self.sqrt();
            }
            if qq.fract() == 0.0 && qq.abs() <= 64.0 {
                let p = self.powi(qq.abs() as u32);
                return if qq >= 0.0 { Ok(p) } else { p.recip() };
            }
        }
        Ok((q * self.ln()?).exp())
    }

    /// Convenience wrapper for a scalar exponent.
    pub fn pow_scalar(self, q: f64) -> Result<Interval, RigorError> {
        self.pow(Interval::point(q))
    }
}

/// Enclosure of `(1 - e^{-y})/y`, continuously extended by 1 at y = 0.
///
/// Valid for any interval with |y| <= 8; used for the residual transport
/// factor whose denominator may straddle zero.
pub(crate) fn expm1_ratio(y: Interval) -> Interval {
    if y.lo() > 0.5 || y.hi() < -0.5 {
        // Away from zero the direct formula is tight enough.
        let num = Interval::ONE - (-y).exp();
        return num.checked_div(y).expect("zero excluded");
    }
    debug_assert!(y.mag() <= 8.0, "expm1_ratio argument too large: {y:?}");
    // sum_{k>=0} (-y)^k/(k+1)!
    let neg = -y;
    let mut sum = Interval::ONE;
    let mut term = Interval::ONE;
    let mut k = 0u32;
    loop {
        k += 1;
        term = term * neg / Interval::point(f64::from(k + 1));
        sum = sum + term;
        if term.mag() < 1e-20 || k >= 40 {
            break;
        }
    }
    let q = y.mag() / f64::from(k + 2);
    let r = 2.0 * term.mag() * q / (1.0 - q);
    sum + Interval::new(-r, r).expect("finite remainder")
}
