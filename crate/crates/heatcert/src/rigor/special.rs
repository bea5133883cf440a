//! Verified Gamma and Beta enclosures.
//!
//! Strategy: reduce the argument into [0.5, 1.5] with the recurrence
//! Gamma(x+1) = x Gamma(x), then evaluate
//!
//!   ln Gamma(1+h) = -ln(1+h) + (1-gamma) h + sum_{k>=2} (-1)^k (zeta(k)-1) h^k / k
//!
//! with interval zeta coefficients and an explicit geometric tail bound.
//! The zeta values are themselves enclosed at runtime by direct summation
//! plus an Euler-Maclaurin tail, so the only tabulated constant in the whole
//! chain is the two-float enclosure of the Euler-Mascheroni constant.

use std::sync::LazyLock;

use super::interval::{Interval, RigorError};
use super::EULER_GAMMA;

/// Largest series order used by the ln-Gamma expansion.
const MAX_K: usize = 44;

/// Summation cutoff for the zeta tails.
const ZETA_N: u32 = 256;

/// Enclosures of zeta(k) - 1 for k = 2..=MAX_K (index k-2).
static ZETA_MINUS_1: LazyLock<Vec<Interval>> = LazyLock::new(|| {
    (2..=MAX_K).map(|k| zeta_minus_1(k as u32)).collect()
});

/// Enclosure of sum_{n>=2} n^{-k}.
fn zeta_minus_1(k: u32) -> Interval {
    let mut sum = Interval::ZERO;
    for n in 2..ZETA_N {
        let inv = Interval::ONE / Interval::point(f64::from(n));
        sum = sum + inv.powi(k);
    }
    // Euler-Maclaurin tail from N: N^{1-k}/(k-1) + N^{-k}/2 + k N^{-k-1}/12
    // with |remainder| <= k(k+1)(k+2) N^{-k-3}/720.
    let n = Interval::point(f64::from(ZETA_N));
    let inv = Interval::ONE / n;
    let kf = Interval::point(f64::from(k));
    let t1 = inv.powi(k - 1) / (kf - Interval::ONE);
    let t2 = inv.powi(k) / Interval::point(2.0);
    let t3 = kf * inv.powi(k + 1) / Interval::point(12.0);
    let rem_mag = (kf * (kf + Interval::ONE) * (kf + Interval::point(2.0)) * inv.powi(k + 3)
        / Interval::point(720.0))
    .mag();
    let rem = Interval::new(-rem_mag, rem_mag).expect("finite tail remainder");
    sum + t1 + t2 + t3 + rem
}

/// ln Gamma on an interval contained in (0, 2) with |y - 1| <= 0.7.
fn ln_gamma_core(y: Interval) -> Result<Interval, RigorError> {
    let h = y - Interval::ONE;
    let hm = h.mag();
    debug_assert!(hm <= 0.7, "ln_gamma_core argument out of range: {y:?}");

    // Pick the truncation order so the tail bound is negligible:
    // sum_{k>K} (zeta(k)-1)|h|^k/k <= 3/(K+1) (|h|/2)^{K+1} / (1-|h|/2),
    // using zeta(k)-1 <= 3*2^{-k}.
    let mut kmax = MAX_K;
    let mut tail = f64::MAX;
    for kk in 12..=MAX_K {
        let b = 2.0 * 3.0 / (kk as f64 + 1.0) * (hm / 2.0).powi(kk as i32 + 1) / (1.0 - hm / 2.0);
        if b < 1e-18 {
            kmax = kk;
            tail = b;
            break;
        }
        tail = b;
    }

    // Horner evaluation of sum_{k=2}^{kmax} (-1)^k (zeta(k)-1)/k h^k.
    let mut acc = Interval::ZERO;
    for k in (2..=kmax).rev() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = ZETA_MINUS_1[k - 2] * Interval::point(sign) / Interval::point(k as f64);
        acc = (acc + coeff) * h;
    }
    acc = acc * h; // one extra power: loop left acc = sum c_k h^{k-1}
    let series = acc + Interval::new(-tail, tail).expect("finite tail");

    let linear = (Interval::ONE - EULER_GAMMA) * h;
    Ok(series + linear - y.ln()?)
}

/// Enclosure of the Gamma function on a strictly positive interval.
pub fn gamma(x: Interval) -> Result<Interval, RigorError> {
    if x.lo() <= 0.0 {
        return Err(RigorError::Domain { op: "gamma", lo: x.lo(), hi: x.hi() });
    }
    // Wide arguments are split so the reduced argument stays in the zone
    // where the series remainder bound applies.
    if x.width() > 0.25 {
        let pieces = (x.width() / 0.25).ceil() as usize;
        let step = x.width() / pieces as f64;
        let mut acc: Option<Interval> = None;
        for i in 0..pieces {
            let lo = x.lo() + i as f64 * step;
            let hi = if i + 1 == pieces { x.hi() } else { x.lo() + (i + 1) as f64 * step };
            let g = gamma(Interval::new(lo, hi.max(lo))?)?;
            acc = Some(match acc {
                None => g,
                Some(a) => a.hull(g),
            });
        }
        return Ok(acc.expect("at least one piece"));
    }

    let shift = (x.mid() - 1.0).round() as i64;
    let y = x - Interval::point(shift as f64);
    let core = ln_gamma_core(y)?.exp();
    if shift >= 0 {
        // Gamma(y + n) = (y+n-1)...(y) Gamma(y)
        let mut prod = Interval::ONE;
        for j in 0..shift {
            prod = prod * (y + Interval::point(j as f64));
        }
        Ok(core * prod)
    } else {
        // Gamma(y + n) = Gamma(y) / ((y-1)(y-2)...(y+n)), factors all > 0
        let mut prod = Interval::ONE;
        for j in 1..=(-shift) {
            let f = y - Interval::point(j as f64);
            if f.lo() <= 0.0 {
                return Err(RigorError::Domain { op: "gamma", lo: x.lo(), hi: x.hi() });
            }
            prod = prod * f;
        }
        core.checked_div(prod)
    }
}

/// Enclosure of ln Gamma on a strictly positive interval.
pub fn ln_gamma(x: Interval) -> Result<Interval, RigorError> {
    gamma(x)?.ln()
}

/// Enclosure of the Beta function B(x, y) = Gamma(x) Gamma(y) / Gamma(x+y).
pub fn beta(x: Interval, y: Interval) -> Result<Interval, RigorError> {
    if x.lo() <= 0.0 || y.lo() <= 0.0 {
        return Err(RigorError::Domain {
            op: "beta",
            lo: x.lo().min(y.lo()),
            hi: x.hi().max(y.hi()),
        });
    }
    (gamma(x)? * gamma(y)?).checked_div(gamma(x + y)?)
}
