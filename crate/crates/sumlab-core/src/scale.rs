//! The dyadic working scale δ = 2^(−m) and exact rational helpers.
//!
//! Everything downstream is exact integer or rational arithmetic relative to
//! a grid of spacing δ. The scale exponent is capped at 24 so that every
//! intermediate of the form (index · 2^m ± index · index) stays far inside
//! the range of `i128`; the cap is enforced at construction and nowhere else.

use num::rational::Ratio;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Largest supported grid exponent; see module docs for the overflow budget.
pub const MAX_LOG_SCALE: u32 = 24;

/// Exact rational on 128-bit components. Large enough for every quantity we
/// form: grid values have |numerator| ≤ 2^48, ratio-set elements stay below
/// 2^25 in numerator and denominator, and products of two such rationals fit
/// with > 25 bits of headroom.
pub type Rat = Ratio<i128>;

/// Shorthand constructor (panics on q = 0, as `Ratio::new` does).
pub fn rat(p: i128, q: i128) -> Rat {
    Rat::new(p, q)
}

/// 2^e as an exact rational, for |e| ≤ 100.
pub fn rat_pow2(e: i32) -> Rat {
    assert!(e.unsigned_abs() <= 100, "pow2 exponent out of supported range");
    if e >= 0 {
        Rat::from_integer(1i128 << e)
    } else {
        rat(1, 1i128 << (-e))
    }
}

/// Floor of p/q for q > 0 (Euclidean division agrees with floor there).
pub fn div_floor(p: i128, q: i128) -> i128 {
    debug_assert!(q > 0);
    p.div_euclid(q)
}

/// Floor of a rational as an i128.
pub fn rat_floor(r: Rat) -> i128 {
    div_floor(*r.numer(), *r.denom())
}

/// Ceiling of a rational as an i128.
pub fn rat_ceil(r: Rat) -> i128 {
    -div_floor(-*r.numer(), *r.denom())
}

/// Lossy conversion for reports. All decisions are made on exact values;
/// floats only ever appear in emitted summaries and fitted exponents.
pub fn rat_to_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Parse a rational from `p`, `p/q`, or a plain decimal like `0.25`
/// (decimal forms must terminate; they are read exactly).
pub fn parse_rat(s: &str) -> Result<Rat> {
    let bad = |reason: String| Error::InvalidParameter { name: "rational", reason };
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i128 = p.trim().parse().map_err(|e| bad(format!("{s:?}: {e}")))?;
        let q: i128 = q.trim().parse().map_err(|e| bad(format!("{s:?}: {e}")))?;
        if q == 0 {
            return Err(bad(format!("{s:?}: zero denominator")));
        }
        return Ok(rat(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int: i128 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(|e| bad(format!("{s:?}: {e}")))?
        };
        if frac.len() > 30 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad(format!("{s:?}: unsupported decimal")));
        }
        let mut num = Rat::from_integer(int).abs();
        let mut den = 1i128;
        for c in frac.chars() {
            den = den.checked_mul(10).ok_or(Error::Overflow("parse_rat"))?;
            num += rat(i128::from(c as u8 - b'0'), den);
        }
        return Ok(if neg { -num } else { num });
    }
    let p: i128 = s.parse().map_err(|e| bad(format!("{s:?}: {e}")))?;
    Ok(Rat::from_integer(p))
}

/// Render a rational canonically as `p/q` (or `p` when q = 1).
pub fn rat_to_string(r: Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// If `r` is exactly 2^(−l) for some l ≥ 0, return l.
pub fn dyadic_neg_log2(r: Rat) -> Option<u32> {
    if r.numer().is_one() && r.denom().count_ones() == 1 {
        Some(r.denom().trailing_zeros())
    } else {
        None
    }
}

/// Grid scale δ = 2^(−m), with 1 ≤ m ≤ [`MAX_LOG_SCALE`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Scale {
    m: u32,
}

impl Scale {
    pub fn new(m: u32) -> Result<Self> {
        if (1..=MAX_LOG_SCALE).contains(&m) {
            Ok(Scale { m })
        } else {
            Err(Error::ScaleRange(m))
        }
    }

    pub fn m(self) -> u32 {
        self.m
    }

    /// δ as a float, for reports and fitted exponents only.
    pub fn delta_f64(self) -> f64 {
        (-(self.m as f64)).exp2()
    }

    /// δ as an exact rational.
    pub fn delta(self) -> Rat {
        rat_pow2(-(self.m as i32))
    }

    /// Number of δ-cells in [0,1): 2^m. Unit-range indices run 0..=2^m.
    pub fn cells(self) -> i64 {
        1 << self.m
    }

    pub fn same_as(self, other: Scale) -> Result<()> {
        if self.m == other.m {
            Ok(())
        } else {
            Err(Error::ScaleMismatch(self.m, other.m))
        }
    }
}

/// True iff `x` is zero as a rational (helper for generic code).
pub fn rat_is_zero(r: Rat) -> bool {
    r.numer().is_zero()
}
