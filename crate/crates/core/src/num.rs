//! Scalar abstractions shared by the model.
//!
//! Event times only need ordered ring arithmetic, so the simulator is generic
//! over [`Time`] and runs unchanged on `u64` nanoseconds, signed integers,
//! floats or exact rationals. Calibration divides, so it needs a signed
//! field ([`Scalar`]).

use std::fmt::Debug;

use num_integer::Roots;
use num_rational::Ratio;

/// Values usable as event timestamps and durations.
pub trait Time: num_traits::Num + Copy + PartialOrd + Debug {}

impl<T: num_traits::Num + Copy + PartialOrd + Debug> Time for T {}

/// Larger of two partially ordered values; `a` wins ties.
#[inline]
pub fn max_of<T: PartialOrd>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

/// Signed field used by the two-point fits and measurement summaries.
pub trait Scalar: num_traits::Num + num_traits::Signed + Clone + PartialOrd + Debug {
    /// Embeds an element or sample count.
    fn from_count(n: u64) -> Self;

    /// Square root of a nonnegative value. Exact for floats up to rounding and
    /// for rationals whose numerator and denominator are perfect squares;
    /// otherwise the nearest rational to the `f64` root.
    fn sqrt(&self) -> Self;
}

impl Scalar for f64 {
    fn from_count(n: u64) -> Self {
        n as f64
    }

    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
}

impl Scalar for f32 {
    fn from_count(n: u64) -> Self {
        n as f32
    }

    fn sqrt(&self) -> Self {
        f32::sqrt(*self)
    }
}

macro_rules! rational_scalar {
    ($int:ty) => {
        impl Scalar for Ratio<$int> {
            fn from_count(n: u64) -> Self {
                Ratio::from_integer(<$int>::try_from(n).expect("count exceeds rational range"))
            }

            fn sqrt(&self) -> Self {
                let (n, d) = (*self.numer(), *self.denom());
                let (rn, rd) = (n.sqrt(), d.sqrt());
                if rn * rn == n && rd * rd == d {
                    return Ratio::new(rn, rd);
                }
                let approx = (n as f64 / d as f64).sqrt();
                Ratio::approximate_float(approx).unwrap_or_else(|| Ratio::from_integer(0))
            }
        }
    };
}

rational_scalar!(i64);
rational_scalar!(i128);

/// Parses `"7"`, `"-2.125"` or `"3/8"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Ratio<i128>> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: i128 = n.trim().parse().ok()?;
        let d: i128 = d.trim().parse().ok()?;
        return (d != 0).then(|| Ratio::new(n, d));
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let numer: i128 = digits.parse().ok()?;
    let denom = 10i128.checked_pow(frac.len() as u32)?;
    let q = Ratio::new(numer, denom);
    Some(if neg { -q } else { q })
}

/// Always `"numer/denom"` in lowest terms, so `"1/1"` rather than `"1"`.
pub fn fraction_string(q: &Ratio<i128>) -> String {
    format!("{}/{}", q.numer(), q.denom())
}
