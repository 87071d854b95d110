//! Orientation predicates for hull construction.
//!
//! Points built from an empirical CDF have `f64` abscissae and integer
//! ordinates (counts over a common denominator). Every finite `f64` is a
//! dyadic rational, so the orientation of three such points has an exact
//! answer; we get it with a floating-point filter and fall back to big
//! rationals only when the filter cannot certify the sign.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, Zero};

/// Exact rational value of a finite `f64`.
pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

pub fn rational_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Lossy conversion back to `f64`.
pub fn to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Sign of `(b - a) x (p - a)` for integer ordinates, computed exactly.
///
/// `Greater` means `p` lies strictly above the line through `a` and `b`
/// (when `b.x > a.x`), `Less` strictly below, `Equal` on it.
pub fn orient_counts(a: (f64, i64), b: (f64, i64), p: (f64, i64)) -> Ordering {
    let dx1 = b.0 - a.0;
    let dx2 = p.0 - a.0;
    let dy1 = (b.1 - a.1) as f64;
    let dy2 = (p.1 - a.1) as f64;
    let t1 = dx1 * dy2;
    let t2 = dx2 * dy1;
    let det = t1 - t2;
    // Each term carries at most ~3 ulp of relative error; 16 ulp is ample.
    let bound = (t1.abs() + t2.abs()) * (8.0 * f64::EPSILON);
    if det > bound {
        Ordering::Greater
    } else if det < -bound {
        Ordering::Less
    } else {
        orient_counts_slow(a, b, p)
    }
}

fn orient_counts_slow(a: (f64, i64), b: (f64, i64), p: (f64, i64)) -> Ordering {
    let ax = rational(a.0);
    let dx1 = rational(b.0) - &ax;
    let dx2 = rational(p.0) - &ax;
    let dy1 = BigInt::from(b.1) - BigInt::from(a.1);
    let dy2 = BigInt::from(p.1) - BigInt::from(a.1);
    let det = dx1 * BigRational::from_integer(dy2) - dx2 * BigRational::from_integer(dy1);
    sign(&det)
}

/// Sign of the same cross product for real ordinates, treating results within
/// `rel_tol` of the operand magnitude as collinear.
pub fn orient_real(a: (f64, f64), b: (f64, f64), p: (f64, f64), rel_tol: f64) -> Ordering {
    let t1 = (b.0 - a.0) * (p.1 - a.1);
    let t2 = (p.0 - a.0) * (b.1 - a.1);
    let det = t1 - t2;
    let scale = t1.abs() + t2.abs();
    if det.abs() <= rel_tol * scale {
        Ordering::Equal
    } else if det > 0.0 {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

pub fn sign(r: &BigRational) -> Ordering {
    if r.is_zero() {
        Ordering::Equal
    } else if r.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// Exact slope `(c1 - c0) / (denominator * (x1 - x0))`.
pub fn count_slope(x0: f64, c0: i64, x1: f64, c1: i64, denominator: u64) -> BigRational {
    let rise = BigRational::from_integer(BigInt::from(c1 - c0));
    let run = (rational(x1) - rational(x0))
        * BigRational::from_u64(denominator).expect("denominator fits");
    rise / run
}
