//! Sign-change bisection on arbitrary-precision reals.

use rug::ops::Pow;
use rug::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BisectFailure {
    /// `f` has the same sign at both ends.
    NoSignChange,
    /// The midpoint collided with an end before the width dropped below tolerance.
    Stalled,
}

/// Decimal digits carried by `prec` bits.
pub fn decimal_digits(prec: u32) -> i32 {
    (prec as f64 * std::f64::consts::LOG10_2).floor() as i32
}

/// Stopping width: the larger of `rel_tol · scale` and `10^{-(digits-12)}`.
pub fn stop_width(prec: u32, rel_tol: f64, scale: &Float) -> Float {
    let rel = Float::with_val(prec, scale * rel_tol);
    let floor = Float::with_val(prec, 10u32).pow(-(decimal_digits(prec) - 12).max(1));
    if rel > floor {
        rel
    } else {
        floor
    }
}

/// Finds a root of `f` in `[lo, hi]` given opposite signs at the ends,
/// narrowing until the bracket is narrower than `width`. Returns the
/// bracket end with the smaller `|f|`.
pub fn bisect<F>(f: F, lo: &Float, hi: &Float, width: &Float) -> Result<Float, BisectFailure>
where
    F: Fn(&Float) -> Float,
{
    let prec = lo.prec();
    let mut a = Float::with_val(prec, lo);
    let mut b = Float::with_val(prec, hi);
    let mut fa = f(&a);
    let mut fb = f(&b);
    if fa.is_zero() {
        return Ok(a);
    }
    if fb.is_zero() {
        return Ok(b);
    }
    if fa.is_sign_negative() == fb.is_sign_negative() {
        return Err(BisectFailure::NoSignChange);
    }
    loop {
        let gap = Float::with_val(prec, &b - &a).abs();
        if gap <= *width {
            break;
        }
        let mid = Float::with_val(prec, &a + &b) / 2u32;
        if mid == a || mid == b {
            return Err(BisectFailure::Stalled);
        }
        let fm = f(&mid);
        if fm.is_zero() {
            return Ok(mid);
        }
        if fm.is_sign_negative() == fa.is_sign_negative() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    if Float::with_val(prec, fa.abs_ref()) <= Float::with_val(prec, fb.abs_ref()) {
        Ok(a)
    } else {
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let prec = 192;
        let lo = Float::with_val(prec, 0);
        let hi = Float::with_val(prec, 2);
        let w = stop_width(prec, 1e-40, &Float::with_val(prec, 1));
        let r = bisect(|x| Float::with_val(prec, x * x) - 2u32, &lo, &hi, &w).unwrap();
        let err = (r - Float::with_val(prec, 2).sqrt()).abs();
        assert!(err < 1e-39);
    }

    #[test]
    fn reports_missing_sign_change() {
        let prec = 128;
        let lo = Float::with_val(prec, 3);
        let hi = Float::with_val(prec, 4);
        let w = Float::with_val(prec, 1e-20);
        assert_eq!(
            bisect(|x| Float::with_val(prec, x * x) - 2u32, &lo, &hi, &w),
            Err(BisectFailure::NoSignChange)
        );
    }

    #[test]
    fn stalls_when_width_is_unreachable() {
        let prec = 64;
        let lo = Float::with_val(prec, 1);
        let hi = Float::with_val(prec, 2);
        let w = Float::with_val(prec, 1e-40);
        assert_eq!(
            bisect(|x| Float::with_val(prec, x * x) - 2u32, &lo, &hi, &w),
            Err(BisectFailure::Stalled)
        );
    }

    #[test]
    fn floor_follows_precision() {
        let w = stop_width(192, 0.0, &Float::with_val(192, 1));
        // 192 bits carry 57 digits, so the floor is 1e-45
        assert!((w.to_f64() / 1e-45 - 1.0).abs() < 1e-9);
    }
}
