//! Bracketing root finder and a golden-section maximiser.

/// Tolerance on the argument for every threshold and indifference root.
pub const ROOT_TOL: f64 = 1e-10;

/// Root of a continuous monotone `f` on `[lo, hi]`, assuming `f(lo)` and
/// `f(hi)` have opposite signs (or one of them is zero). Works for either
/// direction of monotonicity.
pub fn bisect<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64, E> {
    let f_lo = f(lo)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let f_hi = f(hi)?;
    if f_hi == 0.0 {
        return Ok(hi);
    }
    let lo_negative = f_lo < 0.0;
    // No sign change: the root sits at an end, up to rounding in `f`.
    if (f_hi < 0.0) == lo_negative {
        return Ok(if f_lo.abs() <= f_hi.abs() { lo } else { hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if (v < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Maximiser of a unimodal `f` on `[lo, hi]`.
pub fn golden_max<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64, E> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        }
        if x1 >= x2 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    type Never = std::convert::Infallible;

    #[test]
    fn bisect_increasing_and_decreasing() {
        let r = bisect(|x| Ok::<_, Never>(x * x - 2.0), 0.0, 2.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
        let r = bisect(|x| Ok::<_, Never>(0.3 - x), 0.0, 1.0, 1e-12).unwrap();
        assert!((r - 0.3).abs() < 1e-11);
    }

    #[test]
    fn bisect_endpoint_roots() {
        assert_eq!(bisect(Ok::<_, Never>, 0.0, 1.0, 1e-12).unwrap(), 0.0);
        assert_eq!(bisect(|x| Ok::<_, Never>(x - 1.0), 0.0, 1.0, 1e-12).unwrap(), 1.0);
    }

    #[test]
    fn golden_finds_peak() {
        let m = golden_max(|x| Ok::<_, Never>(-(x - 0.7) * (x - 0.7)), 0.0, 3.0, 1e-12).unwrap();
        assert!((m - 0.7).abs() < 1e-7);
        let m = golden_max(|x: f64| Ok::<_, Never>(0.3 * x.ln() + 0.7 * (1.0 - x).ln()), 1e-15, 1.0 - 1e-15, 1e-13)
            .unwrap();
        assert!((m - 0.3).abs() < 1e-7);
    }
}
