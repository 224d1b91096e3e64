//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below the requested tolerance. Integrands here are
//! piecewise smooth, so callers pass the known kinks as breakpoints and every
//! piece starts out smooth.

use crate::error::{Error, Result};

/// Absolute tolerance used for every Choquet integral in the crate.
pub const ABS_TOL: f64 = 1e-10;

const MAX_INTERVALS: usize = 4000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
struct Piece {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Piece {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, &x) in XGK.iter().enumerate().take(7) {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Piece {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrate `f` over `[lo, hi]`, splitting first at every breakpoint that
/// falls strictly inside the interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, breakpoints: &[f64]) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|b| *b > lo && *b < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut pieces = Vec::with_capacity(cuts.len() + 16);
    let mut left = lo;
    for c in cuts.into_iter().chain(std::iter::once(hi)) {
        pieces.push(gauss_kronrod(&f, left, c));
        left = c;
    }

    loop {
        let value: f64 = pieces.iter().map(|p| p.value).sum();
        let error: f64 = pieces.iter().map(|p| p.error).sum();
        let tol = ABS_TOL.max(1e-13 * value.abs());
        if error <= tol {
            return Ok(value);
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::Accuracy {
                achieved: error,
                requested: tol,
            });
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .expect("at least one piece");
        let p = pieces.swap_remove(worst);
        let mid = 0.5 * (p.lo + p.hi);
        if mid <= p.lo || mid >= p.hi {
            return Err(Error::Accuracy {
                achieved: error,
                requested: tol,
            });
        }
        pieces.push(gauss_kronrod(&f, p.lo, mid));
        pieces.push(gauss_kronrod(&f, mid, p.hi));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 3.0, &[]).unwrap();
        assert!((v - (81.0 / 4.0 - 9.0)).abs() < 1e-13);
    }

    #[test]
    fn exponential_tail() {
        let v = integrate(|x: f64| (-x).exp(), 0.0, 40.0, &[]).unwrap();
        assert!((v - (1.0 - (-40.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn kink_at_breakpoint() {
        let v = integrate(|x: f64| (x - 1.3).abs(), 0.0, 2.0, &[1.3]).unwrap();
        assert!((v - (1.3 * 1.3 / 2.0 + 0.7 * 0.7 / 2.0)).abs() < 1e-14);
    }

    #[test]
    fn kink_without_breakpoint_still_converges() {
        let v = integrate(|x: f64| (x - 1.3).abs(), 0.0, 2.0, &[]).unwrap();
        assert!((v - 1.09).abs() < 1e-9);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(integrate(|_| 1.0, 2.0, 2.0, &[]).unwrap(), 0.0);
    }
}
