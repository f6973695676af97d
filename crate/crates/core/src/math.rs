//! Small numeric toolkit: libm-backed float helpers (so the crate builds
//! without `std`), plain bisection, and the Poisson-binomial distribution.

use alloc::vec;
use alloc::vec::Vec;

#[inline]
pub(crate) fn powf(base: f64, exp: f64) -> f64 {
    libm::pow(base, exp)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// Bisection on `[lo, hi]`, requiring a sign change across the bracket.
/// Runs at most `max_iter` halvings and stops early once the bracket width
/// drops below `tol`.
pub(crate) fn bisect<F>(mut lo: f64, mut hi: f64, tol: f64, max_iter: u32, f: F) -> f64
where
    F: Fn(f64) -> f64,
{
    let flo = f(lo);
    let fhi = f(hi);
    debug_assert!(
        flo == 0.0 || fhi == 0.0 || (flo < 0.0) != (fhi < 0.0),
        "bisect: bracket does not straddle a sign change"
    );
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    let lo_negative = flo < 0.0;
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if (fmid < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < tol {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Probability mass function of a sum of independent Bernoulli variables
/// with the given success probabilities. `pmf[k] = P(sum = k)`, length
/// `probs.len() + 1`. O(n^2) dynamic program, exact up to float rounding.
pub(crate) fn poisson_binomial_pmf(probs: &[f64]) -> Vec<f64> {
    let mut pmf = vec![0.0; probs.len() + 1];
    pmf[0] = 1.0;
    for (count, &p) in probs.iter().enumerate() {
        for k in (0..=count + 1).rev() {
            let stay = if k <= count { pmf[k] * (1.0 - p) } else { 0.0 };
            let up = if k > 0 { pmf[k - 1] * p } else { 0.0 };
            pmf[k] = stay + up;
        }
    }
    pmf
}
