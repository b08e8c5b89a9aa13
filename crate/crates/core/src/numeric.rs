//! Bisection and adaptive Simpson quadrature.

use crate::scalar::Real;

const MAX_BISECTIONS: usize = 400;
const MAX_SIMPSON_DEPTH: u32 = 48;
const MAX_PANELS: usize = 4096;

/// Boundary of a monotone predicate that is false at `lo` and true at `hi`.
///
/// Returns a point where the predicate holds, within `tol` of the boundary
/// (or at adjacent floats when `tol` is below the local spacing).
pub fn bisect<T: Real>(mut lo: T, mut hi: T, tol: T, pred: impl Fn(T) -> bool) -> T {
    let two = T::lit(2.0);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Doubles `start` until the predicate holds; `None` if it never does before overflow.
pub fn bracket_above<T: Real>(start: T, pred: impl Fn(T) -> bool) -> Option<T> {
    let mut hi = start.max(T::one());
    for _ in 0..2100 {
        if !hi.is_finite() {
            return None;
        }
        if pred(hi) {
            return Some(hi);
        }
        hi = hi * T::lit(2.0);
    }
    None
}

fn simpson<T: Real>(fa: T, fm: T, fb: T, a: T, b: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Real>(
    f: &impl Fn(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    eps: T,
    depth: u32,
) -> T {
    let two = T::lit(2.0);
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::lit(15.0) * eps {
        return left + right + delta / T::lit(15.0);
    }
    simpson_step(f, a, m, fa, flm, fm, left, eps / two, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, eps / two, depth - 1)
}

/// Adaptive Simpson integral of `f` over `[a, b]` with relative tolerance `rel_tol`.
pub fn integrate<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, rel_tol: T) -> T {
    if b <= a {
        return T::zero();
    }
    // A 16-panel composite rule sets the scale for the relative tolerance.
    let n = 16usize;
    let h = (b - a) / T::count(n);
    let mut coarse = T::zero();
    for k in 0..n {
        let x0 = a + h * T::count(k);
        let x1 = x0 + h;
        coarse = coarse + simpson(f(x0), f((x0 + x1) / T::lit(2.0)), f(x1), x0, x1);
    }
    let eps = (rel_tol * coarse.abs()).max(T::min_positive_value().sqrt());
    let (fa, fm, fb) = (f(a), f((a + b) / T::lit(2.0)), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    simpson_step(f, a, b, fa, fm, fb, whole, eps, MAX_SIMPSON_DEPTH)
}

/// Integral of `f` from `a` upward over panels of doubling width, starting at
/// `width`, until `stop(edge)` holds at a panel edge.
///
/// Returns the accumulated integral and the final edge.
pub fn integrate_doubling<T: Real>(
    f: &impl Fn(T) -> T,
    a: T,
    width: T,
    rel_tol: T,
    stop: impl Fn(T) -> bool,
) -> (T, T) {
    let mut lo = a;
    let mut w = width;
    let mut total = T::zero();
    for _ in 0..MAX_PANELS {
        if stop(lo) {
            break;
        }
        let hi = lo + w;
        total = total + integrate(f, lo, hi, rel_tol);
        lo = hi;
        w = w * T::lit(2.0);
    }
    (total, lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_square_root() {
        let r = bisect(0.0_f64, 2.0, 1e-12, |x| x * x >= 2.0);
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn simpson_integrates_polynomials_and_exponentials() {
        let cubic = integrate(&|x: f64| x * x * x, 0.0, 2.0, 1e-10);
        assert!((cubic - 4.0).abs() < 1e-12);
        let e = integrate(&|x: f64| x.exp(), 0.0, 1.0, 1e-10);
        assert!((e - (1f64.exp() - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn doubling_panels_reach_a_tail_cutoff() {
        let (val, edge) = integrate_doubling(&|x: f64| (-x).exp(), 0.0, 1.0, 1e-10, |x| (-x).exp() < 1e-14);
        assert!(edge > 30.0);
        assert!((val - 1.0).abs() < 1e-9);
    }

    #[test]
    fn works_in_single_precision() {
        let v = integrate(&|x: f32| x * x, 0.0, 3.0, 1e-5);
        assert!((v - 9.0).abs() < 1e-3);
    }
}
