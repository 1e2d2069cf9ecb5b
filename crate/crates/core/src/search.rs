//! One-dimensional search routines shared by the optimizer and the
//! response calibration.

use crate::Scalar;

/// Golden ratio conjugate, `(sqrt(5) - 1) / 2`.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOutcome<T> {
    pub x: T,
    pub value: T,
    pub evaluations: usize,
}

/// Tracks the best point seen so that boundary optima are reported exactly.
struct Best<T> {
    x: T,
    value: T,
}

impl<T: Scalar> Best<T> {
    fn offer(&mut self, x: T, value: T) {
        if value > self.value || (value == self.value && x < self.x) {
            self.x = x;
            self.value = value;
        }
    }
}

/// Maximizes a unimodal `f` on `[lo, hi]` by golden-section search.
///
/// Stops once the bracket is narrower than `max(rel_tol·|x|, abs_tol)` or
/// after `max_iter` reductions. The endpoints are evaluated too, and the best
/// point seen is returned.
pub fn golden_section_max<T, F>(
    mut f: F,
    lo: T,
    hi: T,
    rel_tol: T,
    abs_tol: T,
    max_iter: usize,
) -> SearchOutcome<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let ratio = T::lit(INV_PHI);
    let mut evaluations = 0usize;
    let mut eval = |x: T, n: &mut usize| {
        *n += 1;
        f(x)
    };

    let fa = eval(a, &mut evaluations);
    let mut best = Best { x: a, value: fa };
    let fb = eval(b, &mut evaluations);
    best.offer(b, fb);

    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = eval(c, &mut evaluations);
    let mut fd = eval(d, &mut evaluations);
    best.offer(c, fc);
    best.offer(d, fd);

    for _ in 0..max_iter {
        let mid = (a + b) / T::lit(2.0);
        if b - a <= (rel_tol * mid.abs()).max(abs_tol) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = eval(c, &mut evaluations);
            best.offer(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = eval(d, &mut evaluations);
            best.offer(d, fd);
        }
    }

    SearchOutcome {
        x: best.x,
        value: best.value,
        evaluations,
    }
}

/// Scans `points` evenly spaced abscissae on `[lo, hi]`, brackets the best
/// grid point by its neighbours and refines it with golden-section search.
///
/// The scan keeps a multimodal `f` from trapping the refinement in a lesser
/// local maximum, down to the grid resolution.
pub fn scan_then_refine_max<T, F>(
    mut f: F,
    lo: T,
    hi: T,
    points: usize,
    rel_tol: T,
    max_iter: usize,
) -> SearchOutcome<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let points = points.max(3);
    let last = points - 1;
    let step = (hi - lo) / T::lit(last as f64);
    let grid = |i: usize| {
        if i == last {
            hi
        } else {
            lo + step * T::lit(i as f64)
        }
    };

    let mut best_i = 0;
    let mut best_v = T::neg_infinity();
    for i in 0..points {
        let v = f(grid(i));
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }

    let left = grid(best_i.saturating_sub(1));
    let right = grid((best_i + 1).min(last));
    let abs_tol = T::epsilon() * (hi.abs().max(lo.abs()));
    let refined = golden_section_max(&mut f, left, right, rel_tol, abs_tol, max_iter);
    let evaluations = points + refined.evaluations;
    if refined.value >= best_v {
        SearchOutcome {
            evaluations,
            ..refined
        }
    } else {
        SearchOutcome {
            x: grid(best_i),
            value: best_v,
            evaluations,
        }
    }
}

/// Smallest `x` in `[lo, hi]` with `f(x) >= target`, for `f` non-decreasing
/// on the interval and `f(lo) < target <= f(hi)`. Returns the upper end of
/// the final bracket, so `f(x) >= target` holds on return.
pub fn bisect_increasing<T, F>(mut f: F, lo: T, hi: T, target: T, max_iter: usize) -> T
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let (mut a, mut b) = (lo, hi);
    for _ in 0..max_iter {
        let mid = a + (b - a) / T::lit(2.0);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid) >= target {
            b = mid;
        } else {
            a = mid;
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let out = golden_section_max(|x: f64| -(x - 0.2).powi(2), -1.0, 1.0, 1e-10, 1e-12, 500);
        assert!((out.x - 0.2).abs() < 1e-7);
    }

    #[test]
    fn golden_returns_exact_boundary() {
        let out = golden_section_max(|x: f64| -x, 0.0, 5.0, 1e-9, 1e-12, 500);
        assert_eq!(out.x, 0.0);
        let out = golden_section_max(|x: f64| x, 0.0, 5.0, 1e-9, 1e-12, 500);
        assert_eq!(out.x, 5.0);
    }

    #[test]
    fn scan_escapes_local_maximum() {
        // lesser peak at 1, global peak at 8
        let f = |x: f64| (-(x - 1.0).powi(2)).exp() + 2.0 * (-(x - 8.0).powi(2)).exp();
        let out = scan_then_refine_max(f, 0.0, 10.0, 1000, 1e-10, 500);
        assert!((out.x - 8.0).abs() < 1e-4, "{out:?}");
    }

    #[test]
    fn bisection_hits_target_from_above() {
        let x = bisect_increasing(|x: f64| x * x, 0.0, 2.0, 2.0, 200);
        assert!((x - 2f64.sqrt()).abs() < 1e-14);
        assert!(x * x >= 2.0);
    }
}
