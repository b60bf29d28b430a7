//! Bracketing root finder for smooth scalar functions on an interval.

/// Uniform derivative samples per interval.
pub const ROOT_SCAN_SAMPLES: usize = 2000;
/// Bisection stops once the bracket is this narrow.
const BISECT_WIDTH: f64 = 1e-10;

/// Bisects a sign change of `f` on `[lo, hi]` until the bracket is narrower
/// than `1e-10`.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > BISECT_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All sign changes of `f` over `samples` uniform cells of `[lo, hi]`,
/// refined by bisection.
pub fn scan_roots<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    if !(hi > lo) {
        return roots;
    }
    let step = (hi - lo) / samples as f64;
    let at = |i: usize| if i == samples { hi } else { lo + step * i as f64 };
    let mut prev_x = at(0);
    let mut prev = f(prev_x);
    if prev == 0.0 {
        roots.push(prev_x);
    }
    for i in 1..=samples {
        let x = at(i);
        let v = f(x);
        if v == 0.0 {
            roots.push(x);
        } else if prev != 0.0 && (v > 0.0) != (prev > 0.0) {
            roots.push(bisect(f, prev_x, x));
        }
        prev_x = x;
        prev = v;
    }
    roots
}
