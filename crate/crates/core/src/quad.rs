//! Adaptive Simpson quadrature.

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The recursion halves the tolerance at each split and applies Richardson
/// extrapolation to accepted panels. `max_depth` bounds the recursion; a
/// panel that reaches it is accepted as is.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_functions() {
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12, 50);
        assert!((v - 2.0).abs() < 1e-11);
        let g = adaptive_simpson(&|x: f64| (-x * x).exp(), -10.0, 10.0, 1e-12, 50);
        assert!((g - std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(adaptive_simpson(&|x: f64| x, 1.0, 1.0, 1e-9, 10), 0.0);
    }
}
