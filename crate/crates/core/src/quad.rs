//! Adaptive Simpson quadrature.

/// Integrates `f` over `[a, b]` to an absolute error of roughly `tol`.
///
/// Uses the classic Richardson-corrected recursion. Every branch is split at
/// least `MIN_DEPTH` times so sharply peaked integrands are not accepted on a
/// lucky first comparison; recursion stops after `MAX_DEPTH` halvings.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 0)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || (depth >= MIN_DEPTH && delta.abs() <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    let half = 0.5 * tol;
    recurse(f, a, m, fa, flm, fm, left, half, depth + 1)
        + recurse(f, m, b, fm, frm, fb, right, half, depth + 1)
}

const MIN_DEPTH: u32 = 4;
const MAX_DEPTH: u32 = 50;

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn integrates_sine() {
        let v = adaptive_simpson(&|t: f64| t.sin(), 0.0, PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn peaked_integrand() {
        // Wallis: integral of sin^400 over [0, pi].
        let n = 400;
        let v = adaptive_simpson(&|t: f64| t.sin().powi(n), 0.0, PI, 1e-12);
        let mut wallis = PI;
        for k in 1..=(n / 2) {
            wallis *= (2 * k - 1) as f64 / (2 * k) as f64;
        }
        assert!((v - wallis).abs() < 1e-10, "{v} vs {wallis}");
    }

    #[test]
    fn empty_interval() {
        assert_eq!(adaptive_simpson(&|t: f64| t, 1.0, 1.0, 1e-10), 0.0);
    }
}
