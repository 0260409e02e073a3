//! Small deterministic numerical kernels: bracketing root search and
//! quadrature. Everything here works on plain `f64` closures.

use crate::error::{MechError, Result};

/// Absolute tolerance used by the first-order-condition solvers.
pub const SOLVER_TOL: f64 = 1e-10;
/// Iteration cap for bisection.
pub const MAX_BISECTION_ITERS: usize = 200;

/// Bisection on a bracket where `f(lo)` and `f(hi)` have opposite signs
/// (zero at either end counts as bracketed).
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(MechError::BracketFailure {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }
    let sa = fa.signum();
    for _ in 0..max_iter {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= tol || mid == a || mid == b {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == sa {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Root of a nondecreasing function on `[lo, hi]`, clamped to the bracket
/// when the function keeps one sign. Jumps are allowed: the result is the
/// point where the sign changes.
pub fn monotone_root<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    if f(lo) >= 0.0 {
        return lo;
    }
    if f(hi) <= 0.0 {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..MAX_BISECTION_ITERS {
        let mid = 0.5 * (a + b);
        if b - a <= tol || mid == a || mid == b {
            break;
        }
        if f(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Composite Simpson rule with `panels` panels (rounded up to even).
pub fn simpson<F>(f: F, a: f64, b: f64, panels: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let n = panels.max(2) + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let x = a + h * k as f64;
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    acc * h / 3.0
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> f64
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Cumulative trapezoid integral of sampled values; `out[0] = 0`.
pub fn cumulative_trapezoid(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    debug_assert_eq!(xs.len(), ys.len());
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    for k in 0..xs.len() {
        if k > 0 {
            acc += 0.5 * (xs[k] - xs[k - 1]) * (ys[k] + ys[k - 1]);
        }
        out.push(acc);
    }
    out
}

/// `count` evenly spaced points on `[lo, hi]` (both ends included).
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (count - 1) as f64;
            (0..count)
                .map(|k| if k + 1 == count { hi } else { lo + step * k as f64 })
                .collect()
        }
    }
}
