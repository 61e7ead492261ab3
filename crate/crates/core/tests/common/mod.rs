//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    // Composite over fixed panels so a narrow peak cannot fall between the
    // first few nodes.
    let panels = 256;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let (lo, hi) = (a + h * i as f64, if i + 1 == panels { b } else { a + h * (i + 1) as f64 });
            let (fa, fb) = (f(lo), f(hi));
            let (m, fm, whole) = simpson(f, lo, fa, hi, fb);
            recurse(f, lo, fa, hi, fb, m, fm, whole, tol / panels as f64, 50)
        })
        .sum()
}

/// Mean and variance of the density proportional to `exp(log_kernel)` on `[a, b]`.
pub fn moments_1d<F: Fn(f64) -> f64>(log_kernel: F, a: f64, b: f64) -> (f64, f64) {
    // Shift by the maximum on a coarse grid to avoid overflow.
    let shift = (0..=2000).map(|i| log_kernel(a + (b - a) * i as f64 / 2000.0)).fold(f64::NEG_INFINITY, f64::max);
    let k = |x: f64| (log_kernel(x) - shift).exp();
    let z = adaptive_simpson(&k, a, b, 1e-12);
    let m1 = adaptive_simpson(&|x| x * k(x), a, b, 1e-12) / z;
    let m2 = adaptive_simpson(&|x| (x - m1) * (x - m1) * k(x), a, b, 1e-12) / z;
    (m1, m2)
}

/// Means and variances of a 2-D density `exp(log_kernel)` on a box, by
/// nested adaptive quadrature.
pub fn moments_2d<F: Fn(f64, f64) -> f64>(log_kernel: F, bx: (f64, f64), by: (f64, f64)) -> ([f64; 2], [f64; 2]) {
    let n = 200;
    let mut shift = f64::NEG_INFINITY;
    for i in 0..=n {
        for j in 0..=n {
            let x = bx.0 + (bx.1 - bx.0) * i as f64 / n as f64;
            let y = by.0 + (by.1 - by.0) * j as f64 / n as f64;
            shift = shift.max(log_kernel(x, y));
        }
    }
    let k = |x: f64, y: f64| (log_kernel(x, y) - shift).exp();
    let integrate = |g: &dyn Fn(f64, f64) -> f64| {
        adaptive_simpson(&|x| adaptive_simpson(&|y| g(x, y), by.0, by.1, 1e-10), bx.0, bx.1, 1e-9)
    };
    let z = integrate(&|x, y| k(x, y));
    let mx = integrate(&|x, y| x * k(x, y)) / z;
    let my = integrate(&|x, y| y * k(x, y)) / z;
    let vx = integrate(&|x, y| (x - mx) * (x - mx) * k(x, y)) / z;
    let vy = integrate(&|x, y| (y - my) * (y - my) * k(x, y)) / z;
    ([mx, my], [vx, vy])
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Cox–de Boor recursion evaluated directly from the definition.
pub fn de_boor(knots: &[f64], i: usize, k: usize, x: f64, last: bool) -> f64 {
    if k == 1 {
        let (a, b) = (knots[i], knots[i + 1]);
        return if (a <= x && x < b) || (last && x == b && a < b) { 1.0 } else { 0.0 };
    }
    let mut v = 0.0;
    let d1 = knots[i + k - 1] - knots[i];
    if d1 > 0.0 {
        v += (x - knots[i]) / d1 * de_boor(knots, i, k - 1, x, last);
    }
    let d2 = knots[i + k] - knots[i + 1];
    if d2 > 0.0 {
        v += (knots[i + k] - x) / d2 * de_boor(knots, i + 1, k - 1, x, last);
    }
    v
}

/// Kolmogorov–Smirnov statistic of a sample against a CDF.
pub fn ks_statistic(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = cdf(*x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}
