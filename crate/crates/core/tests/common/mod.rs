#![allow(dead_code)]

/// Double-exponential quadrature over `pieces` equal subintervals.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, pieces: usize) -> f64 {
    let h = (b - a) / pieces as f64;
    let mut parts: Vec<f64> = (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == pieces { b } else { lo + h };
            quadrature::integrate(&f, lo, hi, 1e-15).integral
        })
        .collect();
    parts.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    parts.iter().sum()
}

/// Root of an increasing function by bisection.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Mean and standard deviation of the density proportional to `exp(ln_f)`
/// on `(a, b)`, by quadrature after shifting by the maximum on a grid.
pub fn density_moments<F: Fn(f64) -> f64>(ln_f: F, a: f64, b: f64) -> (f64, f64) {
    let grid = 4000;
    let peak = (1..grid)
        .map(|i| ln_f(a + (b - a) * i as f64 / grid as f64))
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let w = |x: f64| {
        let l = ln_f(x);
        if l.is_finite() {
            (l - peak).exp()
        } else {
            0.0
        }
    };
    let z = integrate(w, a, b, 64);
    let m = integrate(|x| x * w(x), a, b, 64) / z;
    let v = integrate(|x| (x - m).powi(2) * w(x), a, b, 64) / z;
    (m, v.sqrt())
}

/// Error-free accumulation with a two-sum carry.
pub fn exact_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = s + x;
        let bp = t - s;
        c += (s - (t - bp)) + (x - bp);
        s = t;
    }
    s + c
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}
