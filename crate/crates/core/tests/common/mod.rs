#![allow(dead_code)]

/// Composite Simpson rule on `[a, b]` with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

/// Kolmogorov-Smirnov distance between a sample and a CDF.
pub fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at significance 1e-3.
pub fn ks_critical_1e3(n: usize) -> f64 {
    1.949_5 / (n as f64).sqrt()
}

/// Unit-norm Gaussian amplitude, written out independently of the library.
pub fn amp(width: f64, center: f64, x: f64) -> f64 {
    (std::f64::consts::PI * width * width).powf(-0.25)
        * (-(x - center).powi(2) / (2.0 * width * width)).exp()
}
