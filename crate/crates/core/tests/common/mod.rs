//! Oracles shared by the integration tests: adaptive quadrature, closed-form
//! densities written out independently of the library, and Monte Carlo
//! standard errors.

#![allow(dead_code)]

use std::f64::consts::PI;

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn adapt(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, whole: f64, m: f64, fm: f64, tol: f64, depth: u32) -> f64 {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adapt(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
        + adapt(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to relative accuracy `rtol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rtol: f64) -> f64 {
    let f: &dyn Fn(f64) -> f64 = &f;
    // a fixed pre-split keeps narrow peaks from slipping between the nodes
    let pieces = 256;
    let w = (b - a) / pieces as f64;
    let nodes: Vec<(f64, f64)> = (0..=pieces).map(|k| (a + k as f64 * w, f(a + k as f64 * w))).collect();
    let coarse: Vec<(f64, f64, f64)> = nodes.windows(2).map(|p| simpson(f, p[0].0, p[0].1, p[1].0, p[1].1)).collect();
    let scale: f64 = coarse.iter().map(|c| c.2.abs()).sum();
    let tol = (rtol * scale / pieces as f64).max(f64::MIN_POSITIVE);
    nodes
        .windows(2)
        .zip(&coarse)
        .map(|(p, &(m, fm, whole))| adapt(f, p[0].0, p[0].1, p[1].0, p[1].1, whole, m, fm, tol, 24))
        .sum()
}

/// `int_0^inf g(x) dx` through `x = exp(s)`, for `g` with power-law ends.
pub fn integrate_positive(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    integrate(
        |s| {
            let x = s.exp();
            let v = g(x) * x;
            if v.is_finite() { v } else { 0.0 }
        },
        lo,
        hi,
        1e-12,
    )
}

/// Lanczos log-gamma, separate from the library's special functions.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = C[0];
    for (k, c) in C.iter().enumerate().skip(1) {
        acc += c / (x + k as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Scaled F density: `theta / scale ~ F(2a, 2c)`, written from the beta-function form.
pub fn f_pdf(theta: f64, a: f64, c: f64, scale: f64) -> f64 {
    let x = theta / scale;
    let ln_b = ln_gamma(a) + ln_gamma(c) - ln_gamma(a + c);
    let ln = a * (a / c).ln() + (a - 1.0) * x.ln() - (a + c) * (1.0 + a * x / c).ln() - ln_b;
    ln.exp() / scale
}

/// Univariate Student t density with scale `s2` (variance-like).
pub fn t_pdf(x: f64, dof: f64, s2: f64) -> f64 {
    let ln = ln_gamma(0.5 * (dof + 1.0)) - ln_gamma(0.5 * dof) - 0.5 * (dof * PI * s2).ln()
        - 0.5 * (dof + 1.0) * (1.0 + x * x / (dof * s2)).ln();
    ln.exp()
}

/// Gamma(shape, rate) density.
pub fn gamma_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    (shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(shape)).exp()
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

/// Standard error of the sample mean of iid draws.
pub fn se_mean(x: &[f64]) -> f64 {
    (variance(x) / x.len() as f64).sqrt()
}

/// Standard error of the sample variance of iid draws.
pub fn se_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    let n = x.len() as f64;
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    ((m4 - m2 * m2) / n).sqrt()
}

/// Batch-means standard error of the mean of a correlated sequence.
pub fn se_batch_means(x: &[f64], batches: usize) -> f64 {
    let size = x.len() / batches;
    let means: Vec<f64> = (0..batches).map(|k| mean(&x[k * size..(k + 1) * size])).collect();
    (variance(&means) / batches as f64).sqrt()
}

/// `|a - b| / sqrt(se_a^2 + se_b^2)`.
pub fn z_score(a: f64, se_a: f64, b: f64, se_b: f64) -> f64 {
    (a - b).abs() / (se_a * se_a + se_b * se_b).sqrt()
}
