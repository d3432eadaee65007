use super::Rng;

/// Exact draw from a univariate log-concave density by ratio-of-uniforms
/// with mode shift.
///
/// `log_density` may be unnormalized; `d_log_density` is its derivative and
/// must be strictly decreasing (log-concavity); `mode` is its root. The
/// bounding rectangle is found by bisection, so the caller only supplies the
/// density and the location of the mode.
pub fn sample_log_concave<F, D>(rng: &mut Rng, log_density: F, d_log_density: D, mode: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let l_mode = log_density(mode);
    // v-extent: extrema of (x - mode) * sqrt(g(x) / g(mode)) on either side
    let v_at = |x: f64| (x - mode) * (0.5 * (log_density(x) - l_mode)).exp();
    let stationary = |dir: f64| {
        // root of 1 + (x - mode) * l'(x) / 2 on the `dir` side of the mode
        let q = |x: f64| 1.0 + 0.5 * (x - mode) * d_log_density(x);
        let mut step = 1.0;
        while q(mode + dir * step) > 0.0 {
            step *= 2.0;
            if step > 1e12 {
                break;
            }
        }
        let (mut lo, mut hi) = (0.0, step);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if q(mode + dir * mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-13 * hi {
                break;
            }
        }
        // small slack so bisection error never clips the region
        v_at(mode + dir * 0.5 * (lo + hi)) * (1.0 + 1e-9)
    };
    let v_plus = stationary(1.0);
    let v_minus = stationary(-1.0);
    loop {
        let u = rng.uniform();
        let v = v_minus + (v_plus - v_minus) * rng.uniform();
        let x = mode + v / u;
        if 2.0 * u.ln() <= log_density(x) - l_mode {
            return x;
        }
    }
}

/// Generalized inverse Gaussian draw with density proportional to
/// `x^(lambda - 1) exp(-(chi / x + psi * x) / 2)`, `chi, psi > 0`.
///
/// Sampled on the log scale, where the density is log-concave for every
/// parameter value.
pub fn sample_gig(rng: &mut Rng, lambda: f64, chi: f64, psi: f64) -> f64 {
    let a = 0.5 * psi;
    let b = 0.5 * chi;
    let disc = (lambda * lambda + 4.0 * a * b).sqrt();
    // positive root of a y^2 - lambda y - b = 0, in the cancellation-free form
    let y_mode = if lambda >= 0.0 {
        (lambda + disc) / (2.0 * a)
    } else {
        2.0 * b / (disc - lambda)
    };
    let mode = y_mode.ln();
    let log_density = |x: f64| lambda * x - a * x.exp() - b * (-x).exp();
    let d_log_density = |x: f64| lambda - a * x.exp() + b * (-x).exp();
    sample_log_concave(rng, log_density, d_log_density, mode).exp()
}
