//! Individual updates of the shrinkage block. Each function is a single
//! conditional draw (or one Metropolis–Hastings transition) and is usable on
//! its own; [`super::Sampler`] strings them together in algorithm order.

use nalgebra::{DMatrix, DVector};

use crate::distributions::{
    beta_raw, gamma_raw, inv_gamma_raw, mvt_logdensity, sample_gig, standard_normal, BetaParams, FParams, GammaParams,
    InvGammaParams, Rng,
};
use crate::error::{Error, Result};
use crate::shrinkage::{sticks_to_cusp, CuspDraw, EspSpec, StickBreakingSpec};

/// Index drawn with probability proportional to `exp(log_weights)` (Gumbel-max).
pub fn categorical_log(rng: &mut Rng, log_weights: &[f64]) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &lw) in log_weights.iter().enumerate() {
        if lw == f64::NEG_INFINITY {
            continue;
        }
        let g = lw - (-rng.uniform().ln()).ln();
        if g > best_val {
            best_val = g;
            best = i;
        }
    }
    best
}

/// `log(exp(a) + exp(b))`.
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `P(S_h = 1 | theta_h)` under prior slab probability `q_a`, with the
/// column's `b` integrated out: spike `nu0 * F`, slab `F`.
pub fn slab_probability_f(theta: f64, nu0: f64, q_a: f64, slab: &FParams) -> f64 {
    let spike = slab.with_scale(nu0).expect("nu0 is positive");
    let l1 = q_a.ln() + slab.ln_pdf(theta);
    let l0 = (-q_a).ln_1p() + spike.ln_pdf(theta);
    1.0 / (1.0 + (l0 - l1).exp())
}

/// Draw every `S_h` from its two-point law given `theta_h` (F classification).
pub fn step_classify_f(rng: &mut Rng, theta: &[f64], nu0: f64, q_a: f64, slab: &FParams) -> Result<Vec<bool>> {
    let spike = slab.with_scale(nu0)?;
    let (lq1, lq0) = (q_a.ln(), (-q_a).ln_1p());
    Ok(theta
        .iter()
        .map(|&t| categorical_log(rng, &[lq0 + spike.ln_pdf(t), lq1 + slab.ln_pdf(t)]) == 1)
        .collect())
}

/// Log density of column `beta_h` with `theta_h` integrated out:
/// `t_{2c}(0, (s kappa b / c) Sigma)` where `s = nu0` for the spike and 1 for the slab.
pub fn column_t_logdensity(
    beta_col: &[f64],
    sigma2: &[f64],
    b: f64,
    kappa: f64,
    scale: f64,
    c_theta: f64,
) -> Result<f64> {
    mvt_logdensity(beta_col, 2.0 * c_theta, sigma2, scale * kappa * b / c_theta)
}

/// Draw every `S_h` with `theta_h` integrated out (t classification).
#[allow(clippy::too_many_arguments)]
pub fn step_classify_t(
    rng: &mut Rng,
    beta: &DMatrix<f64>,
    b: &[f64],
    kappa: f64,
    sigma2: &DVector<f64>,
    nu0: f64,
    q_a: f64,
    c_theta: f64,
) -> Result<Vec<bool>> {
    let s2 = sigma2.as_slice();
    let (lq1, lq0) = (q_a.ln(), (-q_a).ln_1p());
    (0..beta.ncols())
        .map(|h| {
            let col = beta.column(h);
            let col = col.as_slice();
            let l1 = lq1 + column_t_logdensity(col, s2, b[h], kappa, 1.0, c_theta)?;
            let l0 = lq0 + column_t_logdensity(col, s2, b[h], kappa, nu0, c_theta)?;
            Ok(categorical_log(rng, &[l0, l1]) == 1)
        })
        .collect()
}

/// `tau_h ~ Beta(a0 + S_h, b0 + 1 - S_h)`.
pub fn step_sample_tau(rng: &mut Rng, s: &[bool], a0: f64, b0: f64) -> Vec<f64> {
    s.iter()
        .map(|&active| {
            let k = f64::from(u8::from(active));
            beta_raw(rng, a0 + k, b0 + 1.0 - k)
        })
        .collect()
}

/// Unnormalized log posterior of the strength given `H*` active columns,
/// with the slab probabilities integrated out:
/// `log p(alpha) + H* log q_A + (H - H*) log(1 - q_A)`.
pub fn ln_alpha_posterior(alpha: f64, hstar: usize, esp: &EspSpec, prior: &GammaParams) -> f64 {
    if !(alpha > 0.0) {
        return f64::NEG_INFINITY;
    }
    let Ok(q) = esp.slab_prob_mean(alpha) else {
        return f64::NEG_INFINITY;
    };
    let active = hstar as f64;
    let inactive = (esp.h - hstar) as f64;
    prior.ln_pdf_unnormalized(alpha) + active * q.ln() + inactive * (-q).ln_1p()
}

/// One random-walk step on `log x`; returns the new value and whether it moved.
fn log_scale_mh<F: Fn(f64) -> f64>(rng: &mut Rng, x: f64, step: f64, ln_target: F) -> (f64, bool) {
    let proposal = x * (step * standard_normal(rng)).exp();
    // the log x parametrization contributes the Jacobian x
    let log_ratio = ln_target(proposal) + proposal.ln() - ln_target(x) - x.ln();
    if log_ratio >= 0.0 || rng.uniform().ln() < log_ratio {
        (proposal, true)
    } else {
        (x, false)
    }
}

/// Metropolis–Hastings update of the strength `alpha` given `H*`.
pub fn step_sample_alpha(
    rng: &mut Rng,
    alpha: f64,
    hstar: usize,
    esp: &EspSpec,
    prior: &GammaParams,
    step: f64,
) -> (f64, bool) {
    log_scale_mh(rng, alpha, step, |a| ln_alpha_posterior(a, hstar, esp, prior))
}

/// Unnormalized log posterior of the deflator given `theta` and `tau`,
/// with indicators and the `b` variables integrated out; the gamma prior is
/// truncated to `(0, 1)`.
pub fn ln_nu0_posterior(nu0: f64, theta: &[f64], tau: &[f64], prior: &GammaParams, slab: &FParams) -> f64 {
    if !(nu0 > 0.0 && nu0 < 1.0) {
        return f64::NEG_INFINITY;
    }
    let spike = slab.with_scale(nu0).expect("nu0 is positive");
    let mut lp = prior.ln_pdf_unnormalized(nu0);
    for (&t, &w) in theta.iter().zip(tau) {
        lp += log_add((-w).ln_1p() + spike.ln_pdf(t), w.ln() + slab.ln_pdf(t));
    }
    lp
}

/// Metropolis–Hastings update of `nu0` for F classification.
pub fn step_sample_nu0(
    rng: &mut Rng,
    nu0: f64,
    theta: &[f64],
    tau: &[f64],
    prior: &GammaParams,
    slab: &FParams,
    step: f64,
) -> (f64, bool) {
    log_scale_mh(rng, nu0, step, |v| ln_nu0_posterior(v, theta, tau, prior, slab))
}

/// Unnormalized log posterior of the deflator with `theta` and the indicators
/// integrated out (mixture of multivariate t densities of the loading columns).
#[allow(clippy::too_many_arguments)]
pub fn ln_nu0_marginal_posterior(
    nu0: f64,
    beta: &DMatrix<f64>,
    b: &[f64],
    tau: &[f64],
    kappa: f64,
    sigma2: &DVector<f64>,
    prior: &GammaParams,
    c_theta: f64,
) -> f64 {
    if !(nu0 > 0.0 && nu0 < 1.0) {
        return f64::NEG_INFINITY;
    }
    let s2 = sigma2.as_slice();
    let mut lp = prior.ln_pdf_unnormalized(nu0);
    for h in 0..beta.ncols() {
        let col = beta.column(h);
        let col = col.as_slice();
        let (Ok(spike), Ok(slab)) = (
            column_t_logdensity(col, s2, b[h], kappa, nu0, c_theta),
            column_t_logdensity(col, s2, b[h], kappa, 1.0, c_theta),
        ) else {
            return f64::NEG_INFINITY;
        };
        lp += log_add((-tau[h]).ln_1p() + spike, tau[h].ln() + slab);
    }
    lp
}

/// Metropolis–Hastings update of `nu0` for t classification.
#[allow(clippy::too_many_arguments)]
pub fn step_sample_nu0_marginal(
    rng: &mut Rng,
    nu0: f64,
    beta: &DMatrix<f64>,
    b: &[f64],
    tau: &[f64],
    kappa: f64,
    sigma2: &DVector<f64>,
    prior: &GammaParams,
    c_theta: f64,
    step: f64,
) -> (f64, bool) {
    log_scale_mh(rng, nu0, step, |v| {
        ln_nu0_marginal_posterior(v, beta, b, tau, kappa, sigma2, prior, c_theta)
    })
}

/// `sum_i beta_ih^2 / sigma2_i` for every column.
pub fn scaled_column_norms(beta: &DMatrix<f64>, sigma2: &DVector<f64>) -> Vec<f64> {
    (0..beta.ncols())
        .map(|h| {
            beta.column(h)
                .iter()
                .zip(sigma2.iter())
                .map(|(b, s)| b * b / s)
                .sum()
        })
        .collect()
}

/// Which of the pair `(b_h, theta_h)` is drawn first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaOrder {
    BThenTheta,
    ThetaThenB,
}

/// Conditional updates of the column variances and their gamma mixing
/// variables:
/// `b_h ~ Gamma(a + c, a/c + s_h / theta_h)` and
/// `theta_h ~ InvGamma(c + m/2, s_h b_h + norms_h / (2 kappa))`, `s_h = nu0^(1 - S_h)`.
#[allow(clippy::too_many_arguments)]
pub fn step_sample_theta_b(
    rng: &mut Rng,
    norms: &[f64],
    m: usize,
    kappa: f64,
    nu0: f64,
    s: &[bool],
    slab: &FParams,
    theta: &mut [f64],
    b: &mut [f64],
    order: ThetaOrder,
) {
    let (a, c) = (slab.a(), slab.c());
    for h in 0..theta.len() {
        let sh = if s[h] { 1.0 } else { nu0 };
        let draw_b = |rng: &mut Rng, t: f64| gamma_raw(rng, a + c, a / c + sh / t);
        let draw_theta = |rng: &mut Rng, bh: f64| inv_gamma_raw(rng, c + 0.5 * m as f64, sh * bh + 0.5 * norms[h] / kappa);
        match order {
            ThetaOrder::BThenTheta => {
                b[h] = draw_b(rng, theta[h]);
                theta[h] = draw_theta(rng, b[h]);
            }
            ThetaOrder::ThetaThenB => {
                theta[h] = draw_theta(rng, b[h]);
                b[h] = draw_b(rng, theta[h]);
            }
        }
    }
}

/// `kappa ~ InvGamma(c + mH/2, b + sum_h norms_h / (2 theta_h))`.
pub fn step_sample_kappa(rng: &mut Rng, norms: &[f64], theta: &[f64], m: usize, prior: &InvGammaParams) -> f64 {
    let quad: f64 = norms.iter().zip(theta).map(|(n, t)| n / t).sum();
    inv_gamma_raw(
        rng,
        prior.shape() + 0.5 * (m * theta.len()) as f64,
        prior.scale() + 0.5 * quad,
    )
}

/// Product-preserving redraw of the global scale.
///
/// With `psi_h = kappa theta_h` held fixed, the conditional of `kappa` given
/// `psi`, `b`, `S` and `nu0` is GIG(`H c - c_kappa`, `2 b_kappa`,
/// `2 sum_h s_h b_h / psi_h`); the column variances are then `psi_h / kappa`.
/// Loadings and variances depend on `(kappa, theta)` only through `psi`, so
/// the joint posterior is preserved.
#[allow(clippy::too_many_arguments)]
pub fn step_boost(
    rng: &mut Rng,
    theta: &mut [f64],
    kappa: f64,
    b: &[f64],
    s: &[bool],
    nu0: f64,
    c_theta: f64,
    prior: &InvGammaParams,
) -> f64 {
    let h = theta.len();
    if h == 0 {
        return kappa;
    }
    let psi: Vec<f64> = theta.iter().map(|t| kappa * t).collect();
    let rate: f64 = (0..h)
        .map(|j| if s[j] { 1.0 } else { nu0 } * b[j] / psi[j])
        .sum();
    let lambda = h as f64 * c_theta - prior.shape();
    let new_kappa = sample_gig(rng, lambda, 2.0 * prior.scale(), 2.0 * rate);
    for (t, p) in theta.iter_mut().zip(&psi) {
        *t = p / new_kappa;
    }
    new_kappa
}

/// Categorical augmentation for a truncated CUSP prior.
#[derive(Clone, Debug, PartialEq)]
pub struct CuspZDraw {
    /// 0-based component of each column; column `h` is in the slab iff `z[h] > h`.
    pub z: Vec<usize>,
    pub cusp: CuspDraw,
}

/// Draw the indicators `z_h` given `theta_h` (with `b` integrated out), then
/// the sticks given `z`: `nu_l ~ Beta(a_l + #{z = l}, b_l + #{z > l})`.
pub fn step_cusp_z(
    rng: &mut Rng,
    theta: &[f64],
    nu0: f64,
    slab: &FParams,
    weights: &[f64],
    spec: &StickBreakingSpec,
) -> Result<CuspZDraw> {
    let h = theta.len();
    if weights.len() != h || spec.h != h {
        return Err(Error::Dimension(format!(
            "{h} columns but {} weights and truncation {}",
            weights.len(),
            spec.h
        )));
    }
    let spike = slab.with_scale(nu0)?;
    let log_w: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    let mut z = Vec::with_capacity(h);
    let mut lw = vec![0.0; h];
    for (col, &t) in theta.iter().enumerate() {
        let (ls, lf) = (spike.ln_pdf(t), slab.ln_pdf(t));
        for l in 0..h {
            lw[l] = log_w[l] + if l <= col { ls } else { lf };
        }
        z.push(categorical_log(rng, &lw));
    }
    let sticks: Vec<f64> = stick_posterior(&z, &spec.beta_params()?)
        .iter()
        .map(|law| match law {
            Some(p) => beta_raw(rng, p.a(), p.b()),
            None => 1.0,
        })
        .collect();
    Ok(CuspZDraw {
        z,
        cusp: sticks_to_cusp(&sticks)?,
    })
}

/// Stick laws given 0-based indicators: `Beta(a_l + #{z = l}, b_l + #{z > l})`;
/// sticks fixed at one stay fixed.
pub fn stick_posterior(z: &[usize], laws: &[Option<BetaParams>]) -> Vec<Option<BetaParams>> {
    laws.iter()
        .enumerate()
        .map(|(l, law)| {
            law.map(|p| {
                let hits = z.iter().filter(|&&k| k == l).count() as f64;
                let beyond = z.iter().filter(|&&k| k > l).count() as f64;
                BetaParams::new(p.a() + hits, p.b() + beyond).expect("counts keep parameters positive")
            })
        })
        .collect()
}

/// Legnaro strength given the free sticks:
/// `alpha ~ Gamma(a + K, b - sum log(1 - nu_l))` over the `K` non-terminal sticks.
pub fn step_sample_legnaro_alpha(rng: &mut Rng, sticks: &[f64], prior: &GammaParams) -> f64 {
    let free: Vec<f64> = sticks.iter().copied().filter(|&v| v < 1.0).collect();
    let sum_log: f64 = free.iter().map(|v| (-v).ln_1p()).sum();
    gamma_raw(rng, prior.shape() + free.len() as f64, prior.rate() - sum_log)
}
