use serde::{Deserialize, Serialize};

use super::stick::CuspDraw;
use crate::distributions::{beta_raw, BetaParams, GammaParams, Rng};
use crate::error::{Error, Result};

/// Beta law of the exchangeable slab probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum EspFamily {
    /// `tau_h ~ Beta(alpha / H, 1)`.
    OnePb,
    /// `tau_h ~ Beta(beta * alpha / H, beta)`.
    TwoPb { beta: f64 },
    /// `tau_h ~ Uniform(0, 1)`; the 1PB law at `alpha = H`.
    Uniform,
    /// `tau_h ~ Beta(a0, b0)` free of `alpha`.
    GeneralBeta { a0: f64, b0: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaPrior {
    Fixed { value: f64 },
    Gamma { shape: f64, rate: f64 },
}

impl AlphaPrior {
    pub fn gamma(&self) -> Option<Result<GammaParams>> {
        match *self {
            AlphaPrior::Gamma { shape, rate } => Some(GammaParams::new(shape, rate)),
            AlphaPrior::Fixed { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EspSpec {
    pub family: EspFamily,
    pub h: usize,
    pub alpha_prior: AlphaPrior,
}

impl EspSpec {
    pub fn one_pb(h: usize, alpha_prior: AlphaPrior) -> Self {
        EspSpec {
            family: EspFamily::OnePb,
            h,
            alpha_prior,
        }
    }

    /// Uniform slab probabilities; `alpha` is pinned at `H`.
    pub fn uniform(h: usize) -> Self {
        EspSpec {
            family: EspFamily::Uniform,
            h,
            alpha_prior: AlphaPrior::Fixed { value: h as f64 },
        }
    }

    /// Whether the strength parameter enters the slab-probability law.
    pub fn depends_on_alpha(&self) -> bool {
        matches!(self.family, EspFamily::OnePb | EspFamily::TwoPb { .. })
    }

    /// `(a0, b0)` of the beta law for a given strength `alpha`.
    pub fn beta_params(&self, alpha: f64) -> Result<BetaParams> {
        if self.h == 0 {
            return Err(Error::Parameter("H must be at least 1".into()));
        }
        let h = self.h as f64;
        match self.family {
            EspFamily::OnePb => BetaParams::new(alpha / h, 1.0),
            EspFamily::TwoPb { beta } => BetaParams::new(alpha / h * beta, beta),
            EspFamily::Uniform => BetaParams::new(1.0, 1.0),
            EspFamily::GeneralBeta { a0, b0 } => BetaParams::new(a0, b0),
        }
    }

    /// Prior slab probability `q_A = E[tau_h] = a0 / (a0 + b0)`.
    pub fn slab_prob_mean(&self, alpha: f64) -> Result<f64> {
        self.beta_params(alpha).map(|p| p.mean())
    }
}

/// Unordered, exchangeable slab probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct EspDraw {
    pub slab_probs: Vec<f64>,
}

pub fn sample_esp(rng: &mut Rng, spec: &EspSpec, alpha: f64) -> Result<EspDraw> {
    let p = spec.beta_params(alpha)?;
    Ok(EspDraw {
        slab_probs: (0..spec.h).map(|_| beta_raw(rng, p.a(), p.b())).collect(),
    })
}

/// Permutation sorting `tau` into decreasing order; ties go to the smaller index.
pub fn decreasing_order(tau: &[f64]) -> Vec<usize> {
    let mut rho: Vec<usize> = (0..tau.len()).collect();
    rho.sort_by(|&i, &j| tau[j].total_cmp(&tau[i]).then(i.cmp(&j)));
    rho
}

/// CUSP representation of an exchangeable draw.
///
/// Returns the CUSP quantities built from the decreasing order statistics
/// `tau_(1) > ... > tau_(H)` together with the (0-based) permutation `rho`,
/// `tau_(h) = tau[rho[h]]`. Spike probabilities are `1 - tau_(h)` and the
/// sticks are `nu_h = 1 - tau_(h) / tau_(h-1)` with `tau_(0) = 1`.
pub fn esp_to_cusp(draw: &EspDraw) -> Result<(CuspDraw, Vec<usize>)> {
    let tau = &draw.slab_probs;
    if tau.is_empty() {
        return Err(Error::Empty("no slab probabilities".into()));
    }
    if let Some(bad) = tau.iter().find(|&&t| !(t > 0.0 && t < 1.0)) {
        return Err(Error::Domain(format!("slab probability {bad} outside (0, 1)")));
    }
    let rho = decreasing_order(tau);
    let ordered: Vec<f64> = rho.iter().map(|&i| tau[i]).collect();
    let mut prev = 1.0;
    let mut sticks = Vec::with_capacity(ordered.len());
    let mut weights = Vec::with_capacity(ordered.len());
    for &t in &ordered {
        sticks.push(1.0 - t / prev);
        weights.push(prev - t);
        prev = t;
    }
    let cusp = CuspDraw {
        sticks,
        weights,
        spike_probs: ordered.iter().map(|t| 1.0 - t).collect(),
        slab_probs: ordered,
    };
    Ok((cusp, rho))
}

/// Stick laws of the CUSP representation of the finite 1PB prior:
/// `nu_h ~ Beta(1, alpha (H - h + 1) / H)`, equivalently
/// `tau_(h) / tau_(h-1) ~ Beta(alpha (H - h + 1) / H, 1)`.
pub fn onepb_stick_law(alpha: f64, h: usize) -> Result<Vec<BetaParams>> {
    let hf = h as f64;
    (1..=h)
        .map(|k| BetaParams::new(1.0, alpha * (h - k + 1) as f64 / hf))
        .collect()
}

/// Prior mean and variance of the number of active columns under a beta ESP.
///
/// Given `alpha`, the indicators are iid Bernoulli(`q_A`), so `H*` is
/// Binomial(`H`, `q_A`); for 1PB this gives `alpha / (1 + alpha / H)` and
/// `alpha / (1 + alpha / H)^2`.
pub fn hstar_prior_moments(spec: &EspSpec, alpha: f64) -> Result<(f64, f64)> {
    let q = spec.slab_prob_mean(alpha)?;
    let h = spec.h as f64;
    Ok((h * q, h * q * (1.0 - q)))
}
