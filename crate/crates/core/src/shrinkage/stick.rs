use serde::{Deserialize, Serialize};

use crate::distributions::{beta_raw, BetaParams, Rng};
use crate::error::{Error, Result};

/// Beta stick-breaking families for generalized CUSP priors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum StickFamily {
    /// `nu_h ~ Beta(1, alpha)`.
    LegnaroCusp { alpha: f64 },
    /// `nu_h ~ Beta(beta, beta * alpha)`.
    TwoParamIbp { alpha: f64, beta: f64 },
    /// `nu_h ~ Beta(1 + kappa, alpha)`.
    OhnKim { alpha: f64, kappa: f64 },
    /// Pitman–Yor sticks `nu_h ~ Beta(1 - sigma, alpha + h sigma)`, `sigma in [0, 1)`.
    PyPositive { alpha: f64, discount: f64 },
    /// Pitman–Yor sticks with negative discount:
    /// `nu_h ~ Beta(1 - sigma, (H - h) |sigma|)` for `h < H`, `nu_H = 1`.
    PyNegativeFinite { discount: f64 },
    /// Arbitrary `(a_h, b_h)` per stick.
    CustomBeta { params: Vec<(f64, f64)> },
    /// Sticks of the CUSP representation of a finite 1PB exchangeable prior.
    FiniteEspDerived { alpha: f64 },
}

/// A truncated stick-breaking law.
///
/// "Infinite" priors are represented by a truncation level plus
/// `terminal_stick_is_one`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StickBreakingSpec {
    pub family: StickFamily,
    pub h: usize,
    pub terminal_stick_is_one: bool,
}

impl StickBreakingSpec {
    pub fn new(family: StickFamily, h: usize, terminal_stick_is_one: bool) -> Result<Self> {
        let spec = StickBreakingSpec {
            family,
            h,
            terminal_stick_is_one,
        };
        spec.beta_params()?;
        Ok(spec)
    }

    /// Legnaro CUSP truncated at `h` with the last stick fixed at one.
    pub fn legnaro(alpha: f64, h: usize) -> Result<Self> {
        StickBreakingSpec::new(StickFamily::LegnaroCusp { alpha }, h, true)
    }

    fn terminal_is_one(&self) -> bool {
        self.terminal_stick_is_one || matches!(self.family, StickFamily::PyNegativeFinite { .. })
    }

    /// Resolved beta law of each stick; `None` marks a stick fixed at one.
    pub fn beta_params(&self) -> Result<Vec<Option<BetaParams>>> {
        if self.h == 0 {
            return Err(Error::Parameter("truncation level must be at least 1".into()));
        }
        let h_total = self.h;
        let terminal = self.terminal_is_one();
        let mut out = Vec::with_capacity(h_total);
        for h in 1..=h_total {
            if terminal && h == h_total {
                out.push(None);
                continue;
            }
            let (a, b) = match &self.family {
                StickFamily::LegnaroCusp { alpha } => (1.0, *alpha),
                StickFamily::TwoParamIbp { alpha, beta } => (*beta, beta * alpha),
                StickFamily::OhnKim { alpha, kappa } => {
                    if *kappa < 0.0 {
                        return Err(Error::Parameter(format!("Ohn–Kim kappa must be >= 0, got {kappa}")));
                    }
                    (1.0 + kappa, *alpha)
                }
                StickFamily::PyPositive { alpha, discount } => {
                    if !(0.0..1.0).contains(discount) {
                        return Err(Error::Parameter(format!(
                            "Pitman–Yor discount must lie in [0, 1), got {discount}"
                        )));
                    }
                    if alpha <= discount {
                        return Err(Error::Parameter(format!(
                            "Pitman–Yor requires alpha > discount, got alpha = {alpha}"
                        )));
                    }
                    (1.0 - discount, alpha + h as f64 * discount)
                }
                StickFamily::PyNegativeFinite { discount } => {
                    if *discount >= 0.0 {
                        return Err(Error::Parameter(format!(
                            "finite Pitman–Yor needs a negative discount, got {discount}"
                        )));
                    }
                    (1.0 - discount, (h_total - h) as f64 * discount.abs())
                }
                StickFamily::CustomBeta { params } => {
                    let needed = if terminal { h_total - 1 } else { h_total };
                    if params.len() < needed {
                        return Err(Error::Parameter(format!(
                            "custom sticks: {} parameter pairs for {needed} sticks",
                            params.len()
                        )));
                    }
                    params[h - 1]
                }
                StickFamily::FiniteEspDerived { alpha } => {
                    (1.0, alpha * (h_total - h + 1) as f64 / h_total as f64)
                }
            };
            out.push(Some(BetaParams::new(a, b)?));
        }
        Ok(out)
    }

    /// `E[pi*_h] = prod_{l <= h} E[1 - nu_l]` for independent sticks.
    pub fn expected_slab_probs(&self) -> Result<Vec<f64>> {
        let mut acc = 1.0;
        Ok(self
            .beta_params()?
            .iter()
            .map(|p| {
                acc *= match p {
                    Some(p) => 1.0 - p.mean(),
                    None => 0.0,
                };
                acc
            })
            .collect())
    }
}

/// Spike/slab probabilities generated by a stick vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CuspDraw {
    pub sticks: Vec<f64>,
    pub weights: Vec<f64>,
    /// Increasing spike probabilities `pi_h` (cumulative sum of the weights).
    pub spike_probs: Vec<f64>,
    /// Decreasing slab probabilities `pi*_h` (product of `1 - nu_l`).
    pub slab_probs: Vec<f64>,
}

impl CuspDraw {
    pub fn len(&self) -> usize {
        self.sticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sticks.is_empty()
    }

    /// `max_h |pi_h + pi*_h - 1|`.
    pub fn identity_defect(&self) -> f64 {
        self.spike_probs
            .iter()
            .zip(&self.slab_probs)
            .map(|(p, q)| (p + q - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

pub fn sample_sticks(rng: &mut Rng, spec: &StickBreakingSpec) -> Result<Vec<f64>> {
    Ok(spec
        .beta_params()?
        .into_iter()
        .map(|p| match p {
            Some(p) => beta_raw(rng, p.a(), p.b()),
            None => 1.0,
        })
        .collect())
}

/// Weights, spike and slab probabilities from a stick vector.
///
/// `pi` comes from the cumulative sum of the weights and `pi*` from the
/// product of `1 - nu`; the two are computed separately and agree to rounding.
pub fn sticks_to_cusp(sticks: &[f64]) -> Result<CuspDraw> {
    if let Some(bad) = sticks.iter().find(|&&v| !(v > 0.0 && v <= 1.0)) {
        return Err(Error::Domain(format!("stick {bad} outside (0, 1]")));
    }
    let h = sticks.len();
    let mut weights = Vec::with_capacity(h);
    let mut spike_probs = Vec::with_capacity(h);
    let mut slab_probs = Vec::with_capacity(h);
    let mut remaining = 1.0;
    let mut cumulative = 0.0;
    for &v in sticks {
        let w = v * remaining;
        remaining *= 1.0 - v;
        cumulative += w;
        weights.push(w);
        spike_probs.push(cumulative);
        slab_probs.push(remaining);
    }
    let draw = CuspDraw {
        sticks: sticks.to_vec(),
        weights,
        spike_probs,
        slab_probs,
    };
    debug_assert!(draw.identity_defect() < 1e-10);
    Ok(draw)
}
