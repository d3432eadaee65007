use serde::Serialize;
use statrs::function::beta::beta_reg;

use super::esp::{esp_to_cusp, hstar_prior_moments, sample_esp, EspSpec};
use super::stick::{sample_sticks, sticks_to_cusp, StickBreakingSpec};
use crate::distributions::{sample_f_mixture, FParams, Rng};
use crate::error::{Error, Result};

/// One mixture component of a spike-and-slab law on a positive parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ComponentLaw {
    Dirac(f64),
    ScaledF(FParams),
}

impl ComponentLaw {
    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match self {
            ComponentLaw::Dirac(x) => *x,
            ComponentLaw::ScaledF(p) => sample_f_mixture(rng, p).0,
        }
    }

    /// `P(theta <= eps)`.
    pub fn cdf(&self, eps: f64) -> f64 {
        match self {
            ComponentLaw::Dirac(x) => f64::from(*x <= eps),
            ComponentLaw::ScaledF(p) => {
                if eps <= 0.0 {
                    return 0.0;
                }
                // a theta / (c scale) is beta-prime(a, c)
                let r = p.a() * eps / (p.c() * p.scale());
                beta_reg(p.a(), p.c(), r / (1.0 + r))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpikeSlabSpec {
    pub spike: ComponentLaw,
    pub slab: ComponentLaw,
}

impl SpikeSlabSpec {
    /// Triple-gamma pair: slab `F(2a, 2c)`, spike the same law deflated by `nu0`.
    pub fn triple_gamma(a: f64, c: f64, nu0: f64) -> Result<Self> {
        let slab = FParams::slab(a, c)?;
        Ok(SpikeSlabSpec {
            spike: ComponentLaw::ScaledF(slab.with_scale(nu0)?),
            slab: ComponentLaw::ScaledF(slab),
        })
    }

    /// Whether `P_spike(theta <= eps) > P_slab(theta <= eps)` on every grid point.
    pub fn cdf_dominance(&self, grid: &[f64]) -> bool {
        grid.iter().all(|&e| self.spike.cdf(e) > self.slab.cdf(e))
    }
}

/// Generalized CUSP prior or exchangeable prior, for prior simulation.
#[derive(Clone, Debug, PartialEq)]
pub enum ShrinkagePrior {
    Cusp(StickBreakingSpec),
    Esp { spec: EspSpec, alpha: f64 },
}

impl ShrinkagePrior {
    pub fn h(&self) -> usize {
        match self {
            ShrinkagePrior::Cusp(s) => s.h,
            ShrinkagePrior::Esp { spec, .. } => spec.h,
        }
    }

    /// Increasing spike probabilities; exchangeable draws are reordered by
    /// their decreasing order statistics.
    pub fn sample_spike_probs(&self, rng: &mut Rng) -> Result<Vec<f64>> {
        match self {
            ShrinkagePrior::Cusp(spec) => {
                let nu = sample_sticks(rng, spec)?;
                Ok(sticks_to_cusp(&nu)?.spike_probs)
            }
            ShrinkagePrior::Esp { spec, alpha } => {
                let draw = sample_esp(rng, spec, *alpha)?;
                Ok(esp_to_cusp(&draw)?.0.spike_probs)
            }
        }
    }

    /// One prior draw of the number of active columns.
    pub fn sample_hstar(&self, rng: &mut Rng) -> Result<usize> {
        match self {
            ShrinkagePrior::Cusp(spec) => {
                let nu = sample_sticks(rng, spec)?;
                let cusp = sticks_to_cusp(&nu)?;
                let mut count = 0;
                for h in 0..spec.h {
                    let z = categorical(rng, &cusp.weights);
                    if z > h {
                        count += 1;
                    }
                }
                Ok(count)
            }
            ShrinkagePrior::Esp { spec, alpha } => {
                let draw = sample_esp(rng, spec, *alpha)?;
                Ok(draw.slab_probs.iter().filter(|&&t| rng.uniform() < t).count())
            }
        }
    }

    /// Closed-form prior mean and variance of `H*`; exchangeable priors only.
    pub fn hstar_moments(&self) -> Result<(f64, f64)> {
        match self {
            ShrinkagePrior::Esp { spec, alpha } => hstar_prior_moments(spec, *alpha),
            ShrinkagePrior::Cusp(_) => Err(Error::NotAvailable(
                "closed-form H* moments exist for exchangeable beta priors only".into(),
            )),
        }
    }
}

fn categorical(rng: &mut Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.uniform() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

#[derive(Clone, Debug, Serialize)]
pub struct ShrinkageRow {
    pub eps: f64,
    pub h: usize,
    pub estimate: f64,
    pub std_error: f64,
}

/// Monte Carlo estimates of `P(theta_h <= eps)` under a spike-and-slab prior.
#[derive(Clone, Debug, Serialize)]
pub struct ShrinkageReport {
    pub rows: Vec<ShrinkageRow>,
    /// `(eps, h)` pairs where the estimate at `h + 1` falls below the one at
    /// `h` by more than three combined standard errors (1-based `h`).
    pub violations: Vec<(f64, usize)>,
    pub dominance_holds: bool,
}

impl ShrinkageReport {
    pub fn curve(&self, eps: f64) -> Vec<&ShrinkageRow> {
        self.rows.iter().filter(|r| r.eps == eps).collect()
    }
}

/// Estimate `P(theta_h <= eps)` for every column and grid point from `n` joint
/// prior draws, and flag departures from monotone increase.
pub fn verify_increasing_shrinkage(
    rng: &mut Rng,
    prior: &ShrinkagePrior,
    spike_slab: &SpikeSlabSpec,
    eps_grid: &[f64],
    n: usize,
) -> Result<ShrinkageReport> {
    if n < 2 {
        return Err(Error::Parameter("need at least two draws".into()));
    }
    let h = prior.h();
    let mut counts = vec![vec![0usize; h]; eps_grid.len()];
    for _ in 0..n {
        let pi = prior.sample_spike_probs(rng)?;
        for (col, &p) in pi.iter().enumerate() {
            let theta = if rng.uniform() < p {
                spike_slab.spike.sample(rng)
            } else {
                spike_slab.slab.sample(rng)
            };
            for (k, &e) in eps_grid.iter().enumerate() {
                if theta <= e {
                    counts[k][col] += 1;
                }
            }
        }
    }
    let nf = n as f64;
    let mut rows = Vec::with_capacity(h * eps_grid.len());
    let mut violations = Vec::new();
    for (k, &e) in eps_grid.iter().enumerate() {
        let curve: Vec<(f64, f64)> = counts[k]
            .iter()
            .map(|&c| {
                let p = c as f64 / nf;
                (p, (p * (1.0 - p) / nf).sqrt())
            })
            .collect();
        for (col, &(p, se)) in curve.iter().enumerate() {
            rows.push(ShrinkageRow {
                eps: e,
                h: col + 1,
                estimate: p,
                std_error: se,
            });
            if col + 1 < h {
                let (q, se_q) = curve[col + 1];
                if q < p - 3.0 * (se * se + se_q * se_q).sqrt() {
                    violations.push((e, col + 1));
                }
            }
        }
    }
    Ok(ShrinkageReport {
        rows,
        violations,
        dominance_holds: spike_slab.cdf_dominance(eps_grid),
    })
}

/// Raw Monte Carlo sample of the ordered 1PB representation.
///
/// Row `i` holds the stick ratios `tau_(h) / tau_(h-1)` (with `tau_(0) = 1`)
/// of the `i`-th exchangeable draw; the first entry is therefore `tau_(1)`.
pub fn order_statistic_ratios(rng: &mut Rng, spec: &EspSpec, alpha: f64, n: usize) -> Result<Vec<Vec<f64>>> {
    (0..n)
        .map(|_| {
            let draw = sample_esp(rng, spec, alpha)?;
            let (cusp, _) = esp_to_cusp(&draw)?;
            Ok(cusp.sticks.iter().map(|v| 1.0 - v).collect())
        })
        .collect()
}
