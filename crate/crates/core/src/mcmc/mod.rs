//! Posterior sampling for the overfitting factor model under the triple-gamma
//! exchangeable spike-and-slab prior (F or t classification), plus the
//! categorical stick-breaking sampler for catalogue CUSP priors.

mod config;
mod output;
pub mod steps;

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::distributions::{inv_gamma_raw, sample_f_mixture, sample_gamma, standard_normal, FParams, GammaParams, InvGammaParams, Rng};
use crate::error::{Error, Result};
use crate::factor::{overfit_columns, omega_functionals, sample_factors, sample_loadings_and_variances, Dataset};
use crate::shrinkage::{sample_sticks, sticks_to_cusp, AlphaPrior, EspSpec, StickBreakingSpec, StickFamily};

pub use config::{Algorithm, EspChoice, MixturePrior, SamplerConfig};
pub use output::{read_chain, write_chain, ChainMeta, ChainOutput, LoadingsDraw};
use steps::ThetaOrder;

/// Full state of one chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelState {
    /// `m x H` loadings.
    pub beta: DMatrix<f64>,
    /// `n x H` latent factors.
    pub f: DMatrix<f64>,
    pub sigma2: DVector<f64>,
    pub kappa: f64,
    pub theta: DVector<f64>,
    pub b_theta: Vec<f64>,
    pub s: Vec<bool>,
    /// Slab probabilities; in the CUSP sampler these are `1 - pi_h`.
    pub tau: Vec<f64>,
    pub alpha: f64,
    pub nu0: f64,
    /// Sticks of the CUSP sampler.
    pub sticks: Option<Vec<f64>>,
}

impl ModelState {
    pub fn h(&self) -> usize {
        self.theta.len()
    }

    /// Number of active columns `sum_h S_h`.
    pub fn hstar(&self) -> usize {
        self.s.iter().filter(|&&x| x).count()
    }
}

const ADAPT_BATCH: usize = 50;
const TARGET_ACCEPT: f64 = 0.44;

#[derive(Clone, Copy, Debug, Default)]
struct Tally {
    proposed: usize,
    accepted: usize,
}

impl Tally {
    fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += usize::from(accepted);
    }

    fn rate(&self) -> Option<f64> {
        (self.proposed > 0).then(|| self.accepted as f64 / self.proposed as f64)
    }
}

/// Resolved priors and tuning state for one chain.
#[derive(Clone, Debug)]
pub struct Sampler {
    config: SamplerConfig,
    h: usize,
    slab: FParams,
    nu0_prior: GammaParams,
    kappa_prior: InvGammaParams,
    esp: EspSpec,
    alpha_prior: Option<GammaParams>,
    pub alpha_step: f64,
    pub nu0_step: f64,
    alpha_tally: Tally,
    nu0_tally: Tally,
    batch_alpha: Tally,
    batch_nu0: Tally,
}

impl Sampler {
    /// Sampler for `h` candidate columns.
    pub fn new(config: &SamplerConfig, h: usize) -> Result<Self> {
        config.validate()?;
        if h == 0 {
            return Err(Error::Parameter("the model needs at least one candidate column".into()));
        }
        if config.init_active > h {
            return Err(Error::Parameter(format!(
                "{} initially active columns requested but H = {h}",
                config.init_active
            )));
        }
        let esp = config.esp_spec(h);
        let alpha_prior = if config.learns_alpha(h) {
            config.alpha_prior.gamma().transpose()?
        } else {
            None
        };
        Ok(Sampler {
            config: config.clone(),
            h,
            slab: config.slab()?,
            nu0_prior: config.nu0_prior()?,
            kappa_prior: config.kappa_prior()?,
            esp,
            alpha_prior,
            alpha_step: config.alpha_step,
            nu0_step: config.nu0_step,
            alpha_tally: Tally::default(),
            nu0_tally: Tally::default(),
            batch_alpha: Tally::default(),
            batch_nu0: Tally::default(),
        })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn h(&self) -> usize {
        self.h
    }

    /// Acceptance rates `(alpha, nu0)` since the last reset.
    pub fn acceptance(&self) -> (Option<f64>, Option<f64>) {
        (self.alpha_tally.rate(), self.nu0_tally.rate())
    }

    pub fn reset_acceptance(&mut self) {
        self.alpha_tally = Tally::default();
        self.nu0_tally = Tally::default();
    }

    fn fixed_alpha(&self) -> f64 {
        match (self.config.algorithm, self.config.cusp_sticks.as_ref()) {
            (Algorithm::CuspZ, Some(_)) => f64::NAN,
            (Algorithm::CuspZ, None) => match self.config.alpha_prior {
                AlphaPrior::Fixed { value } => value,
                AlphaPrior::Gamma { shape, rate } => shape / rate,
            },
            _ => match self.esp.alpha_prior {
                AlphaPrior::Fixed { value } => value,
                AlphaPrior::Gamma { shape, rate } => shape / rate,
            },
        }
    }

    fn stick_spec(&self, alpha: f64) -> Result<StickBreakingSpec> {
        match &self.config.cusp_sticks {
            Some(family) => StickBreakingSpec::new(family.clone(), self.h, true),
            None => StickBreakingSpec::new(StickFamily::LegnaroCusp { alpha }, self.h, true),
        }
    }

    fn draw_nu0_prior(&self, rng: &mut Rng) -> f64 {
        loop {
            let v = sample_gamma(rng, &self.nu0_prior);
            if v < 1.0 && v > 0.0 {
                return v;
            }
        }
    }

    /// Initial state with exactly `init_active` slab columns: shrinkage
    /// parameters, loadings, variances and factors drawn from the prior.
    ///
    /// The exchangeable samplers place the active columns at random; the
    /// CUSP sampler uses the leading columns, since its last column is
    /// always a spike.
    pub fn init_state(&self, rng: &mut Rng, n: usize, m: usize) -> Result<ModelState> {
        let h = self.h;
        let k = self.config.init_active;
        let mut s = vec![false; h];
        if self.config.algorithm == Algorithm::CuspZ {
            if k >= h && h > 0 {
                return Err(Error::Parameter("the CUSP sampler keeps the last column in the spike".into()));
            }
            s[..k].iter_mut().for_each(|x| *x = true);
        } else {
            let mut idx: Vec<usize> = (0..h).collect();
            for j in 0..k {
                let pick = j + ((rng.uniform() * (h - j) as f64) as usize).min(h - j - 1);
                idx.swap(j, pick);
                s[idx[j]] = true;
            }
        }
        let alpha = match &self.alpha_prior {
            Some(g) => sample_gamma(rng, g),
            None => self.fixed_alpha(),
        };
        let nu0 = self.draw_nu0_prior(rng);
        let spike = self.slab.with_scale(nu0)?;
        let mut theta = DVector::zeros(h);
        let mut b_theta = vec![0.0; h];
        for j in 0..h {
            let (t, b) = sample_f_mixture(rng, if s[j] { &self.slab } else { &spike });
            theta[j] = t;
            // the mixing variable of the spike is on the slab scale
            b_theta[j] = b;
        }
        let (tau, sticks) = if self.config.algorithm == Algorithm::CuspZ {
            let nu = sample_sticks(rng, &self.stick_spec(alpha)?)?;
            (sticks_to_cusp(&nu)?.slab_probs, Some(nu))
        } else {
            let p = self.esp.beta_params(alpha)?;
            (steps::step_sample_tau(rng, &s, p.a(), p.b()), None)
        };
        let kappa = inv_gamma_raw(rng, self.kappa_prior.shape(), self.kappa_prior.scale());
        let sigma2 = DVector::from_fn(m, |_, _| inv_gamma_raw(rng, self.config.c_sigma, self.config.b_sigma));
        let beta = DMatrix::from_fn(m, h, |i, j| (kappa * theta[j] * sigma2[i]).sqrt() * standard_normal(rng));
        let f = DMatrix::from_fn(n, h, |_, _| standard_normal(rng));
        Ok(ModelState {
            beta,
            f,
            sigma2,
            kappa,
            theta,
            b_theta,
            s,
            tau,
            alpha,
            nu0,
            sticks,
        })
    }

    /// Loadings and variances jointly given the factors, then the factors.
    pub fn update_loadings_block(&self, rng: &mut Rng, y: &DMatrix<f64>, state: &mut ModelState) -> Result<()> {
        let (beta, sigma2) = sample_loadings_and_variances(
            rng,
            y,
            &state.f,
            state.kappa,
            &state.theta,
            self.config.c_sigma,
            self.config.b_sigma,
        )?;
        state.beta = beta;
        state.sigma2 = sigma2;
        state.f = sample_factors(rng, y, &state.beta, &state.sigma2)?;
        Ok(())
    }

    /// The shrinkage block of one cycle, in the order of the configured algorithm.
    pub fn update_shrinkage(&mut self, rng: &mut Rng, state: &mut ModelState) -> Result<()> {
        let m = state.beta.nrows();
        match self.config.algorithm {
            Algorithm::FClassification => {
                let (nu0, acc) = steps::step_sample_nu0(
                    rng,
                    state.nu0,
                    state.theta.as_slice(),
                    &state.tau,
                    &self.nu0_prior,
                    &self.slab,
                    self.nu0_step,
                );
                self.record_nu0(nu0, acc, state);
                let q = self.esp.slab_prob_mean(state.alpha)?;
                state.s = steps::step_classify_f(rng, state.theta.as_slice(), state.nu0, q, &self.slab)?;
                self.update_alpha_tau(rng, state)?;
                let norms = steps::scaled_column_norms(&state.beta, &state.sigma2);
                steps::step_sample_theta_b(
                    rng,
                    &norms,
                    m,
                    state.kappa,
                    state.nu0,
                    &state.s,
                    &self.slab,
                    state.theta.as_mut_slice(),
                    &mut state.b_theta,
                    ThetaOrder::BThenTheta,
                );
                self.finish_cycle(rng, state, &norms);
            }
            Algorithm::TClassification => {
                let (nu0, acc) = steps::step_sample_nu0_marginal(
                    rng,
                    state.nu0,
                    &state.beta,
                    &state.b_theta,
                    &state.tau,
                    state.kappa,
                    &state.sigma2,
                    &self.nu0_prior,
                    self.config.c_theta,
                    self.nu0_step,
                );
                self.record_nu0(nu0, acc, state);
                let q = self.esp.slab_prob_mean(state.alpha)?;
                state.s = steps::step_classify_t(
                    rng,
                    &state.beta,
                    &state.b_theta,
                    state.kappa,
                    &state.sigma2,
                    state.nu0,
                    q,
                    self.config.c_theta,
                )?;
                self.update_alpha_tau(rng, state)?;
                let norms = steps::scaled_column_norms(&state.beta, &state.sigma2);
                steps::step_sample_theta_b(
                    rng,
                    &norms,
                    m,
                    state.kappa,
                    state.nu0,
                    &state.s,
                    &self.slab,
                    state.theta.as_mut_slice(),
                    &mut state.b_theta,
                    ThetaOrder::ThetaThenB,
                );
                self.finish_cycle(rng, state, &norms);
            }
            Algorithm::CuspZ => {
                let (nu0, acc) = steps::step_sample_nu0(
                    rng,
                    state.nu0,
                    state.theta.as_slice(),
                    &state.tau,
                    &self.nu0_prior,
                    &self.slab,
                    self.nu0_step,
                );
                self.record_nu0(nu0, acc, state);
                let sticks = state
                    .sticks
                    .as_ref()
                    .ok_or_else(|| Error::Missing("CUSP sampler state has no sticks".into()))?;
                let weights = sticks_to_cusp(sticks)?.weights;
                let spec = self.stick_spec(state.alpha)?;
                let draw = steps::step_cusp_z(rng, state.theta.as_slice(), state.nu0, &self.slab, &weights, &spec)?;
                state.s = draw.z.iter().enumerate().map(|(h, &z)| z > h).collect();
                state.tau = draw.cusp.slab_probs.clone();
                if let Some(prior) = &self.alpha_prior {
                    state.alpha = steps::step_sample_legnaro_alpha(rng, &draw.cusp.sticks, prior);
                }
                state.sticks = Some(draw.cusp.sticks);
                let norms = steps::scaled_column_norms(&state.beta, &state.sigma2);
                steps::step_sample_theta_b(
                    rng,
                    &norms,
                    m,
                    state.kappa,
                    state.nu0,
                    &state.s,
                    &self.slab,
                    state.theta.as_mut_slice(),
                    &mut state.b_theta,
                    ThetaOrder::BThenTheta,
                );
                self.finish_cycle(rng, state, &norms);
            }
        }
        Ok(())
    }

    fn record_nu0(&mut self, nu0: f64, accepted: bool, state: &mut ModelState) {
        state.nu0 = nu0;
        self.nu0_tally.record(accepted);
        self.batch_nu0.record(accepted);
    }

    fn update_alpha_tau(&mut self, rng: &mut Rng, state: &mut ModelState) -> Result<()> {
        if let Some(prior) = &self.alpha_prior {
            let (alpha, acc) = steps::step_sample_alpha(rng, state.alpha, state.hstar(), &self.esp, prior, self.alpha_step);
            state.alpha = alpha;
            self.alpha_tally.record(acc);
            self.batch_alpha.record(acc);
        }
        let p = self.esp.beta_params(state.alpha)?;
        state.tau = steps::step_sample_tau(rng, &state.s, p.a(), p.b());
        Ok(())
    }

    fn finish_cycle(&self, rng: &mut Rng, state: &mut ModelState, norms: &[f64]) {
        let m = state.beta.nrows();
        state.kappa = steps::step_sample_kappa(rng, norms, state.theta.as_slice(), m, &self.kappa_prior);
        if self.config.boosting {
            state.kappa = steps::step_boost(
                rng,
                state.theta.as_mut_slice(),
                state.kappa,
                &state.b_theta,
                &state.s,
                state.nu0,
                self.config.c_theta,
                &self.kappa_prior,
            );
        }
    }

    /// One full cycle: loadings block, then shrinkage block.
    pub fn sweep(&mut self, rng: &mut Rng, y: &DMatrix<f64>, state: &mut ModelState) -> Result<()> {
        self.update_loadings_block(rng, y, state)?;
        self.update_shrinkage(rng, state)
    }

    /// Nudge the random-walk scales toward the target acceptance rate after
    /// every batch of burn-in sweeps.
    fn adapt(&mut self, batch_index: usize) {
        let delta = (1.0 / (batch_index as f64 + 1.0).sqrt()).min(0.1);
        for (tally, step) in [
            (&mut self.batch_alpha, &mut self.alpha_step),
            (&mut self.batch_nu0, &mut self.nu0_step),
        ] {
            if let Some(r) = tally.rate() {
                *step *= if r > TARGET_ACCEPT { delta.exp() } else { (-delta).exp() };
            }
            *tally = Tally::default();
        }
    }
}

/// Run one chain on `data`; the candidate dimension is
/// `H = min(floor((m - 1) / 2), h_cap)`.
pub fn run_chain(rng: &mut Rng, data: &Dataset, config: &SamplerConfig) -> Result<ChainOutput> {
    let start = Instant::now();
    let (n, m) = (data.n(), data.m());
    let h = overfit_columns(m, config.h_cap);
    let mut sampler = Sampler::new(config, h)?;
    let mut state = sampler.init_state(rng, n, m)?;
    let mut out = ChainOutput::with_capacity(h, m, config.kept());
    for it in 0..config.iterations {
        sampler.sweep(rng, &data.y, &mut state).map_err(|e| Error::Chain {
            iteration: it + 1,
            source: Box::new(e),
        })?;
        if it < config.burn_in {
            if config.adapt && (it + 1) % ADAPT_BATCH == 0 {
                sampler.adapt((it + 1) / ADAPT_BATCH);
            }
            if it + 1 == config.burn_in {
                sampler.reset_acceptance();
            }
            continue;
        }
        let (logdet, frob) = omega_functionals(&state.beta, &state.sigma2).map_err(|e| Error::Chain {
            iteration: it + 1,
            source: Box::new(e),
        })?;
        let kept = it - config.burn_in;
        let keep_loadings = config.loadings_thin > 0 && (kept + 1).is_multiple_of(config.loadings_thin);
        out.push(it + 1, &state, logdet, frob, keep_loadings);
    }
    let (acc_alpha, acc_nu0) = sampler.acceptance();
    out.meta = ChainMeta {
        config: config.clone(),
        seed: rng.seed(),
        stream: rng.stream(),
        n,
        m,
        h,
        acceptance_alpha: acc_alpha,
        acceptance_nu0: acc_nu0,
        alpha_step: sampler.alpha_step,
        nu0_step: sampler.nu0_step,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(algorithm: Algorithm) -> SamplerConfig {
        SamplerConfig {
            algorithm,
            iterations: 300,
            burn_in: 100,
            ..Default::default()
        }
    }

    #[test]
    fn init_respects_active_count() {
        let config = SamplerConfig::default();
        let sampler = Sampler::new(&config, 9).unwrap();
        let mut rng = Rng::new(71, 0);
        let st = sampler.init_state(&mut rng, 10, 20).unwrap();
        assert_eq!(st.hstar(), 3);
        assert!(st.nu0 > 0.0 && st.nu0 < 1.0);
        let zero = Sampler::new(&SamplerConfig { init_active: 0, ..config.clone() }, 9).unwrap();
        assert_eq!(zero.init_state(&mut rng, 10, 20).unwrap().hstar(), 0);
        assert!(Sampler::new(&SamplerConfig { init_active: 10, ..config }, 9).is_err());
    }

    #[test]
    fn init_is_reproducible() {
        let sampler = Sampler::new(&SamplerConfig::default(), 9).unwrap();
        let a = sampler.init_state(&mut Rng::new(72, 3), 10, 20).unwrap();
        let b = sampler.init_state(&mut Rng::new(72, 3), 10, 20).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn chains_are_deterministic_and_consistent() {
        let mut rng = Rng::new(73, 0);
        let data = crate::factor::simulate_dataset(&mut rng, &crate::factor::ScenarioSpec::dense(12, 2, 40)).unwrap();
        for algo in [Algorithm::FClassification, Algorithm::TClassification, Algorithm::CuspZ] {
            let a = run_chain(&mut Rng::new(74, 1), &data, &short(algo)).unwrap();
            let b = run_chain(&mut Rng::new(74, 1), &data, &short(algo)).unwrap();
            assert_eq!(a.hstar, b.hstar);
            assert_eq!(a.logdet_omega, b.logdet_omega);
            assert_eq!(a.len(), 200);
            for (k, s) in a.s.iter().enumerate() {
                assert_eq!(a.hstar[k], s.iter().filter(|&&x| x).count());
            }
            assert_eq!(a.loadings.len(), 20);
        }
    }

    #[test]
    fn cusp_chain_keeps_last_column_inactive() {
        let mut rng = Rng::new(75, 0);
        let data = crate::factor::simulate_dataset(&mut rng, &crate::factor::ScenarioSpec::dense(12, 2, 40)).unwrap();
        let out = run_chain(&mut rng, &data, &short(Algorithm::CuspZ)).unwrap();
        assert!(out.s.iter().all(|s| !s[s.len() - 1]));
        for tau in &out.tau {
            assert!(tau.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn too_few_variables() {
        let data = Dataset::new(DMatrix::zeros(5, 2));
        assert!(run_chain(&mut Rng::new(1, 0), &data, &SamplerConfig::default()).is_err());
    }
}
