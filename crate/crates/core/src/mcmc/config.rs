use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::{FParams, GammaParams, InvGammaParams};
use crate::error::{Error, Result};
use crate::shrinkage::{AlphaPrior, EspFamily, EspSpec, StickFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    /// Classification given the column variances (F densities).
    #[serde(rename = "algo1")]
    FClassification,
    /// Classification with the column variances integrated out (t densities).
    #[serde(rename = "algo2")]
    TClassification,
    /// Categorical stick-breaking augmentation for catalogue CUSP priors.
    #[serde(rename = "cusp-z")]
    CuspZ,
}

impl Algorithm {
    pub fn tag(&self) -> &'static str {
        match self {
            Algorithm::FClassification => "algo1",
            Algorithm::TClassification => "algo2",
            Algorithm::CuspZ => "cusp-z",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "algo1" => Ok(Algorithm::FClassification),
            "algo2" => Ok(Algorithm::TClassification),
            "cusp-z" | "cuspz" => Ok(Algorithm::CuspZ),
            _ => Err(Error::Parameter(format!("unknown algorithm {s:?} (algo1, algo2, cusp-z)"))),
        }
    }
}

/// Slab mixture variants of the study: F (`a = 2.5`), Lasso-like (`a = 1`)
/// and horseshoe-like (`a = 0.5`), all with `c = 2.5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MixturePrior {
    F,
    L,
    H,
}

impl MixturePrior {
    pub fn a_theta(&self) -> f64 {
        match self {
            MixturePrior::F => 2.5,
            MixturePrior::L => 1.0,
            MixturePrior::H => 0.5,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            MixturePrior::F => "F",
            MixturePrior::L => "L",
            MixturePrior::H => "H",
        }
    }
}

impl FromStr for MixturePrior {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "F" | "f" => Ok(MixturePrior::F),
            "L" | "l" => Ok(MixturePrior::L),
            "H" | "h" => Ok(MixturePrior::H),
            _ => Err(Error::Parameter(format!("unknown prior {s:?} (F, L, H)"))),
        }
    }
}

/// Named slab-probability families for the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EspChoice {
    OnePb,
    Uniform,
    TwoPb,
}

impl EspChoice {
    pub fn family(&self) -> EspFamily {
        match self {
            EspChoice::OnePb => EspFamily::OnePb,
            EspChoice::Uniform => EspFamily::Uniform,
            EspChoice::TwoPb => EspFamily::TwoPb { beta: 1.0 },
        }
    }
}

impl FromStr for EspChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1pb" => Ok(EspChoice::OnePb),
            "uniform" => Ok(EspChoice::Uniform),
            "2pb" => Ok(EspChoice::TwoPb),
            _ => Err(Error::Parameter(format!("unknown ESP family {s:?} (1pb, uniform, 2pb)"))),
        }
    }
}

/// Sampler settings; defaults follow the simulation study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub algorithm: Algorithm,
    /// Total sweeps including burn-in.
    pub iterations: usize,
    pub burn_in: usize,
    pub a_theta: f64,
    pub c_theta: f64,
    pub esp: EspFamily,
    pub alpha_prior: AlphaPrior,
    /// Stick law for [`Algorithm::CuspZ`]; `None` means Legnaro sticks with
    /// strength from `alpha_prior`.
    pub cusp_sticks: Option<StickFamily>,
    pub nu0_shape: f64,
    pub nu0_mean: f64,
    pub c_kappa: f64,
    pub b_kappa: f64,
    pub c_sigma: f64,
    pub b_sigma: f64,
    /// Random-walk standard deviations on the log scale.
    pub alpha_step: f64,
    pub nu0_step: f64,
    /// Tune the step sizes toward 44% acceptance during burn-in.
    pub adapt: bool,
    pub init_active: usize,
    pub boosting: bool,
    pub h_cap: usize,
    /// Keep every `loadings_thin`-th loadings/variance draw (0 keeps none).
    pub loadings_thin: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            algorithm: Algorithm::FClassification,
            iterations: 15_000,
            burn_in: 5_000,
            a_theta: 2.5,
            c_theta: 2.5,
            esp: EspFamily::OnePb,
            alpha_prior: AlphaPrior::Gamma { shape: 6.0, rate: 2.0 },
            cusp_sticks: None,
            nu0_shape: 10.0,
            nu0_mean: 0.01,
            c_kappa: 5.0,
            b_kappa: 5.0,
            c_sigma: 2.5,
            b_sigma: 1.5,
            alpha_step: 0.3,
            nu0_step: 0.5,
            adapt: true,
            init_active: 3,
            boosting: true,
            h_cap: 30,
            loadings_thin: 10,
        }
    }
}

impl SamplerConfig {
    pub fn with_prior(mut self, prior: MixturePrior) -> Self {
        self.a_theta = prior.a_theta();
        self
    }

    /// Uniform slab probabilities (strength pinned at `H`).
    pub fn with_uniform_esp(mut self) -> Self {
        self.esp = EspFamily::Uniform;
        self
    }

    pub fn kept(&self) -> usize {
        self.iterations.saturating_sub(self.burn_in)
    }

    pub fn slab(&self) -> Result<FParams> {
        FParams::slab(self.a_theta, self.c_theta)
    }

    pub fn nu0_prior(&self) -> Result<GammaParams> {
        if !(self.nu0_mean > 0.0) {
            return Err(Error::Parameter(format!("nu0 prior mean must be positive, got {}", self.nu0_mean)));
        }
        GammaParams::new(self.nu0_shape, self.nu0_shape / self.nu0_mean)
    }

    pub fn kappa_prior(&self) -> Result<InvGammaParams> {
        InvGammaParams::new(self.c_kappa, self.b_kappa)
    }

    pub fn sigma_prior(&self) -> Result<InvGammaParams> {
        InvGammaParams::new(self.c_sigma, self.b_sigma)
    }

    /// Slab-probability law at `H` columns; the uniform family pins the
    /// strength at `H` whatever `alpha_prior` says.
    pub fn esp_spec(&self, h: usize) -> EspSpec {
        match self.esp {
            EspFamily::Uniform => EspSpec::uniform(h),
            family => EspSpec {
                family,
                h,
                alpha_prior: self.alpha_prior,
            },
        }
    }

    /// Whether the sampler updates the strength parameter.
    pub fn learns_alpha(&self, h: usize) -> bool {
        let prior_is_gamma = matches!(self.esp_spec(h).alpha_prior, AlphaPrior::Gamma { .. });
        match self.algorithm {
            Algorithm::CuspZ => self.cusp_sticks.is_none() && prior_is_gamma,
            _ => prior_is_gamma && self.esp_spec(h).depends_on_alpha(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Parameter("iterations must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Parameter(format!(
                "burn-in {} must be below the total iteration count {}",
                self.burn_in, self.iterations
            )));
        }
        if self.h_cap == 0 {
            return Err(Error::Parameter("H cap must be positive".into()));
        }
        for (name, v) in [("alpha step", self.alpha_step), ("nu0 step", self.nu0_step)] {
            if !(v > 0.0) {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        self.slab()?;
        self.nu0_prior()?;
        self.kappa_prior()?;
        self.sigma_prior()?;
        match self.alpha_prior {
            AlphaPrior::Fixed { value } if !(value > 0.0) => {
                return Err(Error::Parameter(format!("fixed alpha must be positive, got {value}")))
            }
            AlphaPrior::Gamma { .. } => {
                self.alpha_prior.gamma().transpose()?;
            }
            _ => {}
        }
        Ok(())
    }
}
