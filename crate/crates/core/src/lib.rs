//! Cumulative (CUSP) and exchangeable (ESP) shrinkage process priors for
//! overfitting sparse Bayesian factor models.
//!
//! - [`distributions`]: seedable streams and the variates and densities the
//!   samplers need.
//! - [`shrinkage`]: stick-breaking CUSP priors, exchangeable priors and the
//!   order-statistics map between them.
//! - [`factor`]: the Gaussian factor model, its simulator and the loadings,
//!   variance and factor conditionals.
//! - [`mcmc`]: F- and t-classification samplers and the CUSP indicator sampler.
//! - [`postprocess`]: posterior of the number of factors, reordering, MSE and ESS.
//! - [`cli`]: commands behind the `cusp` binary and the simulation-study harness.
//!
//! ```
//! use cusp::distributions::Rng;
//! use cusp::factor::{simulate_dataset, ScenarioSpec};
//! use cusp::mcmc::{run_chain, SamplerConfig};
//! use cusp::postprocess::summarize_hstar;
//!
//! let mut rng = Rng::new(1, 0);
//! let data = simulate_dataset(&mut rng, &ScenarioSpec::dense(12, 2, 60)).unwrap();
//! let config = SamplerConfig { iterations: 600, burn_in: 200, ..Default::default() };
//! let chain = run_chain(&mut rng, &data, &config).unwrap();
//! assert_eq!(chain.len(), 400);
//! let post = summarize_hstar(&chain, Some(2)).unwrap();
//! assert!((post.pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod distributions;
pub mod error;
pub mod factor;
mod linalg;
pub mod mcmc;
pub mod postprocess;
pub mod shrinkage;

pub use error::{Error, Result};
