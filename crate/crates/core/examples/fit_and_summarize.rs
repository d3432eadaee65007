//! Simulate a (20, 5) dense dataset, fit it with F classification and print
//! the posterior of the number of factors, MSE of the covariance and ESS.
//!
//! Pass a directory as the first argument to also write the chain there.

use std::path::PathBuf;

use cusp::cli::{dataset_rng, fit_dataset};
use cusp::factor::{simulate_dataset, ScenarioSpec};
use cusp::mcmc::{write_chain, SamplerConfig};
use cusp::postprocess::summarize;

fn main() -> cusp::Result<()> {
    let data = simulate_dataset(&mut dataset_rng(1, 0, 0), &ScenarioSpec::dense(20, 5, 100))?;
    let config = SamplerConfig {
        iterations: 6_000,
        burn_in: 2_000,
        ..Default::default()
    };
    let chain = fit_dataset(&data, &config, 1)?;
    let s = summarize(&chain, data.truth.as_ref())?;

    println!("H = {}, kept draws = {}", s.h, s.kept);
    for (k, p) in s.hstar.pmf.iter().enumerate().filter(|(_, &p)| p > 0.0) {
        println!("  p(H* = {k:>2} | y) = {p:.3}");
    }
    println!("mode {} (true 5)", s.hstar.mode);
    println!("MSE of Omega {:.3}", s.mse_omega.unwrap_or(f64::NAN));
    println!("ESS/N: log det {:.3}, Frobenius norm of the inverse {:.3}", s.ess_rate_logdet_omega, s.ess_rate_frob_omega_inv);
    println!("acceptance: alpha {:?}, nu0 {:?}", s.acceptance_alpha, s.acceptance_nu0);

    if let Some(dir) = std::env::args().nth(1).map(PathBuf::from) {
        write_chain(&dir, &chain)?;
        println!("chain written to {}", dir.display());
    }
    Ok(())
}
