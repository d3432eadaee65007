//! A small simulation study: two replicates of the (20, 5) dense and sparse
//! scenarios under the three slab mixtures, run on all cores.

use cusp::cli::{run_study, StudyConfig};
use cusp::factor::ScenarioSpec;
use cusp::mcmc::SamplerConfig;

fn main() -> cusp::Result<()> {
    let config = StudyConfig {
        scenarios: vec![ScenarioSpec::dense(20, 5, 100), ScenarioSpec::sparse(20, 5, 100)],
        replicates: 2,
        sampler: SamplerConfig {
            iterations: 4_000,
            burn_in: 1_500,
            ..Default::default()
        },
        ..Default::default()
    };
    let result = run_study(&config)?;
    println!("{:<16} prior  mode  ordinate   MSE", "scenario");
    for c in &result.table {
        let med = |s: &Option<cusp::cli::Spread>| s.as_ref().map_or(f64::NAN, |s| s.median);
        println!(
            "{:<16} {:<5}  {:>4.1}  {:>8.3}  {:>5.3}",
            c.scenario,
            c.prior.tag(),
            med(&c.mode),
            med(&c.ordinate),
            med(&c.mse_omega)
        );
    }
    Ok(())
}
