//! F versus t classification on one (50, 10) dataset under the horseshoe-like
//! mixture. Prints how often each visited value of H* occurs.

use std::collections::BTreeMap;

use cusp::cli::{chain_rng, dataset_rng};
use cusp::factor::{simulate_dataset, ScenarioSpec};
use cusp::mcmc::{run_chain, Algorithm, MixturePrior, SamplerConfig};

fn main() -> cusp::Result<()> {
    let data = simulate_dataset(&mut dataset_rng(3, 1, 0), &ScenarioSpec::dense(50, 10, 100))?;
    for algorithm in [Algorithm::FClassification, Algorithm::TClassification] {
        let config = SamplerConfig {
            algorithm,
            iterations: 8_000,
            burn_in: 3_000,
            ..SamplerConfig::default().with_prior(MixturePrior::H)
        };
        // same stream for both, so the comparison is seed-matched
        let chain = run_chain(&mut chain_rng(3, 1, "compare", 0), &data, &config)?;
        let mut visits = BTreeMap::new();
        for &k in &chain.hstar {
            *visits.entry(k).or_insert(0usize) += 1;
        }
        println!("{algorithm}: {} distinct values {visits:?}", visits.len());
    }
    Ok(())
}
