//! Command implementations behind the `cusp` binary: dataset simulation,
//! single fits, prior simulation, the simulation-study grid and chain
//! summaries. Seeds are derived from the master seed and the unit's
//! coordinates, never from scheduling order.

mod prior_sim;
mod study;

use std::fs;
use std::path::{Path, PathBuf};

use crate::distributions::{derive_stream, tag_word, Rng};
use crate::error::{Error, Result};
use crate::factor::{load_dataset, load_truth, Dataset, TRUTH_FILE};
use crate::mcmc::{read_chain, run_chain, write_chain, ChainOutput, SamplerConfig};
use crate::postprocess::{summarize, write_figure_data, FitSummary};

pub use prior_sim::{run_prior_sim, write_prior_sim, HStarMomentRow, OrderStatRow, PriorSimConfig, PriorSimReport};
pub use study::{
    aggregate, run_study, simulate_study_datasets, write_study, Spread, StudyCell, StudyConfig, StudyResult,
    StudyRow,
};

/// Stream of the `replicate`-th dataset of scenario `scenario`.
pub fn dataset_rng(seed: u64, scenario: usize, replicate: usize) -> Rng {
    Rng::new(
        seed,
        derive_stream(&[scenario as u64, tag_word("data"), replicate as u64]),
    )
}

/// Stream of the chain fitted with slab mixture `prior` to that dataset.
pub fn chain_rng(seed: u64, scenario: usize, prior: &str, replicate: usize) -> Rng {
    Rng::new(seed, derive_stream(&[scenario as u64, tag_word(prior), replicate as u64]))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Simulate every replicate dataset of a study under `out`.
pub fn cmd_simulate(config: &StudyConfig, out: &Path) -> Result<Vec<PathBuf>> {
    simulate_study_datasets(config, out)
}

/// Fit one dataset and write the chain directory to `out`; the dataset's
/// truth (if any) is copied alongside for later summaries.
pub fn cmd_fit(data_path: &Path, config: &SamplerConfig, seed: u64, standardize: bool, out: &Path) -> Result<ChainOutput> {
    let data = load_dataset(data_path)?;
    let data = if standardize { data.standardized() } else { data };
    let chain = fit_dataset(&data, config, seed)?;
    write_chain(out, &chain)?;
    if let Some(t) = &data.truth {
        let beta0: Vec<Vec<f64>> = t.beta.row_iter().map(|r| r.iter().copied().collect()).collect();
        write_json(
            &out.join(TRUTH_FILE),
            &serde_json::json!({
                "h0": t.h0(),
                "beta0": beta0,
                "sigma0": t.sigma2.iter().copied().collect::<Vec<_>>(),
            }),
        )?;
    }
    Ok(chain)
}

pub fn fit_dataset(data: &Dataset, config: &SamplerConfig, seed: u64) -> Result<ChainOutput> {
    run_chain(&mut Rng::new(seed, derive_stream(&[tag_word("fit")])), data, config)
}

/// Simulation-study grid; writes the tables when `config.out` is set.
pub fn cmd_reproduce_table(config: &StudyConfig) -> Result<StudyResult> {
    let result = run_study(config)?;
    if let Some(dir) = &config.out {
        write_study(dir, &result)?;
    }
    Ok(result)
}

pub fn cmd_prior_sim(config: &PriorSimConfig, out: &Path) -> Result<PriorSimReport> {
    let report = run_prior_sim(config)?;
    write_prior_sim(out, &report)?;
    Ok(report)
}

/// Summarize a chain directory: `summary.json` plus the figure CSVs in `out`
/// (default: the chain directory). The summary holds no timings, so it is
/// byte-identical across reruns; timings stay in `meta.json`.
pub fn cmd_summarize(chain_dir: &Path, out: Option<&Path>) -> Result<FitSummary> {
    let chain = read_chain(chain_dir)?;
    let truth_path = chain_dir.join(TRUTH_FILE);
    let truth = if truth_path.exists() { Some(load_truth(&truth_path)?) } else { None };
    let summary = summarize(&chain, truth.as_ref())?;
    let out = out.unwrap_or(chain_dir);
    write_json(&out.join("summary.json"), &summary)?;
    write_figure_data(out, &chain)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::{save_dataset, simulate_dataset, ScenarioSpec};

    #[test]
    fn simulate_fit_summarize_is_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let data = simulate_dataset(&mut dataset_rng(5, 0, 0), &ScenarioSpec::dense(10, 2, 30)).unwrap();
        save_dataset(&dir.path().join("data"), &data, None).unwrap();
        let config = SamplerConfig {
            iterations: 300,
            burn_in: 100,
            ..Default::default()
        };
        let mut texts = Vec::new();
        for k in 0..2 {
            let chain_dir = dir.path().join(format!("chain{k}"));
            cmd_fit(&dir.path().join("data"), &config, 9, false, &chain_dir).unwrap();
            let s = cmd_summarize(&chain_dir, None).unwrap();
            assert_eq!(s.h0, Some(2));
            assert!(s.mse_omega.is_some());
            texts.push(fs::read(chain_dir.join("summary.json")).unwrap());
            let trace = fs::read_to_string(chain_dir.join("fig_alpha_trace.csv")).unwrap();
            assert_eq!(trace.lines().count(), 201);
        }
        assert_eq!(texts[0], texts[1]);
    }

    #[test]
    fn summarize_missing_dir_is_io() {
        assert!(cmd_summarize(Path::new("/no/such/chain"), None).unwrap_err().is_io());
    }
}
