use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{chain_rng, dataset_rng};
use crate::error::{Error, Result};
use crate::factor::{save_dataset, simulate_dataset, ScenarioSpec};
use crate::mcmc::{run_chain, MixturePrior, SamplerConfig};
use crate::postprocess::{mse_omega, quantile, summarize_hstar};
use crate::shrinkage::EspFamily;

/// A simulation study over scenarios, slab mixtures and replicate datasets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub scenarios: Vec<ScenarioSpec>,
    pub replicates: usize,
    pub priors: Vec<MixturePrior>,
    pub esp: EspFamily,
    /// Base sampler settings; `a_theta` and `esp` are overridden per variant.
    pub sampler: SamplerConfig,
    pub seed: u64,
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            scenarios: vec![ScenarioSpec::dense(20, 5, 100), ScenarioSpec::dense(50, 10, 100)],
            replicates: 5,
            priors: vec![MixturePrior::F, MixturePrior::L, MixturePrior::H],
            esp: EspFamily::OnePb,
            sampler: SamplerConfig::default(),
            seed: 1,
            jobs: None,
            out: None,
        }
    }
}

impl StudyConfig {
    /// Add the `(100, 15)` dense scenario.
    pub fn with_full_grid(mut self) -> Self {
        let big = ScenarioSpec::dense(100, 15, 100);
        if !self.scenarios.contains(&big) {
            self.scenarios.push(big);
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Parameter("at least one replicate is required".into()));
        }
        for s in &self.scenarios {
            s.validate()?;
        }
        self.sampler.validate()
    }

    pub fn sampler_for(&self, prior: MixturePrior) -> SamplerConfig {
        SamplerConfig {
            esp: self.esp,
            ..self.sampler.clone()
        }
        .with_prior(prior)
    }
}

/// Outcome of one (scenario, prior, replicate) fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub scenario: String,
    pub scenario_index: usize,
    pub prior: MixturePrior,
    pub replicate: usize,
    pub mode: Option<usize>,
    pub ordinate: Option<f64>,
    pub mse_omega: Option<f64>,
    pub runtime_seconds: f64,
    pub error: Option<String>,
}

/// Median and 5% / 95% quantiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub median: f64,
    pub q05: f64,
    pub q95: f64,
}

impl Spread {
    fn of(values: &[f64]) -> Option<Spread> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Spread {
            median: quantile(&v, 0.5),
            q05: quantile(&v, 0.05),
            q95: quantile(&v, 0.95),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyCell {
    pub scenario: String,
    pub prior: MixturePrior,
    pub completed: usize,
    pub failed: usize,
    pub mode: Option<Spread>,
    pub ordinate: Option<Spread>,
    pub mse_omega: Option<Spread>,
    pub median_runtime_seconds: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub rows: Vec<StudyRow>,
    pub table: Vec<StudyCell>,
}

fn fit_unit(config: &StudyConfig, si: usize, prior: MixturePrior, rep: usize) -> StudyRow {
    let spec = &config.scenarios[si];
    let start = Instant::now();
    let result = (|| -> Result<(usize, Option<f64>, Option<f64>)> {
        let data = simulate_dataset(&mut dataset_rng(config.seed, si, rep), spec)?;
        let sampler = config.sampler_for(prior);
        let out = run_chain(&mut chain_rng(config.seed, si, prior.tag(), rep), &data, &sampler)?;
        let truth = data.truth.as_ref().expect("simulated data carry their truth");
        let hs = summarize_hstar(&out, Some(truth.h0()))?;
        let mse = if out.loadings.is_empty() {
            None
        } else {
            Some(mse_omega(&out.loadings, &truth.omega())?)
        };
        Ok((hs.mode, hs.ordinate, mse))
    })();
    let runtime_seconds = start.elapsed().as_secs_f64();
    let (mode, ordinate, mse_omega, error) = match result {
        Ok((m, o, e)) => (Some(m), o, e, None),
        Err(e) => (None, None, None, Some(e.to_string())),
    };
    StudyRow {
        scenario: spec.label(),
        scenario_index: si,
        prior,
        replicate: rep,
        mode,
        ordinate,
        mse_omega,
        runtime_seconds,
        error,
    }
}

/// Aggregate per (scenario, prior) over completed replicates.
pub fn aggregate(config: &StudyConfig, rows: &[StudyRow]) -> Vec<StudyCell> {
    let mut table = Vec::new();
    for (si, spec) in config.scenarios.iter().enumerate() {
        for &prior in &config.priors {
            let cell: Vec<&StudyRow> = rows
                .iter()
                .filter(|r| r.scenario_index == si && r.prior == prior)
                .collect();
            let ok: Vec<&&StudyRow> = cell.iter().filter(|r| r.error.is_none()).collect();
            let pick = |f: &dyn Fn(&StudyRow) -> Option<f64>| -> Vec<f64> { ok.iter().filter_map(|r| f(r)).collect() };
            let runtimes = pick(&|r| Some(r.runtime_seconds));
            table.push(StudyCell {
                scenario: spec.label(),
                prior,
                completed: ok.len(),
                failed: cell.len() - ok.len(),
                mode: Spread::of(&pick(&|r| r.mode.map(|m| m as f64))),
                ordinate: Spread::of(&pick(&|r| r.ordinate)),
                mse_omega: Spread::of(&pick(&|r| r.mse_omega)),
                median_runtime_seconds: Spread::of(&runtimes).map(|s| s.median),
            });
        }
    }
    table
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j.max(1));
    }
    b.build().map_err(|e| Error::Parameter(format!("cannot build worker pool: {e}")))
}

/// Run every (scenario, prior, replicate) unit on a worker pool and
/// aggregate; failed units are kept as rows with an error message.
pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    config.validate()?;
    let units: Vec<(usize, MixturePrior, usize)> = (0..config.scenarios.len())
        .flat_map(|si| {
            config
                .priors
                .iter()
                .flat_map(move |&p| (0..config.replicates).map(move |r| (si, p, r)))
        })
        .collect();
    let rows: Vec<StudyRow> = pool(config.jobs)?.install(|| {
        units
            .par_iter()
            .map(|&(si, p, r)| fit_unit(config, si, p, r))
            .collect()
    });
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "warning: {} prior {} replicate {} failed: {}",
            r.scenario,
            r.prior.tag(),
            r.replicate,
            r.error.as_deref().unwrap_or("")
        );
    }
    let table = aggregate(config, &rows);
    Ok(StudyResult { rows, table })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

/// Write `replicates.csv`, `table.csv` and `table.json`.
pub fn write_study(dir: &Path, result: &StudyResult) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut w = csv::Writer::from_path(dir.join("replicates.csv"))?;
    w.write_record([
        "scenario", "prior", "replicate", "mode", "ordinate", "mse_omega", "runtime_seconds", "error",
    ])?;
    for r in &result.rows {
        w.write_record([
            r.scenario.clone(),
            r.prior.tag().to_string(),
            r.replicate.to_string(),
            r.mode.map(|m| m.to_string()).unwrap_or_default(),
            opt(r.ordinate),
            opt(r.mse_omega),
            format!("{:.3}", r.runtime_seconds),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(dir, e))?;

    let mut w = csv::Writer::from_path(dir.join("table.csv"))?;
    w.write_record([
        "scenario",
        "prior",
        "completed",
        "failed",
        "mode_median",
        "mode_q05",
        "mode_q95",
        "ordinate_median",
        "ordinate_q05",
        "ordinate_q95",
        "mse_median",
        "mse_q05",
        "mse_q95",
        "runtime_median",
    ])?;
    for c in &result.table {
        let s = |x: &Option<Spread>| -> [String; 3] {
            match x {
                Some(s) => [format!("{:?}", s.median), format!("{:?}", s.q05), format!("{:?}", s.q95)],
                None => Default::default(),
            }
        };
        let mut rec = vec![
            c.scenario.clone(),
            c.prior.tag().to_string(),
            c.completed.to_string(),
            c.failed.to_string(),
        ];
        rec.extend(s(&c.mode));
        rec.extend(s(&c.ordinate));
        rec.extend(s(&c.mse_omega));
        rec.push(c.median_runtime_seconds.map(|v| format!("{v:.3}")).unwrap_or_default());
        w.write_record(rec)?;
    }
    w.flush().map_err(|e| Error::io(dir, e))?;

    let path = dir.join("table.json");
    fs::write(&path, serde_json::to_string_pretty(result)?).map_err(|e| Error::io(&path, e))?;
    Ok(())
}

/// Write each replicate dataset of every scenario to
/// `<out>/<scenario label>/rep<k>/`.
pub fn simulate_study_datasets(config: &StudyConfig, out: &Path) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let mut dirs = Vec::new();
    for (si, spec) in config.scenarios.iter().enumerate() {
        for rep in 0..config.replicates {
            let data = simulate_dataset(&mut dataset_rng(config.seed, si, rep), spec)?;
            let dir = out.join(spec.label()).join(format!("rep{rep}"));
            let meta = serde_json::json!({
                "scenario": spec,
                "replicate": rep,
                "seed": config.seed,
            });
            save_dataset(&dir, &data, Some(meta))?;
            dirs.push(dir);
        }
    }
    Ok(dirs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> StudyConfig {
        StudyConfig {
            scenarios: vec![ScenarioSpec::dense(10, 2, 40)],
            replicates: 2,
            priors: vec![MixturePrior::F, MixturePrior::H],
            sampler: SamplerConfig {
                iterations: 250,
                burn_in: 50,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn serial_and_parallel_agree() {
        let a = run_study(&StudyConfig { jobs: Some(1), ..tiny() }).unwrap();
        let b = run_study(&StudyConfig { jobs: Some(4), ..tiny() }).unwrap();
        assert_eq!(a.rows.len(), 4);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!((x.mode, x.ordinate, x.mse_omega), (y.mode, y.ordinate, y.mse_omega));
        }
        assert_eq!(a.table.len(), 2);
        assert_eq!(a.table[0].completed, 2);
    }

    #[test]
    fn empty_study_is_fine() {
        let r = run_study(&StudyConfig { scenarios: vec![], ..tiny() }).unwrap();
        assert!(r.rows.is_empty() && r.table.is_empty());
        let dir = tempfile::tempdir().unwrap();
        write_study(dir.path(), &r).unwrap();
    }

    #[test]
    fn failures_are_recorded() {
        let mut cfg = tiny();
        cfg.replicates = 1;
        cfg.priors = vec![MixturePrior::F];
        // H = 1 leaves no room for three initially active columns
        cfg.scenarios = vec![ScenarioSpec::dense(4, 0, 10)];
        let r = run_study(&cfg).unwrap();
        assert!(r.rows[0].error.is_some());
        assert_eq!(r.table[0].failed, 1);
        assert!(r.table[0].mode.is_none());
    }

    #[test]
    fn datasets_are_reproducible() {
        let cfg = StudyConfig {
            replicates: 2,
            ..tiny()
        };
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let a = simulate_study_datasets(&cfg, d1.path()).unwrap();
        let b = simulate_study_datasets(&cfg, d2.path()).unwrap();
        assert_eq!(a.len(), 2);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(fs::read(x.join("y.csv")).unwrap(), fs::read(y.join("y.csv")).unwrap());
        }
    }
}
