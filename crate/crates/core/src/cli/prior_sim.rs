use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distributions::{derive_stream, tag_word, Rng};
use crate::error::{Error, Result};
use crate::shrinkage::{
    onepb_stick_law, order_statistic_ratios, verify_increasing_shrinkage, AlphaPrior, EspFamily, EspSpec,
    ShrinkagePrior, ShrinkageReport, SpikeSlabSpec, StickBreakingSpec,
};

/// Settings of the prior-simulation report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorSimConfig {
    pub draws: usize,
    /// Strength of the exchangeable and CUSP priors.
    pub alpha: f64,
    /// Columns of the exchangeable prior.
    pub h: usize,
    /// Truncation of the CUSP prior.
    pub cusp_h: usize,
    pub esp: EspFamily,
    pub nu0: f64,
    pub a_theta: f64,
    pub c_theta: f64,
    pub eps: Vec<f64>,
    pub seed: u64,
}

impl Default for PriorSimConfig {
    fn default() -> Self {
        PriorSimConfig {
            draws: 100_000,
            alpha: 5.0,
            h: 10,
            cusp_h: 30,
            esp: EspFamily::OnePb,
            nu0: 0.01,
            a_theta: 2.5,
            c_theta: 2.5,
            eps: vec![0.05, 0.1, 0.5],
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HStarMomentRow {
    pub prior: String,
    pub h: usize,
    pub alpha: f64,
    pub mc_mean: f64,
    pub mc_mean_se: f64,
    pub mc_variance: f64,
    pub exact_mean: Option<f64>,
    pub exact_variance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderStatRow {
    pub h: usize,
    pub mc_mean: f64,
    pub mc_variance: f64,
    pub law_mean: f64,
    pub law_variance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PriorSimReport {
    pub cusp: ShrinkageReport,
    pub esp: ShrinkageReport,
    pub control: ShrinkageReport,
    pub hstar: Vec<HStarMomentRow>,
    pub order_stats: Vec<OrderStatRow>,
}

fn hstar_row(rng: &mut Rng, name: &str, prior: &ShrinkagePrior, alpha: f64, n: usize) -> Result<HStarMomentRow> {
    let draws: Vec<f64> = (0..n)
        .map(|_| prior.sample_hstar(rng).map(|k| k as f64))
        .collect::<Result<_>>()?;
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let exact = prior.hstar_moments().ok();
    Ok(HStarMomentRow {
        prior: name.to_string(),
        h: prior.h(),
        alpha,
        mc_mean: mean,
        mc_mean_se: (var / n as f64).sqrt(),
        mc_variance: var,
        exact_mean: exact.map(|e| e.0),
        exact_variance: exact.map(|e| e.1),
    })
}

/// Shrinkage curves of a truncated Legnaro CUSP prior, the reordered
/// exchangeable prior and a spike = slab control; `H*` moments; and the law
/// of the stick ratios of the reordered 1PB prior.
pub fn run_prior_sim(config: &PriorSimConfig) -> Result<PriorSimReport> {
    if config.draws < 2 {
        return Err(Error::Parameter("prior simulation needs at least two draws".into()));
    }
    let rng_for = |tag: &str| Rng::new(config.seed, derive_stream(&[tag_word(tag)]));
    let ss = SpikeSlabSpec::triple_gamma(config.a_theta, config.c_theta, config.nu0)?;
    let cusp = ShrinkagePrior::Cusp(StickBreakingSpec::legnaro(config.alpha, config.cusp_h)?);
    let fixed = AlphaPrior::Fixed { value: config.alpha };
    let esp_spec = match config.esp {
        EspFamily::Uniform => EspSpec::uniform(config.h),
        family => EspSpec {
            family,
            h: config.h,
            alpha_prior: fixed,
        },
    };
    let esp_alpha = match esp_spec.alpha_prior {
        AlphaPrior::Fixed { value } => value,
        AlphaPrior::Gamma { .. } => config.alpha,
    };
    let esp = ShrinkagePrior::Esp {
        spec: esp_spec,
        alpha: esp_alpha,
    };
    let equal = SpikeSlabSpec::triple_gamma(config.a_theta, config.c_theta, 1.0)?;
    let n = config.draws;
    let cusp_report = verify_increasing_shrinkage(&mut rng_for("cusp"), &cusp, &ss, &config.eps, n)?;
    let esp_report = verify_increasing_shrinkage(&mut rng_for("esp"), &esp, &ss, &config.eps, n)?;
    let control = verify_increasing_shrinkage(&mut rng_for("control"), &cusp, &equal, &config.eps, n)?;
    let hstar = vec![
        hstar_row(&mut rng_for("hstar-esp"), "esp", &esp, esp_alpha, n)?,
        hstar_row(&mut rng_for("hstar-cusp"), "cusp", &cusp, config.alpha, n)?,
    ];
    let order_stats = if config.esp == EspFamily::OnePb || config.esp == EspFamily::Uniform {
        let ratios = order_statistic_ratios(&mut rng_for("order"), &esp_spec, esp_alpha, n)?;
        let law = onepb_stick_law(esp_alpha, config.h)?;
        (0..config.h)
            .map(|j| {
                let col: Vec<f64> = ratios.iter().map(|r| r[j]).collect();
                let mean = col.iter().sum::<f64>() / n as f64;
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                // the ratio is 1 - nu with nu ~ Beta(1, b): Beta(b, 1)
                let b = law[j].b();
                OrderStatRow {
                    h: j + 1,
                    mc_mean: mean,
                    mc_variance: var,
                    law_mean: b / (b + 1.0),
                    law_variance: b / ((b + 1.0).powi(2) * (b + 2.0)),
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(PriorSimReport {
        cusp: cusp_report,
        esp: esp_report,
        control,
        hstar,
        order_stats,
    })
}

fn write_curve(path: &Path, report: &ShrinkageReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["eps", "h", "estimate", "std_error"])?;
    for r in &report.rows {
        w.write_record([format!("{:?}", r.eps), r.h.to_string(), format!("{:?}", r.estimate), format!("{:?}", r.std_error)])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Write `shrinkage_cusp.csv`, `shrinkage_esp.csv`, `shrinkage_control.csv`,
/// `hstar_moments.csv`, `order_stats.csv` and `prior_sim.json`.
pub fn write_prior_sim(dir: &Path, report: &PriorSimReport) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_curve(&dir.join("shrinkage_cusp.csv"), &report.cusp)?;
    write_curve(&dir.join("shrinkage_esp.csv"), &report.esp)?;
    write_curve(&dir.join("shrinkage_control.csv"), &report.control)?;
    let mut w = csv::Writer::from_path(dir.join("hstar_moments.csv"))?;
    for r in &report.hstar {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(dir, e))?;
    let mut w = csv::Writer::from_path(dir.join("order_stats.csv"))?;
    for r in &report.order_stats {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(dir, e))?;
    let path = dir.join("prior_sim.json");
    fs::write(&path, serde_json::to_string_pretty(report)?).map_err(|e| Error::io(&path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_report() {
        let cfg = PriorSimConfig {
            draws: 4000,
            ..Default::default()
        };
        let r = run_prior_sim(&cfg).unwrap();
        assert_eq!(r.cusp.rows.len(), 3 * 30);
        assert_eq!(r.order_stats.len(), 10);
        let esp = &r.hstar[0];
        assert!((esp.exact_mean.unwrap() - 10.0 / 3.0).abs() < 1e-12);
        assert!((esp.mc_mean - 10.0 / 3.0).abs() < 4.0 * esp.mc_mean_se);
        assert!(r.hstar[1].exact_mean.is_none());
        let dir = tempfile::tempdir().unwrap();
        write_prior_sim(dir.path(), &r).unwrap();
        let text = fs::read_to_string(dir.path().join("shrinkage_cusp.csv")).unwrap();
        assert!(text.starts_with("eps,h,estimate,std_error"));
    }
}
