//! Posterior summaries of a chain: the distribution of the number of active
//! columns, the CUSP reordering of the column draws, covariance error,
//! effective sample sizes and the data behind the trace and box plots.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{implied_covariance, Truth};
use crate::mcmc::{ChainOutput, LoadingsDraw};
use crate::shrinkage::decreasing_order;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HStarSummary {
    /// `pmf[k] = P(H* = k | y)`, `k = 0..=H`.
    pub pmf: Vec<f64>,
    pub mode: usize,
    /// Another value shares the mode's probability (the smallest is reported).
    pub mode_tied: bool,
    /// `P(H* = H0 | y)` when the truth is known.
    pub ordinate: Option<f64>,
}

/// Empirical posterior of `H*` from raw draws over `{0, ..., h}`.
pub fn hstar_summary(draws: &[usize], h: usize, h0: Option<usize>) -> Result<HStarSummary> {
    if draws.is_empty() {
        return Err(Error::Empty("no H* draws".into()));
    }
    let top = draws.iter().copied().max().unwrap_or(0).max(h).max(h0.unwrap_or(0));
    let mut counts = vec![0usize; top + 1];
    for &d in draws {
        counts[d] += 1;
    }
    let n = draws.len() as f64;
    let pmf: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let best = *counts.iter().max().expect("non-empty");
    let mode = counts.iter().position(|&c| c == best).expect("max exists");
    let mode_tied = counts.iter().filter(|&&c| c == best).count() > 1;
    Ok(HStarSummary {
        ordinate: h0.map(|k| pmf[k]),
        pmf,
        mode,
        mode_tied,
    })
}

pub fn summarize_hstar(out: &ChainOutput, h0: Option<usize>) -> Result<HStarSummary> {
    hstar_summary(&out.hstar, out.h(), h0)
}

/// Column draws sorted by decreasing slab probability, per iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct CuspReordered {
    pub tau_sorted: Vec<Vec<f64>>,
    /// `pi_h = 1 - tau_(h)`, increasing in `h`.
    pub spike_probs: Vec<Vec<f64>>,
    pub theta_star: Vec<Vec<f64>>,
}

/// Sort every iteration's `tau` decreasingly (ties by column index) and
/// carry `theta` along with the same permutation.
pub fn cusp_reorder_draws(tau: &[Vec<f64>], theta: &[Vec<f64>]) -> Result<CuspReordered> {
    if tau.is_empty() {
        return Err(Error::Missing("no slab-probability draws".into()));
    }
    if tau.len() != theta.len() {
        return Err(Error::Dimension(format!("{} tau draws but {} theta draws", tau.len(), theta.len())));
    }
    let mut out = CuspReordered {
        tau_sorted: Vec::with_capacity(tau.len()),
        spike_probs: Vec::with_capacity(tau.len()),
        theta_star: Vec::with_capacity(tau.len()),
    };
    for (t, th) in tau.iter().zip(theta) {
        if t.len() != th.len() {
            return Err(Error::Dimension("tau and theta draws differ in length".into()));
        }
        let rho = decreasing_order(t);
        let sorted: Vec<f64> = rho.iter().map(|&i| t[i]).collect();
        out.spike_probs.push(sorted.iter().map(|v| 1.0 - v).collect());
        out.theta_star.push(rho.iter().map(|&i| th[i]).collect());
        out.tau_sorted.push(sorted);
    }
    Ok(out)
}

pub fn cusp_reorder(out: &ChainOutput) -> Result<CuspReordered> {
    cusp_reorder_draws(&out.tau, &out.theta)
}

/// Sample quantile with linear interpolation between order statistics
/// (`(n - 1) p` positions).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let pos = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub quantity: String,
    pub h: usize,
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
}

fn column_box(quantity: &str, draws: &[Vec<f64>]) -> Vec<BoxStats> {
    let h = draws.first().map_or(0, Vec::len);
    (0..h)
        .map(|j| {
            let mut col: Vec<f64> = draws.iter().map(|d| d[j]).collect();
            col.sort_by(f64::total_cmp);
            BoxStats {
                quantity: quantity.to_string(),
                h: j + 1,
                q05: quantile(&col, 0.05),
                q25: quantile(&col, 0.25),
                q50: quantile(&col, 0.5),
                q75: quantile(&col, 0.75),
                q95: quantile(&col, 0.95),
            }
        })
        .collect()
}

/// Per-position box-plot statistics of `pi_h` followed by those of `theta*_h`.
pub fn cusp_box_stats(r: &CuspReordered) -> Vec<BoxStats> {
    let mut rows = column_box("pi", &r.spike_probs);
    rows.extend(column_box("theta_star", &r.theta_star));
    rows
}

/// Posterior mean squared error of the implied covariance over the lower
/// triangle (diagonal included), divided by `m (m + 1) / 2`.
pub fn mse_omega(draws: &[LoadingsDraw], omega0: &DMatrix<f64>) -> Result<f64> {
    if draws.is_empty() {
        return Err(Error::Missing("no stored loadings draws".into()));
    }
    let m = omega0.nrows();
    let mut total = 0.0;
    for d in draws {
        if d.beta.nrows() != m || d.sigma2.len() != m {
            return Err(Error::Dimension(format!(
                "draw has {} rows but the truth is {m} x {m}",
                d.beta.nrows()
            )));
        }
        let omega = implied_covariance(&d.beta, &d.sigma2);
        for i in 0..m {
            for l in 0..=i {
                total += (omega[(i, l)] - omega0[(i, l)]).powi(2);
            }
        }
    }
    Ok(total / draws.len() as f64 / (m * (m + 1) / 2) as f64)
}

pub const MIN_ESS_LENGTH: usize = 100;

/// Effective sample size from the initial monotone positive sequence of
/// summed autocorrelation pairs. A constant sequence has ESS 1.
pub fn ess(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < MIN_ESS_LENGTH {
        return Err(Error::Parameter(format!("ESS needs at least {MIN_ESS_LENGTH} draws, got {n}")));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let acov = |lag: usize| -> f64 {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
    };
    let c0 = acov(0);
    if !(c0 > 0.0) {
        return Ok(1.0);
    }
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut k = 0;
    while 2 * k + 1 < n {
        let pair = (acov(2 * k) + acov(2 * k + 1)) / c0;
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        sum += pair;
        prev = pair;
        k += 1;
    }
    let tau = (2.0 * sum - 1.0).max(1.0 / n as f64);
    Ok(n as f64 / tau)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub h: usize,
    pub kept: usize,
    pub h0: Option<usize>,
    pub hstar: HStarSummary,
    pub mse_omega: Option<f64>,
    pub ess_logdet_omega: f64,
    pub ess_frob_omega_inv: f64,
    /// ESS divided by the number of kept draws.
    pub ess_rate_logdet_omega: f64,
    pub ess_rate_frob_omega_inv: f64,
    pub posterior_mean_alpha: f64,
    pub acceptance_alpha: Option<f64>,
    pub acceptance_nu0: Option<f64>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Summary of one chain; the covariance error needs the truth and stored loadings.
pub fn summarize(out: &ChainOutput, truth: Option<&Truth>) -> Result<FitSummary> {
    let h0 = truth.map(Truth::h0);
    let hstar = summarize_hstar(out, h0)?;
    let mse = match truth {
        Some(t) if !out.loadings.is_empty() => Some(mse_omega(&out.loadings, &t.omega())?),
        _ => None,
    };
    let n = out.len() as f64;
    let e1 = ess(&out.logdet_omega)?;
    let e2 = ess(&out.frob_omega_inv)?;
    Ok(FitSummary {
        h: out.h(),
        kept: out.len(),
        h0,
        hstar,
        mse_omega: mse,
        ess_logdet_omega: e1,
        ess_frob_omega_inv: e2,
        ess_rate_logdet_omega: e1 / n,
        ess_rate_frob_omega_inv: e2 / n,
        posterior_mean_alpha: mean(&out.alpha),
        acceptance_alpha: out.meta.acceptance_alpha,
        acceptance_nu0: out.meta.acceptance_nu0,
    })
}

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

/// Write `fig_hstar_trace.csv`, `fig_cusp_box.csv` and `fig_alpha_trace.csv`.
pub fn write_figure_data(dir: &Path, out: &ChainOutput) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut w = csv::Writer::from_path(dir.join("fig_hstar_trace.csv"))?;
    w.write_record(["iteration", "hstar"])?;
    for (it, k) in out.iteration.iter().zip(&out.hstar) {
        w.write_record([it.to_string(), k.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(dir, e))?;

    let mut w = csv::Writer::from_path(dir.join("fig_alpha_trace.csv"))?;
    w.write_record(["iteration", "alpha"])?;
    for (it, a) in out.iteration.iter().zip(&out.alpha) {
        w.write_record([it.to_string(), fmt(*a)])?;
    }
    w.flush().map_err(|e| Error::io(dir, e))?;

    let mut w = csv::Writer::from_path(dir.join("fig_cusp_box.csv"))?;
    w.write_record(["quantity", "h", "q05", "q25", "q50", "q75", "q95"])?;
    for b in cusp_box_stats(&cusp_reorder(out)?) {
        w.write_record([
            b.quantity.clone(),
            b.h.to_string(),
            fmt(b.q05),
            fmt(b.q25),
            fmt(b.q50),
            fmt(b.q75),
            fmt(b.q95),
        ])?;
    }
    w.flush().map_err(|e| Error::io(dir, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn constant_hstar() {
        let s = hstar_summary(&[5; 50], 9, Some(5)).unwrap();
        assert_eq!(s.mode, 5);
        assert_eq!(s.ordinate, Some(1.0));
        assert!(!s.mode_tied);
        assert!((s.pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(hstar_summary(&[], 9, None).is_err());
    }

    #[test]
    fn mode_ties_report_smallest() {
        let s = hstar_summary(&[3, 4, 4, 3, 1], 5, None).unwrap();
        assert_eq!(s.mode, 3);
        assert!(s.mode_tied);
    }

    #[test]
    fn reorder_hand_example() {
        let r = cusp_reorder_draws(&[vec![0.2, 0.9, 0.5]], &[vec![3.0, 7.0, 5.0]]).unwrap();
        assert_eq!(r.tau_sorted[0], vec![0.9, 0.5, 0.2]);
        assert_eq!(r.theta_star[0], vec![7.0, 5.0, 3.0]);
        let again = cusp_reorder_draws(&r.tau_sorted, &r.theta_star).unwrap();
        assert_eq!(again, r);
        assert!(matches!(cusp_reorder_draws(&[], &[]), Err(Error::Missing(_))));
    }

    #[test]
    fn box_rows_per_quantity() {
        let r = cusp_reorder_draws(&[vec![0.2, 0.9, 0.5], vec![0.1, 0.3, 0.8]], &[vec![1.0; 3], vec![2.0; 3]]).unwrap();
        let rows = cusp_box_stats(&r);
        assert_eq!(rows.iter().filter(|b| b.quantity == "pi").count(), 3);
        assert_eq!(rows.iter().filter(|b| b.quantity == "theta_star").count(), 3);
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert!((quantile(&v, 0.25) - 1.75).abs() < 1e-15);
    }

    #[test]
    fn mse_hand_cases() {
        let beta = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let s2 = DVector::from_vec(vec![1.0, 1.0]);
        let omega0 = implied_covariance(&beta, &s2);
        let exact = LoadingsDraw {
            iteration: 1,
            beta: beta.clone(),
            sigma2: s2.clone(),
        };
        assert_eq!(mse_omega(&[exact], &omega0).unwrap(), 0.0);
        // lower triangle off by (1, 1, 1)
        let shifted = omega0.map(|v| v - 1.0);
        let draw = LoadingsDraw {
            iteration: 1,
            beta,
            sigma2: s2,
        };
        assert!((mse_omega(&[draw], &shifted).unwrap() - 1.0).abs() < 1e-12);
        assert!(mse_omega(&[], &omega0).is_err());
    }

    #[test]
    fn ess_edge_cases() {
        assert_eq!(ess(&[2.0; 200]).unwrap(), 1.0);
        assert!(ess(&[1.0; 50]).is_err());
    }
}
