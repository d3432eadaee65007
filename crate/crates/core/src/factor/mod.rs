//! Gaussian factor model `y_t = beta f_t + eps_t`, synthetic scenarios, and
//! the conjugate full conditionals for loadings, idiosyncratic variances and
//! latent factors.

mod data;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::distributions::{inv_gamma_raw, standard_normal, Rng};
use crate::error::{Error, Result};
use crate::linalg;

pub use data::{
    load_dataset, load_truth, read_matrix_csv, save_dataset, write_matrix_csv, Dataset, Truth, DATA_FILE,
    TRUTH_FILE,
};

/// Largest identified factor dimension for `m` observed variables.
pub fn max_factors(m: usize) -> usize {
    m.saturating_sub(1) / 2
}

/// Number of candidate columns of the overfitting model.
pub fn overfit_columns(m: usize, h_cap: usize) -> usize {
    max_factors(m).min(h_cap)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    Dense,
    Sparse { zero_fraction: f64 },
}

impl Density {
    pub fn label(&self) -> &'static str {
        match self {
            Density::Dense => "dense",
            Density::Sparse { .. } => "sparse",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub m: usize,
    pub h0: usize,
    pub n: usize,
    pub density: Density,
}

impl ScenarioSpec {
    pub fn dense(m: usize, h0: usize, n: usize) -> Self {
        ScenarioSpec {
            m,
            h0,
            n,
            density: Density::Dense,
        }
    }

    /// 30% exact zeros in the true loadings.
    pub fn sparse(m: usize, h0: usize, n: usize) -> Self {
        ScenarioSpec {
            m,
            h0,
            n,
            density: Density::Sparse { zero_fraction: 0.3 },
        }
    }

    pub fn label(&self) -> String {
        format!("m{}_h{}_{}", self.m, self.h0, self.density.label())
    }

    pub fn validate(&self) -> Result<()> {
        if self.h0 > 0 && self.h0 >= max_factors(self.m) {
            return Err(Error::Parameter(format!(
                "H0 = {} must be below floor((m - 1) / 2) = {} for m = {}",
                self.h0,
                max_factors(self.m),
                self.m
            )));
        }
        if let Density::Sparse { zero_fraction } = self.density {
            if !(0.0..1.0).contains(&zero_fraction) {
                return Err(Error::Parameter(format!("zero fraction {zero_fraction} outside [0, 1)")));
            }
        }
        Ok(())
    }
}

/// Simulate a dataset with standard normal loadings, `Sigma0 = I` and
/// `f_t ~ N(0, I)`. Sparse scenarios zero out exactly
/// `floor(zero_fraction * m * H0)` loadings chosen uniformly at random.
pub fn simulate_dataset(rng: &mut Rng, spec: &ScenarioSpec) -> Result<Dataset> {
    spec.validate()?;
    let (m, h0, n) = (spec.m, spec.h0, spec.n);
    let mut beta = DMatrix::from_fn(m, h0, |_, _| standard_normal(rng));
    if let Density::Sparse { zero_fraction } = spec.density {
        let total = m * h0;
        let zeros = (zero_fraction * total as f64).floor() as usize;
        // partial Fisher–Yates over flat (column-major) positions
        let mut idx: Vec<usize> = (0..total).collect();
        for k in 0..zeros {
            let j = k + (rng.uniform() * (total - k) as f64) as usize;
            idx.swap(k, j.min(total - 1));
            beta.as_mut_slice()[idx[k]] = 0.0;
        }
    }
    let f = DMatrix::from_fn(n, h0, |_, _| standard_normal(rng));
    let eps = DMatrix::from_fn(n, m, |_, _| standard_normal(rng));
    let y = &f * beta.transpose() + eps;
    Ok(Dataset {
        y,
        truth: Some(Truth {
            beta,
            sigma2: DVector::from_element(m, 1.0),
        }),
    })
}

fn check_dims(y: &DMatrix<f64>, f: Option<&DMatrix<f64>>, beta: Option<&DMatrix<f64>>, sigma2: &DVector<f64>) -> Result<()> {
    let (n, m) = y.shape();
    if sigma2.len() != m {
        return Err(Error::Dimension(format!("sigma2 has length {} for m = {m}", sigma2.len())));
    }
    if let Some(f) = f {
        if f.nrows() != n {
            return Err(Error::Dimension(format!("factors have {} rows for n = {n}", f.nrows())));
        }
    }
    if let Some(b) = beta {
        if b.nrows() != m {
            return Err(Error::Dimension(format!("loadings have {} rows for m = {m}", b.nrows())));
        }
        if let Some(f) = f {
            if f.ncols() != b.ncols() {
                return Err(Error::Dimension("factors and loadings disagree on H".into()));
            }
        }
    }
    Ok(())
}

/// Draw all latent factors: `f_t ~ N(M beta' Sigma^-1 y_t, M)` with
/// `M = (I + beta' Sigma^-1 beta)^-1`, from one Cholesky of the `H x H` precision.
pub fn sample_factors(rng: &mut Rng, y: &DMatrix<f64>, beta: &DMatrix<f64>, sigma2: &DVector<f64>) -> Result<DMatrix<f64>> {
    check_dims(y, None, Some(beta), sigma2)?;
    let (n, h) = (y.nrows(), beta.ncols());
    let inv_sigma = sigma2.map(|s| 1.0 / s);
    // Sigma^-1 beta
    let sb = DMatrix::from_fn(beta.nrows(), h, |i, j| beta[(i, j)] * inv_sigma[i]);
    let mut precision = beta.transpose() * &sb;
    for j in 0..h {
        precision[(j, j)] += 1.0;
    }
    let chol = linalg::cholesky(precision, "factor precision")?;
    let l = chol.l();
    // beta' Sigma^-1 Y'  (H x n)
    let rhs = sb.transpose() * y.transpose();
    let w = linalg::solve_lower(&l, &rhs);
    let z = DMatrix::from_fn(h, n, |_, _| standard_normal(rng));
    let draws = linalg::solve_upper_transpose(&l, &(w + z));
    Ok(draws.transpose())
}

/// Unscaled row precision `F'F + diag(1 / (kappa theta_h))` shared by every row.
fn loading_precision(f: &DMatrix<f64>, kappa: f64, theta: &DVector<f64>) -> DMatrix<f64> {
    let mut q = f.transpose() * f;
    for (j, &t) in theta.iter().enumerate() {
        q[(j, j)] += 1.0 / (kappa * t);
    }
    q
}

/// Draw the loadings given the variances:
/// `beta_i ~ N(B_i F' y_i / sigma2_i, B_i)`, `B_i = (F'F / sigma2_i + D_i^-1)^-1`,
/// `D_i = sigma2_i kappa diag(theta)`.
///
/// Since `B_i = sigma2_i (F'F + diag(1/(kappa theta)))^-1`, one Cholesky serves all rows.
pub fn sample_loadings(
    rng: &mut Rng,
    y: &DMatrix<f64>,
    f: &DMatrix<f64>,
    sigma2: &DVector<f64>,
    kappa: f64,
    theta: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    check_dims(y, Some(f), None, sigma2)?;
    if theta.len() != f.ncols() {
        return Err(Error::Dimension("theta and factors disagree on H".into()));
    }
    let chol = linalg::cholesky(loading_precision(f, kappa, theta), "loading precision")?;
    let l = chol.l();
    let w = linalg::solve_lower(&l, &(f.transpose() * y));
    let (m, h) = (y.ncols(), f.ncols());
    let z = DMatrix::from_fn(h, m, |_, i| sigma2[i].sqrt() * standard_normal(rng));
    Ok(linalg::solve_upper_transpose(&l, &(w + z)).transpose())
}

/// `sigma2_i ~ InvGamma(c + n/2 + H/2, b + SSR_i / 2 + sum_h beta_ih^2 / (2 kappa theta_h))`.
#[allow(clippy::too_many_arguments)]
pub fn sample_idiosyncratic(
    rng: &mut Rng,
    y: &DMatrix<f64>,
    f: &DMatrix<f64>,
    beta: &DMatrix<f64>,
    kappa: f64,
    theta: &DVector<f64>,
    c_sigma: f64,
    b_sigma: f64,
) -> Result<DVector<f64>> {
    check_dims(y, Some(f), Some(beta), &DVector::zeros(y.ncols()))?;
    let (n, m, h) = (y.nrows(), y.ncols(), beta.ncols());
    let resid = y - f * beta.transpose();
    Ok(DVector::from_fn(m, |i, _| {
        let ssr = resid.column(i).norm_squared();
        let pen: f64 = (0..h).map(|j| beta[(i, j)].powi(2) / (kappa * theta[j])).sum();
        inv_gamma_raw(
            rng,
            c_sigma + 0.5 * n as f64 + 0.5 * h as f64,
            b_sigma + 0.5 * ssr + 0.5 * pen,
        )
    }))
}

/// Joint draw of `(beta, sigma2)` given factors and shrinkage parameters:
/// `sigma2_i` from its law with `beta_i` integrated out, then `beta_i | sigma2_i`.
#[allow(clippy::too_many_arguments)]
pub fn sample_loadings_and_variances(
    rng: &mut Rng,
    y: &DMatrix<f64>,
    f: &DMatrix<f64>,
    kappa: f64,
    theta: &DVector<f64>,
    c_sigma: f64,
    b_sigma: f64,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let (n, m) = y.shape();
    if f.nrows() != n || theta.len() != f.ncols() {
        return Err(Error::Dimension("factors, data and theta disagree".into()));
    }
    let h = f.ncols();
    let chol = linalg::cholesky(loading_precision(f, kappa, theta), "loading precision")?;
    let l = chol.l();
    let w = linalg::solve_lower(&l, &(f.transpose() * y));
    let mut z = DMatrix::zeros(h, m);
    let mut sigma2 = DVector::zeros(m);
    for i in 0..m {
        let yy = y.column(i).norm_squared();
        let explained = w.column(i).norm_squared();
        let rate = b_sigma + 0.5 * (yy - explained).max(0.0);
        let s2 = inv_gamma_raw(rng, c_sigma + 0.5 * n as f64, rate);
        sigma2[i] = s2;
        let sd = s2.sqrt();
        for j in 0..h {
            z[(j, i)] = w[(j, i)] + sd * standard_normal(rng);
        }
    }
    let beta = linalg::solve_upper_transpose(&l, &z).transpose();
    Ok((beta, sigma2))
}

/// `Omega = beta beta' + diag(sigma2)`.
pub fn implied_covariance(beta: &DMatrix<f64>, sigma2: &DVector<f64>) -> DMatrix<f64> {
    let mut omega = beta * beta.transpose();
    for (i, s) in sigma2.iter().enumerate() {
        omega[(i, i)] += s;
    }
    omega
}

/// `(log det Omega, ||Omega^-1||_F)` via the Woodbury identity, in `O(m H^2)`.
pub fn omega_functionals(beta: &DMatrix<f64>, sigma2: &DVector<f64>) -> Result<(f64, f64)> {
    let (m, h) = beta.shape();
    let inv_sigma = sigma2.map(|s| 1.0 / s);
    let sb = DMatrix::from_fn(m, h, |i, j| beta[(i, j)] * inv_sigma[i]);
    let mut p = beta.transpose() * &sb;
    for j in 0..h {
        p[(j, j)] += 1.0;
    }
    let chol = linalg::cholesky(p, "I + beta' Sigma^-1 beta")?;
    let l = chol.l();
    let log_det = sigma2.iter().map(|s| s.ln()).sum::<f64>() + 2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
    // Omega^-1 = Sigma^-1 - G G' with G = Sigma^-1 beta L^-T
    let g = linalg::solve_lower(&l, &sb.transpose()).transpose();
    let gtg = g.transpose() * &g;
    let mut frob2 = gtg.norm_squared();
    for i in 0..m {
        let gi = g.row(i).norm_squared();
        frob2 += inv_sigma[i] * inv_sigma[i] - 2.0 * inv_sigma[i] * gi;
    }
    Ok((log_det, frob2.max(0.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_validation() {
        assert!(ScenarioSpec::dense(20, 5, 100).validate().is_ok());
        assert!(ScenarioSpec::dense(20, 9, 100).validate().is_err());
        assert!(ScenarioSpec::dense(20, 0, 100).validate().is_ok());
        assert_eq!(overfit_columns(20, 30), 9);
        assert_eq!(overfit_columns(50, 30), 24);
        assert_eq!(overfit_columns(100, 30), 30);
    }

    #[test]
    fn sparse_zero_count_is_exact() {
        let mut rng = Rng::new(41, 0);
        let d = simulate_dataset(&mut rng, &ScenarioSpec::sparse(50, 10, 100)).unwrap();
        let beta = &d.truth.as_ref().unwrap().beta;
        assert_eq!(beta.iter().filter(|&&b| b == 0.0).count(), 150);
    }

    #[test]
    fn no_factor_scenario_is_white_noise() {
        let mut rng = Rng::new(42, 0);
        let d = simulate_dataset(&mut rng, &ScenarioSpec::dense(5, 0, 20_000)).unwrap();
        let cov = d.y.transpose() * &d.y / 20_000.0;
        for i in 0..5 {
            for j in 0..5 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((cov[(i, j)] - target).abs() < 0.05);
            }
        }
    }

    #[test]
    fn implied_covariance_hand_example() {
        let beta = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let s = DVector::from_vec(vec![1.0, 1.0]);
        assert_eq!(implied_covariance(&beta, &s), DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]));
        let zero = DMatrix::zeros(2, 3);
        assert_eq!(implied_covariance(&zero, &s), DMatrix::identity(2, 2));
    }

    #[test]
    fn omega_functionals_match_dense() {
        let mut rng = Rng::new(43, 0);
        let beta = DMatrix::from_fn(7, 3, |_, _| standard_normal(&mut rng));
        let s = DVector::from_fn(7, |_, _| 0.5 + rng.uniform());
        let omega = implied_covariance(&beta, &s);
        let chol = omega.clone().cholesky().unwrap();
        let ld = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let inv = chol.inverse();
        let (a, b) = omega_functionals(&beta, &s).unwrap();
        assert!((a - ld).abs() < 1e-10);
        assert!((b - inv.norm()).abs() < 1e-10);
    }

    #[test]
    fn scalar_factor_posterior() {
        // m = H = 1, beta = 1, sigma2 = 1, y = 2 -> N(1, 1/2)
        let mut rng = Rng::new(44, 0);
        let y = DMatrix::from_element(1, 1, 2.0);
        let beta = DMatrix::from_element(1, 1, 1.0);
        let s = DVector::from_element(1, 1.0);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_factors(&mut rng, &y, &beta, &s).unwrap()[(0, 0)]).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 3.0 * (0.5 / n as f64).sqrt());
        assert!((var - 0.5).abs() < 0.01);
    }

    #[test]
    fn zero_loadings_give_prior_factors() {
        let mut rng = Rng::new(45, 0);
        let y = DMatrix::from_fn(50_000, 3, |_, _| standard_normal(&mut rng));
        let beta = DMatrix::zeros(3, 2);
        let s = DVector::from_element(3, 1.0);
        let f = sample_factors(&mut rng, &y, &beta, &s).unwrap();
        for col in f.column_iter() {
            assert!(col.mean().abs() < 0.02);
            assert!((col.norm_squared() / 50_000.0 - 1.0).abs() < 0.03);
        }
    }

    #[test]
    fn loadings_prior_recovery_without_data() {
        let mut rng = Rng::new(46, 0);
        let y = DMatrix::zeros(0, 2);
        let f = DMatrix::zeros(0, 2);
        let s = DVector::from_vec(vec![0.5, 2.0]);
        let theta = DVector::from_vec(vec![1.5, 0.1]);
        let kappa = 0.8;
        let n = 10_000;
        let mut sums = DMatrix::zeros(2, 2);
        for _ in 0..n {
            let b = sample_loadings(&mut rng, &y, &f, &s, kappa, &theta).unwrap();
            sums += b.map(|v| v * v);
        }
        for i in 0..2 {
            for j in 0..2 {
                let v = kappa * theta[j] * s[i];
                let est = sums[(i, j)] / n as f64;
                // var of beta^2 is 2 v^2
                assert!((est - v).abs() < 3.0 * (2.0 * v * v / n as f64).sqrt(), "{est} vs {v}");
            }
        }
    }

    #[test]
    fn loadings_concentrate_at_ols() {
        let mut rng = Rng::new(47, 0);
        let n = 20_000;
        let f = DMatrix::from_fn(n, 1, |_, _| standard_normal(&mut rng));
        let y = DMatrix::from_fn(n, 1, |t, _| 0.7 * f[(t, 0)] + 0.3 * standard_normal(&mut rng));
        let ols = (f.column(0).dot(&y.column(0))) / f.column(0).norm_squared();
        let s = DVector::from_element(1, 0.09);
        let b = sample_loadings(&mut rng, &y, &f, &s, 1.0, &DVector::from_element(1, 1.0)).unwrap();
        assert!((b[(0, 0)] - ols).abs() < 0.01);
    }

    #[test]
    fn perfect_fit_variance_law() {
        // residuals zero and beta zero: InvGamma(c + n/2 + H/2, b)
        let mut rng = Rng::new(48, 0);
        let n = 4;
        let y = DMatrix::zeros(n, 1);
        let f = DMatrix::from_element(n, 2, 1.0);
        let beta = DMatrix::zeros(1, 2);
        let theta = DVector::from_element(2, 1.0);
        let shape: f64 = 2.5 + 2.0 + 1.0;
        let draws: Vec<f64> = (0..100_000)
            .map(|_| sample_idiosyncratic(&mut rng, &y, &f, &beta, 1.0, &theta, 2.5, 1.5).unwrap()[0])
            .collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let target = 1.5 / (shape - 1.0);
        let sd = target / (shape - 2.0).sqrt();
        assert!((mean - target).abs() < 3.0 * sd / (draws.len() as f64).sqrt());
    }

    #[test]
    fn dimension_errors() {
        let mut rng = Rng::new(49, 0);
        let y = DMatrix::zeros(3, 2);
        let beta = DMatrix::zeros(3, 1);
        let s = DVector::from_element(2, 1.0);
        assert!(matches!(sample_factors(&mut rng, &y, &beta, &s), Err(Error::Dimension(_))));
    }
}
