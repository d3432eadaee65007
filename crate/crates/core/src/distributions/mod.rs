//! Random variate generation and densities for every law the samplers use.
//!
//! All randomness in the crate flows through [`Rng`]. Parameter structs
//! validate on construction; the `*_raw` helpers skip validation and are
//! meant for inner loops where the arguments are already known to be valid.

mod density;
mod gig;
mod rng;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub use density::{f_density, ln_f_density, mvt_logdensity, normal_logdensity};
pub use gig::{sample_gig, sample_log_concave};
pub use rng::{derive_stream, tag_word, Rng};

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be positive and finite, got {value}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaParams {
    a: f64,
    b: f64,
}

impl BetaParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        check_positive("beta shape a", a)?;
        check_positive("beta shape b", b)?;
        Ok(BetaParams { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    pub fn variance(&self) -> f64 {
        let s = self.a + self.b;
        self.a * self.b / (s * s * (s + 1.0))
    }
}

/// Gamma law in the shape/rate parameterization (mean `shape / rate`).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GammaParams {
    shape: f64,
    rate: f64,
}

impl GammaParams {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        check_positive("gamma shape", shape)?;
        check_positive("gamma rate", rate)?;
        Ok(GammaParams { shape, rate })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn variance(&self) -> f64 {
        self.shape / (self.rate * self.rate)
    }

    pub fn ln_pdf_unnormalized(&self, x: f64) -> f64 {
        (self.shape - 1.0) * x.ln() - self.rate * x
    }
}

/// Inverse gamma law in the shape/scale parameterization (mean `scale / (shape - 1)`).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InvGammaParams {
    shape: f64,
    scale: f64,
}

impl InvGammaParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        check_positive("inverse gamma shape", shape)?;
        check_positive("inverse gamma scale", scale)?;
        Ok(InvGammaParams { shape, scale })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Infinite for `shape <= 1`.
    pub fn mean(&self) -> f64 {
        if self.shape > 1.0 {
            self.scale / (self.shape - 1.0)
        } else {
            f64::INFINITY
        }
    }

    pub fn variance(&self) -> f64 {
        if self.shape > 2.0 {
            let s1 = self.shape - 1.0;
            self.scale * self.scale / (s1 * s1 * (self.shape - 2.0))
        } else {
            f64::INFINITY
        }
    }
}

/// Scaled F law used for the spike and slab of the column variances:
/// `theta / scale ~ F(2a, 2c)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FParams {
    a: f64,
    c: f64,
    scale: f64,
    ln_norm: f64,
}

impl FParams {
    pub fn new(a: f64, c: f64, scale: f64) -> Result<Self> {
        check_positive("F shape a", a)?;
        check_positive("F shape c", c)?;
        check_positive("F scale", scale)?;
        Ok(FParams {
            a,
            c,
            scale,
            ln_norm: density::ln_f_norm(a, c),
        })
    }

    pub fn slab(a: f64, c: f64) -> Result<Self> {
        FParams::new(a, c, 1.0)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        check_positive("F scale", scale)?;
        Ok(FParams { scale, ..*self })
    }

    /// Log density at `theta > 0`; no domain check.
    pub fn ln_pdf(&self, theta: f64) -> f64 {
        density::ln_f_density_with_norm(theta / self.scale, self.a, self.c, self.ln_norm)
            - self.scale.ln()
    }

    /// Infinite for `c <= 1`.
    pub fn mean(&self) -> f64 {
        if self.c > 1.0 {
            self.scale * self.c / (self.c - 1.0)
        } else {
            f64::INFINITY
        }
    }
}

/// Log of a Gamma(shape, 1) variate.
///
/// Marsaglia–Tsang for `shape >= 1`; for `shape < 1` the draw is boosted to
/// `shape + 1` and corrected by `u^(1/shape)`, carried out in log space so
/// tiny shapes (e.g. `alpha / H`) do not underflow to zero.
pub fn ln_gamma_variate(rng: &mut Rng, shape: f64) -> f64 {
    if shape < 1.0 {
        let boosted = ln_gamma_variate(rng, shape + 1.0);
        return boosted + rng.uniform().ln() / shape;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = StandardNormal.sample(rng);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.uniform();
        if u.ln() < 0.5 * x * x + d - d * v + d * v.ln() {
            return d.ln() + v.ln();
        }
    }
}

pub fn gamma_raw(rng: &mut Rng, shape: f64, rate: f64) -> f64 {
    ln_gamma_variate(rng, shape).exp() / rate
}

pub fn inv_gamma_raw(rng: &mut Rng, shape: f64, scale: f64) -> f64 {
    scale * (-ln_gamma_variate(rng, shape)).exp()
}

/// Beta draw clamped into the open unit interval.
pub fn beta_raw(rng: &mut Rng, a: f64, b: f64) -> f64 {
    let lx = ln_gamma_variate(rng, a);
    let ly = ln_gamma_variate(rng, b);
    // x / (x + y) = 1 / (1 + exp(ly - lx))
    let v = 1.0 / (1.0 + (ly - lx).exp());
    v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
}

pub fn standard_normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn sample_beta(rng: &mut Rng, p: &BetaParams) -> f64 {
    beta_raw(rng, p.a, p.b)
}

pub fn sample_gamma(rng: &mut Rng, p: &GammaParams) -> f64 {
    gamma_raw(rng, p.shape, p.rate)
}

pub fn sample_inverse_gamma(rng: &mut Rng, p: &InvGammaParams) -> f64 {
    inv_gamma_raw(rng, p.shape, p.scale)
}

/// Draw from the gamma-mixed inverse gamma representation of the scaled F law.
///
/// Returns `(theta, b)` with `b ~ Gamma(a, a/c)` and
/// `theta | b ~ InvGamma(c, scale * b)`, so that `theta / scale ~ F(2a, 2c)`.
pub fn sample_f_mixture(rng: &mut Rng, p: &FParams) -> (f64, f64) {
    let b = gamma_raw(rng, p.a, p.a / p.c);
    let theta = inv_gamma_raw(rng, p.c, p.scale * b);
    (theta, b)
}

/// Draw `mean + L z` with `z` standard normal, where `chol` is lower triangular.
pub fn sample_mvn(rng: &mut Rng, mean: &DVector<f64>, chol: &DMatrix<f64>) -> Result<DVector<f64>> {
    let k = mean.len();
    if chol.nrows() != k || chol.ncols() != k {
        return Err(Error::Dimension(format!(
            "mean has length {k} but factor is {}x{}",
            chol.nrows(),
            chol.ncols()
        )));
    }
    if let Some(i) = (0..k).find(|&i| !(chol[(i, i)] > 0.0)) {
        return Err(Error::Factorization(format!(
            "diagonal entry {i} of the factor is {}",
            chol[(i, i)]
        )));
    }
    let z = DVector::from_fn(k, |_, _| standard_normal(rng));
    Ok(mean + chol.lower_triangle() * z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    fn within(xs: &[f64], target: f64, k: f64) {
        let (m, se) = mean_se(xs);
        assert!((m - target).abs() < k * se, "mean {m} vs {target} (se {se})");
    }

    #[test]
    fn rejects_bad_params() {
        assert!(BetaParams::new(0.0, 1.0).is_err());
        assert!(GammaParams::new(1.0, -2.0).is_err());
        assert!(InvGammaParams::new(f64::NAN, 1.0).is_err());
        assert!(FParams::new(2.5, 2.5, 0.0).is_err());
    }

    #[test]
    fn beta_uniform_mean() {
        let mut rng = Rng::new(1, 0);
        let p = BetaParams::new(1.0, 1.0).unwrap();
        let xs: Vec<f64> = (0..100_000).map(|_| sample_beta(&mut rng, &p)).collect();
        within(&xs, 0.5, 3.0);
    }

    #[test]
    fn beta_small_shape_moments() {
        // Beta(alpha/H, 1) with alpha = 5, H = 10: mean 1/3
        let mut rng = Rng::new(2, 0);
        let p = BetaParams::new(0.5, 1.0).unwrap();
        let xs: Vec<f64> = (0..100_000).map(|_| sample_beta(&mut rng, &p)).collect();
        within(&xs, 1.0 / 3.0, 3.0);
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        within(&sq, p.variance() + p.mean().powi(2), 3.0);
    }

    #[test]
    fn beta_matches_inverse_cdf_route() {
        // U^(H/alpha) ~ Beta(alpha/H, 1)
        let mut rng = Rng::new(3, 0);
        let n = 100_000;
        let direct: Vec<f64> = (0..n).map(|_| beta_raw(&mut rng, 0.5, 1.0)).collect();
        let inverse: Vec<f64> = (0..n).map(|_| rng.uniform().powf(2.0)).collect();
        for k in 1..=2 {
            let a: Vec<f64> = direct.iter().map(|x| x.powi(k)).collect();
            let b: Vec<f64> = inverse.iter().map(|x| x.powi(k)).collect();
            let (ma, sa) = mean_se(&a);
            let (mb, sb) = mean_se(&b);
            assert!((ma - mb).abs() < 3.0 * (sa * sa + sb * sb).sqrt());
        }
    }

    #[test]
    fn gamma_moments() {
        let mut rng = Rng::new(4, 0);
        let p = GammaParams::new(6.0, 2.0).unwrap();
        let xs: Vec<f64> = (0..100_000).map(|_| sample_gamma(&mut rng, &p)).collect();
        within(&xs, 3.0, 3.0);
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        within(&sq, p.variance() + 9.0, 3.0);
    }

    #[test]
    fn gamma_tiny_shape_stays_positive() {
        let mut rng = Rng::new(5, 0);
        let p = GammaParams::new(0.3, 1.0).unwrap();
        let xs: Vec<f64> = (0..100_000).map(|_| sample_gamma(&mut rng, &p)).collect();
        assert!(xs.iter().all(|&x| x >= 0.0));
        within(&xs, 0.3, 3.0);
        let ln = ln_gamma_variate(&mut rng, 1e-4);
        assert!(ln.is_finite());
    }

    #[test]
    fn inverse_gamma_mean_is_one_at_defaults() {
        let mut rng = Rng::new(6, 0);
        let p = InvGammaParams::new(2.5, 1.5).unwrap();
        assert!((p.mean() - 1.0).abs() < 1e-15);
        let xs: Vec<f64> = (0..100_000).map(|_| sample_inverse_gamma(&mut rng, &p)).collect();
        within(&xs, 1.0, 3.0);
    }

    #[test]
    fn inverse_gamma_degenerate_limit() {
        let mut rng = Rng::new(7, 0);
        let shape = 1e7;
        let p = InvGammaParams::new(shape, shape * 0.7).unwrap();
        for _ in 0..100 {
            let x = sample_inverse_gamma(&mut rng, &p);
            assert!((x - 0.7).abs() < 1e-2);
        }
    }

    #[test]
    fn f_mixture_scaling() {
        let slab = FParams::new(2.5, 2.5, 1.0).unwrap();
        let spike = slab.with_scale(0.01).unwrap();
        let mut r1 = Rng::new(8, 0);
        let mut r2 = Rng::new(8, 0);
        for _ in 0..1000 {
            let (t1, b1) = sample_f_mixture(&mut r1, &slab);
            let (t2, b2) = sample_f_mixture(&mut r2, &spike);
            assert_eq!(b1, b2);
            assert!((t2 - 0.01 * t1).abs() <= 1e-14 * t1.max(1.0));
        }
    }

    #[test]
    fn f_mixture_large_a_limit() {
        // a -> infinity: b -> c
        let p = FParams::new(1e8, 2.5, 1.0).unwrap();
        let mut rng = Rng::new(9, 0);
        for _ in 0..100 {
            let (_, b) = sample_f_mixture(&mut rng, &p);
            assert!((b - 2.5).abs() < 1e-2);
        }
    }

    #[test]
    fn mvn_identity_variances() {
        let mut rng = Rng::new(10, 0);
        let mean = DVector::zeros(3);
        let chol = DMatrix::identity(3, 3);
        let draws: Vec<DVector<f64>> =
            (0..100_000).map(|_| sample_mvn(&mut rng, &mean, &chol).unwrap()).collect();
        for j in 0..3 {
            let sq: Vec<f64> = draws.iter().map(|d| d[j] * d[j]).collect();
            within(&sq, 1.0, 3.0);
        }
    }

    #[test]
    fn mvn_covariance_2x2() {
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let chol = cov.clone().cholesky().unwrap().l();
        let mut rng = Rng::new(11, 0);
        let mean = DVector::from_vec(vec![1.0, -1.0]);
        let draws: Vec<DVector<f64>> =
            (0..100_000).map(|_| sample_mvn(&mut rng, &mean, &chol).unwrap()).collect();
        for (i, j) in [(0, 0), (0, 1), (1, 1)] {
            let prods: Vec<f64> = draws
                .iter()
                .map(|d| (d[i] - mean[i]) * (d[j] - mean[j]))
                .collect();
            within(&prods, cov[(i, j)], 3.0);
        }
    }

    #[test]
    fn mvn_is_deterministic_and_checks_factor() {
        let mean = DVector::from_vec(vec![0.5, 0.5]);
        let chol = DMatrix::identity(2, 2);
        let a = sample_mvn(&mut Rng::new(12, 4), &mean, &chol).unwrap();
        let b = sample_mvn(&mut Rng::new(12, 4), &mean, &chol).unwrap();
        assert_eq!(a, b);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            sample_mvn(&mut Rng::new(1, 1), &mean, &bad),
            Err(Error::Factorization(_))
        ));
    }
}
